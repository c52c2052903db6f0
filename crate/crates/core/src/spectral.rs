//! Discrete Fourier transform and extraction of the ordered sequence of
//! frequency components.
//!
//! Two extraction modes exist. [`extract_sequence_full`] reads peaks off one
//! transform of the whole signal, so the sequence is ordered by frequency.
//! [`extract_sequence_stft`] frames the signal with a Hann window and emits
//! per-frame peaks in time order.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioBuffer;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("cannot transform an empty signal")]
    EmptyInput,
    #[error("invalid peak parameters: {0}")]
    InvalidParams(String),
}

/// Full complex DFT of a (zero-padded) real signal.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    pub sample_rate_hz: u32,
}

impl Spectrum {
    pub fn n_fft(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_hz(&self, k: usize) -> f64 {
        bin_frequency(k, self.sample_rate_hz, self.bins.len())
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }
}

fn bin_frequency(k: usize, sample_rate_hz: u32, n_fft: usize) -> f64 {
    k as f64 * sample_rate_hz as f64 / n_fft as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMode {
    #[serde(rename = "full")]
    FullSpectrum,
    Stft,
}

impl fmt::Display for ExtractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractionMode::FullSpectrum => "full",
            ExtractionMode::Stft => "stft",
        })
    }
}

/// Peak-picking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakParams {
    /// STFT frame length in samples; must be a power of two.
    pub frame_size: usize,
    pub hop: usize,
    /// Maximum peaks kept per STFT frame.
    pub top_k: usize,
    /// Fraction of the frame (or spectrum) maximum a peak must reach.
    pub rel_threshold: f64,
    /// Floor in dB relative to the global maximum magnitude.
    pub floor_db: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            frame_size: 4096,
            hop: 2048,
            top_k: 5,
            rel_threshold: 0.1,
            floor_db: -60.0,
        }
    }
}

impl PeakParams {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |msg: String| Err(SpectralError::InvalidParams(msg));
        if self.frame_size < 2 || !self.frame_size.is_power_of_two() {
            return bad(format!("frame_size {} is not a power of two >= 2", self.frame_size));
        }
        if self.hop == 0 || self.hop > self.frame_size {
            return bad(format!("hop {} must be in 1..={}", self.hop, self.frame_size));
        }
        if self.top_k == 0 {
            return bad("top_k must be positive".into());
        }
        if !(self.rel_threshold > 0.0 && self.rel_threshold <= 1.0) {
            return bad(format!("rel_threshold {} not in (0, 1]", self.rel_threshold));
        }
        if self.floor_db.is_nan() || self.floor_db > 0.0 {
            return bad(format!("floor_db {} must be <= 0", self.floor_db));
        }
        Ok(())
    }

    fn floor_factor(&self) -> f64 {
        10f64.powf(self.floor_db / 20.0)
    }
}

/// Ordered frequency components in Hz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySequence {
    pub values_hz: Vec<f64>,
    pub mode: ExtractionMode,
    pub params: PeakParams,
}

impl FrequencySequence {
    pub fn len(&self) -> usize {
        self.values_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_hz.is_empty()
    }
}

/// Full complex DFT. The input is zero-padded to the next power of two.
pub fn dft(samples: &[f64], sample_rate_hz: u32) -> Result<Spectrum, SpectralError> {
    if samples.is_empty() {
        return Err(SpectralError::EmptyInput);
    }
    let n = samples.len().next_power_of_two();
    let mut bins: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    bins.resize(n, Complex64::new(0.0, 0.0));
    fft_in_place(&mut bins);
    Ok(Spectrum { bins, sample_rate_hz })
}

/// Iterative radix-2 decimation-in-time FFT. `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    // Twiddles for the largest stage; smaller stages stride through them.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Indices k in [1, n/2) that are peaks of `mags`: rising into k, then flat
/// for any run of equal values, then falling. A plateau reports its lowest index.
fn local_maxima(mags: &[f64]) -> Vec<usize> {
    let half = mags.len() / 2;
    let mut peaks = Vec::new();
    let mut k = 1;
    while k < half {
        if mags[k] > mags[k - 1] {
            let mut j = k;
            while j + 1 < mags.len() && mags[j + 1] == mags[k] {
                j += 1;
            }
            if j + 1 < mags.len() && mags[j + 1] < mags[k] {
                peaks.push(k);
            }
            k = j + 1;
        } else {
            k += 1;
        }
    }
    peaks
}

fn max_in_band(mags: &[f64]) -> f64 {
    let half = mags.len() / 2;
    mags[1.min(half)..half].iter().copied().fold(0.0, f64::max)
}

/// Peaks of a whole-signal spectrum in ascending frequency.
pub fn extract_sequence_full(spectrum: &Spectrum, params: &PeakParams) -> FrequencySequence {
    let mags = spectrum.magnitudes();
    let max = max_in_band(&mags);
    let mut values_hz = Vec::new();
    if max > 0.0 {
        let cut = (params.rel_threshold * max).max(params.floor_factor() * max);
        values_hz = local_maxima(&mags)
            .into_iter()
            .filter(|&k| mags[k] >= cut)
            .map(|k| spectrum.bin_hz(k))
            .collect();
    }
    FrequencySequence {
        values_hz,
        mode: ExtractionMode::FullSpectrum,
        params: *params,
    }
}

/// Periodic Hann window.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

struct FramePeaks {
    max: f64,
    /// (bin, magnitude), descending magnitude, at most top_k entries.
    peaks: Vec<(usize, f64)>,
}

fn analyze_frame(frame: &[f64], window: &[f64], params: &PeakParams) -> FramePeaks {
    let mut buf: Vec<Complex64> = frame
        .iter()
        .zip(window)
        .map(|(&x, &w)| Complex64::new(x * w, 0.0))
        .collect();
    fft_in_place(&mut buf);
    let mags: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let max = max_in_band(&mags);
    if max <= 0.0 {
        return FramePeaks { max, peaks: Vec::new() };
    }
    let cut = params.rel_threshold * max;
    let mut peaks: Vec<(usize, f64)> = local_maxima(&mags)
        .into_iter()
        .filter(|&k| mags[k] >= cut)
        .map(|k| (k, mags[k]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    peaks.truncate(params.top_k);
    FramePeaks { max, peaks }
}

/// Number of full frames; a signal shorter than one frame gets one zero-padded frame.
pub fn frame_count(len: usize, params: &PeakParams) -> usize {
    if len <= params.frame_size {
        1
    } else {
        1 + (len - params.frame_size) / params.hop
    }
}

/// Time-ordered peak sequence from Hann-windowed frames.
///
/// Frames are analysed in parallel; the concatenation keeps frame order, so
/// output matches a sequential run exactly.
pub fn extract_sequence_stft(audio: &AudioBuffer, params: &PeakParams) -> FrequencySequence {
    let samples = audio.samples();
    let n = params.frame_size;
    let window = hann_window(n);
    let padded;
    let source: &[f64] = if samples.len() < n {
        padded = {
            let mut v = samples.to_vec();
            v.resize(n, 0.0);
            v
        };
        &padded
    } else {
        samples
    };
    let frames: Vec<FramePeaks> = (0..frame_count(samples.len(), params))
        .into_par_iter()
        .map(|i| {
            let start = i * params.hop;
            analyze_frame(&source[start..start + n], &window, params)
        })
        .collect();

    let global_max = frames.iter().map(|f| f.max).fold(0.0, f64::max);
    let floor = params.floor_factor() * global_max;
    let sr = audio.sample_rate_hz();
    let values_hz = if global_max > 0.0 {
        frames
            .iter()
            .flat_map(|f| f.peaks.iter())
            .filter(|&&(_, m)| m >= floor)
            .map(|&(k, _)| bin_frequency(k, sr, n))
            .collect()
    } else {
        Vec::new()
    };
    FrequencySequence {
        values_hz,
        mode: ExtractionMode::Stft,
        params: *params,
    }
}

/// Dispatches on `mode`.
pub fn extract_sequence(audio: &AudioBuffer, mode: ExtractionMode, params: &PeakParams) -> FrequencySequence {
    match mode {
        ExtractionMode::Stft => extract_sequence_stft(audio, params),
        ExtractionMode::FullSpectrum => {
            let spectrum = dft(audio.samples(), audio.sample_rate_hz()).expect("AudioBuffer is non-empty");
            extract_sequence_full(&spectrum, params)
        }
    }
}
