//! RIFF/WAVE decoding into normalized mono buffers, plus a small writer used
//! for round-trips and synthetic test material.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("audio contains zero frames")]
    EmptyAudio,
}

/// Decoded mono PCM audio.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    source_path: String,
}

impl AudioBuffer {
    /// Builds a buffer from already-normalized samples. Values are clamped
    /// into [-1, 1] and non-finite values become 0.
    pub fn new(
        samples: Vec<f64>,
        sample_rate_hz: u32,
        source_path: impl Into<String>,
    ) -> Result<Self, AudioError> {
        if sample_rate_hz == 0 {
            return Err(AudioError::CorruptHeader("sample rate is zero".into()));
        }
        if samples.is_empty() {
            return Err(AudioError::EmptyAudio);
        }
        let samples = samples.into_iter().map(clamp_unit).collect();
        Ok(AudioBuffer {
            samples,
            sample_rate_hz,
            source_path: source_path.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

fn clamp_unit(s: f64) -> f64 {
    if s.is_nan() {
        0.0
    } else {
        s.clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Int,
    Float,
}

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    encoding: Encoding,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits: u16,
}

/// Reads and decodes a WAV file from disk.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioError> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| AudioError::Io {
        path: label.clone(),
        source,
    })?;
    decode_wav_bytes(&bytes, label)
}

/// Decodes an in-memory RIFF/WAVE image.
pub fn decode_wav_bytes(bytes: &[u8], source_path: impl Into<String>) -> Result<AudioBuffer, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::CorruptHeader("missing RIFF/WAVE signature".into()));
    }
    let riff_size = le_u32(&bytes[4..8]) as usize;
    if riff_size + 8 > bytes.len() {
        return Err(AudioError::CorruptHeader(format!(
            "RIFF size {} exceeds file length {}",
            riff_size,
            bytes.len()
        )));
    }
    let body = &bytes[12..riff_size + 8];

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 0usize;
    while pos + 8 <= body.len() {
        let id = &body[pos..pos + 4];
        let size = le_u32(&body[pos + 4..pos + 8]) as usize;
        let start = pos + 8;
        let end = start
            .checked_add(size)
            .filter(|&e| e <= body.len())
            .ok_or_else(|| {
                AudioError::CorruptHeader(format!(
                    "chunk {:?} of {} bytes overruns the RIFF body",
                    String::from_utf8_lossy(id),
                    size
                ))
            })?;
        match id {
            b"fmt " => fmt = Some(parse_fmt(&body[start..end])?),
            b"data" => data = Some(&body[start..end]),
            _ => {}
        }
        // chunks are word aligned
        pos = end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| AudioError::CorruptHeader("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::CorruptHeader("no data chunk".into()))?;
    let block = fmt.block_align as usize;
    if data.len() % block != 0 {
        return Err(AudioError::CorruptHeader(format!(
            "data size {} is not a multiple of block align {}",
            data.len(),
            block
        )));
    }
    let frames = data.len() / block;
    if frames == 0 {
        return Err(AudioError::EmptyAudio);
    }

    let width = (fmt.bits / 8) as usize;
    let channels = fmt.channels as usize;
    let mut samples = Vec::with_capacity(frames);
    for frame in data.chunks_exact(block) {
        let sum: f64 = frame
            .chunks_exact(width)
            .take(channels)
            .map(|raw| decode_sample(raw, fmt.encoding))
            .sum();
        samples.push(clamp_unit(sum / channels as f64));
    }
    AudioBuffer::new(samples, fmt.sample_rate, source_path)
}

fn parse_fmt(chunk: &[u8]) -> Result<FmtChunk, AudioError> {
    if chunk.len() < 16 {
        return Err(AudioError::CorruptHeader(format!("fmt chunk is {} bytes", chunk.len())));
    }
    let mut tag = le_u16(&chunk[0..2]);
    let channels = le_u16(&chunk[2..4]);
    let sample_rate = le_u32(&chunk[4..8]);
    let block_align = le_u16(&chunk[12..14]);
    let bits = le_u16(&chunk[14..16]);
    if tag == FORMAT_EXTENSIBLE {
        if chunk.len() < 26 {
            return Err(AudioError::CorruptHeader("truncated WAVE_FORMAT_EXTENSIBLE".into()));
        }
        // first two bytes of the sub-format GUID carry the real format code
        tag = le_u16(&chunk[24..26]);
    }
    let encoding = match tag {
        FORMAT_PCM => Encoding::Int,
        FORMAT_IEEE_FLOAT => Encoding::Float,
        other => {
            return Err(AudioError::UnsupportedFormat(format!(
                "format code 0x{other:04x} (only PCM and IEEE float are decoded)"
            )))
        }
    };
    match (encoding, bits) {
        (Encoding::Int, 16 | 24 | 32) | (Encoding::Float, 32 | 64) => {}
        _ => {
            return Err(AudioError::UnsupportedFormat(format!(
                "{bits}-bit {} samples",
                if encoding == Encoding::Int { "integer" } else { "float" }
            )))
        }
    }
    if !(1..=2).contains(&channels) {
        return Err(AudioError::UnsupportedFormat(format!("{channels} channels")));
    }
    if sample_rate == 0 {
        return Err(AudioError::CorruptHeader("sample rate is zero".into()));
    }
    if block_align as usize != channels as usize * bits as usize / 8 {
        return Err(AudioError::CorruptHeader(format!(
            "block align {block_align} inconsistent with {channels} x {bits}-bit"
        )));
    }
    Ok(FmtChunk {
        encoding,
        channels,
        sample_rate,
        block_align,
        bits,
    })
}

fn decode_sample(raw: &[u8], encoding: Encoding) -> f64 {
    match (encoding, raw.len()) {
        (Encoding::Int, 2) => i16::from_le_bytes([raw[0], raw[1]]) as f64 / 32768.0,
        (Encoding::Int, 3) => {
            // sign-extend via the high byte
            let v = i32::from_le_bytes([0, raw[0], raw[1], raw[2]]) >> 8;
            v as f64 / 8_388_608.0
        }
        (Encoding::Int, 4) => i32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64 / 2_147_483_648.0,
        (Encoding::Float, 4) => f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64,
        (Encoding::Float, 8) => f64::from_le_bytes(raw.try_into().expect("8-byte sample")),
        _ => unreachable!("sample width validated in parse_fmt"),
    }
}

fn le_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Sample encodings supported by [`encode_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Int16,
    Int24,
    Int32,
    Float32,
    Float64,
}

impl SampleFormat {
    fn bits(self) -> u16 {
        match self {
            SampleFormat::Int16 => 16,
            SampleFormat::Int24 => 24,
            SampleFormat::Int32 | SampleFormat::Float32 => 32,
            SampleFormat::Float64 => 64,
        }
    }

    fn tag(self) -> u16 {
        match self {
            SampleFormat::Float32 | SampleFormat::Float64 => FORMAT_IEEE_FLOAT,
            _ => FORMAT_PCM,
        }
    }
}

/// Encodes mono samples as a canonical 44-byte-header WAV image.
///
/// Integer formats round to nearest and saturate at the type's range.
pub fn encode_wav(samples: &[f64], sample_rate_hz: u32, format: SampleFormat) -> Vec<u8> {
    let bits = format.bits();
    let block = bits / 8;
    let data_len = samples.len() * block as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format.tag().to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(sample_rate_hz * block as u32).to_le_bytes());
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        match format {
            SampleFormat::Int16 => {
                let v = (s * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
                out.extend_from_slice(&v.to_le_bytes());
            }
            SampleFormat::Int24 => {
                let v = (s * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                out.extend_from_slice(&v.to_le_bytes()[0..3]);
            }
            SampleFormat::Int32 => {
                let v = (s * 2_147_483_648.0).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32;
                out.extend_from_slice(&v.to_le_bytes());
            }
            SampleFormat::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
            SampleFormat::Float64 => out.extend_from_slice(&s.to_le_bytes()),
        }
    }
    out
}

pub fn write_wav(
    path: impl AsRef<Path>,
    samples: &[f64],
    sample_rate_hz: u32,
    format: SampleFormat,
) -> io::Result<()> {
    fs::write(path, encode_wav(samples, sample_rate_hz, format))
}
