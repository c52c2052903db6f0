//! Files written by an independent encoder decode to the expected samples.

use hound::{SampleFormat, WavSpec, WavWriter};
use soundnet_core::audio_io::decode_wav;

fn spec(channels: u16, bits: u16, format: SampleFormat) -> WavSpec {
    WavSpec { channels, sample_rate: 22_050, bits_per_sample: bits, sample_format: format }
}

fn ramp(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 / n as f64) * 1.8 - 0.9).collect()
}

#[test]
fn integer_depths_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let xs = ramp(1000);
    for bits in [16u16, 24, 32] {
        let path = dir.path().join(format!("i{bits}.wav"));
        let full = (1i64 << (bits - 1)) as f64;
        let mut w = WavWriter::create(&path, spec(1, bits, SampleFormat::Int)).unwrap();
        for &x in &xs {
            w.write_sample((x * full).round() as i32).unwrap();
        }
        w.finalize().unwrap();
        let audio = decode_wav(&path).unwrap();
        assert_eq!(audio.sample_rate_hz(), 22_050);
        assert_eq!(audio.samples().len(), xs.len());
        let tol = 1.0 / full;
        for (a, b) in audio.samples().iter().zip(&xs) {
            assert!((a - b).abs() <= tol, "{bits}-bit: {a} vs {b}");
            assert!((-1.0..=1.0).contains(a));
        }
    }
}

#[test]
fn extreme_codes_stay_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edge24.wav");
    let mut w = WavWriter::create(&path, spec(1, 24, SampleFormat::Int)).unwrap();
    for v in [-(1 << 23), (1 << 23) - 1, 0] {
        w.write_sample(v).unwrap();
    }
    w.finalize().unwrap();
    let s = decode_wav(&path).unwrap().samples().to_vec();
    assert_eq!(s[0], -1.0);
    assert!(s[1] < 1.0 && s[1] > 0.9999);
    assert_eq!(s[2], 0.0);
}

#[test]
fn stereo_float_is_averaged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("st.wav");
    let mut w = WavWriter::create(&path, spec(2, 32, SampleFormat::Float)).unwrap();
    for i in 0..500 {
        w.write_sample(0.5f32).unwrap();
        w.write_sample(if i % 2 == 0 { -0.25f32 } else { 0.25 }).unwrap();
    }
    w.finalize().unwrap();
    let audio = decode_wav(&path).unwrap();
    assert_eq!(audio.samples().len(), 500);
    assert_eq!(audio.samples()[0], 0.125);
    assert_eq!(audio.samples()[1], 0.375);
}

#[test]
fn truncated_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.wav");
    let mut w = WavWriter::create(&path, spec(1, 16, SampleFormat::Int)).unwrap();
    for i in 0..100 {
        w.write_sample(i as i16).unwrap();
    }
    w.finalize().unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 51]).unwrap();
    assert!(decode_wav(&path).is_err());
}
