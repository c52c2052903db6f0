#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use soundnet_core::audio_io::{write_wav, SampleFormat};

pub const RATE: u32 = 44_100;

pub fn sine(freq: f64, secs: f64, rate: u32) -> Vec<f64> {
    let n = (secs * rate as f64).round() as usize;
    (0..n).map(|i| 0.8 * (2.0 * PI * freq * i as f64 / rate as f64).sin()).collect()
}

/// Quarter-second segments, each a chord of three partials whose
/// frequencies are `80 Hz + Exp(mean 400 Hz)`, capped below 4 kHz.
pub fn exponential_piece(seed: u64, secs: f64, rate: u32) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = Exp::new(1.0 / 400.0).unwrap();
    let seg = rate as usize / 4;
    let total = (secs * rate as f64) as usize;
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let partials: Vec<f64> = (0..3).map(|_| (80.0 + Distribution::<f64>::sample(&exp, &mut rng)).min(3999.0)).collect();
        let start = out.len();
        for i in 0..seg.min(total - start) {
            let t = (start + i) as f64 / rate as f64;
            let v: f64 = partials
                .iter()
                .enumerate()
                .map(|(k, f)| (2.0 * PI * f * t).sin() / (k + 1) as f64)
                .sum();
            out.push(0.45 * v);
        }
    }
    out
}

pub fn write(dir: &Path, name: &str, samples: &[f64]) -> PathBuf {
    let path = dir.join(name);
    write_wav(&path, samples, RATE, SampleFormat::Int16).unwrap();
    path
}

pub fn soundnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soundnet"))
        .args(args)
        .env_remove("SOUNDNET_OUT")
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Quarter-second notes drawn from MIDI 40..80, four harmonics each, over a
/// faint noise floor.
pub fn melody_piece(seed: u64, secs: f64, rate: u32) -> Vec<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seg = rate as usize / 4;
    let total = (secs * rate as f64) as usize;
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let midi: i32 = rng.gen_range(40..80);
        let f = 440.0 * 2f64.powf((midi - 69) as f64 / 12.0);
        let start = out.len();
        for i in 0..seg.min(total - start) {
            let t = (start + i) as f64 / rate as f64;
            let v: f64 = (1..=4).map(|h| (2.0 * PI * f * h as f64 * t).sin() / h as f64).sum();
            out.push(0.4 * v + 0.005 * rng.gen_range(-1.0..1.0));
        }
    }
    out
}
