//! Seeded oracle checks runnable from the command line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal, Pareto};
use serde::Serialize;

use crate::corpus::{average_ranks, spearman};
use crate::distfit::{fit_mle, DistFamily};
use crate::network::graph::Graph;
use crate::spectral::dft;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Deliberate corruption of one oracle comparison, to exercise the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Perturbs every FFT bin before comparing against the naive sum.
    Fft,
}

pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let ang = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                    Complex64::from_polar(v, ang)
                })
                .sum()
        })
        .collect()
}

fn check_fft(rng: &mut ChaCha8Rng, fault: Fault) -> CheckResult {
    let mut worst: f64 = 0.0;
    for &n in &[64usize, 256, 1024] {
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut fast = dft(&x, 1).expect("non-empty").bins;
            if fault == Fault::Fft {
                fast.iter_mut().for_each(|b| *b += Complex64::new(1e-3, 0.0));
            }
            let slow = naive_dft(&x);
            let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
            worst = worst.max(err);
        }
    }
    CheckResult {
        name: "fft_vs_naive_dft".into(),
        passed: worst < 1e-9,
        detail: format!("max relative error {worst:.3e}"),
    }
}

fn brute_force_clique(g: &Graph) -> usize {
    let n = g.node_count();
    (0u32..1 << n)
        .filter(|&mask| {
            let nodes: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            g.is_clique(&nodes)
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn check_clique(rng: &mut ChaCha8Rng) -> CheckResult {
    let trials = 50;
    let mut agree = 0;
    for _ in 0..trials {
        let mut g = Graph::new(12);
        for u in 0..12 {
            for v in u + 1..12 {
                if rng.gen_bool(0.5) {
                    g.add_edge(u, v);
                }
            }
        }
        let c = g.maximum_clique();
        if g.is_clique(&c) && c.len() == brute_force_clique(&g) {
            agree += 1;
        }
    }
    CheckResult {
        name: "clique_vs_brute_force".into(),
        passed: agree == trials,
        detail: format!("{agree}/{trials} G(12, 0.5) graphs agree"),
    }
}

fn check_spearman(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(5..60);
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let (rx, ry) = (average_ranks(&x), average_ranks(&y));
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
        let nf = n as f64;
        let formula = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        let r = spearman(&x, &y).unwrap_or(f64::NAN);
        worst = worst.max((r - formula).abs());
    }
    CheckResult {
        name: "spearman_vs_rank_formula".into(),
        passed: worst < 1e-12,
        detail: format!("max abs difference {worst:.3e}"),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check_recovery(rng: &mut ChaCha8Rng) -> CheckResult {
    let n = 10_000;
    let mut errs = Vec::new();
    let draw = |d: &dyn Fn(&mut ChaCha8Rng) -> f64, rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| d(rng)).collect() };

    let normal = Normal::new(300.0, 40.0).unwrap();
    let x = draw(&|r| normal.sample(r), rng);
    let f = fit_mle(DistFamily::Normal, &x).expect("normal fit");
    errs.push(("normal", rel(f.loc, 300.0).max(rel(f.scale, 40.0))));

    let exp = Exp::new(1.0 / 250.0).unwrap();
    let x = draw(&|r| exp.sample(r), rng);
    let f = fit_mle(DistFamily::Exponential, &x).expect("exponential fit");
    errs.push(("exponential", rel(f.scale, 250.0)));

    let ln = LogNormal::new(5.5, 0.4).unwrap();
    let x = draw(&|r| ln.sample(r), rng);
    let f = fit_mle(DistFamily::LogNormal, &x).expect("lognormal fit");
    errs.push(("lognormal", rel(f.shapes[0], 0.4).max(rel(f.scale, 5.5f64.exp()))));

    let par = Pareto::new(80.0, 3.0).unwrap();
    let x = draw(&|r| par.sample(r), rng);
    let f = fit_mle(DistFamily::Pareto, &x).expect("pareto fit");
    errs.push(("pareto", rel(f.shapes[0], 3.0).max(rel(f.scale, 80.0))));

    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    CheckResult {
        name: "mle_parameter_recovery".into(),
        passed: worst < 0.05,
        detail: errs
            .iter()
            .map(|(name, e)| format!("{name} {:.2}%", e * 100.0))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

pub fn run_selftest(seed: u64, fault: Fault) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check_fft(&mut rng, fault),
        check_clique(&mut rng),
        check_spearman(&mut rng),
        check_recovery(&mut rng),
    ];
    SelftestReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_pass() {
        for seed in [42, 7] {
            let r = run_selftest(seed, Fault::None);
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.checks.len(), 4);
        }
    }

    #[test]
    fn injected_fault_fails() {
        let r = run_selftest(42, Fault::Fft);
        assert!(!r.passed());
        assert!(!r.checks[0].passed);
        assert!(r.checks[1..].iter().all(|c| c.passed));
    }
}
