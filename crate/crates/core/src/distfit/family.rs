use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The seven candidate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DistFamily {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "lognormal")]
    LogNormal,
    #[serde(rename = "exponential")]
    Exponential,
    #[serde(rename = "pareto")]
    Pareto,
    #[serde(rename = "gibrat")]
    Gibrat,
    #[serde(rename = "powerlaw")]
    PowerLaw,
    #[serde(rename = "exponweib")]
    ExponentiatedWeibull,
}

impl DistFamily {
    pub const ALL: [DistFamily; 7] = [
        DistFamily::Normal,
        DistFamily::LogNormal,
        DistFamily::Exponential,
        DistFamily::Pareto,
        DistFamily::Gibrat,
        DistFamily::PowerLaw,
        DistFamily::ExponentiatedWeibull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistFamily::Normal => "normal",
            DistFamily::LogNormal => "lognormal",
            DistFamily::Exponential => "exponential",
            DistFamily::Pareto => "pareto",
            DistFamily::Gibrat => "gibrat",
            DistFamily::PowerLaw => "powerlaw",
            DistFamily::ExponentiatedWeibull => "exponweib",
        }
    }

    pub fn shape_count(self) -> usize {
        match self {
            DistFamily::Normal | DistFamily::Exponential | DistFamily::Gibrat => 0,
            DistFamily::LogNormal | DistFamily::Pareto | DistFamily::PowerLaw => 1,
            DistFamily::ExponentiatedWeibull => 2,
        }
    }

    /// Length of the reported parameter vector `[shape..., loc, scale]`.
    pub fn param_count(self) -> usize {
        self.shape_count() + 2
    }

    /// Families whose support is bounded by a log transform of `x - loc`.
    pub fn needs_positive_samples(self) -> bool {
        matches!(
            self,
            DistFamily::LogNormal | DistFamily::Pareto | DistFamily::PowerLaw | DistFamily::ExponentiatedWeibull
        )
    }
}

impl fmt::Display for DistFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown distribution family {s:?}"))
    }
}

/// A family with concrete parameters in loc-scale form: `z = (x - loc) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedDistribution {
    pub family: DistFamily,
    pub shapes: Vec<f64>,
    pub loc: f64,
    pub scale: f64,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `ln(1 - exp(-t))` for t > 0, stable at both ends.
fn ln_one_minus_exp_neg(t: f64) -> f64 {
    if t > std::f64::consts::LN_2 {
        (-(-t).exp()).ln_1p()
    } else {
        (-(-t).exp_m1()).ln()
    }
}

impl FittedDistribution {
    pub fn new(family: DistFamily, shapes: Vec<f64>, loc: f64, scale: f64) -> Self {
        assert_eq!(shapes.len(), family.shape_count(), "{family} takes {} shapes", family.shape_count());
        FittedDistribution { family, shapes, loc, scale }
    }

    /// Parameters in reporting order: `[shape..., loc, scale]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.shapes.clone();
        p.push(self.loc);
        p.push(self.scale);
        p
    }

    pub fn is_valid(&self) -> bool {
        self.scale > 0.0
            && self.scale.is_finite()
            && self.loc.is_finite()
            && self.shapes.iter().all(|s| *s > 0.0 && s.is_finite())
    }

    /// Log density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.loc) / self.scale;
        let ln_scale = self.scale.ln();
        match self.family {
            DistFamily::Normal => -0.5 * z * z - LN_SQRT_2PI - ln_scale,
            DistFamily::Exponential => {
                if z < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -z - ln_scale
                }
            }
            DistFamily::LogNormal | DistFamily::Gibrat => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let s = if self.family == DistFamily::Gibrat { 1.0 } else { self.shapes[0] };
                let lz = z.ln();
                -0.5 * (lz / s).powi(2) - lz - s.ln() - LN_SQRT_2PI - ln_scale
            }
            DistFamily::Pareto => {
                if z < 1.0 {
                    return f64::NEG_INFINITY;
                }
                let b = self.shapes[0];
                b.ln() - (b + 1.0) * z.ln() - ln_scale
            }
            DistFamily::PowerLaw => {
                if !(0.0..=1.0).contains(&z) {
                    return f64::NEG_INFINITY;
                }
                let a = self.shapes[0];
                a.ln() + (a - 1.0) * z.ln() - ln_scale
            }
            DistFamily::ExponentiatedWeibull => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (a, c) = (self.shapes[0], self.shapes[1]);
                let zc = z.powf(c);
                a.ln() + c.ln() - ln_scale + (c - 1.0) * z.ln() - zc + (a - 1.0) * ln_one_minus_exp_neg(zc)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.loc) / self.scale;
        let p = match self.family {
            DistFamily::Normal => std_normal_cdf(z),
            DistFamily::Exponential => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-z).exp_m1()
                }
            }
            DistFamily::LogNormal | DistFamily::Gibrat => {
                if z <= 0.0 {
                    0.0
                } else {
                    let s = if self.family == DistFamily::Gibrat { 1.0 } else { self.shapes[0] };
                    std_normal_cdf(z.ln() / s)
                }
            }
            DistFamily::Pareto => {
                if z <= 1.0 {
                    0.0
                } else {
                    1.0 - z.powf(-self.shapes[0])
                }
            }
            DistFamily::PowerLaw => {
                if z <= 0.0 {
                    0.0
                } else if z >= 1.0 {
                    1.0
                } else {
                    z.powf(self.shapes[0])
                }
            }
            DistFamily::ExponentiatedWeibull => {
                if z <= 0.0 {
                    0.0
                } else {
                    let (a, c) = (self.shapes[0], self.shapes[1]);
                    (a * ln_one_minus_exp_neg(z.powf(c))).exp()
                }
            }
        };
        p.clamp(0.0, 1.0)
    }

    pub fn log_likelihood(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.ln_pdf(x)).sum()
    }

    /// Lower end of the support.
    pub fn support_min(&self) -> f64 {
        match self.family {
            DistFamily::Normal => f64::NEG_INFINITY,
            DistFamily::Pareto => self.loc + self.scale,
            _ => self.loc,
        }
    }

    /// Upper end of the support.
    pub fn support_max(&self) -> f64 {
        match self.family {
            DistFamily::PowerLaw => self.loc + self.scale,
            _ => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn instances() -> Vec<FittedDistribution> {
        vec![
            FittedDistribution::new(DistFamily::Normal, vec![], 3.0, 2.0),
            FittedDistribution::new(DistFamily::LogNormal, vec![0.6], 0.0, 5.0),
            FittedDistribution::new(DistFamily::Exponential, vec![], 1.0, 4.0),
            FittedDistribution::new(DistFamily::Pareto, vec![2.5], 0.0, 2.0),
            FittedDistribution::new(DistFamily::Gibrat, vec![], -0.8, 4.7),
            FittedDistribution::new(DistFamily::PowerLaw, vec![1.7], 0.0, 10.0),
            FittedDistribution::new(DistFamily::ExponentiatedWeibull, vec![1.8, 1.3], 0.0, 3.0),
        ]
    }

    /// Composite Simpson over [lo, hi] split into `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn pdf_integrates_to_one() {
        for d in instances() {
            // integrate in u = cdf-like coordinates by splitting at log-spaced knots
            let lo = if d.support_min().is_finite() { d.support_min() } else { d.loc - 40.0 * d.scale };
            let hi = if d.support_max().is_finite() { d.support_max() } else { d.loc + 2000.0 * d.scale };
            let knots: Vec<f64> = {
                let mut k = vec![lo];
                let mut w = 1e-6 * d.scale;
                while lo + w < hi {
                    k.push(lo + w);
                    w *= 1.5;
                }
                k.push(hi);
                k
            };
            let total: f64 = knots.windows(2).map(|w| simpson(|x| d.pdf(x), w[0], w[1], 64)).sum();
            assert!((total - 1.0).abs() < 1e-4, "{}: {}", d.family, total);
        }
    }

    #[test]
    fn cdf_monotone_with_limits() {
        for d in instances() {
            let lo = d.loc - 50.0 * d.scale;
            let hi = d.loc + 5000.0 * d.scale;
            let mut prev = 0.0;
            for i in 0..10_000 {
                let x = lo + (hi - lo) * (i as f64 / 9999.0).powi(3);
                let c = d.cdf(x);
                assert!(c >= prev, "{} not monotone at {x}", d.family);
                assert!(d.pdf(x) >= 0.0);
                prev = c;
            }
            assert_eq!(d.cdf(f64::NEG_INFINITY), 0.0);
            assert!((d.cdf(1e300) - 1.0).abs() < 1e-12, "{}", d.family);
        }
    }

    #[test]
    fn names_round_trip() {
        for f in DistFamily::ALL {
            assert_eq!(f.name().parse::<DistFamily>().unwrap(), f);
        }
        assert!("weibull".parse::<DistFamily>().is_err());
    }

    #[test]
    fn gibrat_is_unit_shape_lognormal() {
        let g = FittedDistribution::new(DistFamily::Gibrat, vec![], 0.0, 1.0);
        let l = FittedDistribution::new(DistFamily::LogNormal, vec![1.0], 0.0, 1.0);
        for x in [0.1, 0.5, 1.0, 2.0, 7.0] {
            assert!((g.pdf(x) - l.pdf(x)).abs() < 1e-15);
            // standard density 1/(x sqrt(2 pi)) exp(-ln^2 x / 2)
            let direct = (-(x.ln().powi(2)) / 2.0).exp() / (x * (2.0 * PI).sqrt());
            assert!((g.pdf(x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn ew_reduces_to_exponential() {
        let ew = FittedDistribution::new(DistFamily::ExponentiatedWeibull, vec![1.0, 1.0], 0.0, 2.0);
        let ex = FittedDistribution::new(DistFamily::Exponential, vec![], 0.0, 2.0);
        for x in [0.01, 0.5, 3.0, 20.0] {
            assert!((ew.cdf(x) - ex.cdf(x)).abs() < 1e-14);
            assert!((ew.ln_pdf(x) - ex.ln_pdf(x)).abs() < 1e-12);
        }
    }
}
