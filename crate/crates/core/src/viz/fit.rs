use crate::distfit::{FitReport, FittedDistribution};

use super::{num, SvgDoc, VizError};

pub const HIST_BINS: usize = 60;

const CURVE_POINTS: usize = 240;
const MAX_ECDF_STEPS: usize = 1000;

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 460.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 400.0;
const LEFT_PANEL: (f64, f64) = (70.0, 470.0);
const RIGHT_PANEL: (f64, f64) = (570.0, 970.0);

/// Equal-width histogram scaled so that bar areas sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityHistogram {
    pub lo: f64,
    pub bin_width: f64,
    pub densities: Vec<f64>,
}

impl DensityHistogram {
    pub fn hi(&self) -> f64 {
        self.lo + self.bin_width * self.densities.len() as f64
    }

    pub fn total_area(&self) -> f64 {
        self.densities.iter().map(|d| d * self.bin_width).sum()
    }
}

/// Histogram over `[min, max]`; the top edge is closed. A constant sample gets
/// a unit-wide range centred on its value.
pub fn density_histogram(samples: &[f64], bins: usize) -> Option<DensityHistogram> {
    if samples.is_empty() || bins == 0 {
        return None;
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let k = (((x - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let norm = samples.len() as f64 * width;
    Some(DensityHistogram {
        lo,
        bin_width: width,
        densities: counts.into_iter().map(|c| c as f64 / norm).collect(),
    })
}

fn tick_label(v: f64, span: f64) -> String {
    if span >= 100.0 {
        format!("{v:.0}")
    } else if span >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3e}")
    }
}

fn p_label(p: f64) -> String {
    if p >= 1e-3 {
        format!("{p:.4}")
    } else {
        format!("{p:.2e}")
    }
}

struct Panel {
    x0: f64,
    x1: f64,
    lo: f64,
    hi: f64,
    ymax: f64,
}

impl Panel {
    fn px(&self, v: f64) -> f64 {
        self.x0 + (v - self.lo) / (self.hi - self.lo) * (self.x1 - self.x0)
    }

    fn py(&self, v: f64) -> f64 {
        BOTTOM - (v / self.ymax).clamp(0.0, 1.0) * (BOTTOM - TOP)
    }

    fn axes(&self, doc: &mut SvgDoc, y_label: &str, y_top: &str) {
        let axis = "stroke=\"#333\" stroke-width=\"1\"";
        doc.line(self.x0, BOTTOM, self.x1, BOTTOM, axis);
        doc.line(self.x0, TOP, self.x0, BOTTOM, axis);
        let span = self.hi - self.lo;
        for k in 0..=4 {
            let v = self.lo + span * k as f64 / 4.0;
            let x = self.px(v);
            doc.line(x, BOTTOM, x, BOTTOM + 5.0, axis);
            doc.text(x, BOTTOM + 20.0, "font-size=\"11\" text-anchor=\"middle\"", &tick_label(v, span));
        }
        doc.text(self.x0 - 8.0, TOP + 4.0, "font-size=\"11\" text-anchor=\"end\"", y_top);
        doc.text(self.x0 - 8.0, BOTTOM, "font-size=\"11\" text-anchor=\"end\"", "0");
        doc.text((self.x0 + self.x1) / 2.0, BOTTOM + 40.0, "font-size=\"12\" text-anchor=\"middle\"", "frequency (Hz)");
        doc.text(self.x0, TOP - 10.0, "font-size=\"12\"", y_label);
    }

    fn curve(&self, f: impl Fn(f64) -> f64) -> String {
        let mut d = String::new();
        let mut pen_down = false;
        for k in 0..CURVE_POINTS {
            let v = self.lo + (self.hi - self.lo) * k as f64 / (CURVE_POINTS - 1) as f64;
            let y = f(v);
            if !y.is_finite() {
                pen_down = false;
                continue;
            }
            d.push_str(if pen_down { " L" } else if d.is_empty() { "M" } else { " M" });
            d.push_str(&format!("{},{}", num(self.px(v)), num(self.py(y))));
            pen_down = true;
        }
        d
    }
}

fn best_converged(report: &FitReport) -> Result<(&FittedDistribution, f64, f64), VizError> {
    let best = report.best_fit();
    match (&best.fit, best.ks, best.converged) {
        (Some(fit), Some(ks), true) => Ok((fit, ks.statistic_d, ks.p_value)),
        _ => Err(VizError::NoConvergedFit),
    }
}

/// Density histogram with the fitted PDF (left) and the empirical CDF with
/// the fitted CDF (right). The two fitted curves are the only `<path>` elements.
pub fn render_fit_svg(samples: &[f64], report: &FitReport) -> Result<String, VizError> {
    let hist = density_histogram(samples, HIST_BINS).ok_or(VizError::EmptySamples)?;
    let (fit, d, p) = best_converged(report)?;

    let hist_max = hist.densities.iter().copied().fold(0.0, f64::max);
    let pdf_peak = (0..CURVE_POINTS)
        .map(|k| fit.pdf(hist.lo + (hist.hi() - hist.lo) * k as f64 / (CURVE_POINTS - 1) as f64))
        .filter(|y| y.is_finite())
        .fold(0.0, f64::max);
    let ymax = hist_max.max(pdf_peak.min(4.0 * hist_max)) * 1.1;

    let mut doc = SvgDoc::new(0.0, 0.0, WIDTH, HEIGHT);
    doc.rect(0.0, 0.0, WIDTH, HEIGHT, "fill=\"#ffffff\"");
    doc.text(
        WIDTH / 2.0,
        28.0,
        "font-size=\"16\" text-anchor=\"middle\"",
        &format!("{} best fit (d = {:.4}, p = {})", fit.family.name(), d, p_label(p)),
    );

    let left = Panel { x0: LEFT_PANEL.0, x1: LEFT_PANEL.1, lo: hist.lo, hi: hist.hi(), ymax };
    left.axes(&mut doc, "density", &format!("{ymax:.3e}"));
    doc.raw("<g class=\"histogram\" fill=\"#9ecae1\" stroke=\"#4682b4\" stroke-width=\"0.5\">");
    for (k, &dens) in hist.densities.iter().enumerate() {
        if dens == 0.0 {
            continue;
        }
        let a = hist.lo + k as f64 * hist.bin_width;
        let x = left.px(a);
        let y = left.py(dens);
        doc.rect(x, y, left.px(a + hist.bin_width) - x, BOTTOM - y, "class=\"bar\"");
    }
    doc.raw("</g>");
    doc.raw(&format!(
        "<path class=\"pdf\" d=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>",
        left.curve(|x| fit.pdf(x))
    ));

    let right = Panel { x0: RIGHT_PANEL.0, x1: RIGHT_PANEL.1, lo: hist.lo, hi: hist.hi(), ymax: 1.0 };
    right.axes(&mut doc, "cumulative probability", "1");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let steps = n.min(MAX_ECDF_STEPS);
    let mut pts = vec![(right.px(hist.lo), right.py(0.0))];
    for s in 0..steps {
        let i = if steps == 1 { n - 1 } else { s * (n - 1) / (steps - 1) };
        let x = right.px(sorted[i]);
        pts.push((x, right.py(i as f64 / n as f64)));
        pts.push((x, right.py((i + 1) as f64 / n as f64)));
    }
    pts.push((right.px(hist.hi()), right.py(1.0)));
    doc.raw(&format!(
        "<polyline class=\"ecdf\" points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
        SvgDoc::points(&pts)
    ));
    doc.raw(&format!(
        "<path class=\"cdf\" d=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>",
        right.curve(|x| fit.cdf(x))
    ));
    Ok(doc.finish())
}
