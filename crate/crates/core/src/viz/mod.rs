//! Standalone SVG 1.1 figures: fit panels, spiral networks, correlation
//! heatmaps and clique composition bars.

mod charts;
mod fit;
mod network;

use std::fmt::Write;

use thiserror::Error;

pub use charts::{render_clique_bars_svg, render_heatmap_svg};
pub use fit::{density_histogram, render_fit_svg, DensityHistogram, HIST_BINS};
pub use network::{render_network_svg, SpiralLayout, NODE_RADIUS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VizError {
    #[error("no samples to plot")]
    EmptySamples,
    #[error("best fit has no converged parameters")]
    NoConvergedFit,
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("comparison has no correlation matrix")]
    MissingMatrix,
    #[error("comparison has no pieces")]
    NoPieces,
}

/// Fill colours by pitch class, C first: hues 30° apart from red at
/// HSL saturation 70%, lightness 50%.
pub const PITCH_CLASS_PALETTE: [&str; 12] = [
    "#d92626", "#d98026", "#d9d926", "#80d926", "#26d926", "#26d980", "#26d9d9", "#2680d9", "#2626d9", "#8026d9",
    "#d926d9", "#d92680",
];

pub const PITCH_CLASS_NAMES: [&str; 12] = ["C", "C♯", "D", "D♯", "E", "F", "F♯", "G", "G♯", "A", "A♯", "B"];

/// Fixed two-decimal coordinates so output bytes do not depend on float noise.
pub(crate) fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) struct SvgDoc {
    out: String,
}

impl SvgDoc {
    pub(crate) fn new(min_x: f64, min_y: f64, width: f64, height: f64) -> Self {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\">",
            num(min_x),
            num(min_y),
            num(width),
            num(height),
            num(width),
            num(height)
        );
        SvgDoc { out }
    }

    pub(crate) fn raw(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    pub(crate) fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, attrs: &str) {
        let _ = writeln!(
            self.out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {attrs}/>",
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    /// A rect with a tooltip title child.
    pub(crate) fn rect_titled(&mut self, x: f64, y: f64, w: f64, h: f64, attrs: &str, title: &str) {
        let _ = writeln!(
            self.out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {attrs}><title>{}</title></rect>",
            num(x),
            num(y),
            num(w),
            num(h),
            escape(title)
        );
    }

    pub(crate) fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, attrs: &str) {
        let _ = writeln!(
            self.out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {attrs}/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    pub(crate) fn text(&mut self, x: f64, y: f64, attrs: &str, content: &str) {
        let _ = writeln!(self.out, "<text x=\"{}\" y=\"{}\" {attrs}>{}</text>", num(x), num(y), escape(content));
    }

    pub(crate) fn points(pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{},{}", num(*x), num(*y));
        }
        s
    }

    pub(crate) fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}
