use std::fmt::Write;

use crate::network::{PitchBin, SoundNetwork};

use super::{escape, num, SvgDoc, VizError, PITCH_CLASS_NAMES, PITCH_CLASS_PALETTE};

pub const NODE_RADIUS: f64 = 12.0;

/// Archimedean spiral `r = r0 + b i`, `theta = c i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralLayout {
    pub r0: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for SpiralLayout {
    fn default() -> Self {
        SpiralLayout { r0: 0.0, b: 26.0, c: 0.55 }
    }
}

impl SpiralLayout {
    pub fn radius(&self, i: usize) -> f64 {
        self.r0 + self.b * i as f64
    }

    pub fn position(&self, i: usize) -> (f64, f64) {
        let r = self.radius(i);
        let t = self.c * i as f64;
        (r * t.cos(), r * t.sin())
    }

    /// Nodes by descending centrality, ties by ascending MIDI.
    pub fn order(net: &SoundNetwork) -> Vec<PitchBin> {
        let mut nodes = net.nodes.clone();
        nodes.sort_by(|a, b| {
            let ca = net.centrality_of(*a).unwrap_or(0.0);
            let cb = net.centrality_of(*b).unwrap_or(0.0);
            cb.total_cmp(&ca).then(a.cmp(b))
        });
        nodes
    }
}

pub fn render_network_svg(net: &SoundNetwork, clique_only: bool) -> Result<String, VizError> {
    render_network_svg_with(net, clique_only, &SpiralLayout::default())
}

/// Spiral drawing of the network, or of its largest clique alone.
pub fn render_network_svg_with(
    net: &SoundNetwork,
    clique_only: bool,
    layout: &SpiralLayout,
) -> Result<String, VizError> {
    if net.nodes.is_empty() {
        return Err(VizError::EmptyNetwork);
    }
    let shown = if clique_only { net.clique_subnetwork() } else { net.clone() };
    let order = SpiralLayout::order(&shown);
    let mut pos = vec![(0.0, 0.0); shown.node_count()];
    for (rank, bin) in order.iter().enumerate() {
        pos[shown.index_of(*bin).expect("ordered nodes belong to the network")] = layout.position(rank);
    }

    let extent = layout.radius(order.len() - 1).abs() + NODE_RADIUS + 30.0;
    let scale = (extent / 300.0).max(1.0);
    let legend_w = 110.0 * scale;
    let mut doc = SvgDoc::new(-extent, -extent - 30.0 * scale, 2.0 * extent + legend_w, 2.0 * extent + 30.0 * scale);
    doc.rect(-extent, -extent - 30.0 * scale, 2.0 * extent + legend_w, 2.0 * extent + 30.0 * scale, "fill=\"#ffffff\"");
    let title = if clique_only {
        format!("largest clique ({} nodes)", shown.node_count())
    } else {
        format!("network of sounds ({} nodes, {} edges)", shown.node_count(), shown.edge_count())
    };
    doc.text(0.0, -extent - 8.0 * scale, &format!("font-size=\"{}\" text-anchor=\"middle\"", num(16.0 * scale)), &title);

    doc.raw("<g class=\"edges\" stroke=\"#888888\" stroke-width=\"1\" stroke-opacity=\"0.6\">");
    for (u, v) in shown.edges() {
        doc.line(pos[u].0, pos[u].1, pos[v].0, pos[v].1, "class=\"edge\"");
    }
    doc.raw("</g>");

    doc.raw("<g class=\"nodes\" stroke=\"#222222\" stroke-width=\"1\">");
    for bin in &order {
        let (x, y) = pos[shown.index_of(*bin).unwrap()];
        let mut s = String::new();
        let _ = write!(
            s,
            "<circle class=\"node\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"><title>{}",
            num(x),
            num(y),
            num(NODE_RADIUS),
            PITCH_CLASS_PALETTE[bin.pitch_class()],
            escape(&bin.label())
        );
        if let Some(c) = net.centrality_of(*bin) {
            let _ = write!(s, " (centrality {c:.4})");
        }
        s.push_str("</title></circle>");
        doc.raw(&s);
    }
    doc.raw("</g>");
    for bin in &order {
        let (x, y) = pos[shown.index_of(*bin).unwrap()];
        doc.text(x, y + 3.0, "font-size=\"8\" text-anchor=\"middle\"", &bin.lower_name());
    }

    let lx = extent + 15.0 * scale;
    let row = 20.0 * scale;
    let top = -extent;
    doc.text(lx, top, &format!("font-size=\"{}\"", num(12.0 * scale)), "lower note");
    for (pc, name) in PITCH_CLASS_NAMES.iter().enumerate() {
        let y = top + (pc + 1) as f64 * row;
        doc.rect(
            lx,
            y - 12.0 * scale,
            14.0 * scale,
            14.0 * scale,
            &format!("class=\"legend\" fill=\"{}\" stroke=\"#222222\"", PITCH_CLASS_PALETTE[pc]),
        );
        doc.text(lx + 20.0 * scale, y, &format!("font-size=\"{}\"", num(12.0 * scale)), name);
    }
    Ok(doc.finish())
}
