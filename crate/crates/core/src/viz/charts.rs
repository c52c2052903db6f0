use crate::corpus::CorpusComparison;
use crate::network::{OctaveHistogram, OCTAVE_BUCKETS};

use super::{num, SvgDoc, VizError};

const NULL_FILL: &str = "#bbbbbb";

fn lerp_rgb(a: [f64; 3], b: [f64; 3], t: f64) -> String {
    let c: Vec<u8> = (0..3).map(|i| (a[i] + (b[i] - a[i]) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Blue through white to red over `[-1, 1]`.
pub fn diverging_color(v: f64) -> String {
    const BLUE: [f64; 3] = [33.0, 102.0, 172.0];
    const WHITE: [f64; 3] = [247.0, 247.0, 247.0];
    const RED: [f64; 3] = [178.0, 24.0, 43.0];
    let v = v.clamp(-1.0, 1.0);
    if v < 0.0 {
        lerp_rgb(WHITE, BLUE, -v)
    } else {
        lerp_rgb(WHITE, RED, v)
    }
}

fn hue_color(i: usize, n: usize) -> String {
    let h = 360.0 * i as f64 / n.max(1) as f64;
    let (s, l) = (0.65, 0.5);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let m = l - c / 2.0;
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let to = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", to(r), to(g), to(b))
}

/// One cell per matrix entry, coloured on a diverging scale and labelled
/// with the coefficient to two decimals; undefined cells are gray with a dash.
pub fn render_heatmap_svg(comparison: &CorpusComparison) -> Result<String, VizError> {
    let matrix = comparison.corr_matrix.as_ref().ok_or(VizError::MissingMatrix)?;
    let n = matrix.len();
    let cell = 56.0;
    let margin = 150.0;
    let width = margin + n as f64 * cell + 120.0;
    let height = margin + n as f64 * cell + 30.0;
    let mut doc = SvgDoc::new(0.0, 0.0, width, height);
    doc.rect(0.0, 0.0, width, height, "fill=\"#ffffff\"");
    doc.text(
        margin + n as f64 * cell / 2.0,
        24.0,
        "font-size=\"16\" text-anchor=\"middle\"",
        &format!("degree centrality correlation ({} alignment)", comparison.alignment),
    );
    for (i, id) in comparison.piece_ids.iter().enumerate() {
        let c = margin + (i as f64 + 0.5) * cell;
        doc.text(margin - 8.0, c + 4.0, "class=\"row-label\" font-size=\"11\" text-anchor=\"end\"", id);
        doc.text(
            c,
            margin - 8.0,
            &format!("class=\"col-label\" font-size=\"11\" transform=\"rotate(-45 {} {})\"", num(c), num(margin - 8.0)),
            id,
        );
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let x = margin + j as f64 * cell;
            let y = margin + i as f64 * cell;
            let (fill, label) = match v {
                Some(r) => (diverging_color(*r), format!("{r:.2}")),
                None => (NULL_FILL.to_string(), "–".to_string()),
            };
            doc.rect(x, y, cell, cell, &format!("class=\"cell\" fill=\"{fill}\" stroke=\"#ffffff\""));
            doc.text(x + cell / 2.0, y + cell / 2.0 + 4.0, "class=\"value\" font-size=\"12\" text-anchor=\"middle\"", &label);
        }
    }
    let lx = margin + n as f64 * cell + 30.0;
    for (k, v) in [1.0, 0.5, 0.0, -0.5, -1.0].iter().enumerate() {
        let y = margin + k as f64 * 22.0;
        doc.rect(lx, y, 18.0, 18.0, &format!("class=\"scale\" fill=\"{}\" stroke=\"#999999\"", diverging_color(*v)));
        doc.text(lx + 24.0, y + 13.0, "font-size=\"11\"", &format!("{v:.1}"));
    }
    Ok(doc.finish())
}

/// Grouped bars: one group per octave bucket, one bar per piece. Empty bars
/// are left out.
pub fn render_clique_bars_svg(comparison: &CorpusComparison) -> Result<String, VizError> {
    let pieces = comparison.piece_ids.len();
    if pieces == 0 {
        return Err(VizError::NoPieces);
    }
    let bar_w = 12.0;
    let gap = 16.0;
    let group_w = pieces as f64 * bar_w + gap;
    let left = 60.0;
    let top: f64 = 50.0;
    let plot_h: f64 = 260.0;
    let bottom = top + plot_h;
    let legend_h = 18.0 * pieces as f64;
    let width = left + OCTAVE_BUCKETS as f64 * group_w + 200.0;
    let height = (bottom + 60.0).max(top + legend_h + 20.0);
    let max_count = comparison
        .clique_histograms
        .iter()
        .flat_map(|h| h.counts)
        .max()
        .unwrap_or(0)
        .max(1);
    let unit = plot_h / max_count as f64;

    let mut doc = SvgDoc::new(0.0, 0.0, width, height);
    doc.rect(0.0, 0.0, width, height, "fill=\"#ffffff\"");
    doc.text(
        left + OCTAVE_BUCKETS as f64 * group_w / 2.0,
        26.0,
        "font-size=\"16\" text-anchor=\"middle\"",
        "largest clique nodes by octave",
    );
    let axis = "stroke=\"#333\" stroke-width=\"1\"";
    doc.line(left, bottom, left + OCTAVE_BUCKETS as f64 * group_w, bottom, axis);
    doc.line(left, top, left, bottom, axis);
    doc.text(left - 6.0, top + 4.0, "font-size=\"11\" text-anchor=\"end\"", &max_count.to_string());
    doc.text(left - 6.0, bottom, "font-size=\"11\" text-anchor=\"end\"", "0");

    let labels = OctaveHistogram::labels();
    for (b, label) in labels.iter().enumerate() {
        let gx = left + b as f64 * group_w + gap / 2.0;
        doc.text(
            gx + pieces as f64 * bar_w / 2.0,
            bottom + 18.0,
            "class=\"bucket-label\" font-size=\"11\" text-anchor=\"middle\"",
            label,
        );
        for (p, hist) in comparison.clique_histograms.iter().enumerate() {
            let count = hist.counts[b];
            if count == 0 {
                continue;
            }
            let h = count as f64 * unit;
            doc.rect_titled(
                gx + p as f64 * bar_w,
                bottom - h,
                bar_w,
                h,
                &format!("class=\"bar\" fill=\"{}\"", hue_color(p, pieces)),
                &format!("{}: {} = {}", comparison.piece_ids[p], label, count),
            );
        }
    }

    let lx = left + OCTAVE_BUCKETS as f64 * group_w + 20.0;
    for (p, id) in comparison.piece_ids.iter().enumerate() {
        let y = top + p as f64 * 18.0;
        doc.rect(lx, y, 12.0, 12.0, &format!("class=\"legend\" fill=\"{}\"", hue_color(p, pieces)));
        doc.text(
            lx + 18.0,
            y + 10.0,
            "font-size=\"11\"",
            &format!("{id} ({})", comparison.clique_sizes.get(p).copied().unwrap_or(0)),
        );
    }
    Ok(doc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{degree_correlation_matrix, Alignment};
    use crate::network::{build_network, PitchGrid, SoundNetwork};
    use crate::viz::test_util::{count_class, parse};

    fn net(seq: &[f64]) -> SoundNetwork {
        build_network(seq, PitchGrid::default()).unwrap()
    }

    fn texts_of_class(doc: &roxmltree::Document<'_>, class: &str) -> Vec<String> {
        doc.descendants()
            .filter(|n| n.has_tag_name("text") && n.attribute("class") == Some(class))
            .map(|n| n.text().unwrap_or("").to_string())
            .collect()
    }

    #[test]
    fn scale_endpoints() {
        assert_eq!(diverging_color(0.0), "#f7f7f7");
        assert_eq!(diverging_color(1.0), "#b2182b");
        assert_eq!(diverging_color(-1.0), "#2166ac");
        assert_eq!(hue_color(0, 3), "#d22d2d");
    }

    #[test]
    fn heatmap_cells_and_labels() {
        let a = net(&[330.0, 350.0, 370.0]);
        let b = net(&[330.0, 350.0, 330.0, 370.0]);
        let c = degree_correlation_matrix(&[("a".into(), &a), ("b".into(), &b)], Alignment::Union).unwrap();
        let svg = render_heatmap_svg(&c).unwrap();
        let doc = parse(&svg);
        assert_eq!(count_class(&doc, "rect", "cell"), 4);
        let values = texts_of_class(&doc, "value");
        assert_eq!(values, vec!["1.00", "-0.50", "-0.50", "1.00"]);
        assert_eq!(texts_of_class(&doc, "row-label"), vec!["a", "b"]);
        assert_eq!(svg, render_heatmap_svg(&c).unwrap());
    }

    #[test]
    fn heatmap_null_cells() {
        let a = net(&[330.0, 350.0, 370.0]);
        let one = net(&[440.0]);
        let z = net(&[110.0, 220.0, 440.0]);
        let c = degree_correlation_matrix(
            &[("a".into(), &a), ("one".into(), &one), ("z<&>".into(), &z)],
            Alignment::Union,
        )
        .unwrap();
        let svg = render_heatmap_svg(&c).unwrap();
        let doc = parse(&svg);
        assert_eq!(count_class(&doc, "rect", "cell"), 9);
        let values = texts_of_class(&doc, "value");
        assert_eq!(values.iter().filter(|v| *v == "–").count(), 4);
        let gray = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("cell") && n.attribute("fill") == Some(NULL_FILL))
            .count();
        assert_eq!(gray, 4);
        let mut one_piece = c.clone();
        one_piece.corr_matrix = None;
        assert_eq!(render_heatmap_svg(&one_piece), Err(VizError::MissingMatrix));
    }

    #[test]
    fn bars_follow_histograms() {
        let low = net(&[55.0, 60.0, 65.0, 55.0, 65.0]);
        let mixed = net(&[330.0, 350.0, 370.0, 330.0, 1800.0]);
        let c = degree_correlation_matrix(&[("low".into(), &low), ("mixed".into(), &mixed)], Alignment::Union).unwrap();
        let svg = render_clique_bars_svg(&c).unwrap();
        let doc = parse(&svg);
        let nonzero: usize = c.clique_histograms.iter().map(|h| h.counts.iter().filter(|&&k| k > 0).count()).sum();
        assert_eq!(count_class(&doc, "rect", "bar"), nonzero);
        assert_eq!(texts_of_class(&doc, "bucket-label"), OctaveHistogram::labels().to_vec());
        for (p, id) in c.piece_ids.iter().enumerate() {
            let total: usize = doc
                .descendants()
                .filter(|n| n.attribute("class") == Some("bar"))
                .filter_map(|n| n.children().find(|t| t.has_tag_name("title")).and_then(|t| t.text()))
                .filter(|t| t.starts_with(&format!("{id}: ")))
                .map(|t| t.rsplit(" = ").next().unwrap().parse::<usize>().unwrap())
                .sum();
            assert_eq!(total, c.clique_sizes[p]);
        }
        let heights: Vec<f64> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("bar"))
            .map(|n| n.attribute("height").unwrap().parse().unwrap())
            .collect();
        assert!(heights.iter().all(|&h| h > 0.0));
    }
}
