//! Cross-piece comparison: Spearman correlation of degree centralities and
//! clique composition tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distfit::{DistFamily, FitReport};
use crate::network::{OctaveHistogram, PitchBin, SoundNetwork};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} values, got {n}")]
    TooShort { n: usize, min: usize },
    #[error("correlation undefined for a constant vector")]
    DegenerateInput,
    #[error("need at least two pieces to correlate")]
    TooFewPieces,
}

/// 1-based ranks with ties sharing their mean rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CorpusError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorpusError::DegenerateInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, CorpusError> {
    if x.len() != y.len() {
        return Err(CorpusError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(CorpusError::TooShort { n: x.len(), min: 2 });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// How centrality vectors of two pieces are put on a common index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Union of every piece's nodes; absent nodes count as 0.
    #[default]
    Union,
    /// Only nodes present in both pieces of a pair.
    Intersection,
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alignment::Union => "union",
            Alignment::Intersection => "intersection",
        })
    }
}

impl FromStr for Alignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "union" => Ok(Alignment::Union),
            "intersection" => Ok(Alignment::Intersection),
            other => Err(format!("unknown alignment {other:?} (expected union or intersection)")),
        }
    }
}

/// Square matrix with `None` for undefined cells.
pub type CorrMatrix = Vec<Vec<Option<f64>>>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusComparison {
    pub piece_ids: Vec<String>,
    pub alignment: Alignment,
    /// Absent for single-piece corpora.
    pub corr_matrix: Option<CorrMatrix>,
    pub clique_histograms: Vec<OctaveHistogram>,
    pub clique_sizes: Vec<usize>,
}

fn centrality_vector(net: &SoundNetwork, universe: &[PitchBin]) -> Vec<f64> {
    universe.iter().map(|b| net.centrality_of(*b).unwrap_or(0.0)).collect()
}

fn pair_coefficient(a: &SoundNetwork, b: &SoundNetwork, alignment: Alignment, universe: &[PitchBin]) -> Option<f64> {
    if a.degree_centrality.is_empty() || b.degree_centrality.is_empty() {
        return None;
    }
    let shared: Vec<PitchBin>;
    let index = match alignment {
        Alignment::Union => universe,
        Alignment::Intersection => {
            shared = a.nodes.iter().copied().filter(|n| b.index_of(*n).is_some()).collect();
            &shared
        }
    };
    spearman(&centrality_vector(a, index), &centrality_vector(b, index)).ok()
}

fn clique_tables(pieces: &[(String, &SoundNetwork)]) -> (Vec<OctaveHistogram>, Vec<usize>) {
    pieces
        .iter()
        .map(|(_, n)| (n.clique_histogram(), n.largest_clique.len()))
        .unzip()
}

/// Pairwise Spearman coefficients of degree centrality between pieces.
pub fn degree_correlation_matrix(
    pieces: &[(String, &SoundNetwork)],
    alignment: Alignment,
) -> Result<CorpusComparison, CorpusError> {
    if pieces.len() < 2 {
        return Err(CorpusError::TooFewPieces);
    }
    let universe: Vec<PitchBin> = pieces
        .iter()
        .flat_map(|(_, n)| n.nodes.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = pieces.len();
    let upper: Vec<((usize, usize), Option<f64>)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, j)| ((i, j), pair_coefficient(pieces[i].1, pieces[j].1, alignment, &universe)))
        .collect();
    let mut matrix = vec![vec![None; n]; n];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for ((i, j), r) in upper {
        matrix[i][j] = r;
        matrix[j][i] = r;
    }
    let (clique_histograms, clique_sizes) = clique_tables(pieces);
    Ok(CorpusComparison {
        piece_ids: pieces.iter().map(|(id, _)| id.clone()).collect(),
        alignment,
        corr_matrix: Some(matrix),
        clique_histograms,
        clique_sizes,
    })
}

/// Per-piece inputs to [`corpus_report`].
#[derive(Debug, Clone, Copy)]
pub struct PieceAnalysisRef<'a> {
    pub id: &'a str,
    /// `None` when no family could be fitted (e.g. a constant sequence).
    pub fit: Option<&'a FitReport>,
    pub network: &'a SoundNetwork,
}

/// One row of the corpus summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub id: String,
    pub best_family: Option<DistFamily>,
    pub loc: Option<f64>,
    pub scale: Option<f64>,
    pub ks_d: Option<f64>,
    pub ks_p: Option<f64>,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub clique_size: usize,
    pub clique_octaves: OctaveHistogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyShare {
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub rows: Vec<SummaryRow>,
    pub comparison: CorpusComparison,
    /// Pieces per best-fit family, as counts and as a fraction of all pieces.
    pub family_share: BTreeMap<DistFamily, FamilyShare>,
    pub pieces_without_fit: usize,
}

fn summary_row(p: &PieceAnalysisRef<'_>) -> SummaryRow {
    let best = p.fit.map(|f| f.best_fit());
    let fitted = best.and_then(|b| b.fit.as_ref());
    let ks = best.and_then(|b| b.ks);
    SummaryRow {
        id: p.id.to_string(),
        best_family: best.map(|b| b.family),
        loc: fitted.map(|f| f.loc),
        scale: fitted.map(|f| f.scale),
        ks_d: ks.map(|k| k.statistic_d),
        ks_p: ks.map(|k| k.p_value),
        n_nodes: p.network.node_count(),
        n_edges: p.network.edge_count(),
        clique_size: p.network.largest_clique.len(),
        clique_octaves: p.network.clique_histogram(),
    }
}

/// Summary table, correlation matrix (for two or more pieces) and family shares.
pub fn corpus_report(pieces: &[PieceAnalysisRef<'_>], alignment: Alignment) -> CorpusReport {
    let rows: Vec<SummaryRow> = pieces.iter().map(summary_row).collect();
    let nets: Vec<(String, &SoundNetwork)> = pieces.iter().map(|p| (p.id.to_string(), p.network)).collect();
    let comparison = match degree_correlation_matrix(&nets, alignment) {
        Ok(c) => c,
        Err(_) => {
            let (clique_histograms, clique_sizes) = clique_tables(&nets);
            CorpusComparison {
                piece_ids: nets.iter().map(|(id, _)| id.clone()).collect(),
                alignment,
                corr_matrix: None,
                clique_histograms,
                clique_sizes,
            }
        }
    };
    let mut counts: BTreeMap<DistFamily, usize> = BTreeMap::new();
    for row in &rows {
        if let Some(f) = row.best_family {
            *counts.entry(f).or_default() += 1;
        }
    }
    let total = rows.len().max(1) as f64;
    let family_share = counts
        .into_iter()
        .map(|(f, count)| (f, FamilyShare { count, share: count as f64 / total }))
        .collect();
    CorpusReport {
        pieces_without_fit: rows.iter().filter(|r| r.best_family.is_none()).count(),
        rows,
        comparison,
        family_share,
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Summary table as CSV, one row per piece.
pub fn write_summary_csv<W: io::Write>(report: &CorpusReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "id", "best_family", "loc", "scale", "ks_d", "ks_p", "n_nodes", "n_edges", "clique_size",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(OctaveHistogram::labels());
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![
            r.id.clone(),
            r.best_family.map(|f| f.name().to_string()).unwrap_or_default(),
            opt_num(r.loc),
            opt_num(r.scale),
            opt_num(r.ks_d),
            opt_num(r.ks_p),
            r.n_nodes.to_string(),
            r.n_edges.to_string(),
            r.clique_size.to_string(),
        ];
        rec.extend(r.clique_octaves.counts.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Correlation matrix with a header row and column of piece ids; undefined cells are `NA`.
pub fn write_matrix_csv<W: io::Write>(comparison: &CorpusComparison, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(matrix) = &comparison.corr_matrix else {
        return Ok(());
    };
    let mut header = vec!["piece".to_string()];
    header.extend(comparison.piece_ids.iter().cloned());
    w.write_record(&header)?;
    for (id, row) in comparison.piece_ids.iter().zip(matrix) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_else(|| "NA".into())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
