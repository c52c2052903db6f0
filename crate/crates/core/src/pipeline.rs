//! End-to-end analysis of single pieces and whole directories.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::audio_io::{decode_wav, AudioBuffer, AudioError};
use crate::corpus::{corpus_report, write_matrix_csv, write_summary_csv, Alignment, CorpusReport, PieceAnalysisRef};
use crate::distfit::{best_fit, FitReport};
use crate::network::{build_network, NetworkError, PitchGrid, SoundNetwork};
use crate::spectral::{extract_sequence, ExtractionMode, FrequencySequence, PeakParams};
use crate::viz::{render_clique_bars_svg, render_fit_svg, render_heatmap_svg, render_network_svg};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Decode(AudioError),
    #[error("no frequency components extracted")]
    EmptySequence,
    #[error("no frequency components inside the pitch grid")]
    NoComponentsInGrid,
    #[error("no piece in {0} could be analysed")]
    EmptyCorpus(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {what}: {message}")]
    Output { what: String, message: String },
}

impl PipelineError {
    fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io { path: path.display().to_string(), source }
    }
}

/// Every tunable of a run. Serialized verbatim into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ExtractionMode,
    pub a4_hz: f64,
    pub frame_size: usize,
    pub hop: usize,
    pub top_k: usize,
    pub rel_threshold: f64,
    pub floor_db: f64,
    pub alignment: Alignment,
    pub output_dir: String,
    /// Only used by the self-test; analysis is deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PeakParams::default();
        RunConfig {
            mode: ExtractionMode::Stft,
            a4_hz: 440.0,
            frame_size: p.frame_size,
            hop: p.hop,
            top_k: p.top_k,
            rel_threshold: p.rel_threshold,
            floor_db: p.floor_db,
            alignment: Alignment::Union,
            output_dir: ".".into(),
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn peak_params(&self) -> PeakParams {
        PeakParams {
            frame_size: self.frame_size,
            hop: self.hop,
            top_k: self.top_k,
            rel_threshold: self.rel_threshold,
            floor_db: self.floor_db,
        }
    }

    pub fn grid(&self) -> PitchGrid {
        PitchGrid::new(self.a4_hz)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.a4_hz.is_finite() && self.a4_hz > 0.0) {
            return Err(PipelineError::Config(format!("a4_hz {} must be a positive number", self.a4_hz)));
        }
        self.peak_params()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.output_dir.is_empty() {
            return Err(PipelineError::Config("output_dir is empty".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// All artefacts of one analysed piece.
#[derive(Debug, Clone)]
pub struct PieceAnalysis {
    pub id: String,
    /// File name of the input, without directories.
    pub source: String,
    pub sample_rate_hz: u32,
    pub duration_s: f64,
    pub sequence: FrequencySequence,
    pub fit: Result<FitReport, String>,
    pub network: SoundNetwork,
}

impl PieceAnalysis {
    pub fn fit_report(&self) -> Option<&FitReport> {
        self.fit.as_ref().ok()
    }

    pub fn to_json(&self, config: &RunConfig) -> Value {
        let (fit, fit_error) = match &self.fit {
            Ok(r) => (serde_json::to_value(r).expect("fit report serializes"), Value::Null),
            Err(e) => (Value::Null, Value::String(e.clone())),
        };
        let clique: Vec<[String; 2]> = self
            .network
            .largest_clique
            .iter()
            .map(|b| [b.lower_name(), b.upper_name()])
            .collect();
        json!({
            "piece": self.id,
            "source": self.source,
            "config": config.to_json(),
            "sample_rate_hz": self.sample_rate_hz,
            "duration_s": self.duration_s,
            "sequence_length": self.sequence.len(),
            "fit": fit,
            "fit_error": fit_error,
            "network": serde_json::to_value(&self.network).expect("network serializes"),
            "clique": {
                "size": clique.len(),
                "nodes": clique,
                "octave_histogram": serde_json::to_value(self.network.clique_histogram()).expect("histogram serializes"),
            },
        })
    }

    /// `None` when no family converged.
    pub fn fit_svg(&self) -> Option<String> {
        self.fit_report()
            .and_then(|r| render_fit_svg(&self.sequence.values_hz, r).ok())
    }

    pub fn network_svg(&self) -> String {
        render_network_svg(&self.network, true).expect("analysed networks are non-empty")
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    // serde_json::Map is a BTreeMap here, so objects come out key-sorted.
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn analyze_audio(
    audio: &AudioBuffer,
    id: &str,
    source: &str,
    config: &RunConfig,
) -> Result<PieceAnalysis, PipelineError> {
    config.validate()?;
    let sequence = extract_sequence(audio, config.mode, &config.peak_params());
    if sequence.is_empty() {
        return Err(PipelineError::EmptySequence);
    }
    let network = match build_network(&sequence.values_hz, config.grid()) {
        Ok(n) => n,
        Err(NetworkError::EmptyNetwork) => return Err(PipelineError::NoComponentsInGrid),
        Err(e) => return Err(PipelineError::Config(e.to_string())),
    };
    let fit = best_fit(&sequence.values_hz).map_err(|e| e.to_string());
    Ok(PieceAnalysis {
        id: id.to_string(),
        source: source.to_string(),
        sample_rate_hz: audio.sample_rate_hz(),
        duration_s: audio.duration_s(),
        sequence,
        fit,
        network,
    })
}

pub fn analyze_file(path: &Path, id: &str, config: &RunConfig) -> Result<PieceAnalysis, PipelineError> {
    config.validate()?;
    let audio = match decode_wav(path) {
        Ok(a) => a,
        Err(AudioError::EmptyAudio) => return Err(PipelineError::EmptySequence),
        Err(e) => return Err(PipelineError::Decode(e)),
    };
    analyze_audio(&audio, id, &file_name(path), config)
}

/// Piece id for a file: its stem.
pub fn piece_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "piece".into())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|e| PipelineError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

/// Writes `<id>.json`, `<id>.network.svg` and, when a fit converged, `<id>.fit.svg`.
pub fn write_piece_outputs(analysis: &PieceAnalysis, config: &RunConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = Path::new(&config.output_dir);
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{}.json", analysis.id));
    write_file(&json_path, to_json_string(&analysis.to_json(config)).as_bytes())?;
    written.push(json_path);
    if let Some(svg) = analysis.fit_svg() {
        let p = dir.join(format!("{}.fit.svg", analysis.id));
        write_file(&p, svg.as_bytes())?;
        written.push(p);
    }
    let p = dir.join(format!("{}.network.svg", analysis.id));
    write_file(&p, analysis.network_svg().as_bytes())?;
    written.push(p);
    Ok(written)
}

/// `.wav` files (any case) directly inside `dir`, sorted by name.
pub fn discover_wavs(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        let is_wav = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("wav"))
            .unwrap_or(false);
        if is_wav && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenamedPiece {
    pub source: String,
    pub id: String,
}

/// File stems as ids; later duplicates get `-2`, `-3`, ... suffixes.
pub fn assign_ids(files: &[PathBuf]) -> (Vec<String>, Vec<RenamedPiece>) {
    let mut taken: BTreeMap<String, usize> = BTreeMap::new();
    let stems: Vec<String> = files.iter().map(|f| piece_id(f)).collect();
    let mut used: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut ids = Vec::with_capacity(files.len());
    let mut renamed = Vec::new();
    for (path, stem) in files.iter().zip(&stems) {
        let mut id = stem.clone();
        if used.contains(&id) {
            let k = taken.entry(stem.clone()).or_insert(1);
            loop {
                *k += 1;
                id = format!("{stem}-{k}");
                if !used.contains(&id) && !stems.contains(&id) {
                    break;
                }
            }
            renamed.push(RenamedPiece { source: file_name(path), id: id.clone() });
        }
        used.insert(id.clone());
        ids.push(id);
    }
    (ids, renamed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedFile {
    pub source: String,
    pub error: String,
}

pub struct CorpusRun {
    pub pieces: Vec<PieceAnalysis>,
    pub skipped: Vec<SkippedFile>,
    pub renamed: Vec<RenamedPiece>,
}

impl CorpusRun {
    pub fn report(&self, config: &RunConfig) -> CorpusReport {
        let refs: Vec<PieceAnalysisRef<'_>> = self
            .pieces
            .iter()
            .map(|p| PieceAnalysisRef { id: &p.id, fit: p.fit_report(), network: &p.network })
            .collect();
        corpus_report(&refs, config.alignment)
    }
}

/// Analyses every WAV in `dir` on a pool of `jobs` threads (default: one per
/// logical CPU). Output does not depend on the pool size.
pub fn run_corpus(dir: &Path, config: &RunConfig, jobs: Option<usize>) -> Result<CorpusRun, PipelineError> {
    config.validate()?;
    let files = discover_wavs(dir)?;
    let (ids, renamed) = assign_ids(&files);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<PieceAnalysis, PipelineError>> = pool.install(|| {
        files
            .par_iter()
            .zip(ids.par_iter())
            .map(|(path, id)| analyze_file(path, id, config))
            .collect()
    });
    let mut pieces = Vec::new();
    let mut skipped = Vec::new();
    for (path, r) in files.iter().zip(results) {
        match r {
            Ok(p) => pieces.push(p),
            Err(e) => skipped.push(SkippedFile { source: file_name(path), error: e.to_string() }),
        }
    }
    if pieces.is_empty() {
        return Err(PipelineError::EmptyCorpus(dir.display().to_string()));
    }
    Ok(CorpusRun { pieces, skipped, renamed })
}

pub fn corpus_json(run: &CorpusRun, report: &CorpusReport, config: &RunConfig) -> Value {
    let comp = &report.comparison;
    json!({
        "config": config.to_json(),
        "pieces": serde_json::to_value(&report.rows).expect("rows serialize"),
        "correlation": {
            "alignment": comp.alignment,
            "piece_ids": comp.piece_ids,
            "matrix": comp.corr_matrix,
        },
        "clique_histograms": comp.piece_ids.iter().zip(&comp.clique_histograms)
            .map(|(id, h)| (id.clone(), serde_json::to_value(h).expect("histogram serializes")))
            .collect::<serde_json::Map<_, _>>(),
        "clique_sizes": comp.piece_ids.iter().cloned().zip(comp.clique_sizes.iter().copied())
            .collect::<BTreeMap<String, usize>>(),
        "family_share": serde_json::to_value(&report.family_share).expect("shares serialize"),
        "pieces_without_fit": report.pieces_without_fit,
        "skipped": run.skipped,
        "renamed": run.renamed,
    })
}

pub const CORPUS_JSON: &str = "corpus.json";
pub const SUMMARY_CSV: &str = "corpus.summary.csv";
pub const MATRIX_CSV: &str = "corpus.matrix.csv";
pub const HEATMAP_SVG: &str = "corpus.heatmap.svg";
pub const CLIQUES_SVG: &str = "corpus.cliques.svg";

/// Per-piece outputs plus the corpus JSON, CSVs and figures. The matrix CSV
/// and heatmap need at least two pieces.
pub fn write_corpus_outputs(run: &CorpusRun, config: &RunConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = Path::new(&config.output_dir);
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for p in &run.pieces {
        written.extend(write_piece_outputs(p, config)?);
    }
    let report = run.report(config);
    let path = dir.join(CORPUS_JSON);
    write_file(&path, to_json_string(&corpus_json(run, &report, config)).as_bytes())?;
    written.push(path);

    let csv_err = |what: &str| {
        let what = what.to_string();
        move |e: csv::Error| PipelineError::Output { what: what.clone(), message: e.to_string() }
    };
    let mut buf = Vec::new();
    write_summary_csv(&report, &mut buf).map_err(csv_err(SUMMARY_CSV))?;
    let path = dir.join(SUMMARY_CSV);
    write_file(&path, &buf)?;
    written.push(path);

    if report.comparison.corr_matrix.is_some() {
        let mut buf = Vec::new();
        write_matrix_csv(&report.comparison, &mut buf).map_err(csv_err(MATRIX_CSV))?;
        let path = dir.join(MATRIX_CSV);
        write_file(&path, &buf)?;
        written.push(path);
        let svg = render_heatmap_svg(&report.comparison).expect("matrix present");
        let path = dir.join(HEATMAP_SVG);
        write_file(&path, svg.as_bytes())?;
        written.push(path);
    }
    let svg = render_clique_bars_svg(&report.comparison).expect("corpus has pieces");
    let path = dir.join(CLIQUES_SVG);
    write_file(&path, svg.as_bytes())?;
    written.push(path);
    Ok(written)
}
