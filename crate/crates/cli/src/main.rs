use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use soundnet_core::corpus::Alignment;
use soundnet_core::pipeline::{
    analyze_file, piece_id, run_corpus, write_corpus_outputs, write_piece_outputs, PipelineError, RunConfig,
};
use soundnet_core::selftest::{run_selftest, Fault};
use soundnet_core::spectral::ExtractionMode;

const EXIT_SELFTEST: u8 = 1;
const EXIT_DECODE: u8 = 2;
const EXIT_EMPTY_SEQUENCE: u8 = 3;
const EXIT_EMPTY_CORPUS: u8 = 4;
const EXIT_USAGE: u8 = 5;
const EXIT_OUTPUT: u8 = 6;

#[derive(Parser, Debug)]
#[command(name = "soundnet", version, about = "Networks of sounds from WAV recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyse one WAV file
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Analyse every WAV file in a directory and compare the pieces
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads (default: logical CPU count)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the built-in oracle checks
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON file with default settings; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Peak extraction: stft (default) or full
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ExtractionMode>,
    /// Reference pitch of A4 in Hz
    #[arg(long)]
    a4: Option<f64>,
    /// STFT frame length, a power of two
    #[arg(long)]
    frame_size: Option<usize>,
    /// STFT hop in samples
    #[arg(long)]
    hop: Option<usize>,
    /// Peaks kept per frame
    #[arg(long)]
    top_k: Option<usize>,
    /// Minimum peak height as a fraction of the frame maximum
    #[arg(long, allow_negative_numbers = true)]
    rel_threshold: Option<f64>,
    /// Magnitude floor in dB relative to the frame maximum (<= 0)
    #[arg(long, allow_negative_numbers = true)]
    floor_db: Option<f64>,
    /// Centrality alignment across pieces: union (default) or intersection
    #[arg(long, value_parser = parse_alignment)]
    alignment: Option<Alignment>,
    /// Output directory
    #[arg(long, env = "SOUNDNET_OUT")]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<ExtractionMode, String> {
    match s {
        "stft" => Ok(ExtractionMode::Stft),
        "full" => Ok(ExtractionMode::FullSpectrum),
        other => Err(format!("unknown mode {other:?} (expected stft or full)")),
    }
}

fn parse_alignment(s: &str) -> Result<Alignment, String> {
    s.parse()
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                serde_json::from_str::<RunConfig>(&text).map_err(|e| format!("bad config {}: {e}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.a4 {
            c.a4_hz = v;
        }
        if let Some(v) = self.frame_size {
            c.frame_size = v;
        }
        if let Some(v) = self.hop {
            c.hop = v;
        }
        if let Some(v) = self.top_k {
            c.top_k = v;
        }
        if let Some(v) = self.rel_threshold {
            c.rel_threshold = v;
        }
        if let Some(v) = self.floor_db {
            c.floor_db = v;
        }
        if let Some(v) = self.alignment {
            c.alignment = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.display().to_string();
        }
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

fn exit_code(err: &PipelineError) -> u8 {
    match err {
        PipelineError::Decode(_) => EXIT_DECODE,
        PipelineError::EmptySequence | PipelineError::NoComponentsInGrid => EXIT_EMPTY_SEQUENCE,
        PipelineError::EmptyCorpus(_) => EXIT_EMPTY_CORPUS,
        PipelineError::Config(_) => EXIT_USAGE,
        PipelineError::Io { .. } | PipelineError::Output { .. } => EXIT_OUTPUT,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("soundnet: {msg}");
    ExitCode::from(code)
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn cmd_analyze(file: &Path, run: &RunArgs) -> ExitCode {
    let config = match run.resolve() {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let analysis = match analyze_file(file, &piece_id(file), &config) {
        Ok(a) => a,
        Err(e) => return fail(exit_code(&e), format!("{}: {e}", file.display())),
    };
    if let Err(e) = &analysis.fit {
        eprintln!("soundnet: warning: {}: distribution fit failed: {e}", file.display());
    }
    match write_piece_outputs(&analysis, &config) {
        Ok(paths) => {
            print_written(&paths);
            ExitCode::SUCCESS
        }
        Err(e) => fail(exit_code(&e), e),
    }
}

fn cmd_corpus(dir: &Path, run: &RunArgs, jobs: Option<usize>) -> ExitCode {
    let config = match run.resolve() {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if jobs == Some(0) {
        return fail(EXIT_USAGE, "--jobs must be at least 1");
    }
    if !dir.is_dir() {
        return fail(EXIT_EMPTY_CORPUS, format!("{} is not a directory", dir.display()));
    }
    let corpus = match run_corpus(dir, &config, jobs) {
        Ok(r) => r,
        Err(e) => return fail(exit_code(&e), e),
    };
    for s in &corpus.skipped {
        eprintln!("soundnet: warning: skipped {}: {}", s.source, s.error);
    }
    for r in &corpus.renamed {
        eprintln!("soundnet: warning: {} renamed to {} to avoid an id collision", r.source, r.id);
    }
    match write_corpus_outputs(&corpus, &config) {
        Ok(paths) => {
            print_written(&paths);
            ExitCode::SUCCESS
        }
        Err(e) => fail(exit_code(&e), e),
    }
}

fn cmd_selftest(seed: u64, inject_fault: bool) -> ExitCode {
    let fault = if inject_fault { Fault::Fft } else { Fault::None };
    let report = run_selftest(seed, fault);
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed() {
        println!("selftest passed (seed {seed})");
        ExitCode::SUCCESS
    } else {
        println!("selftest FAILED (seed {seed})");
        ExitCode::from(EXIT_SELFTEST)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Analyze { file, run } => cmd_analyze(file, run),
        Command::Corpus { dir, run, jobs } => cmd_corpus(dir, run, *jobs),
        Command::Selftest { seed, inject_fault } => cmd_selftest(*seed, *inject_fault),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"mode": "full", "a4_hz": 415.0, "top_k": 3}"#).unwrap();
        let args = RunArgs { config: Some(cfg), a4: Some(432.0), ..Default::default() };
        let c = args.resolve().unwrap();
        assert_eq!(c.mode, ExtractionMode::FullSpectrum);
        assert_eq!(c.a4_hz, 432.0);
        assert_eq!(c.top_k, 3);
    }

    #[test]
    fn invalid_values_rejected_before_reading_input() {
        let args = RunArgs { hop: Some(0), ..Default::default() };
        assert!(args.resolve().is_err());
        assert!(parse_mode("wavelet").is_err());
        assert!(parse_alignment("outer").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
