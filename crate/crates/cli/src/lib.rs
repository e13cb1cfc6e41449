//! Command-line front end: configuration, command dispatch and reports.
//!
//! Exit codes: `0` success, `1` configuration or runtime error (and corpus
//! mismatches), `2` an unsettled outcome (every certified kind inconclusive,
//! or the iteration budget ran out), `3` a diverging Picard orbit.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fixlab_core::corpus::{self, ExpectedFile};
use fixlab_core::solver::trace_rows;
use fixlab_core::{
    check_aux_map, estimate_modulus, picard_iterate, run_diagnostics, AuxProbeConfig, CertifyOptions, ConditionKind,
    DiagnosticsConfig, KindName, PairSet, SolveStatus,
};

use config::{CorpusSettings, Format, Overrides, Resolved, RunConfig};
use report::{CertifyResults, Report, SolveResults, Timing, TRACE_HEAD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSETTLED: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config field `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("invalid value for `{field}`: {source}")]
    Field { field: String, source: fixlab_core::Error },
    #[error(transparent)]
    Core(#[from] fixlab_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trace export: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "fixlab", version, about = "Contraction certificates and Picard iteration for self-maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the modulus of each contraction condition and give a verdict.
    Certify(RunArgs),
    /// Run Picard iteration, with diagnostics when an auxiliary map is set.
    Solve(RunArgs),
    /// Run every bundled instance against its expected outcomes.
    Corpus(RunArgs),
    /// Print the JSON schema of the reports.
    ReportSchema {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Bundled instance: example-2.3, example-3.4, example-3.5 or banach-affine.
    #[arg(long)]
    pub example: Option<String>,
    /// Parameter k of example-3.4.
    #[arg(long)]
    pub k: Option<f64>,
    /// Comma-separated condition kinds, or `all`.
    #[arg(long)]
    pub kinds: Option<String>,
    /// Starting point, e.g. `1`, `2.5` or `1/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Step tolerance of the Picard stop rule.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap of the Picard stop rule.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Truncation of sequence spaces.
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Seed of the sampled pair set.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report format on stdout.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the structured report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the full Picard trace as CSV (solve only).
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
    /// Expected-values file replacing the bundled one (corpus only).
    #[arg(long)]
    pub expected: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            example: self.example.clone(),
            k: self.k,
            kinds: self.kinds.clone(),
            x0: self.x0.clone(),
            tol: self.tol,
            max_iters: self.max_iters,
            n_max: self.n_max,
            seed: self.seed,
            format: self.format,
        }
    }

    fn file_config(&self) -> Result<RunConfig, CliError> {
        self.config.as_deref().map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Certify(args) => {
            let cfg = config::resolve(args.file_config()?, args.overrides())?;
            cmd_certify(&cfg, args.out.as_ref(), stdout)
        }
        Command::Solve(args) => {
            let cfg = config::resolve(args.file_config()?, args.overrides())?;
            cmd_solve(&cfg, args.out.as_ref(), args.trace_csv.as_ref(), stdout)
        }
        Command::Corpus(args) => {
            let settings = config::resolve_corpus(args.file_config()?, args.overrides(), args.expected.clone());
            cmd_corpus(&settings, args.out.as_ref(), stdout)
        }
        Command::ReportSchema { out } => {
            match out {
                Some(path) => write_file(&path, report::REPORT_SCHEMA)?,
                None => write_stdout(stdout, report::REPORT_SCHEMA)?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
}

fn write_stdout(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

/// The structured report goes to `--out` when given; stdout gets it only in
/// structured format without `--out`, and the text summary otherwise.
fn emit(format: Format, out: Option<&PathBuf>, json: &str, summary: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Some(path) = out {
        write_file(path, json)?;
    }
    match (format, out) {
        (Format::Structured, None) => write_stdout(stdout, json),
        _ => write_stdout(stdout, summary),
    }
}

fn title(cfg: &Resolved) -> String {
    let space = cfg.built.space;
    match &cfg.example {
        Some(id) => format!("{id} on {space}"),
        None => format!("f: {} on {space}", cfg.built.f),
    }
}

pub fn certify_results(cfg: &Resolved) -> Result<(CertifyResults, Timing), CliError> {
    let b = &cfg.built;
    let pairs = PairSet::standard(&b.space, cfg.pairs, cfg.seed)?;
    let opts = CertifyOptions { margin: cfg.margin, ..Default::default() };
    let phi = b.integrand_or_one();
    let mut certificates = Vec::with_capacity(cfg.kinds.len());
    for &kind in &cfg.kinds {
        let condition = ConditionKind::build(kind, b.t.as_ref(), Some(&phi))?;
        certificates.push(estimate_modulus(&condition, &b.space, &b.f, &pairs, &opts)?);
    }
    let aux = match &b.t {
        Some(t) => Some(check_aux_map(&b.space, t, &AuxProbeConfig { seed: cfg.seed, ..Default::default() })?),
        None => None,
    };
    let timing = Timing { pairs_evaluated: (pairs.len() * cfg.kinds.len()) as u64, picard_iterations: 0 };
    Ok((CertifyResults { certificates, aux }, timing))
}

/// Exit code of a certification: unsettled only when no requested kind
/// reached a verdict.
pub fn certify_exit_code(res: &CertifyResults) -> i32 {
    if res.certificates.iter().all(|c| c.verdict.is_inconclusive()) {
        EXIT_UNSETTLED
    } else {
        EXIT_OK
    }
}

pub fn cmd_certify(cfg: &Resolved, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let (results, timing) = certify_results(cfg)?;
    let code = certify_exit_code(&results);
    let summary = report::certify_summary(&title(cfg), &results, start.elapsed().as_secs_f64());
    let json = Report::new("certify", cfg, &results, timing).to_json();
    emit(cfg.format, out, &json, &summary, stdout)?;
    Ok(code)
}

pub fn solve_results(cfg: &Resolved, trace_csv: Option<&PathBuf>) -> Result<(SolveResults, Timing), CliError> {
    let b = &cfg.built;
    let x0 = cfg.x0.ok_or_else(|| CliError::Usage("solve needs a starting point (--x0)".into()))?;
    let result = picard_iterate(&b.space, &b.f, x0, &cfg.stop)?;
    let mut timing = Timing { pairs_evaluated: 0, picard_iterations: result.iterations as u64 };

    if let Some(path) = trace_csv {
        let rows = trace_rows(&b.space, &result.trace, b.t.as_ref())?;
        let mut w = csv::Writer::from_path(path)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
    }

    let (diagnostics, diagnostics_note) = match (&b.t, &b.integrand) {
        (Some(t), Some(phi)) if result.trace.len() >= 3 => {
            let alpha = match cfg.alpha {
                Some(a) => Ok(a),
                None => {
                    let pairs = PairSet::standard(&b.space, cfg.pairs, cfg.seed)?;
                    timing.pairs_evaluated += pairs.len() as u64;
                    let kind = ConditionKind::build(KindName::TIntPhi, Some(t), Some(phi))?;
                    let opts = CertifyOptions { margin: cfg.margin, ..Default::default() };
                    let cert = estimate_modulus(&kind, &b.space, &b.f, &pairs, &opts)?;
                    if cert.verdict.is_holds() {
                        Ok(cert.alpha_hat)
                    } else {
                        Err(format!("t_int_phi is {} on the tested pairs, so no modulus is available", cert.verdict.label()))
                    }
                }
            };
            match alpha {
                Ok(alpha) => {
                    let rep = run_diagnostics(&b.space, &result.trace, t, phi, alpha, &DiagnosticsConfig::default())?;
                    (Some(rep), None)
                }
                Err(note) => (None, Some(note)),
            }
        }
        (Some(_), Some(_)) => (None, Some("trace shorter than 3 points".to_string())),
        _ => (None, Some("needs an auxiliary map and an integrand".to_string())),
    };

    let results = SolveResults {
        terminal: result.terminal(),
        trace_len: result.trace.len(),
        trace_head: result.trace.iter().take(TRACE_HEAD).copied().collect(),
        result,
        diagnostics,
        diagnostics_note,
    };
    Ok((results, timing))
}

pub fn solve_exit_code(status: &SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged { .. } => EXIT_OK,
        SolveStatus::MaxItersReached => EXIT_UNSETTLED,
        SolveStatus::Diverged => EXIT_DIVERGED,
    }
}

pub fn cmd_solve(
    cfg: &Resolved,
    out: Option<&PathBuf>,
    trace_csv: Option<&PathBuf>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let start = Instant::now();
    let (results, timing) = solve_results(cfg, trace_csv)?;
    let code = solve_exit_code(&results.result.status);
    let summary = report::solve_summary(&title(cfg), &results, start.elapsed().as_secs_f64());
    let json = Report::new("solve", cfg, &results, timing).to_json();
    emit(cfg.format, out, &json, &summary, stdout)?;
    Ok(code)
}

pub fn corpus_results(settings: &CorpusSettings) -> Result<(corpus::CorpusReport, Timing), CliError> {
    let expected = match &settings.expected_path {
        Some(path) => ExpectedFile::load(path)?,
        None => ExpectedFile::bundled(),
    };
    let rep = corpus::run_all_with(&expected, settings.n_max, settings.seed)?;
    let mut timing = Timing::default();
    for inst in &rep.instances {
        timing.pairs_evaluated += inst.certificates.iter().map(|c| (c.pairs_tested + c.pairs_skipped) as u64).sum::<u64>();
        timing.picard_iterations += inst.solve.as_ref().map_or(0, |s| s.result.iterations as u64);
        if let Some(u) = &inst.uniqueness {
            timing.picard_iterations += u.outcomes.iter().map(|o| o.iterations as u64).sum::<u64>();
        }
    }
    Ok((rep, timing))
}

pub fn cmd_corpus(settings: &CorpusSettings, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let (rep, timing) = corpus_results(settings)?;
    let summary = report::corpus_summary(&rep, start.elapsed().as_secs_f64());
    let json = Report::new("corpus", settings, &rep, timing).to_json();
    emit(settings.format, out, &json, &summary, stdout)?;
    if rep.passed {
        Ok(EXIT_OK)
    } else {
        let failures: Vec<String> = rep.failures().map(|(i, c, d)| format!("{i} / {c}: {d}")).collect();
        Err(CliError::Usage(format!("corpus expectations not met:\n  {}", failures.join("\n  "))))
    }
}
