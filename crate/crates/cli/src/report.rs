//! Report envelope and the plain-text summaries printed next to it.

use std::fmt::Write as _;

use fixlab_core::corpus::CorpusReport;
use fixlab_core::{AuxReport, Certificate, DiagnosticsReport, FixedPointResult, Point, Verdict};
use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, E: Serialize, R: Serialize> {
    pub version: u32,
    pub command: &'a str,
    pub config_echo: &'a E,
    pub results: R,
    pub timing: Timing,
}

impl<'a, E: Serialize, R: Serialize> Report<'a, E, R> {
    pub fn new(command: &'a str, config_echo: &'a E, results: R, timing: Timing) -> Self {
        Report { version: REPORT_VERSION, command, config_echo, results, timing }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

/// Work counters. Wall-clock time only appears in the text summary, so two
/// runs with the same configuration give byte-identical reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Timing {
    pub pairs_evaluated: u64,
    pub picard_iterations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyResults {
    pub certificates: Vec<Certificate>,
    pub aux: Option<AuxReport>,
}

/// Number of leading trace points kept in solve reports; the full trace goes
/// to the CSV export.
pub const TRACE_HEAD: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct SolveResults {
    #[serde(flatten)]
    pub result: FixedPointResult,
    pub terminal: Point,
    pub trace_len: usize,
    pub trace_head: Vec<Point>,
    pub diagnostics: Option<DiagnosticsReport>,
    /// Why diagnostics were skipped, if they were.
    pub diagnostics_note: Option<String>,
}

/// Plain notation for moderate magnitudes, scientific otherwise.
fn real(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e7).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::HoldsOnTestedPairs => "holds".into(),
        Verdict::FailsWithWitness { witness } => {
            format!("fails, witness ({}, {}) ratio {}", witness.pair.0, witness.pair.1, real(witness.ratio))
        }
        Verdict::Inconclusive { reason } => format!("inconclusive: {reason}"),
    }
}

pub fn certify_summary(title: &str, res: &CertifyResults, elapsed: f64) -> String {
    let mut out = format!("certify {title}\n");
    for c in &res.certificates {
        let _ = writeln!(
            out,
            "  {:<14} alpha_hat = {:<22} max at ({}, {})  {}",
            c.kind.as_str(),
            real(c.alpha_hat),
            c.witness_max.pair.0,
            c.witness_max.pair.1,
            verdict_text(&c.verdict)
        );
    }
    if let Some(aux) = &res.aux {
        let _ = writeln!(
            out,
            "  aux map: injective {}, continuous {}, subsequential convergence {}",
            aux.injective_on_samples,
            aux.continuity_probe,
            aux.subseq_convergent.label()
        );
    }
    let tested = res.certificates.first().map_or(0, |c| c.pairs_tested + c.pairs_skipped);
    let _ = writeln!(out, "{tested} pairs per condition, {elapsed:.3} s");
    out
}

pub fn solve_summary(title: &str, res: &SolveResults, elapsed: f64) -> String {
    let r = &res.result;
    let mut out = format!("solve {title}\n");
    let _ = writeln!(out, "  status {} after {} iterations, residual {}", r.status.label(), r.iterations, real(r.residual));
    let _ = writeln!(out, "  terminal point {} = {}", res.terminal, real(res.terminal.numeric_value()));
    let head: Vec<String> = res.trace_head.iter().map(Point::to_string).collect();
    let _ = writeln!(out, "  trace {}{}", head.join(" -> "), if res.trace_len > head.len() { " -> ..." } else { "" });
    if let Some(d) = &res.diagnostics {
        for (name, c) in [("step 3 decay", d.step3_decay), ("step 4 bounded", d.step4_bounded), ("step 5 cauchy", d.step5_cauchy)] {
            let _ = writeln!(out, "  {name:<15} {} (worst {} at iteration {})", if c.ok { "ok" } else { "VIOLATED" }, real(c.worst_value), c.worst_index);
        }
        let _ = writeln!(out, "  alpha used {}", real(d.alpha_used));
    }
    if let Some(note) = &res.diagnostics_note {
        let _ = writeln!(out, "  diagnostics skipped: {note}");
    }
    let _ = writeln!(out, "{elapsed:.3} s");
    out
}

pub fn corpus_summary(rep: &CorpusReport, elapsed: f64) -> String {
    let mut out = format!("corpus n_max = {}, seed = {}\n", rep.n_max, rep.seed);
    for inst in &rep.instances {
        let failed = inst.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(
            out,
            "  {:<14} {}  ({} checks, {failed} failed)",
            inst.id,
            if inst.passed { "pass" } else { "FAIL" },
            inst.checks.len()
        );
        for c in inst.checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(out, "      {}: {}", c.check, c.detail);
        }
    }
    let _ = writeln!(out, "{} in {elapsed:.3} s", if rep.passed { "all expectations met" } else { "MISMATCH" });
    out
}
