//! Picard iteration `x_{k+1} = f(x_k)` with runtime checks of the
//! convergence argument's milestones: geometric decay of `Φ(d(Tx_{k+1}, Tx_k))`,
//! boundedness of `{T x_k}` and its Cauchy tail.

use rayon::prelude::*;
use serde::Serialize;

use crate::map::SelfMap;
use crate::quadrature::{Integrand, QuadratureConfig};
use crate::space::{raw_distance, Point, Space};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopRule {
    /// Stop once `d(x_{k+1}, x_k) < step_tol`.
    pub step_tol: f64,
    pub max_iters: usize,
    /// Divergence is declared when `|x_k|` exceeds this bound.
    pub divergence_bound: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { step_tol: 1e-10, max_iters: 100_000, divergence_bound: 1e9 }
    }
}

impl StopRule {
    pub fn with_tol(step_tol: f64) -> Self {
        StopRule { step_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_tol > 0.0) || self.max_iters == 0 || !(self.divergence_bound > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid stop rule {self:?}")));
        }
        Ok(())
    }

    /// Residual bound a converged point has to meet.
    pub fn verification_tol(&self) -> f64 {
        10.0 * self.step_tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged { point: Point },
    MaxItersReached,
    Diverged,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged { .. } => "converged",
            SolveStatus::MaxItersReached => "max_iters_reached",
            SolveStatus::Diverged => "diverged",
        }
    }

    pub fn point(&self) -> Option<Point> {
        match self {
            SolveStatus::Converged { point } => Some(*point),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub status: SolveStatus,
    pub iterations: usize,
    /// `d(f(a), a)` at the terminal point `a`.
    #[serde(with = "crate::serde_f64")]
    pub residual: f64,
    #[serde(skip)]
    pub trace: Vec<Point>,
}

impl FixedPointResult {
    pub fn terminal(&self) -> Point {
        *self.trace.last().expect("trace holds at least the start point")
    }
}

pub fn picard_iterate(space: &Space, f: &SelfMap, x0: Point, stop: &StopRule) -> Result<FixedPointResult> {
    stop.validate()?;
    space.check(x0)?;
    let eval = |iteration: usize, p: Point| {
        f.apply_in(space, p).map_err(|e| Error::MapEval { iteration, source: Box::new(e) })
    };

    let mut trace = vec![x0];
    let mut x = x0;
    let mut next = eval(1, x)?;
    for k in 1..=stop.max_iters {
        let v = next.numeric_value();
        if !v.is_finite() || v.abs() > stop.divergence_bound {
            trace.push(next);
            let residual = f.apply_in(space, next).map(|y| raw_distance(y, next)).unwrap_or(f64::INFINITY);
            return Ok(FixedPointResult { status: SolveStatus::Diverged, iterations: k, residual, trace });
        }
        let step = raw_distance(next, x);
        trace.push(next);
        x = next;
        next = eval(k + 1, x)?;
        let residual = raw_distance(next, x);
        if step < stop.step_tol && residual <= stop.verification_tol() {
            return Ok(FixedPointResult { status: SolveStatus::Converged { point: x }, iterations: k, residual, trace });
        }
    }
    let residual = raw_distance(next, x);
    Ok(FixedPointResult { status: SolveStatus::MaxItersReached, iterations: stop.max_iters, residual, trace })
}

/// One row of the CSV trace export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub point_repr: String,
    pub numeric_value: f64,
    pub step_distance: Option<f64>,
    pub t_image_value: Option<f64>,
}

pub fn trace_rows(space: &Space, trace: &[Point], t: Option<&SelfMap>) -> Result<Vec<TraceRow>> {
    trace
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let t_image_value = t.map(|t| t.apply_in(space, p).map(Point::numeric_value)).transpose()?;
            Ok(TraceRow {
                iter: i,
                point_repr: p.to_string(),
                numeric_value: p.numeric_value(),
                step_distance: (i > 0).then(|| raw_distance(p, trace[i - 1])),
                t_image_value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsConfig {
    /// Absolute slack on the decay inequalities, absorbing quadrature error.
    pub slack: f64,
    /// Window length for the Cauchy-tail check.
    pub window: usize,
    /// Largest acceptable diameter of the final window of `{T x_k}`.
    pub cauchy_tol: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { slack: 1e-9, window: 32, cauchy_tol: 1e-2, quadrature: QuadratureConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCheck {
    pub ok: bool,
    /// Decay: largest `lhs - rhs`; boundedness: largest radius of `{T x_k}`;
    /// Cauchy: diameter of the final window.
    #[serde(with = "crate::serde_f64")]
    pub worst_value: f64,
    pub worst_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub step3_decay: StepCheck,
    pub step4_bounded: StepCheck,
    pub step5_cauchy: StepCheck,
    pub alpha_used: f64,
}

impl DiagnosticsReport {
    pub fn step3_decay_ok(&self) -> bool {
        self.step3_decay.ok
    }

    pub fn step4_bounded(&self) -> bool {
        self.step4_bounded.ok
    }

    pub fn step5_cauchy_ok(&self) -> bool {
        self.step5_cauchy.ok
    }

    pub fn all_ok(&self) -> bool {
        self.step3_decay.ok && self.step4_bounded.ok && self.step5_cauchy.ok
    }
}

/// Checks a Picard trace against the certified modulus `alpha`.
///
/// * decay: `Φ(d_k) <= α Φ(d_{k-1}) + slack` and `Φ(d_k) <= α^k Φ(d_0)(1 + slack) + slack`,
///   with `d_k = d(T x_{k+1}, T x_k)`;
/// * boundedness: the radius of `{T x_k}` about `T x_0` over the whole trace
///   is at most twice its value over the first half;
/// * Cauchy tail: diameters of consecutive windows of `{T x_k}` do not grow
///   and the last one is below `cauchy_tol`.
pub fn run_diagnostics(
    space: &Space,
    trace: &[Point],
    t: &SelfMap,
    phi: &Integrand,
    alpha: f64,
    cfg: &DiagnosticsConfig,
) -> Result<DiagnosticsReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("diagnostics need alpha in (0, 1), got {alpha}")));
    }
    if trace.len() < 3 {
        return Err(Error::InvalidParameter(format!("diagnostics need a trace of length >= 3, got {}", trace.len())));
    }
    let images: Vec<f64> =
        trace.iter().map(|&p| t.apply_in(space, p).map(Point::numeric_value)).collect::<Result<_>>()?;

    let mut phis = Vec::with_capacity(images.len() - 1);
    for w in images.windows(2) {
        phis.push(phi.integrate((w[1] - w[0]).abs(), &cfg.quadrature)?);
    }
    let mut step3 = StepCheck { ok: true, worst_value: f64::NEG_INFINITY, worst_index: 0 };
    let mut alpha_k = 1.0;
    for k in 1..phis.len() {
        alpha_k *= alpha;
        let one_step = phis[k] - alpha * phis[k - 1] - cfg.slack;
        let telescoped = phis[k] - alpha_k * phis[0] * (1.0 + cfg.slack) - cfg.slack;
        let v = one_step.max(telescoped);
        if v > step3.worst_value {
            step3.worst_value = v;
            step3.worst_index = k + 1;
        }
    }
    if phis.len() < 2 {
        step3.worst_value = 0.0;
    }
    step3.ok = step3.worst_value <= 0.0;

    let radius = |upto: usize| {
        images[..upto]
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - images[0]).abs()))
            .fold((0, 0.0f64), |best, cur| if cur.1 > best.1 { cur } else { best })
    };
    let (worst_index, full) = radius(images.len());
    let (_, first_half) = radius(images.len().div_ceil(2));
    let step4 = StepCheck { ok: full <= 2.0 * first_half + cfg.slack, worst_value: full, worst_index };

    let window = cfg.window.min(images.len() / 2).max(1);
    let mut starts: Vec<usize> = Vec::new();
    let mut end = images.len();
    while end >= window {
        starts.push(end - window);
        end -= window;
    }
    starts.reverse();
    let diameter = |s: usize| {
        let w = &images[s..s + window];
        let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    };
    let diameters: Vec<f64> = starts.iter().map(|&s| diameter(s)).collect();
    let last = *diameters.last().unwrap();
    let growth = diameters.windows(2).position(|d| d[1] > d[0] + cfg.slack);
    let step5 = StepCheck {
        ok: growth.is_none() && last <= cfg.cauchy_tol,
        worst_value: last,
        worst_index: growth.map_or(*starts.last().unwrap(), |i| starts[i + 1]),
    };

    Ok(DiagnosticsReport { step3_decay: step3, step4_bounded: step4, step5_cauchy: step5, alpha_used: alpha })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub start: Point,
    pub status: SolveStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub outcomes: Vec<StartOutcome>,
    /// Whether all converged limits agree pairwise within `10·step_tol`.
    pub agree: bool,
    #[serde(with = "crate::serde_f64")]
    pub max_disagreement: f64,
    pub tolerance: f64,
}

/// Runs Picard iteration from several starts and compares the limits.
pub fn uniqueness_probe(space: &Space, f: &SelfMap, starts: &[Point], stop: &StopRule) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::InvalidParameter("uniqueness probe needs at least two starts".into()));
    }
    let runs: Vec<Result<FixedPointResult>> =
        starts.par_iter().map(|&x0| picard_iterate(space, f, x0, stop)).collect();
    let mut outcomes = Vec::with_capacity(starts.len());
    for (&start, run) in starts.iter().zip(runs) {
        let run = run?;
        outcomes.push(StartOutcome { start, status: run.status, iterations: run.iterations });
    }
    let limits: Vec<f64> = outcomes.iter().filter_map(|o| o.status.point()).map(Point::numeric_value).collect();
    let mut max_disagreement = 0.0f64;
    for (i, a) in limits.iter().enumerate() {
        for b in &limits[i + 1..] {
            max_disagreement = max_disagreement.max((a - b).abs());
        }
    }
    let tolerance = stop.verification_tol();
    Ok(UniquenessReport { agree: !limits.is_empty() && max_disagreement <= tolerance, outcomes, max_disagreement, tolerance })
}
