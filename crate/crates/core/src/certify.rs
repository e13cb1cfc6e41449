//! Contraction-modulus estimation and certificates.
//!
//! Every condition reduces to a per-pair ratio; the certificate records the
//! largest ratio over the tested pairs (`α̂`) and a verdict. Only tested-pair
//! semantics are claimed: a `HoldsOnTestedPairs` verdict is evidence, not a
//! proof, except for the exhaustive flag on truncated sequence spaces.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::map::SelfMap;
use crate::quadrature::{Integrand, QuadratureConfig};
use crate::space::{raw_distance, Point, Space};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Banach,
    Edelstein,
    Branciari,
    TContraction,
    TIntPhi,
}

impl KindName {
    pub const ALL: [KindName; 5] =
        [KindName::Banach, KindName::Edelstein, KindName::Branciari, KindName::TContraction, KindName::TIntPhi];

    pub fn as_str(self) -> &'static str {
        match self {
            KindName::Banach => "banach",
            KindName::Edelstein => "edelstein",
            KindName::Branciari => "branciari",
            KindName::TContraction => "t_contraction",
            KindName::TIntPhi => "t_int_phi",
        }
    }

    pub fn parse(text: &str) -> Result<KindName> {
        KindName::ALL
            .into_iter()
            .find(|k| k.as_str() == text.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown condition kind `{text}`")))
    }

    pub fn needs_aux(self) -> bool {
        matches!(self, KindName::TContraction | KindName::TIntPhi)
    }

    pub fn needs_integrand(self) -> bool {
        matches!(self, KindName::Branciari | KindName::TIntPhi)
    }
}

impl fmt::Display for KindName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionKind {
    /// `d(fx, fy) <= α d(x, y)`.
    Banach,
    /// `d(fx, fy) < d(x, y)` for every distinct pair.
    Edelstein,
    /// `Φ(d(fx, fy)) <= α Φ(d(x, y))`.
    Branciari(Integrand),
    /// `d(Tfx, Tfy) <= α d(Tx, Ty)`.
    TContraction(SelfMap),
    /// `Φ(d(Tfx, Tfy)) <= α Φ(d(Tx, Ty))`.
    TIntPhi(SelfMap, Integrand),
}

impl ConditionKind {
    pub fn name(&self) -> KindName {
        match self {
            ConditionKind::Banach => KindName::Banach,
            ConditionKind::Edelstein => KindName::Edelstein,
            ConditionKind::Branciari(_) => KindName::Branciari,
            ConditionKind::TContraction(_) => KindName::TContraction,
            ConditionKind::TIntPhi(..) => KindName::TIntPhi,
        }
    }

    /// Assembles a condition from optional auxiliary map and integrand.
    pub fn build(name: KindName, aux: Option<&SelfMap>, integrand: Option<&Integrand>) -> Result<ConditionKind> {
        let need_aux = || {
            aux.cloned().ok_or_else(|| Error::InvalidParameter(format!("{name} needs an auxiliary map T")))
        };
        let need_phi = || {
            integrand.cloned().ok_or_else(|| Error::InvalidParameter(format!("{name} needs an integrand")))
        };
        Ok(match name {
            KindName::Banach => ConditionKind::Banach,
            KindName::Edelstein => ConditionKind::Edelstein,
            KindName::Branciari => ConditionKind::Branciari(need_phi()?),
            KindName::TContraction => ConditionKind::TContraction(need_aux()?),
            KindName::TIntPhi => ConditionKind::TIntPhi(need_aux()?, need_phi()?),
        })
    }
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionKind::Banach | ConditionKind::Edelstein => write!(f, "{}", self.name()),
            ConditionKind::Branciari(phi) => write!(f, "branciari[phi: {phi}]"),
            ConditionKind::TContraction(t) => write!(f, "t_contraction[T: {t}]"),
            ConditionKind::TIntPhi(t, phi) => write!(f, "t_int_phi[T: {t}; phi: {phi}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// `HoldsOnTestedPairs` needs `α̂ <= 1 - margin`.
    pub margin: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { margin: 1e-6, quadrature: QuadratureConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PairOrigin {
    Enumerated { limit: u64, n_max: u64 },
    Sampled { count: usize, seed: u64 },
    Explicit,
}

/// A tested pair set together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    pairs: Vec<(Point, Point)>,
    origin: PairOrigin,
}

impl PairSet {
    pub fn enumerate(space: &Space, limit: u64) -> Result<PairSet> {
        let Space::Sequence { n_max } = *space else {
            return Err(Error::InvalidSpace("only sequence spaces can be enumerated".into()));
        };
        Ok(PairSet { pairs: space.enumerate_pairs(limit)?, origin: PairOrigin::Enumerated { limit, n_max } })
    }

    pub fn sample(space: &Space, count: usize, seed: u64) -> Result<PairSet> {
        Ok(PairSet { pairs: space.sample_pairs(count, seed)?, origin: PairOrigin::Sampled { count, seed } })
    }

    /// Exhaustive enumeration on sequence spaces, seeded sampling otherwise.
    pub fn standard(space: &Space, count: usize, seed: u64) -> Result<PairSet> {
        match *space {
            Space::Sequence { n_max } => PairSet::enumerate(space, n_max),
            Space::Interval { .. } => PairSet::sample(space, count, seed),
        }
    }

    pub fn explicit(pairs: Vec<(Point, Point)>) -> PairSet {
        PairSet { pairs, origin: PairOrigin::Explicit }
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    pub fn origin(&self) -> PairOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self.origin, PairOrigin::Enumerated { limit, n_max } if limit == n_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pair: (Point, Point),
    #[serde(with = "crate::serde_f64")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnTestedPairs,
    FailsWithWitness { witness: Witness },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::HoldsOnTestedPairs => "holds",
            Verdict::FailsWithWitness { .. } => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnTestedPairs)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::FailsWithWitness { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: KindName,
    pub condition: String,
    /// Largest defined ratio over the tested pairs.
    #[serde(with = "crate::serde_f64")]
    pub alpha_hat: f64,
    pub witness_max: Witness,
    pub verdict: Verdict,
    pub pairs_tested: usize,
    /// Pairs whose ratio is 0/0.
    pub pairs_skipped: usize,
    pub exhaustive: bool,
    pub pair_origin: PairOrigin,
    pub margin: f64,
}

/// The ratio whose supremum is the modulus of `kind`, or `None` for a 0/0
/// pair. A zero denominator under a positive numerator gives `+inf`.
pub fn pair_ratio(
    kind: &ConditionKind,
    space: &Space,
    f: &SelfMap,
    pair: (Point, Point),
    quad: &QuadratureConfig,
) -> Result<Option<f64>> {
    let (x, y) = pair;
    space.check(x)?;
    space.check(y)?;
    let fx = f.apply_in(space, x)?;
    let fy = f.apply_in(space, y)?;
    match kind {
        ConditionKind::Banach | ConditionKind::Edelstein => Ok(ratio(raw_distance(fx, fy), raw_distance(x, y))),
        ConditionKind::Branciari(phi) => phi.ratio(raw_distance(fx, fy), raw_distance(x, y), quad),
        ConditionKind::TContraction(t) => {
            let (num, den) = transported(space, t, (x, y), (fx, fy))?;
            Ok(ratio(num, den))
        }
        ConditionKind::TIntPhi(t, phi) => {
            let (num, den) = transported(space, t, (x, y), (fx, fy))?;
            phi.ratio(num, den, quad)
        }
    }
}

fn transported(space: &Space, t: &SelfMap, (x, y): (Point, Point), (fx, fy): (Point, Point)) -> Result<(f64, f64)> {
    let num = raw_distance(t.apply_in(space, fx)?, t.apply_in(space, fy)?);
    let den = raw_distance(t.apply_in(space, x)?, t.apply_in(space, y)?);
    Ok((num, den))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    match (num == 0.0, den == 0.0) {
        (true, true) => None,
        (false, true) => Some(f64::INFINITY),
        _ => Some(num / den),
    }
}

/// Ratios for every pair, evaluated in parallel; order matches `pairs` and
/// the first failing pair (in that order) determines the error.
pub fn pair_ratios(
    kind: &ConditionKind,
    space: &Space,
    f: &SelfMap,
    pairs: &[(Point, Point)],
    quad: &QuadratureConfig,
) -> Result<Vec<Option<f64>>> {
    let results: Vec<Result<Option<f64>>> =
        pairs.par_iter().map(|&pair| pair_ratio(kind, space, f, pair, quad)).collect();
    results.into_iter().collect()
}

pub fn estimate_modulus(
    kind: &ConditionKind,
    space: &Space,
    f: &SelfMap,
    pairs: &PairSet,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let ratios = pair_ratios(kind, space, f, pairs.pairs(), &opts.quadrature)?;

    let mut best: Option<usize> = None;
    let mut first_fail: Option<usize> = None;
    let mut skipped = 0;
    for (i, r) in ratios.iter().enumerate() {
        let Some(r) = *r else {
            skipped += 1;
            continue;
        };
        if best.is_none_or(|b| r > ratios[b].unwrap()) {
            best = Some(i);
        }
        if first_fail.is_none() && r >= 1.0 {
            first_fail = Some(i);
        }
    }
    let Some(best) = best else {
        return Err(Error::NoDefinedPairs { kind: kind.name().to_string(), skipped });
    };
    let witness_at = |i: usize| Witness { pair: pairs.pairs()[i], ratio: ratios[i].unwrap() };
    let alpha_hat = ratios[best].unwrap();

    let verdict = if let Some(i) = first_fail {
        Verdict::FailsWithWitness { witness: witness_at(i) }
    } else if kind.name() == KindName::Edelstein {
        Verdict::HoldsOnTestedPairs
    } else if alpha_hat > 1.0 - opts.margin {
        Verdict::Inconclusive { reason: format!("alpha_hat = {alpha_hat} lies within {} of 1", opts.margin) }
    } else if let Some(reason) = truncation_growth(pairs, &ratios, alpha_hat) {
        Verdict::Inconclusive { reason }
    } else {
        Verdict::HoldsOnTestedPairs
    };

    Ok(Certificate {
        kind: kind.name(),
        condition: kind.to_string(),
        alpha_hat,
        witness_max: witness_at(best),
        verdict,
        pairs_tested: ratios.len() - skipped,
        pairs_skipped: skipped,
        exhaustive: pairs.is_exhaustive(),
        pair_origin: pairs.origin(),
        margin: opts.margin,
    })
}

/// On an enumerated truncation, a modulus that is larger over `n <= limit`
/// than over `n <= limit / 2` has not settled: the supremum over the whole
/// space may be approached only as `n → ∞`.
fn truncation_growth(pairs: &PairSet, ratios: &[Option<f64>], alpha_hat: f64) -> Option<String> {
    let PairOrigin::Enumerated { limit, .. } = pairs.origin() else {
        return None;
    };
    let half = limit / 2;
    if half == 0 {
        return None;
    }
    let within_half = |p: Point| p.seq_index().is_some_and(|n| n <= half);
    let alpha_half = pairs
        .pairs()
        .iter()
        .zip(ratios)
        .filter(|((x, y), _)| within_half(*x) && within_half(*y))
        .filter_map(|(_, r)| *r)
        .fold(f64::NEG_INFINITY, f64::max);
    (alpha_hat > alpha_half).then(|| {
        format!(
            "alpha_hat is still rising with the truncation: {alpha_hat} over n <= {limit} against {alpha_half} over n <= {half}"
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxProbeConfig {
    pub samples: usize,
    pub seed: u64,
    /// Perturbation `h = rel_perturbation·(1 + |x|)`.
    pub rel_perturbation: f64,
    pub continuity_threshold: f64,
    pub escape_terms: u32,
    pub escape_tol: f64,
    pub x_max: f64,
}

impl Default for AuxProbeConfig {
    fn default() -> Self {
        AuxProbeConfig {
            samples: 200,
            seed: 0,
            rel_perturbation: 1e-6,
            continuity_threshold: 1e-3,
            escape_terms: 40,
            escape_tol: 1e-3,
            x_max: crate::space::DEFAULT_X_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SubseqStatus {
    GuaranteedCompact,
    /// `{T x_k}` settles along a diverging `{x_k}`; the witness lists `(x_k, T x_k)`.
    ProbeFailed { witness: Vec<(f64, f64)> },
    ProbePassed,
    Unknown { reason: String },
}

impl SubseqStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SubseqStatus::GuaranteedCompact => "guaranteed_compact",
            SubseqStatus::ProbeFailed { .. } => "probe_failed",
            SubseqStatus::ProbePassed => "probe_passed",
            SubseqStatus::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxReport {
    pub injective_on_samples: bool,
    pub continuity_probe: bool,
    pub subseq_convergent: SubseqStatus,
}

/// Heuristic checks of the hypotheses placed on the auxiliary map: one-to-one,
/// continuous and subsequentially convergent.
pub fn check_aux_map(space: &Space, t: &SelfMap, cfg: &AuxProbeConfig) -> Result<AuxReport> {
    let (injective_on_samples, continuity_probe) = match *space {
        Space::Sequence { n_max } => {
            let pts = space.points(n_max)?;
            let mut seen = HashSet::with_capacity(pts.len());
            let mut injective = true;
            for &p in &pts {
                let image = t.apply_in(space, p)?;
                injective &= seen.insert(point_key(image));
            }
            (injective, sequence_continuity(space, t, n_max)?)
        }
        Space::Interval { upper, .. } => {
            let samples: Vec<f64> = space
                .sample_pairs(cfg.samples.max(1), cfg.seed)?
                .into_iter()
                .flat_map(|(p, q)| [p.numeric_value(), q.numeric_value()])
                .collect();
            let mut images = std::collections::HashMap::with_capacity(samples.len());
            let mut injective = true;
            let mut continuous = true;
            for &x in &samples {
                let tx = t.apply_in(space, Point::Real(x))?.numeric_value();
                if let Some(prev) = images.insert(tx.to_bits(), x) {
                    injective &= prev == x;
                }
                let h = cfg.rel_perturbation * (1.0 + x.abs());
                let nudged = if upper.is_none_or(|u| x + h <= u) { x + h } else { x - h };
                let tn = t.apply_in(space, Point::Real(nudged))?.numeric_value();
                continuous &= (tn - tx).abs() <= cfg.continuity_threshold;
            }
            (injective, continuous)
        }
    };

    let subseq_convergent = if space.is_compact() {
        SubseqStatus::GuaranteedCompact
    } else {
        escape_probe(space, t, cfg)
    };

    Ok(AuxReport { injective_on_samples, continuity_probe, subseq_convergent })
}

fn point_key(p: Point) -> (u8, u64) {
    match p {
        Point::Real(x) => (0, x.to_bits()),
        Point::SeqIndex(n) => (1, n),
        Point::SeqZero => (2, 0),
    }
}

// The only non-isolated point is 0, so continuity means T(1/n) → T(0). The
// table passes when the tail over (N/2, N] is at most 3/4 of the tail over
// (N/4, N/2] (or vanishes).
fn sequence_continuity(space: &Space, t: &SelfMap, n_max: u64) -> Result<bool> {
    if n_max < 4 {
        return Ok(true);
    }
    let t0 = t.apply_in(space, Point::SeqZero)?;
    let tail = |lo: u64, hi: u64| -> Result<f64> {
        let mut sup = 0.0f64;
        for n in lo + 1..=hi {
            sup = sup.max(raw_distance(t.apply_in(space, Point::SeqIndex(n))?, t0));
        }
        Ok(sup)
    };
    let far = tail(n_max / 2, n_max)?;
    let near = tail(n_max / 4, n_max / 2)?;
    Ok(far == 0.0 || far <= 0.75 * near)
}

// Feeds x_k = a·2^k (or a + 2^k when a <= 0), capped at x_max, and asks
// whether {T x_k} settles while {x_k} runs off.
fn escape_probe(space: &Space, t: &SelfMap, cfg: &AuxProbeConfig) -> SubseqStatus {
    let Space::Interval { lower, upper: None } = *space else {
        return SubseqStatus::Unknown { reason: "escape probe needs an unbounded interval".into() };
    };
    let mut xs = Vec::new();
    for k in 0..cfg.escape_terms {
        let step = 2f64.powi(k as i32);
        let x = if lower > 0.0 { lower * step } else { lower + step };
        if x >= cfg.x_max {
            xs.push(cfg.x_max.max(lower));
            break;
        }
        xs.push(x);
    }
    if xs.len() < 5 {
        return SubseqStatus::Unknown { reason: format!("x_max = {} leaves too few probe terms", cfg.x_max) };
    }
    let mut witness = Vec::with_capacity(xs.len());
    for &x in &xs {
        match t.apply_in(space, Point::Real(x)) {
            Ok(tx) => witness.push((x, tx.numeric_value())),
            Err(e) => return SubseqStatus::Unknown { reason: format!("T failed on the probe sequence: {e}") },
        }
    }
    let tail = &witness[witness.len() - 4..];
    let last = tail[3].1;
    let spread = tail.iter().map(|w| (w.1 - last).abs()).fold(0.0, f64::max);
    let steps: Vec<f64> = tail.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let settling = steps.windows(2).all(|s| s[1] <= s[0]);
    if spread <= cfg.escape_tol * (1.0 + last.abs()) && settling {
        SubseqStatus::ProbeFailed { witness }
    } else {
        SubseqStatus::ProbePassed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub pair: (Point, Point),
    #[serde(with = "crate::serde_f64::option")]
    pub reduced: Option<f64>,
    #[serde(with = "crate::serde_f64::option")]
    pub classical: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityOutcome {
    pub identity: &'static str,
    #[serde(with = "crate::serde_f64")]
    pub max_deviation: f64,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub pairs_checked: usize,
    pub identities: Vec<IdentityOutcome>,
}

impl ReductionReport {
    pub fn all_hold(&self) -> bool {
        self.identities.iter().all(|i| i.mismatches.is_empty())
    }
}

pub const REDUCTION_TOL: f64 = 1e-12;

/// Checks, pair by pair, that the transported integral condition collapses
/// to the classical ones: `T = id, φ ≡ 1` gives Banach, `T = id` gives
/// Branciari with the same `φ`, and `φ ≡ 1` gives the T-contraction.
pub fn reduction_check(
    space: &Space,
    f: &SelfMap,
    t: &SelfMap,
    phi: &Integrand,
    pairs: &[(Point, Point)],
    quad: &QuadratureConfig,
) -> Result<ReductionReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("reduction check needs at least one pair".into()));
    }
    let one = Integrand::const_one();
    let cases = [
        ("t_int_phi(T = id, phi = 1) == banach", ConditionKind::TIntPhi(SelfMap::Identity, one.clone()), ConditionKind::Banach),
        (
            "t_int_phi(T = id, phi) == branciari(phi)",
            ConditionKind::TIntPhi(SelfMap::Identity, phi.clone()),
            ConditionKind::Branciari(phi.clone()),
        ),
        (
            "t_int_phi(T, phi = 1) == t_contraction(T)",
            ConditionKind::TIntPhi(t.clone(), one),
            ConditionKind::TContraction(t.clone()),
        ),
    ];
    let mut identities = Vec::with_capacity(cases.len());
    for (identity, reduced_kind, classical_kind) in cases {
        let reduced = pair_ratios(&reduced_kind, space, f, pairs, quad)?;
        let classical = pair_ratios(&classical_kind, space, f, pairs, quad)?;
        let mut max_deviation = 0.0f64;
        let mut mismatches = Vec::new();
        for ((&pair, &r), &c) in pairs.iter().zip(&reduced).zip(&classical) {
            let deviation = match (r, c) {
                (None, None) => 0.0,
                (Some(a), Some(b)) if a == b => 0.0,
                (Some(a), Some(b)) => (a - b).abs() / a.abs().max(b.abs()).max(1.0),
                _ => f64::INFINITY,
            };
            let deviation = if deviation.is_nan() { f64::INFINITY } else { deviation };
            max_deviation = max_deviation.max(deviation);
            if deviation > REDUCTION_TOL {
                mismatches.push(Mismatch { pair, reduced: r, classical: c });
            }
        }
        identities.push(IdentityOutcome { identity, max_deviation, mismatches });
    }
    Ok(ReductionReport { pairs_checked: pairs.len(), identities })
}
