//! Ready-made problem instances with expected certification outcomes and
//! fixed points, and a runner that checks every instance against them.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{
    check_aux_map, estimate_modulus, pair_ratio, reduction_check, AuxProbeConfig, AuxReport, Certificate,
    CertifyOptions, ConditionKind, KindName, PairSet, ReductionReport,
};
use crate::expr::{AffineIndex, IndexRuleMap, ZeroRule};
use crate::map::SelfMap;
use crate::quadrature::Integrand;
use crate::solver::{
    picard_iterate, run_diagnostics, uniqueness_probe, DiagnosticsConfig, DiagnosticsReport, FixedPointResult,
    StopRule, UniquenessReport,
};
use crate::space::{Point, Space};
use crate::{Error, Result};

pub const EXAMPLE_IDS: [&str; 4] = ["example-2.3", "example-3.4", "example-3.5", "banach-affine"];

/// Pairs drawn per certification on interval spaces.
pub const SAMPLED_PAIRS: usize = 1000;

pub const MIN_N_MAX: u64 = 10;

const BUNDLED_EXPECTED: &str = include_str!("../data/expected.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedVerdict {
    Holds,
    Fails,
    Inconclusive,
}

impl ExpectedVerdict {
    fn matches(self, cert: &Certificate) -> bool {
        match self {
            ExpectedVerdict::Holds => cert.verdict.is_holds(),
            ExpectedVerdict::Fails => cert.verdict.is_fails(),
            ExpectedVerdict::Inconclusive => cert.verdict.is_inconclusive(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaBound {
    pub value: Option<f64>,
    pub tol: Option<f64>,
    pub at_least: Option<f64>,
    pub at_most: Option<f64>,
    pub below: Option<f64>,
}

impl AlphaBound {
    pub fn check(&self, alpha: f64) -> bool {
        let tol = self.tol.unwrap_or(1e-9);
        self.value.is_none_or(|v| (alpha - v).abs() <= tol)
            && self.at_least.is_none_or(|lo| alpha >= lo)
            && self.at_most.is_none_or(|hi| alpha <= hi)
            && self.below.is_none_or(|hi| alpha < hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedWitness {
    pub kind: KindName,
    pub pair: [String; 2],
    pub ratio: f64,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
}

impl NamedWitness {
    pub fn check(&self, ratio: f64) -> bool {
        let err = (ratio - self.ratio).abs();
        self.abs_tol.is_none_or(|t| err <= t) && self.rel_tol.is_none_or(|t| err <= t * self.ratio.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedPoint {
    pub value: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedAux {
    pub injective: bool,
    pub continuity: bool,
    pub subseq: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedDiagnostics {
    pub alpha_from: KindName,
    pub step3: bool,
    pub step4: bool,
    pub step5: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub verdicts: BTreeMap<KindName, ExpectedVerdict>,
    #[serde(default)]
    pub alpha: BTreeMap<KindName, AlphaBound>,
    #[serde(default)]
    pub named_witnesses: Vec<NamedWitness>,
    /// `None` when the map has no fixed point.
    pub fixed_point: Option<ExpectedPoint>,
    pub solve_status: String,
    #[serde(default)]
    pub aux: Option<ExpectedAux>,
    #[serde(default)]
    pub diagnostics: Option<ExpectedDiagnostics>,
    #[serde(default)]
    pub uniqueness: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedFile {
    pub version: u32,
    pub instances: BTreeMap<String, Expected>,
}

impl ExpectedFile {
    pub fn bundled() -> ExpectedFile {
        Self::parse(BUNDLED_EXPECTED).expect("bundled expected values parse")
    }

    pub fn parse(text: &str) -> Result<ExpectedFile> {
        let file: ExpectedFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidExpected(e.to_string()))?;
        for id in EXAMPLE_IDS {
            if !file.instances.contains_key(id) {
                return Err(Error::InvalidExpected(format!("no entry for instance `{id}`")));
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ExpectedFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidExpected(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub id: String,
    pub space: Space,
    pub f: SelfMap,
    pub t: Option<SelfMap>,
    pub integrand: Option<Integrand>,
    pub x0: Point,
    pub stop: StopRule,
    pub uniqueness_starts: Vec<Point>,
    pub expected: Expected,
}

impl ProblemInstance {
    /// The integrand used by the integral conditions, `φ ≡ 1` when none is set.
    pub fn integrand_or_one(&self) -> Integrand {
        self.integrand.clone().unwrap_or_else(Integrand::const_one)
    }

    pub fn condition(&self, kind: KindName) -> Result<ConditionKind> {
        let phi = self.integrand_or_one();
        ConditionKind::build(kind, self.t.as_ref(), Some(&phi))
    }

    /// Replaces the truncation of a sequence space; interval spaces are left alone.
    pub fn with_n_max(mut self, n_max: u64) -> Result<ProblemInstance> {
        if let Space::Sequence { .. } = self.space {
            self.space = Space::sequence(n_max)?;
        }
        Ok(self)
    }

    /// Pairs used for certification: all pairs of a sequence space, or
    /// [`SAMPLED_PAIRS`] seeded samples of an interval.
    pub fn pair_set(&self, seed: u64) -> Result<PairSet> {
        PairSet::standard(&self.space, SAMPLED_PAIRS, seed)
    }
}

pub fn load_example(id: &str) -> Result<ProblemInstance> {
    load_example_with(id, &ExpectedFile::bundled())
}

pub fn load_example_with(id: &str, expected: &ExpectedFile) -> Result<ProblemInstance> {
    let exp = |id: &str| {
        expected.instances.get(id).cloned().ok_or_else(|| Error::InvalidExpected(format!("no entry for `{id}`")))
    };
    match id {
        "example-2.3" => Ok(ProblemInstance {
            id: id.into(),
            space: Space::interval(1.0, None)?,
            f: SelfMap::parse_expr("2*x")?,
            t: Some(SelfMap::parse_expr("1/x + 1")?),
            integrand: Some(Integrand::const_one()),
            x0: Point::Real(1.0),
            stop: StopRule::default(),
            uniqueness_starts: Vec::new(),
            expected: exp(id)?,
        }),
        "example-3.4" => example_3_4(2.0, expected),
        "example-3.5" => Ok(ProblemInstance {
            id: id.into(),
            space: Space::sequence(200)?,
            f: SelfMap::IndexRules(IndexRuleMap::new(AffineIndex::new(1, 3), AffineIndex::new(1, -1), ZeroRule::Zero)),
            t: Some(SelfMap::IndexRules(IndexRuleMap::new(
                AffineIndex::new(1, 1),
                AffineIndex::new(1, -1),
                ZeroRule::Zero,
            ))),
            integrand: Some(Integrand::branciari_example()),
            x0: Point::SeqIndex(2),
            stop: StopRule::with_tol(1e-8),
            uniqueness_starts: [1, 2, 7].map(Point::SeqIndex).to_vec(),
            expected: exp(id)?,
        }),
        "banach-affine" => Ok(ProblemInstance {
            id: id.into(),
            space: Space::interval(0.0, Some(10.0))?,
            f: SelfMap::parse_expr("x/2 + 1")?,
            t: None,
            integrand: None,
            x0: Point::Real(10.0),
            stop: StopRule::default(),
            uniqueness_starts: [0.0, 5.0, 10.0].map(Point::Real).to_vec(),
            expected: exp(id)?,
        }),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

/// `f(x) = k·√x`, `T(x) = ln x + 1` on `[1, ∞)`; the fixed point is `k²`.
pub fn example_3_4(k: f64, expected: &ExpectedFile) -> Result<ProblemInstance> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be a finite real >= 1, got {k}")));
    }
    let id = "example-3.4";
    let mut exp = expected.instances.get(id).cloned().ok_or_else(|| Error::InvalidExpected(format!("no entry for `{id}`")))?;
    if let Some(fp) = exp.fixed_point.as_mut() {
        fp.value = k * k;
    }
    Ok(ProblemInstance {
        id: id.into(),
        space: Space::interval(1.0, None)?,
        f: SelfMap::parse_expr(&format!("{k}*sqrt(x)"))?,
        t: Some(SelfMap::parse_expr("ln(x) + 1")?),
        integrand: Some(Integrand::const_one()),
        x0: Point::Real(1.0),
        stop: StopRule::with_tol(1e-12),
        uniqueness_starts: [1.0, 9.0, 100.0].map(Point::Real).to_vec(),
        expected: exp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    #[serde(flatten)]
    pub result: FixedPointResult,
    pub terminal: Point,
    pub trace_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub id: String,
    pub certificates: Vec<Certificate>,
    pub aux: Option<AuxReport>,
    pub reductions: Option<ReductionReport>,
    pub solve: Option<SolveSummary>,
    pub diagnostics: Option<DiagnosticsReport>,
    pub uniqueness: Option<UniquenessReport>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub n_max: u64,
    pub seed: u64,
    pub instances: Vec<InstanceReport>,
    pub passed: bool,
}

impl CorpusReport {
    /// `(instance, check, detail)` for every failed check.
    pub fn failures(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.instances.iter().flat_map(|inst| {
            inst.checks.iter().filter(|c| !c.passed).map(move |c| (inst.id.as_str(), c.check.as_str(), c.detail.as_str()))
        })
    }

    pub fn checks_run(&self) -> usize {
        self.instances.iter().map(|i| i.checks.len()).sum()
    }
}

pub fn run_all(n_max: u64, seed: u64) -> Result<CorpusReport> {
    run_all_with(&ExpectedFile::bundled(), n_max, seed)
}

pub fn run_all_with(expected: &ExpectedFile, n_max: u64, seed: u64) -> Result<CorpusReport> {
    if n_max < MIN_N_MAX {
        return Err(Error::InvalidParameter(format!("corpus runs need n_max >= {MIN_N_MAX}, got {n_max}")));
    }
    let instances: Vec<InstanceReport> = EXAMPLE_IDS
        .par_iter()
        .map(|id| match load_example_with(id, expected).and_then(|inst| inst.with_n_max(n_max)) {
            Ok(inst) => run_instance(&inst, seed),
            Err(e) => InstanceReport {
                id: id.to_string(),
                certificates: Vec::new(),
                aux: None,
                reductions: None,
                solve: None,
                diagnostics: None,
                uniqueness: None,
                checks: vec![CheckResult { check: "load".into(), passed: false, detail: e.to_string() }],
                passed: false,
            },
        })
        .collect();
    let passed = instances.iter().all(|i| i.passed);
    Ok(CorpusReport { n_max, seed, instances, passed })
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn push(&mut self, check: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(CheckResult { check: check.into(), passed, detail: detail.into() });
    }

    fn error(&mut self, check: impl Into<String>, e: &Error) {
        self.push(check, false, format!("error: {e}"));
    }
}

/// Certifies, probes and solves one instance and compares every outcome with
/// its expectations. Errors become failed checks.
pub fn run_instance(inst: &ProblemInstance, seed: u64) -> InstanceReport {
    let exp = &inst.expected;
    let mut checks = Checks(Vec::new());
    let opts = CertifyOptions::default();

    let mut certificates = Vec::new();
    let mut reductions = None;
    match inst.pair_set(seed) {
        Ok(pairs) => {
            for (&kind, &want) in &exp.verdicts {
                let cert = inst.condition(kind).and_then(|c| estimate_modulus(&c, &inst.space, &inst.f, &pairs, &opts));
                match cert {
                    Ok(cert) => {
                        checks.push(
                            format!("verdict:{kind}"),
                            want.matches(&cert),
                            format!("expected {want:?}, got {} (alpha_hat = {})", cert.verdict.label(), cert.alpha_hat),
                        );
                        if let Some(bound) = exp.alpha.get(&kind) {
                            checks.push(
                                format!("alpha:{kind}"),
                                bound.check(cert.alpha_hat),
                                format!("alpha_hat = {} against {bound:?}", cert.alpha_hat),
                            );
                        }
                        certificates.push(cert);
                    }
                    Err(e) => checks.error(format!("verdict:{kind}"), &e),
                }
            }
            if let (Some(t), true) = (&inst.t, exp.verdicts.contains_key(&KindName::TIntPhi)) {
                match reduction_check(&inst.space, &inst.f, t, &inst.integrand_or_one(), pairs.pairs(), &opts.quadrature) {
                    Ok(rep) => {
                        checks.push("reductions", rep.all_hold(), format!("{} pairs", rep.pairs_checked));
                        reductions = Some(rep);
                    }
                    Err(e) => checks.error("reductions", &e),
                }
            }
        }
        Err(e) => checks.error("pairs", &e),
    }
    finish(inst, seed, checks, certificates, reductions)
}

fn finish(
    inst: &ProblemInstance,
    seed: u64,
    mut checks: Checks,
    certificates: Vec<Certificate>,
    reductions: Option<ReductionReport>,
) -> InstanceReport {
    let exp = &inst.expected;
    let quad = CertifyOptions::default().quadrature;

    for w in &exp.named_witnesses {
        let name = format!("witness:{}({}, {})", w.kind, w.pair[0], w.pair[1]);
        let ratio = (|| {
            let pair = (Point::parse(&w.pair[0], &inst.space)?, Point::parse(&w.pair[1], &inst.space)?);
            pair_ratio(&inst.condition(w.kind)?, &inst.space, &inst.f, pair, &quad)
        })();
        match ratio {
            Ok(Some(r)) => checks.push(name, w.check(r) && r >= 1.0, format!("ratio {r}, expected {}", w.ratio)),
            Ok(None) => checks.push(name, false, "ratio undefined (0/0)"),
            Err(e) => checks.error(name, &e),
        }
    }

    let aux = inst.t.as_ref().and_then(|t| {
        let cfg = AuxProbeConfig { seed, ..Default::default() };
        match check_aux_map(&inst.space, t, &cfg) {
            Ok(rep) => Some(rep),
            Err(e) => {
                checks.error("aux", &e);
                None
            }
        }
    });
    if let (Some(want), Some(got)) = (&exp.aux, &aux) {
        checks.push("aux:injective", got.injective_on_samples == want.injective, format!("{}", got.injective_on_samples));
        checks.push("aux:continuity", got.continuity_probe == want.continuity, format!("{}", got.continuity_probe));
        let label = got.subseq_convergent.label();
        checks.push("aux:subseq", label == want.subseq, format!("expected {}, got {label}", want.subseq));
    }

    let solved = picard_iterate(&inst.space, &inst.f, inst.x0, &inst.stop);
    let mut diagnostics = None;
    let solve = match solved {
        Ok(res) => {
            let label = res.status.label();
            checks.push("solve:status", label == exp.solve_status, format!("expected {}, got {label}", exp.solve_status));
            let terminal = res.terminal();
            match (&exp.fixed_point, res.status.point()) {
                (Some(fp), Some(a)) => {
                    let err = (a.numeric_value() - fp.value).abs();
                    checks.push("solve:fixed_point", err <= fp.tol, format!("terminal {a}, |a - {}| = {err}", fp.value));
                }
                (Some(fp), None) => checks.push("solve:fixed_point", false, format!("no limit, expected {}", fp.value)),
                (None, Some(a)) => checks.push("solve:fixed_point", false, format!("converged to {a}, expected none")),
                (None, None) => checks.push("solve:fixed_point", true, "none, as expected"),
            }
            if let Some(want) = &exp.diagnostics {
                diagnostics = diagnose(inst, &res, want, &mut checks);
            }
            Some(SolveSummary { terminal, trace_len: res.trace.len(), result: res })
        }
        Err(e) => {
            checks.error("solve:status", &e);
            None
        }
    };

    let uniqueness = exp.uniqueness.and_then(|want| {
        match uniqueness_probe(&inst.space, &inst.f, &inst.uniqueness_starts, &inst.stop) {
            Ok(rep) => {
                let detail = format!("max disagreement {} against {}", rep.max_disagreement, rep.tolerance);
                checks.push("uniqueness", rep.agree == want, detail);
                Some(rep)
            }
            Err(e) => {
                checks.error("uniqueness", &e);
                None
            }
        }
    });

    let checks = checks.0;
    let passed = checks.iter().all(|c| c.passed);
    InstanceReport {
        id: inst.id.clone(),
        certificates,
        aux,
        reductions,
        solve,
        diagnostics,
        uniqueness,
        checks,
        passed,
    }
}

fn diagnose(
    inst: &ProblemInstance,
    res: &FixedPointResult,
    want: &ExpectedDiagnostics,
    checks: &mut Checks,
) -> Option<DiagnosticsReport> {
    let alpha = match estimate_alpha(inst, want.alpha_from) {
        Ok(a) => a,
        Err(e) => {
            checks.error("diagnostics", &e);
            return None;
        }
    };
    let t = inst.t.clone().unwrap_or(SelfMap::Identity);
    match run_diagnostics(&inst.space, &res.trace, &t, &inst.integrand_or_one(), alpha, &DiagnosticsConfig::default()) {
        Ok(rep) => {
            for (name, want, got) in [
                ("diagnostics:step3", want.step3, rep.step3_decay),
                ("diagnostics:step4", want.step4, rep.step4_bounded),
                ("diagnostics:step5", want.step5, rep.step5_cauchy),
            ] {
                checks.push(
                    name,
                    got.ok == want,
                    format!("ok = {}, worst {} at iteration {}", got.ok, got.worst_value, got.worst_index),
                );
            }
            Some(rep)
        }
        Err(e) => {
            checks.error("diagnostics", &e);
            None
        }
    }
}

/// The modulus fed to the diagnostics: the certified `alpha_hat` of `kind`.
fn estimate_alpha(inst: &ProblemInstance, kind: KindName) -> Result<f64> {
    let pairs = inst.pair_set(0)?;
    let cert = estimate_modulus(&inst.condition(kind)?, &inst.space, &inst.f, &pairs, &CertifyOptions::default())?;
    if !cert.verdict.is_holds() {
        return Err(Error::InvalidParameter(format!("{kind} does not hold, no modulus for the diagnostics")));
    }
    Ok(cert.alpha_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_loads() {
        for id in EXAMPLE_IDS {
            let inst = load_example(id).unwrap();
            assert_eq!(inst.id, id);
            assert!(inst.space.contains(inst.x0));
        }
        assert_eq!(load_example("example-9.9").unwrap_err(), Error::UnknownExample("example-9.9".into()));
    }

    #[test]
    fn example_3_4_parameter() {
        let inst = example_3_4(3.0, &ExpectedFile::bundled()).unwrap();
        assert_eq!(inst.f.apply(Point::Real(9.0)).unwrap(), Point::Real(9.0));
        assert_eq!(inst.expected.fixed_point.unwrap().value, 9.0);
        assert!(example_3_4(0.5, &ExpectedFile::bundled()).is_err());
        let res = picard_iterate(&inst.space, &inst.f, inst.x0, &inst.stop).unwrap();
        assert!((res.status.point().unwrap().numeric_value() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn affine_instance_passes() {
        let rep = run_instance(&load_example("banach-affine").unwrap(), 1);
        assert!(rep.passed, "{:#?}", rep.checks);
    }

    #[test]
    fn full_corpus_passes() {
        for n_max in [200, 10] {
            let rep = run_all(n_max, 1).unwrap();
            let failures: Vec<_> = rep.failures().collect();
            assert!(rep.passed, "n_max = {n_max}: {failures:#?}");
        }
        assert!(run_all(5, 1).is_err());
    }

    #[test]
    fn sequence_verdicts_ignore_the_seed() {
        let inst = load_example("example-3.5").unwrap().with_n_max(30).unwrap();
        let a = run_instance(&inst, 1);
        let b = run_instance(&inst, 99);
        assert_eq!(a.certificates, b.certificates);
    }

    #[test]
    fn mismatches_are_reported() {
        let mut expected = ExpectedFile::bundled();
        let inst = expected.instances.get_mut("banach-affine").unwrap();
        inst.verdicts.insert(KindName::Banach, ExpectedVerdict::Fails);
        inst.fixed_point = Some(ExpectedPoint { value: 3.0, tol: 1e-9 });
        let rep = run_all_with(&expected, 10, 1).unwrap();
        assert!(!rep.passed);
        let failed: Vec<_> = rep.failures().map(|(i, c, _)| (i, c)).collect();
        assert_eq!(failed, [("banach-affine", "verdict:banach"), ("banach-affine", "solve:fixed_point")]);
    }

    #[test]
    fn expected_file_validation() {
        assert!(matches!(ExpectedFile::parse("{"), Err(Error::InvalidExpected(_))));
        assert!(ExpectedFile::parse(r#"{"version":1,"instances":{}}"#).is_err());
        let mut value: serde_json::Value = serde_json::from_str(BUNDLED_EXPECTED).unwrap();
        value["instances"]["example-3.5"]["verdicts"]["banach"] = "sometimes".into();
        assert!(ExpectedFile::parse(&value.to_string()).is_err());
    }

    #[test]
    fn alpha_bounds() {
        let b = AlphaBound { value: Some(0.25), tol: Some(1e-9), at_most: Some(0.5), ..Default::default() };
        assert!(b.check(0.25 + 1e-10));
        assert!(!b.check(0.26));
        let band = AlphaBound { at_least: Some(0.9), below: Some(1.0), ..Default::default() };
        assert!(band.check(0.995) && !band.check(1.0) && !band.check(0.5));
    }
}
