//! Run configuration: a JSON file, command-line overrides, and the resolved
//! settings every command works from.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fixlab_core::corpus::{self, ExpectedFile, ProblemInstance, SAMPLED_PAIRS};
use fixlab_core::descriptor::{IntegrandDescriptor, MapDescriptor, SpaceDescriptor};
use fixlab_core::{Integrand, KindName, Point, SelfMap, Space, StopRule};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Text,
    Structured,
}

/// A point given either as a JSON number or as text such as `"1/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointText {
    Number(f64),
    Text(String),
}

impl PointText {
    fn text(&self) -> String {
        match self {
            PointText::Number(x) => x.to_string(),
            PointText::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    pub step_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub divergence_bound: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional; an `example`
/// supplies defaults for the problem fields it leaves out.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub example: Option<String>,
    /// Parameter `k` of example-3.4.
    pub k: Option<f64>,
    pub space: Option<SpaceDescriptor>,
    pub f: Option<MapDescriptor>,
    pub t: Option<MapDescriptor>,
    pub integrand: Option<IntegrandDescriptor>,
    pub kinds: Option<Vec<KindName>>,
    /// Pairs sampled per condition on interval spaces.
    pub pairs: Option<usize>,
    pub n_max: Option<u64>,
    pub seed: Option<u64>,
    pub x0: Option<PointText>,
    pub stop: Option<StopConfig>,
    /// Modulus for the solve diagnostics; certified from the data when absent.
    pub alpha: Option<f64>,
    pub margin: Option<f64>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config { path: if path == "." { "<root>".into() } else { path }, message: e.into_inner().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub example: Option<String>,
    pub k: Option<f64>,
    pub kinds: Option<String>,
    pub x0: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub n_max: Option<u64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

/// Fully validated settings, echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub example: Option<String>,
    pub k: Option<f64>,
    pub space: SpaceDescriptor,
    pub f: MapDescriptor,
    pub t: Option<MapDescriptor>,
    pub integrand: Option<IntegrandDescriptor>,
    pub kinds: Vec<KindName>,
    pub pairs: usize,
    pub seed: u64,
    pub x0: Option<Point>,
    pub stop: StopRule,
    pub alpha: Option<f64>,
    pub margin: f64,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub built: Built,
}

/// The objects behind the descriptors of [`Resolved`].
#[derive(Debug, Clone, PartialEq)]
pub struct Built {
    pub space: Space,
    pub f: SelfMap,
    pub t: Option<SelfMap>,
    pub integrand: Option<Integrand>,
}

impl Built {
    pub fn integrand_or_one(&self) -> Integrand {
        self.integrand.clone().unwrap_or_else(Integrand::const_one)
    }
}

fn field(name: &str) -> impl FnOnce(fixlab_core::Error) -> CliError + '_ {
    move |source| CliError::Field { field: name.to_string(), source }
}

pub fn parse_kinds(text: &str) -> Result<Vec<KindName>, CliError> {
    if text.trim() == "all" {
        return Ok(KindName::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for part in text.split(',') {
        let kind = KindName::parse(part.trim()).map_err(field("kinds"))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

pub fn resolve(cfg: RunConfig, over: Overrides) -> Result<Resolved, CliError> {
    let example = over.example.or(cfg.example);
    let k = over.k.or(cfg.k);
    let instance: Option<ProblemInstance> = match (&example, k) {
        (Some(id), Some(k)) if id == "example-3.4" => {
            Some(corpus::example_3_4(k, &ExpectedFile::bundled()).map_err(field("k"))?)
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("`k` only applies to example-3.4".into()));
        }
        (Some(id), None) => Some(corpus::load_example(id).map_err(field("example"))?),
        (None, Some(_)) => return Err(CliError::Usage("`k` needs --example example-3.4".into())),
        (None, None) => None,
    };

    let mut space = match (&cfg.space, &instance) {
        (Some(d), _) => d.build().map_err(field("space"))?,
        (None, Some(inst)) => inst.space,
        (None, None) => return Err(CliError::Usage("no problem given: pass --example or a config with `space` and `f`".into())),
    };
    if let (Some(n_max), Space::Sequence { .. }) = (over.n_max.or(cfg.n_max), space) {
        space = Space::sequence(n_max).map_err(field("n_max"))?;
    }

    let f = match (&cfg.f, &instance) {
        (Some(d), _) => d.build_for(&space).map_err(field("f"))?,
        (None, Some(inst)) => inst.f.clone(),
        (None, None) => return Err(CliError::Usage("config has a `space` but no map `f`".into())),
    };
    let t = match (&cfg.t, &instance) {
        (Some(d), _) => Some(d.build_for(&space).map_err(field("t"))?),
        (None, Some(inst)) => inst.t.clone(),
        (None, None) => None,
    };
    let integrand = match (&cfg.integrand, &instance) {
        (Some(d), _) => Some(d.build().map_err(field("integrand"))?),
        (None, Some(inst)) => inst.integrand.clone(),
        (None, None) => None,
    };

    let kinds = match (over.kinds, cfg.kinds) {
        (Some(text), _) => parse_kinds(&text)?,
        (None, Some(list)) => list,
        (None, None) => KindName::ALL.iter().copied().filter(|k| t.is_some() || !k.needs_aux()).collect(),
    };
    if kinds.is_empty() {
        return Err(CliError::Usage("`kinds` is empty".into()));
    }
    if let Some(kind) = kinds.iter().find(|k| k.needs_aux() && t.is_none()) {
        return Err(CliError::Usage(format!("kind `{kind}` needs an auxiliary map `t`")));
    }

    let pairs = cfg.pairs.unwrap_or(SAMPLED_PAIRS);
    if pairs == 0 {
        return Err(CliError::Usage("`pairs` must be positive".into()));
    }

    let x0 = match (over.x0, cfg.x0, &instance) {
        (Some(text), _, _) => Some(Point::parse(&text, &space).map_err(field("x0"))?),
        (None, Some(p), _) => Some(Point::parse(&p.text(), &space).map_err(field("x0"))?),
        (None, None, Some(inst)) => Some(inst.x0),
        (None, None, None) => None,
    };

    let mut stop = instance.as_ref().map_or_else(StopRule::default, |inst| inst.stop);
    if let Some(s) = cfg.stop {
        stop.step_tol = s.step_tol.unwrap_or(stop.step_tol);
        stop.max_iters = s.max_iters.unwrap_or(stop.max_iters);
        stop.divergence_bound = s.divergence_bound.unwrap_or(stop.divergence_bound);
    }
    stop.step_tol = over.tol.unwrap_or(stop.step_tol);
    stop.max_iters = over.max_iters.unwrap_or(stop.max_iters);
    stop.validate().map_err(field("stop"))?;

    if let Some(alpha) = cfg.alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("`alpha` must lie in (0, 1), got {alpha}")));
        }
    }
    let margin = cfg.margin.unwrap_or(fixlab_core::CertifyOptions::default().margin);
    if !(0.0..1.0).contains(&margin) {
        return Err(CliError::Usage(format!("`margin` must lie in [0, 1), got {margin}")));
    }

    Ok(Resolved {
        example,
        k,
        space: SpaceDescriptor::from(&space),
        f: MapDescriptor::from(&f),
        t: t.as_ref().map(MapDescriptor::from),
        integrand: integrand.as_ref().map(IntegrandDescriptor::from),
        kinds,
        pairs,
        seed: over.seed.or(cfg.seed).unwrap_or(0),
        x0,
        stop,
        alpha: cfg.alpha,
        margin,
        format: over.format.or(cfg.format).unwrap_or_default(),
        built: Built { space, f, t, integrand },
    })
}

/// Settings of a corpus run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSettings {
    pub n_max: u64,
    pub seed: u64,
    /// `"bundled"` or the path of the expected-values file.
    pub expected: String,
    #[serde(skip)]
    pub expected_path: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

pub const DEFAULT_CORPUS_N_MAX: u64 = 200;

pub fn resolve_corpus(cfg: RunConfig, over: Overrides, expected: Option<PathBuf>) -> CorpusSettings {
    CorpusSettings {
        n_max: over.n_max.or(cfg.n_max).unwrap_or(DEFAULT_CORPUS_N_MAX),
        seed: over.seed.or(cfg.seed).unwrap_or(0),
        expected: expected.as_ref().map_or_else(|| "bundled".to_string(), |p| p.display().to_string()),
        expected_path: expected,
        format: over.format.or(cfg.format).unwrap_or_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_paths_in_errors() {
        let err = RunConfig::parse(r#"{"f": {"kind": "expr", "body": 3}}"#).unwrap_err();
        assert!(matches!(&err, CliError::Config { path, .. } if path == "f"), "{err}");
        let err = RunConfig::parse(r#"{"stop": {"step_tol": "small"}}"#).unwrap_err();
        assert!(matches!(&err, CliError::Config { path, .. } if path == "stop.step_tol"), "{err}");
        let err = RunConfig::parse(r#"{"seeds": 1}"#).unwrap_err();
        assert!(err.to_string().contains("seeds"), "{err}");
    }

    #[test]
    fn descriptor_errors_name_the_field() {
        let cfg = RunConfig::parse(
            r#"{"space": {"kind": "interval", "lower": 0, "upper": 1}, "f": {"kind": "expr", "body": "x +"}}"#,
        )
        .unwrap();
        let err = resolve(cfg, Overrides::default()).unwrap_err();
        assert!(err.to_string().starts_with("invalid value for `f`"), "{err}");
    }

    #[test]
    fn overrides_win() {
        let cfg = RunConfig::parse(r#"{"example": "example-3.5", "seed": 4, "stop": {"step_tol": 1e-3}}"#).unwrap();
        let over = Overrides { tol: Some(1e-4), n_max: Some(50), kinds: Some("banach, t_int_phi".into()), ..Default::default() };
        let r = resolve(cfg, over).unwrap();
        assert_eq!(r.stop.step_tol, 1e-4);
        assert_eq!(r.seed, 4);
        assert_eq!(r.built.space, Space::sequence(50).unwrap());
        assert_eq!(r.kinds, [KindName::Banach, KindName::TIntPhi]);
        assert_eq!(r.x0, Some(Point::SeqIndex(2)));
    }

    #[test]
    fn custom_problem() {
        let cfg = RunConfig::parse(
            r#"{"space": {"kind": "interval", "lower": 0, "upper": 10}, "f": {"kind": "expr", "body": "x/2 + 1"}, "x0": 3}"#,
        )
        .unwrap();
        let r = resolve(cfg, Overrides::default()).unwrap();
        assert_eq!(r.kinds, [KindName::Banach, KindName::Edelstein, KindName::Branciari]);
        assert_eq!(r.x0, Some(Point::Real(3.0)));
        let bad = Overrides { kinds: Some("t_contraction".into()), ..Default::default() };
        let cfg = RunConfig::parse(r#"{"space": {"kind": "interval", "lower": 0, "upper": 10}, "f": {"kind": "identity"}}"#)
            .unwrap();
        assert!(resolve(cfg, bad).is_err());
    }

    #[test]
    fn missing_problem_and_bad_values() {
        assert!(resolve(RunConfig::default(), Overrides::default()).is_err());
        let over = |x0: &str| Overrides { example: Some("example-3.5".into()), x0: Some(x0.into()), ..Default::default() };
        assert!(resolve(RunConfig::default(), over("0.3")).is_err());
        assert!(resolve(RunConfig::default(), over("1/4")).is_ok());
        let k = Overrides { example: Some("example-3.5".into()), k: Some(3.0), ..Default::default() };
        assert!(resolve(RunConfig::default(), k).is_err());
        let k = Overrides { example: Some("example-3.4".into()), k: Some(3.0), ..Default::default() };
        assert_eq!(resolve(RunConfig::default(), k).unwrap().f, MapDescriptor::expr("3*sqrt(x)"));
        assert!(parse_kinds("banach,nope").is_err());
        assert_eq!(parse_kinds("all").unwrap().len(), 5);
    }
}
