//! Serializable descriptions of spaces, maps and integrands, as they appear
//! in configuration files and reports.

use serde::{Deserialize, Serialize};

use crate::expr::{AffineIndex, IndexRuleMap, ZeroRule};
use crate::map::SelfMap;
use crate::quadrature::{Builtin, Integrand, IntegrandForm};
use crate::space::Space;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDescriptor {
    Interval { lower: f64, upper: Option<f64> },
    Sequence { n_max: u64 },
}

impl SpaceDescriptor {
    pub fn build(&self) -> Result<Space> {
        match *self {
            SpaceDescriptor::Interval { lower, upper } => Space::interval(lower, upper),
            SpaceDescriptor::Sequence { n_max } => Space::sequence(n_max),
        }
    }
}

impl From<&Space> for SpaceDescriptor {
    fn from(space: &Space) -> Self {
        match *space {
            Space::Interval { lower, upper } => SpaceDescriptor::Interval { lower, upper },
            Space::Sequence { n_max } => SpaceDescriptor::Sequence { n_max },
        }
    }
}

/// `"zero"` or the index the zero point is sent to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZeroDescriptor {
    Named(ZeroKeyword),
    Index(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKeyword {
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapDescriptor {
    Expr { body: String },
    /// `[a, b]` stands for `n ↦ a·n + b`.
    IndexRules { odd: [i64; 2], even: [i64; 2], zero: ZeroDescriptor },
    Identity,
}

impl MapDescriptor {
    pub fn expr(body: impl Into<String>) -> Self {
        MapDescriptor::Expr { body: body.into() }
    }

    pub fn build(&self) -> Result<SelfMap> {
        Ok(match self {
            MapDescriptor::Expr { body } => SelfMap::parse_expr(body)?,
            MapDescriptor::IndexRules { odd, even, zero } => SelfMap::IndexRules(IndexRuleMap::new(
                AffineIndex::new(odd[0], odd[1]),
                AffineIndex::new(even[0], even[1]),
                match zero {
                    ZeroDescriptor::Named(ZeroKeyword::Zero) => ZeroRule::Zero,
                    ZeroDescriptor::Index(0) => {
                        return Err(Error::InvalidParameter("zero rule index must be >= 1".into()))
                    }
                    ZeroDescriptor::Index(n) => ZeroRule::Index(*n),
                },
            )),
            MapDescriptor::Identity => SelfMap::Identity,
        })
    }

    /// Builds the map and checks it against the space it will act on.
    pub fn build_for(&self, space: &Space) -> Result<SelfMap> {
        let map = self.build()?;
        match (&map, space) {
            (SelfMap::IndexRules(rules), Space::Sequence { n_max }) => rules.validate(*n_max)?,
            (SelfMap::IndexRules(_), Space::Interval { .. }) => {
                return Err(Error::InvalidParameter("index-rule maps act on sequence spaces only".into()))
            }
            _ => {}
        }
        Ok(map)
    }
}

impl From<&SelfMap> for MapDescriptor {
    fn from(map: &SelfMap) -> Self {
        match map {
            SelfMap::Identity => MapDescriptor::Identity,
            SelfMap::Expr(ast) => MapDescriptor::Expr { body: ast.to_string() },
            SelfMap::IndexRules(r) => MapDescriptor::IndexRules {
                odd: [r.odd.a, r.odd.b],
                even: [r.even.a, r.even.b],
                zero: match r.zero {
                    ZeroRule::Zero => ZeroDescriptor::Named(ZeroKeyword::Zero),
                    ZeroRule::Index(n) => ZeroDescriptor::Index(n),
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandDescriptor {
    Builtin { name: String },
    Expr { phi: String, domain_cap: f64 },
}

impl IntegrandDescriptor {
    pub fn builtin(name: impl Into<String>) -> Self {
        IntegrandDescriptor::Builtin { name: name.into() }
    }

    pub fn build(&self) -> Result<Integrand> {
        match self {
            IntegrandDescriptor::Builtin { name } => Integrand::by_name(name),
            IntegrandDescriptor::Expr { phi, domain_cap } => Integrand::from_expr(phi, *domain_cap),
        }
    }
}

impl From<&Integrand> for IntegrandDescriptor {
    fn from(phi: &Integrand) -> Self {
        match phi.form() {
            IntegrandForm::Builtin(b) => IntegrandDescriptor::Builtin { name: Builtin::name(*b).to_string() },
            IntegrandForm::Expr(ast) => IntegrandDescriptor::Expr { phi: ast.to_string(), domain_cap: phi.domain_cap() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Point;

    #[test]
    fn descriptor_json_forms() {
        let s: SpaceDescriptor = serde_json::from_str(r#"{"kind":"interval","lower":1,"upper":null}"#).unwrap();
        assert_eq!(s.build().unwrap(), Space::interval(1.0, None).unwrap());
        let s: SpaceDescriptor = serde_json::from_str(r#"{"kind":"sequence","n_max":200}"#).unwrap();
        assert_eq!(s.build().unwrap(), Space::sequence(200).unwrap());

        let m: MapDescriptor = serde_json::from_str(r#"{"kind":"expr","body":"2*sqrt(x)"}"#).unwrap();
        assert_eq!(m.build().unwrap().apply(Point::Real(4.0)).unwrap(), Point::Real(4.0));
        let m: MapDescriptor =
            serde_json::from_str(r#"{"kind":"index_rules","odd":[1,3],"even":[1,-1],"zero":"zero"}"#).unwrap();
        let f = m.build_for(&Space::sequence(200).unwrap()).unwrap();
        assert_eq!(f.apply(Point::SeqIndex(3)).unwrap(), Point::SeqIndex(6));
        assert_eq!(f.apply(Point::SeqZero).unwrap(), Point::SeqZero);
        let m: MapDescriptor =
            serde_json::from_str(r#"{"kind":"index_rules","odd":[1,0],"even":[1,0],"zero":5}"#).unwrap();
        assert_eq!(m.build().unwrap().apply(Point::SeqZero).unwrap(), Point::SeqIndex(5));

        let i: IntegrandDescriptor = serde_json::from_str(r#"{"kind":"builtin","name":"branciari_example"}"#).unwrap();
        assert_eq!(i.build().unwrap().domain_cap(), 1.0);
        let i: IntegrandDescriptor =
            serde_json::from_str(r#"{"kind":"expr","phi":"2*t","domain_cap":3}"#).unwrap();
        assert!((i.build().unwrap().integrate(2.0, &Default::default()).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_descriptors() {
        assert!(serde_json::from_str::<SpaceDescriptor>(r#"{"kind":"ball"}"#).is_err());
        assert!(serde_json::from_str::<MapDescriptor>(r#"{"kind":"expr","body":"x","extra":1}"#).is_err());
        assert!(serde_json::from_str::<MapDescriptor>(r#"{"kind":"index_rules","odd":[1],"even":[1,0],"zero":"zero"}"#)
            .is_err());
        let bad_zero = MapDescriptor::IndexRules { odd: [1, 0], even: [1, 0], zero: ZeroDescriptor::Index(0) };
        assert!(bad_zero.build().is_err());
        let shrinking = MapDescriptor::IndexRules { odd: [1, -2], even: [1, 0], zero: ZeroDescriptor::Index(1) };
        assert!(shrinking.build_for(&Space::sequence(20).unwrap()).is_err());
        let rules = MapDescriptor::IndexRules { odd: [1, 0], even: [1, 0], zero: ZeroDescriptor::Index(1) };
        assert!(rules.build_for(&Space::interval(0.0, None).unwrap()).is_err());
        assert!(MapDescriptor::expr("x +").build().is_err());
        assert!(IntegrandDescriptor::builtin("nope").build().is_err());
        assert!(SpaceDescriptor::Sequence { n_max: 0 }.build().is_err());
    }

    #[test]
    fn round_trips() {
        for text in [
            r#"{"kind":"identity"}"#,
            r#"{"kind":"expr","body":"ln(x) + 1"}"#,
            r#"{"kind":"index_rules","odd":[1,3],"even":[1,-1],"zero":"zero"}"#,
        ] {
            let d: MapDescriptor = serde_json::from_str(text).unwrap();
            let back = MapDescriptor::from(&d.build().unwrap());
            assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
        let phi = Integrand::from_expr("exp(t)", 2.0).unwrap();
        assert_eq!(IntegrandDescriptor::from(&phi), IntegrandDescriptor::Expr { phi: "exp(t)".into(), domain_cap: 2.0 });
        let space = Space::interval(0.0, Some(10.0)).unwrap();
        assert_eq!(SpaceDescriptor::from(&space).build().unwrap(), space);
    }
}
