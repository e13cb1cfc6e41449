//! Self-maps, in either expression or index-rule form.

use std::fmt;

use crate::expr::{ExprAst, FreeVar, IndexRuleMap};
use crate::space::{Point, Space};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SelfMap {
    Identity,
    /// A formula in `x`, acting on interval spaces.
    Expr(ExprAst),
    /// Parity cases, acting on the sequence space.
    IndexRules(IndexRuleMap),
}

impl SelfMap {
    pub fn parse_expr(body: &str) -> Result<SelfMap> {
        Ok(SelfMap::Expr(ExprAst::parse(body, FreeVar::X)?))
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        match self {
            SelfMap::Identity => Ok(p),
            SelfMap::Expr(ast) => match p {
                Point::Real(x) => Ok(Point::Real(ast.evaluate(x)?)),
                _ => Err(Error::MapSpaceMismatch { map: self.to_string(), point: p.to_string() }),
            },
            SelfMap::IndexRules(rules) => rules.apply(p),
        }
    }

    /// Applies the map and checks the image stays in `space`.
    pub fn apply_in(&self, space: &Space, p: Point) -> Result<Point> {
        let image = self.apply(p)?;
        space.check(image)?;
        Ok(image)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, SelfMap::Identity)
    }
}

impl fmt::Display for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelfMap::Identity => f.write_str("identity"),
            SelfMap::Expr(ast) => write!(f, "x -> {ast}"),
            SelfMap::IndexRules(rules) => rules.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_maps_respect_the_space() {
        let half_line = Space::interval(1.0, None).unwrap();
        let halve = SelfMap::parse_expr("x/2").unwrap();
        assert_eq!(halve.apply(Point::Real(4.0)).unwrap(), Point::Real(2.0));
        assert!(matches!(halve.apply_in(&half_line, Point::Real(1.0)), Err(Error::PointNotInSpace { .. })));
        assert!(halve.apply(Point::SeqIndex(2)).is_err());
        assert_eq!(SelfMap::Identity.apply(Point::SeqIndex(9)).unwrap(), Point::SeqIndex(9));
    }
}
