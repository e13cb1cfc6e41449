use std::fmt;

use serde::{Deserialize, Serialize};

use crate::space::Point;
use crate::{Error, Result};

/// `n ↦ a·n + b` on sequence indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineIndex {
    pub a: i64,
    pub b: i64,
}

impl AffineIndex {
    pub const fn new(a: i64, b: i64) -> Self {
        AffineIndex { a, b }
    }

    fn image(self, n: u64) -> Result<u64> {
        let result = i64::try_from(n)
            .ok()
            .and_then(|n| self.a.checked_mul(n))
            .and_then(|an| an.checked_add(self.b))
            .ok_or(Error::IndexRule { index: n, result: i64::MIN })?;
        if result < 1 {
            return Err(Error::IndexRule { index: n, result });
        }
        Ok(result as u64)
    }
}

/// Image of the zero point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroRule {
    Zero,
    Index(u64),
}

/// A case-defined self-map of `{1/n} ∪ {0}`: odd and even indices each get
/// an affine index transform, and `0` maps to a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRuleMap {
    pub odd: AffineIndex,
    pub even: AffineIndex,
    pub zero: ZeroRule,
}

impl IndexRuleMap {
    pub fn new(odd: AffineIndex, even: AffineIndex, zero: ZeroRule) -> Self {
        IndexRuleMap { odd, even, zero }
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        match p {
            Point::SeqZero => Ok(match self.zero {
                ZeroRule::Zero => Point::SeqZero,
                ZeroRule::Index(n) => Point::SeqIndex(n),
            }),
            Point::SeqIndex(n) => {
                let rule = if n % 2 == 1 { self.odd } else { self.even };
                rule.image(n).map(Point::SeqIndex)
            }
            Point::Real(_) => Err(Error::MapSpaceMismatch { map: self.to_string(), point: p.to_string() }),
        }
    }

    /// Confirms every index up to `n_max` has a valid image. Affine rules
    /// are monotone, so the extreme odd and even indices decide it.
    pub fn validate(&self, n_max: u64) -> Result<()> {
        if let ZeroRule::Index(0) = self.zero {
            return Err(Error::IndexRule { index: 0, result: 0 });
        }
        let last_odd = if n_max % 2 == 1 { n_max } else { n_max - 1 };
        for n in [1, last_odd] {
            self.odd.image(n)?;
        }
        if n_max >= 2 {
            let last_even = n_max - n_max % 2;
            for n in [2, last_even] {
                self.even.image(n)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for IndexRuleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zero = match self.zero {
            ZeroRule::Zero => "0".to_string(),
            ZeroRule::Index(n) => format!("1/{n}"),
        };
        write!(
            f,
            "index_rules(odd: n -> {}n{:+}, even: n -> {}n{:+}, 0 -> {zero})",
            self.odd.a, self.odd.b, self.even.a, self.even.b
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // f of the sequence-space example: odd n -> n + 3, even n -> n - 1, 0 -> 0.
    fn f() -> IndexRuleMap {
        IndexRuleMap::new(AffineIndex::new(1, 3), AffineIndex::new(1, -1), ZeroRule::Zero)
    }

    // T of the same example: odd n -> n + 1, even n -> n - 1, 0 -> 0.
    fn aux() -> IndexRuleMap {
        IndexRuleMap::new(AffineIndex::new(1, 1), AffineIndex::new(1, -1), ZeroRule::Zero)
    }

    #[test]
    fn spot_values() {
        assert_eq!(f().apply(Point::SeqIndex(2)).unwrap(), Point::SeqIndex(1));
        assert_eq!(f().apply(Point::SeqZero).unwrap(), Point::SeqZero);
        assert_eq!(aux().apply(Point::SeqIndex(3)).unwrap(), Point::SeqIndex(4));
        // f applied twice from 1/2 goes 1/2 -> 1 -> 1/4.
        let once = f().apply(Point::SeqIndex(2)).unwrap();
        assert_eq!(f().apply(once).unwrap(), Point::SeqIndex(4));
    }

    #[test]
    fn full_tables_up_to_ten() {
        let f_table = [4, 1, 6, 3, 8, 5, 10, 7, 12, 9];
        let t_table = [2, 1, 4, 3, 6, 5, 8, 7, 10, 9];
        // T∘f: odd n -> n + 2, even n -> n.
        let tf_table = [3, 2, 5, 4, 7, 6, 9, 8, 11, 10];
        for n in 1..=10u64 {
            let i = (n - 1) as usize;
            assert_eq!(f().apply(Point::SeqIndex(n)).unwrap(), Point::SeqIndex(f_table[i]), "f(1/{n})");
            assert_eq!(aux().apply(Point::SeqIndex(n)).unwrap(), Point::SeqIndex(t_table[i]), "T(1/{n})");
            let tf = aux().apply(f().apply(Point::SeqIndex(n)).unwrap()).unwrap();
            assert_eq!(tf, Point::SeqIndex(tf_table[i]), "Tf(1/{n})");
        }
    }

    #[test]
    fn invalid_images() {
        let bad = IndexRuleMap::new(AffineIndex::new(1, 0), AffineIndex::new(1, -2), ZeroRule::Zero);
        assert_eq!(bad.apply(Point::SeqIndex(2)), Err(Error::IndexRule { index: 2, result: 0 }));
        assert!(bad.validate(10).is_err());
        assert!(bad.validate(1).is_ok());
        assert!(f().validate(200).is_ok());
        let shrinking = IndexRuleMap::new(AffineIndex::new(-1, 5), AffineIndex::new(1, 0), ZeroRule::Zero);
        assert!(shrinking.validate(3).is_ok());
        assert!(shrinking.validate(5).is_err());
        assert!(f().apply(Point::Real(0.5)).is_err());
    }
}
