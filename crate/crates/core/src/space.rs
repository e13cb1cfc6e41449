//! Points, spaces and the metric `d(x, y) = |x - y|`.
//!
//! Sequence-space points are stored by integer index (plus a zero tag) and
//! never as the float `1/n`, so parity-based rules stay exact.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::{Error, Result};

/// Default cap applied when sampling unbounded intervals.
pub const DEFAULT_X_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// A finite real number in an interval space.
    Real(f64),
    /// The point `1/n` of the sequence space, `n >= 1`.
    SeqIndex(u64),
    /// The accumulation point `0` of the sequence space.
    SeqZero,
}

impl Point {
    pub fn numeric_value(self) -> f64 {
        match self {
            Point::Real(x) => x,
            Point::SeqIndex(n) => 1.0 / n as f64,
            Point::SeqZero => 0.0,
        }
    }

    /// Index of a sequence point, with `0` standing for [`Point::SeqZero`].
    pub fn seq_index(self) -> Option<u64> {
        match self {
            Point::Real(_) => None,
            Point::SeqIndex(n) => Some(n),
            Point::SeqZero => Some(0),
        }
    }

    /// Parses `"0"`, `"1/n"` or a decimal into a point of `space`.
    pub fn parse(text: &str, space: &Space) -> Result<Point> {
        let text = text.trim();
        let bad = || Error::InvalidParameter(format!("cannot read `{text}` as a point of {space}"));
        let value = match text.split_once('/') {
            Some((num, den)) => {
                let (num, den) = (num.trim(), den.trim());
                if matches!(space, Space::Sequence { .. }) && num == "1" {
                    let n: u64 = den.parse().map_err(|_| bad())?;
                    let p = if n >= 1 { Point::SeqIndex(n) } else { return Err(bad()) };
                    return space.check(p).map(|_| p);
                }
                let num: f64 = num.parse().map_err(|_| bad())?;
                let den: f64 = den.parse().map_err(|_| bad())?;
                num / den
            }
            None => text.parse::<f64>().map_err(|_| bad())?,
        };
        let p = match space {
            Space::Interval { .. } => Point::Real(value),
            Space::Sequence { .. } => {
                if value == 0.0 {
                    Point::SeqZero
                } else {
                    let n = (1.0 / value).round();
                    if n < 1.0 || 1.0 / n != value {
                        return Err(bad());
                    }
                    Point::SeqIndex(n as u64)
                }
            }
        };
        space.check(p).map(|_| p)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::SeqIndex(n) => write!(f, "1/{n}"),
            Point::SeqZero => f.write_str("0"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Real(x) => crate::serde_f64::serialize(x, s),
            other => s.collect_str(other),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Point, D::Error> {
        struct PointVisitor;

        impl Visitor<'_> for PointVisitor {
            type Value = Point;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a real number, \"0\" or \"1/n\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Point, E> {
                Ok(Point::Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Point, E> {
                Ok(Point::Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Point, E> {
                Ok(Point::Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Point, E> {
                if v == "0" {
                    return Ok(Point::SeqZero);
                }
                v.strip_prefix("1/")
                    .and_then(|n| n.parse::<u64>().ok())
                    .filter(|&n| n >= 1)
                    .map(Point::SeqIndex)
                    .ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }

        d.deserialize_any(PointVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Space {
    /// `[lower, upper]`, or `[lower, +inf)` when `upper` is `None`.
    Interval { lower: f64, upper: Option<f64> },
    /// `{1/n : n ∈ ℕ} ∪ {0}`; `n_max` bounds enumeration only.
    Sequence { n_max: u64 },
}

impl Space {
    pub fn interval(lower: f64, upper: Option<f64>) -> Result<Space> {
        if !lower.is_finite() {
            return Err(Error::InvalidSpace(format!("interval lower bound {lower} is not finite")));
        }
        if let Some(u) = upper {
            if !u.is_finite() || u < lower {
                return Err(Error::InvalidSpace(format!("interval bounds [{lower}, {u}] are invalid")));
            }
        }
        Ok(Space::Interval { lower, upper })
    }

    pub fn sequence(n_max: u64) -> Result<Space> {
        if n_max == 0 {
            return Err(Error::InvalidSpace("sequence space needs n_max >= 1".into()));
        }
        Ok(Space::Sequence { n_max })
    }

    pub fn is_compact(&self) -> bool {
        match self {
            Space::Interval { upper, .. } => upper.is_some(),
            Space::Sequence { .. } => true,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match (self, p) {
            (Space::Interval { lower, upper }, Point::Real(x)) => {
                x.is_finite() && x >= *lower && upper.is_none_or(|u| x <= u)
            }
            (Space::Sequence { .. }, Point::SeqIndex(n)) => n >= 1,
            (Space::Sequence { .. }, Point::SeqZero) => true,
            _ => false,
        }
    }

    pub(crate) fn check(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointNotInSpace { point: p.to_string(), space: self.to_string() })
        }
    }

    /// `|x - y|` for members of the space.
    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(raw_distance(p, q))
    }

    /// The truncated point list `{0} ∪ {1/n : n <= limit}` in enumeration order.
    pub fn points(&self, limit: u64) -> Result<Vec<Point>> {
        match *self {
            Space::Sequence { n_max } => {
                if limit > n_max {
                    return Err(Error::PairLimitExceeded { limit, n_max });
                }
                Ok(std::iter::once(Point::SeqZero).chain((1..=limit).map(Point::SeqIndex)).collect())
            }
            Space::Interval { .. } => {
                Err(Error::InvalidSpace("interval spaces cannot be enumerated".into()))
            }
        }
    }

    /// All unordered pairs of distinct points of the truncation, in
    /// lexicographic order of the point list.
    pub fn enumerate_pairs(&self, limit: u64) -> Result<Vec<(Point, Point)>> {
        let pts = self.points(limit)?;
        let mut pairs = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
        for (i, &p) in pts.iter().enumerate() {
            for &q in &pts[i + 1..] {
                pairs.push((p, q));
            }
        }
        Ok(pairs)
    }

    /// Deterministic pseudo-random distinct pairs.
    ///
    /// Bounded intervals are sampled uniformly. On `[a, +inf)` a uniform
    /// `u ∈ [0, 1)` is mapped to `a + u / (1 - u)` and capped at
    /// [`DEFAULT_X_MAX`]. Sequence spaces draw uniformly from the
    /// truncation `{0} ∪ {1/n : n <= n_max}`.
    pub fn sample_pairs(&self, count: usize, seed: u64) -> Result<Vec<(Point, Point)>> {
        self.sample_pairs_capped(count, seed, DEFAULT_X_MAX)
    }

    pub fn sample_pairs_capped(&self, count: usize, seed: u64, x_max: f64) -> Result<Vec<(Point, Point)>> {
        if count == 0 {
            return Err(Error::InvalidParameter("pair count must be at least 1".into()));
        }
        if let Space::Interval { lower, upper: Some(u) } = *self {
            if lower == u {
                return Err(Error::InvalidSpace("a single-point interval has no distinct pairs".into()));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::with_capacity(count);
        while pairs.len() < count {
            let p = self.sample_point(&mut rng, x_max);
            let mut q = self.sample_point(&mut rng, x_max);
            while q == p {
                q = self.sample_point(&mut rng, x_max);
            }
            pairs.push((p, q));
        }
        Ok(pairs)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, x_max: f64) -> Point {
        match *self {
            Space::Interval { lower, upper: Some(u) } => {
                let t: f64 = rng.random();
                Point::Real((lower + t * (u - lower)).min(u))
            }
            Space::Interval { lower, upper: None } => {
                let t: f64 = rng.random();
                Point::Real((lower + t / (1.0 - t)).min(x_max.max(lower)))
            }
            Space::Sequence { n_max } => match rng.random_range(0..=n_max) {
                0 => Point::SeqZero,
                n => Point::SeqIndex(n),
            },
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Interval { lower, upper: Some(u) } => write!(f, "[{lower}, {u}]"),
            Space::Interval { lower, upper: None } => write!(f, "[{lower}, +inf)"),
            Space::Sequence { n_max } => write!(f, "{{1/n}} ∪ {{0}} (n_max = {n_max})"),
        }
    }
}

/// `|x - y|` without membership checks, rounded once from the exact value:
/// `|1/m - 1/n|` is evaluated as `|m - n| / (m·n)` while `m·n` fits the mantissa.
pub(crate) fn raw_distance(p: Point, q: Point) -> f64 {
    const EXACT_LIMIT: u128 = 1 << f64::MANTISSA_DIGITS;
    match (p, q) {
        (Point::SeqIndex(m), Point::SeqIndex(n)) if m == n => 0.0,
        (Point::SeqIndex(m), Point::SeqIndex(n)) if (m as u128) * (n as u128) <= EXACT_LIMIT => {
            m.abs_diff(n) as f64 / (m as f64 * n as f64)
        }
        (Point::SeqZero, Point::SeqZero) => 0.0,
        _ => (p.numeric_value() - q.numeric_value()).abs(),
    }
}
