//! Metric axioms on every space kind, checked in exact rational arithmetic
//! over the represented points, plus the link between the exact metric and
//! the `f64` distances the library returns (nearest-double rounding).

use fixlab_core::{Point, Space};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

const CASES: u32 = 10_000;

fn exact(p: Point) -> BigRational {
    match p {
        Point::Real(x) => BigRational::from_float(x).expect("finite point"),
        Point::SeqIndex(n) => BigRational::new(BigInt::from(1), BigInt::from(n)),
        Point::SeqZero => BigRational::zero(),
    }
}

fn exact_distance(p: Point, q: Point) -> BigRational {
    (exact(p) - exact(q)).abs()
}

fn is_nearest_double(d: f64, e: &BigRational) -> bool {
    let err = |v: f64| (BigRational::from_float(v).unwrap() - e).abs();
    let here = err(d);
    let up = err(d.next_up());
    let down = if d > 0.0 { err(d.next_down()) } else { here.clone() };
    here <= up && here <= down
}

fn check_triple(space: &Space, p: Point, q: Point, r: Point) -> Result<(), TestCaseError> {
    for (a, b) in [(p, q), (q, r), (p, r)] {
        let d = space.distance(a, b).unwrap();
        let e = exact_distance(a, b);
        prop_assert!(d >= 0.0, "negative distance {d} for ({a}, {b})");
        prop_assert_eq!(d.to_bits(), space.distance(b, a).unwrap().to_bits());
        prop_assert_eq!(d == 0.0, exact(a) == exact(b), "indiscernibles at ({}, {})", a, b);
        prop_assert!(is_nearest_double(d, &e), "{d} is not the nearest double to d({a}, {b})");
        prop_assert_eq!(space.distance(a, a).unwrap(), 0.0);
    }
    let (pq, qr, pr) = (exact_distance(p, q), exact_distance(q, r), exact_distance(p, r));
    prop_assert!(pr <= pq + qr, "triangle inequality fails at ({}, {}, {})", p, q, r);

    // rounding each side once costs at most a relative 2^-52 on the sum
    let (dpq, dqr, dpr) = (space.distance(p, q).unwrap(), space.distance(q, r).unwrap(), space.distance(p, r).unwrap());
    prop_assert!(dpr <= (dpq + dqr) * (1.0 + 4.0 * f64::EPSILON));
    Ok(())
}

fn bounded_point() -> impl Strategy<Value = Point> {
    prop_oneof![
        8 => -5.0..=7.0f64,
        1 => Just(-5.0),
        1 => Just(7.0),
        2 => (-5.0..7.0f64, 0u64..4).prop_map(|(x, k)| f64::from_bits(x.to_bits() + k)),
    ]
    .prop_map(Point::Real)
}

fn half_line_point() -> impl Strategy<Value = Point> {
    prop_oneof![
        4 => (0.0..1.0f64).prop_map(|u| (1.0 + u / (1.0 - u)).min(1e12)),
        2 => 1.0..2.0f64,
        2 => 1.0..1e12f64,
        1 => Just(1.0),
    ]
    .prop_map(Point::Real)
}

fn sequence_point() -> impl Strategy<Value = Point> {
    prop_oneof![
        1 => Just(Point::SeqZero),
        6 => (1u64..=200).prop_map(Point::SeqIndex),
        3 => (1u64..=1_000_000).prop_map(Point::SeqIndex),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn bounded_interval(p in bounded_point(), q in bounded_point(), r in bounded_point()) {
        let space = Space::interval(-5.0, Some(7.0)).unwrap();
        check_triple(&space, p, q, r)?;
    }

    #[test]
    fn half_line(p in half_line_point(), q in half_line_point(), r in half_line_point()) {
        let space = Space::interval(1.0, None).unwrap();
        check_triple(&space, p, q, r)?;
    }

    #[test]
    fn sequence_space(p in sequence_point(), q in sequence_point(), r in sequence_point()) {
        let space = Space::sequence(200).unwrap();
        check_triple(&space, p, q, r)?;
    }
}

#[test]
fn sampled_pairs_obey_the_axioms() {
    for space in [Space::interval(-5.0, Some(7.0)).unwrap(), Space::interval(1.0, None).unwrap(), Space::sequence(200).unwrap()]
    {
        let pairs = space.sample_pairs(3_000, 17).unwrap();
        for w in pairs.chunks(3).filter(|w| w.len() == 3) {
            check_triple(&space, w[0].0, w[1].0, w[2].1).unwrap();
        }
    }
}
