use fixlab_core::corpus::{load_example, run_all};
use fixlab_core::{
    estimate_modulus, pair_ratio, picard_iterate, CertifyOptions, ConditionKind, Integrand, KindName, PairSet,
    Point, SelfMap, SolveStatus, Space, StopRule,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // f(x) = a x + b on [0, 10] with image inside the interval
    #[test]
    fn affine_contractions(a in 0.05..0.95f64, b_frac in 0.0..1.0f64, seed in any::<u64>()) {
        let b = b_frac * 10.0 * (1.0 - a);
        let space = Space::interval(0.0, Some(10.0)).unwrap();
        let f = SelfMap::parse_expr(&format!("{a}*x + {b}")).unwrap();
        let pairs = PairSet::sample(&space, 200, seed).unwrap();
        let cert = estimate_modulus(&ConditionKind::Banach, &space, &f, &pairs, &CertifyOptions::default()).unwrap();
        prop_assert!((cert.alpha_hat - a).abs() <= 1e-6 * (1.0 + 1.0 / a), "alpha_hat {} for a = {a}", cert.alpha_hat);
        prop_assert!(cert.verdict.is_holds());

        let res = picard_iterate(&space, &f, Point::Real(10.0), &StopRule::with_tol(1e-12)).unwrap();
        let fixed = b / (1.0 - a);
        match res.status {
            SolveStatus::Converged { point } => prop_assert!((point.numeric_value() - fixed).abs() <= 1e-9),
            other => prop_assert!(false, "{other:?}"),
        }
    }

    // every integral condition with φ ≡ 1 agrees with its plain counterpart
    #[test]
    fn unit_integrand_changes_nothing(x in 1.0..50.0f64, y in 1.0..50.0f64) {
        let space = Space::interval(1.0, None).unwrap();
        let inst = load_example("example-3.4").unwrap();
        let t = inst.t.clone().unwrap();
        let one = Integrand::const_one();
        let quad = Default::default();
        let pair = (Point::Real(x), Point::Real(y));
        let plain = pair_ratio(&ConditionKind::TContraction(t.clone()), &space, &inst.f, pair, &quad).unwrap();
        let integral = pair_ratio(&ConditionKind::TIntPhi(t, one.clone()), &space, &inst.f, pair, &quad).unwrap();
        prop_assert_eq!(plain, integral);
        let banach = pair_ratio(&ConditionKind::Banach, &space, &inst.f, pair, &quad).unwrap();
        let branciari = pair_ratio(&ConditionKind::Branciari(one), &space, &inst.f, pair, &quad).unwrap();
        prop_assert_eq!(banach, branciari);
    }
}

#[test]
fn sequence_verdicts_are_stable_across_truncations() {
    let base = load_example("example-3.5").unwrap();
    for n_max in [10, 25, 60] {
        let inst = base.clone().with_n_max(n_max).unwrap();
        let pairs = inst.pair_set(0).unwrap();
        let labels: Vec<&str> = KindName::ALL
            .iter()
            .map(|&k| {
                estimate_modulus(&inst.condition(k).unwrap(), &inst.space, &inst.f, &pairs, &CertifyOptions::default())
                    .unwrap()
                    .verdict
                    .label()
            })
            .collect();
        assert_eq!(labels, ["fails", "fails", "fails", "inconclusive", "holds"], "n_max = {n_max}");
    }
}

#[test]
fn corpus_reports_are_reproducible() {
    let a = serde_json::to_string(&run_all(40, 5).unwrap()).unwrap();
    let b = serde_json::to_string(&run_all(40, 5).unwrap()).unwrap();
    assert_eq!(a, b);
}
