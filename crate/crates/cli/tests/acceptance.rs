//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed here and never loosened to pass.

use fixlab_core::corpus::{load_example, ProblemInstance};
use fixlab_core::{
    estimate_modulus, pair_ratio, picard_iterate, reduction_check, run_diagnostics, CertifyOptions, ConditionKind,
    DiagnosticsConfig, Integrand, KindName, PairSet, Point, QuadratureConfig, SolveStatus, Space, StopRule,
    SubseqStatus,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

const PHI_TEXT: &str = "t^(1/t - 2)*(1 - ln(t))";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// `Φ(τ) = τ^(1/τ)`, written out independently of the library.
fn big_phi(tau: f64) -> f64 {
    tau.powf(1.0 / tau)
}

fn certify(inst: &ProblemInstance, kind: KindName, pairs: &PairSet) -> fixlab_core::Certificate {
    estimate_modulus(&inst.condition(kind).unwrap(), &inst.space, &inst.f, pairs, &CertifyOptions::default()).unwrap()
}

fn criterion_1() -> Outcome {
    let inst = load_example("example-3.5").unwrap();
    let pairs = inst.pair_set(0).unwrap();
    let quad = QuadratureConfig::default();
    let refuting = (Point::SeqIndex(2), Point::SeqIndex(4));

    let banach = certify(&inst, KindName::Banach, &pairs);
    let banach_r = pair_ratio(&ConditionKind::Banach, &inst.space, &inst.f, refuting, &quad).unwrap().unwrap();
    let banach_ok = banach.verdict.is_fails() && (banach_r - 8.0 / 3.0).abs() <= 1e-9;

    let edelstein = certify(&inst, KindName::Edelstein, &pairs);

    let branciari = certify(&inst, KindName::Branciari, &pairs);
    let oracle = big_phi(2.0 / 3.0) / big_phi(0.25);
    let numeric_phi = Integrand::from_expr(PHI_TEXT, 1.0).unwrap();
    let numeric_r =
        pair_ratio(&ConditionKind::Branciari(numeric_phi), &inst.space, &inst.f, refuting, &quad).unwrap().unwrap();
    let closed_r = pair_ratio(&inst.condition(KindName::Branciari).unwrap(), &inst.space, &inst.f, refuting, &quad)
        .unwrap()
        .unwrap();
    let branciari_ok = branciari.verdict.is_fails()
        && ((numeric_r - oracle) / oracle).abs() <= 1e-6
        && ((closed_r - oracle) / oracle).abs() <= 1e-6;

    let tc = certify(&inst, KindName::TContraction, &pairs);
    let tc_ok = tc.verdict.is_inconclusive() && (0.99..1.0).contains(&tc.alpha_hat);

    let tip = certify(&inst, KindName::TIntPhi, &pairs);
    let tip_ok = tip.verdict.is_holds() && (tip.alpha_hat - 0.25).abs() <= 1e-9 && tip.alpha_hat <= 0.5;

    let exhaustive = [&banach, &edelstein, &branciari, &tc, &tip].iter().all(|c| c.exhaustive);
    outcome(
        banach_ok && edelstein.verdict.is_fails() && branciari_ok && tc_ok && tip_ok && exhaustive,
        format!(
            "banach {} (ratio at (1/2, 1/4) = {banach_r}), edelstein {}, branciari {} (ratio at (1/2, 1/4) = {numeric_r} \
             by quadrature, oracle {oracle}), t_contraction {} alpha_hat = {}, t_int_phi {} alpha_hat = {}; {} pairs, exhaustive = {exhaustive}",
            banach.verdict.label(),
            edelstein.verdict.label(),
            branciari.verdict.label(),
            tc.verdict.label(),
            tc.alpha_hat,
            tip.verdict.label(),
            tip.alpha_hat,
            pairs.len(),
        ),
    )
}

fn criterion_2() -> Outcome {
    let inst = load_example("example-3.5").unwrap();
    let res = picard_iterate(&inst.space, &inst.f, Point::SeqIndex(2), &StopRule::with_tol(1e-4)).unwrap();
    let want: Vec<Point> = [2, 1, 4, 3, 6, 5, 8].into_iter().map(Point::SeqIndex).collect();
    let prefix_ok = res.trace.len() >= 7 && res.trace[..7] == want[..];
    let terminal = res.terminal();
    let converged = matches!(res.status, SolveStatus::Converged { .. });
    let terminal_ok = terminal.numeric_value() <= 2e-4;
    outcome(
        converged && prefix_ok && terminal_ok,
        format!(
            "status {}, prefix exact = {prefix_ok}, terminal {terminal} = {} (bound 2e-4){}",
            res.status.label(),
            terminal.numeric_value(),
            if terminal_ok {
                String::new()
            } else {
                "; the step |1/(n-1) - 1/n| first drops below 1e-4 at n = 102, so a step-distance \
                 stop at that tolerance halts near 1/101"
                    .to_string()
            }
        ),
    )
}

fn sampled_ratio_error(inst: &ProblemInstance, kind: KindName, expected: f64) -> (usize, f64) {
    let pairs = PairSet::sample(&inst.space, 1000, 0).unwrap();
    let condition = inst.condition(kind).unwrap();
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    let mut defined = 0;
    for &pair in pairs.pairs() {
        if let Some(r) = pair_ratio(&condition, &inst.space, &inst.f, pair, &quad).unwrap() {
            defined += 1;
            worst = worst.max((r - expected).abs());
        }
    }
    (defined, worst)
}

fn criterion_3() -> Outcome {
    let inst = load_example("example-3.4").unwrap();
    let (defined, worst) = sampled_ratio_error(&inst, KindName::TContraction, 0.5);
    let res = picard_iterate(&inst.space, &inst.f, Point::Real(1.0), &inst.stop).unwrap();
    let limit = res.status.point().map(Point::numeric_value);
    let solve_ok = limit.is_some_and(|a| (a - 4.0).abs() <= 1e-9) && res.iterations <= 60;
    outcome(
        defined == 1000 && worst <= 1e-12 && solve_ok,
        format!(
            "{defined} pairs, max |ratio - 0.5| = {worst:e}; solve {} to {limit:?} in {} iterations",
            res.status.label(),
            res.iterations
        ),
    )
}

fn criterion_4() -> Outcome {
    let inst = load_example("example-2.3").unwrap();
    let (defined, worst) = sampled_ratio_error(&inst, KindName::TIntPhi, 0.5);
    let aux = fixlab_core::check_aux_map(&inst.space, inst.t.as_ref().unwrap(), &Default::default()).unwrap();
    let probe_failed = matches!(aux.subseq_convergent, SubseqStatus::ProbeFailed { .. });
    let res = picard_iterate(&inst.space, &inst.f, Point::Real(1.0), &inst.stop).unwrap();
    outcome(
        defined == 1000 && worst <= 1e-12 && probe_failed && res.status == SolveStatus::Diverged,
        format!(
            "{defined} pairs, max |ratio - 0.5| = {worst:e}; escape probe {}; solve {}",
            aux.subseq_convergent.label(),
            res.status.label()
        ),
    )
}

fn criterion_5() -> Outcome {
    let quad = QuadratureConfig::default();
    let builtin = Integrand::branciari_example();
    let parsed = Integrand::from_expr(PHI_TEXT, 1.0).unwrap();
    let mut worst = 0.0f64;
    for i in 1..=20 {
        let tau = 0.05 * i as f64;
        let oracle = big_phi(tau);
        for phi in [&builtin, &parsed] {
            let numeric = phi.integrate_numeric(tau, &quad).unwrap().value;
            worst = worst.max(((numeric - oracle) / oracle).abs());
        }
    }
    outcome(worst <= 1e-6, format!("20 values of tau, builtin and parsed integrand, max relative error {worst:e}"))
}

fn criterion_6() -> Outcome {
    let mut total = 0;
    let mut worst = 0.0f64;
    let mut all_hold = true;
    for (id, count) in [("example-2.3", 334), ("example-3.4", 333), ("example-3.5", 333)] {
        let inst = load_example(id).unwrap();
        let pairs = PairSet::sample(&inst.space, count, 6).unwrap();
        let rep = reduction_check(
            &inst.space,
            &inst.f,
            inst.t.as_ref().unwrap(),
            &inst.integrand_or_one(),
            pairs.pairs(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        total += rep.pairs_checked;
        all_hold &= rep.all_hold();
        worst = rep.identities.iter().map(|i| i.max_deviation).fold(worst, f64::max);
    }
    outcome(
        total >= 1000 && all_hold && worst <= 1e-12,
        format!("{total} pairs over three instances, three identities each, max deviation {worst:e}"),
    )
}

fn criterion_7() -> Outcome {
    let inst = load_example("example-3.5").unwrap();
    let t = inst.t.as_ref().unwrap();
    let phi = inst.integrand_or_one();
    let mut parts = Vec::new();
    let mut pass = true;
    for tol in [1e-4, 1e-8] {
        let res = picard_iterate(&inst.space, &inst.f, Point::SeqIndex(2), &StopRule::with_tol(tol)).unwrap();
        let cfg = DiagnosticsConfig { slack: 1e-9, ..Default::default() };
        let rep = run_diagnostics(&inst.space, &res.trace, t, &phi, 0.25, &cfg).unwrap();
        pass &= rep.all_ok() && rep.step3_decay.worst_value <= 0.0;
        parts.push(format!(
            "step_tol {tol:e}: {} points, step3 {} (worst {:e}), step4 {}, step5 {} (tail diameter {:e})",
            res.trace.len(),
            rep.step3_decay.ok,
            rep.step3_decay.worst_value,
            rep.step4_bounded.ok,
            rep.step5_cauchy.ok,
            rep.step5_cauchy.worst_value
        ));
    }
    outcome(pass, parts.join("; "))
}

fn exact(p: Point) -> BigRational {
    match p {
        Point::Real(x) => BigRational::from_float(x).unwrap(),
        Point::SeqIndex(n) => BigRational::new(BigInt::from(1), BigInt::from(n)),
        Point::SeqZero => BigRational::zero(),
    }
}

fn criterion_8() -> Outcome {
    let spaces = [Space::interval(-5.0, Some(7.0)).unwrap(), Space::interval(1.0, None).unwrap(), Space::sequence(200).unwrap()];
    let mut triples = 0;
    let mut exact_failures = 0;
    let mut rounding_failures = 0;
    let mut float_triangle_slips = 0;
    for (s, space) in spaces.iter().enumerate() {
        let pairs = space.sample_pairs(15_000, 100 + s as u64).unwrap();
        let points: Vec<Point> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
        for w in points.chunks_exact(3).take(10_000) {
            triples += 1;
            let (p, q, r) = (w[0], w[1], w[2]);
            let e = |a: Point, b: Point| (exact(a) - exact(b)).abs();
            let d = |a: Point, b: Point| space.distance(a, b).unwrap();
            for (a, b) in [(p, q), (q, r), (p, r)] {
                let (exact_ab, d_ab) = (e(a, b), d(a, b));
                let axioms = d_ab >= 0.0
                    && d_ab.to_bits() == d(b, a).to_bits()
                    && (d_ab == 0.0) == (exact(a) == exact(b))
                    && d(a, a) == 0.0
                    && e(b, a) == exact_ab;
                exact_failures += usize::from(!axioms);
                let err = |v: f64| (BigRational::from_float(v).unwrap() - &exact_ab).abs();
                let here = err(d_ab);
                let nearest = here <= err(d_ab.next_up()) && (d_ab == 0.0 || here <= err(d_ab.next_down()));
                rounding_failures += usize::from(!nearest);
            }
            exact_failures += usize::from(e(p, r) > e(p, q) + e(q, r));
            float_triangle_slips += usize::from(d(p, r) > d(p, q) + d(q, r));
        }
    }
    outcome(
        triples == 30_000 && exact_failures == 0 && rounding_failures == 0,
        format!(
            "{triples} triples over 3 spaces; axioms violated in exact arithmetic: {exact_failures}; \
             distances not the nearest double: {rounding_failures}; literal f64 triangle check off by \
             rounding on {float_triangle_slips} triples"
        ),
    )
}

fn criterion_9() -> Outcome {
    let run = || {
        let mut out = Vec::new();
        let code = fixlab_cli::run(["fixlab", "corpus", "--format", "structured", "--seed", "1"], &mut out, &mut Vec::new());
        (code, out)
    };
    let (code_a, a) = run();
    let (code_b, b) = run();
    outcome(
        code_a == 0 && code_b == 0 && !a.is_empty() && a == b,
        format!("two corpus runs, {} bytes each, identical = {}", a.len(), a == b),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("example-3.5 five-way verdict", criterion_1),
        ("example-3.5 solve", criterion_2),
        ("example-3.4 ratios and solve", criterion_3),
        ("example-2.3 ratios, escape probe, divergence", criterion_4),
        ("quadrature oracle", criterion_5),
        ("reduction identities", criterion_6),
        ("convergence diagnostics", criterion_7),
        ("metric axioms", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("[{}] {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
