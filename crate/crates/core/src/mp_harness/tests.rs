use super::*;
use crate::operator::grid_for;

fn p(n: usize, s: f64) -> FracParams {
    FracParams::new(n, s).unwrap()
}

#[test]
fn random_kappa_zero_constructions_pass() {
    let cases = random_weak_mp_cases(7, 20, 1.0 / 16.0).unwrap();
    assert_eq!(cases.len(), 20);
    for c in &cases {
        let cert = check_weak_mp(&c.input).unwrap();
        assert_eq!(cert.status, CertStatus::Pass, "{}: {cert:?}", c.description);
        assert!(cert.margins.values().all(|m| *m >= 0.0), "{cert:?}");
    }
}

#[test]
fn kappa_bound_holds() {
    for c in random_kappa_cases(3, 5, 1.0 / 16.0).unwrap() {
        let cert = check_weak_mp(&c.input).unwrap();
        assert_eq!(cert.status, CertStatus::Pass, "{}: {cert:?}", c.description);
        let norm = cert.measured["neg_part_l2"];
        assert!(norm > 0.0);
        assert!(cert.margins["bound"] >= 0.0);
    }
}

#[test]
fn bound_is_nearly_attained_by_scaled_negative_part() {
    // the torsion saturates lambda_1 ||psi||_2 <= |omega|^{1/2} up to a
    // geometric factor, so the margin is small relative to the bound
    let c = random_kappa_cases(11, 1, 1.0 / 16.0).unwrap().remove(0);
    let mut input = c.input;
    input.c_inf = 0.0;
    let g = input.v.grid().clone();
    let deep: Vec<usize> = (0..g.len()).filter(|&i| input.omega.signed_distance(&g.node(i)) >= 2.0 / 16.0).collect();
    let a = DiscreteOperator::new(input.params, g.h()).unwrap().apply(&input.v, &deep);
    input.kappa = a.iter().fold(0.0f64, |m, ai| m.max(-ai));
    let cert = check_weak_mp(&input).unwrap();
    assert_eq!(cert.status, CertStatus::Pass, "{cert:?}");
    let ratio = cert.measured["neg_part_l2"] / cert.measured["bound"];
    assert!(ratio > 0.3 && ratio <= 1.0, "{ratio}");
}

#[test]
fn zero_field_passes_at_the_bound() {
    let c = random_weak_mp_cases(1, 1, 1.0 / 16.0).unwrap().remove(0);
    let mut input = c.input;
    input.v = Field::zeros(input.v.grid().clone(), None);
    let cert = check_weak_mp(&input).unwrap();
    assert!(cert.passed());
    assert_eq!(cert.measured["neg_part_l2"], 0.0);
    assert_eq!(cert.margins["bound"], 0.0);
}

#[test]
fn preconditions_are_not_violations() {
    let c = random_weak_mp_cases(2, 1, 1.0 / 16.0).unwrap().remove(0);
    // not antisymmetric
    let mut bad = c.input.clone();
    let g = bad.v.grid().clone();
    let omega = bad.omega.clone();
    bad.v = Field::sample(g, None, &|x: &[f64]| if omega.contains(x) { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(check_weak_mp(&bad).unwrap().status, CertStatus::NotApplicable);
    // kappa above its threshold
    let mut big = c.input.clone();
    big.kappa = 1e6;
    assert_eq!(check_weak_mp(&big).unwrap().status, CertStatus::NotApplicable);
    // a subsolution
    let mut neg = c.input.clone();
    neg.v = neg.v.scaled(-1.0);
    assert_eq!(check_weak_mp(&neg).unwrap().status, CertStatus::NotApplicable);
    // grid not invariant under the reflection
    let mut off = c.input.clone();
    off.hs = HalfSpace::new(vec![1.0, 0.0], 0.01).unwrap();
    assert_eq!(check_weak_mp(&off).unwrap().status, CertStatus::NotApplicable);
}

#[test]
fn strong_mp_dichotomy() {
    let c = random_weak_mp_cases(5, 1, 1.0 / 16.0).unwrap().remove(0).input;
    let cert = check_strong_mp(&c.v, &c.hs, &c.omega, 0.0, c.params).unwrap();
    assert!(cert.passed());
    assert!(cert.measured["min_v_interior"] > 0.0);
    let zero = Field::zeros(c.v.grid().clone(), None);
    let cert = check_strong_mp(&zero, &c.hs, &c.omega, 0.0, c.params).unwrap();
    assert!(cert.passed());
    assert_eq!(cert.measured["max_abs_v_on_h"], 0.0);
    let cert = check_strong_mp(&c.v.scaled(-1.0), &c.hs, &c.omega, 0.0, c.params).unwrap();
    assert_eq!(cert.status, CertStatus::NotApplicable);
}

#[test]
fn strong_mp_on_ball_field_beyond_the_critical_plane() {
    // u = psi_B for the unit disc; with H = {x1 < 0.25} (direction -e1) the
    // difference u - u o Q is positive on the reflected cap
    let q = p(2, 0.5);
    let bt = BallTorsion::new(q, vec![0.0, 0.0], 1.0).unwrap();
    let hs = HalfSpace::new(vec![-1.0, 0.0], -0.25).unwrap();
    let grid = symmetric_grid(&hs, &[-1.1, -1.1], &[1.1, 1.1], 1.0 / 16.0).unwrap();
    let v = Field::sample(grid, None, &|x: &[f64]| bt.eval(x) - bt.eval(&hs.reflect(x))).unwrap();
    let cap = Domain::ball(vec![-0.5, 0.0], 0.2).unwrap();
    let cert = check_strong_mp(&v, &hs, &cap, 0.0, q);
    // v < 0 on part of H far from the cap, so the weak principle on this
    // omega is not applicable; positivity still shows directly
    let cert = cert.unwrap();
    assert_eq!(cert.status, CertStatus::NotApplicable);
    let g = v.grid();
    let min_cap = (0..g.len())
        .filter(|&i| {
            let x = g.node(i);
            hs.offset(&x) > 0.0 && bt.domain().contains(&hs.reflect(&x)) && bt.domain().contains(&x)
        })
        .map(|i| v.value(i))
        .fold(f64::INFINITY, f64::min);
    assert!(min_cap > 0.0, "{min_cap}");
}

#[test]
fn hopf_passes_and_scales() {
    let input = hopf_example(p(2, 0.5), 1.0 / 32.0, 0.2).unwrap();
    let cert = check_hopf(&input).unwrap();
    assert!(cert.passed(), "{cert:?}");
    let d = cert.measured["d"];
    assert!(d > 0.0);
    assert!(d >= cert.measured["d_barrier_route"], "{cert:?}");
    let doubled = HopfInput { v: input.v.scaled(2.0), ..input.clone() };
    let cert2 = check_hopf(&doubled).unwrap();
    assert!(((cert2.measured["d"] / d) - 2.0).abs() <= 1e-10);
    assert_ne!(cert.inputs_digest, cert2.inputs_digest);
}

#[test]
fn hopf_self_comparison() {
    let q = p(2, 0.5);
    let input = hopf_example(q, 1.0 / 32.0, 0.2).unwrap();
    let b1 = input.b1.clone();
    let k = input.k.clone();
    let hs = input.hs.clone();
    let part = move |x: &[f64]| b1.signed_distance(x).max(0.0).powf(0.5) + if k.contains(x) { 1.0 } else { 0.0 };
    let v = Field::sample(input.v.grid().clone(), None, &|x: &[f64]| part(x) - part(&hs.reflect(x))).unwrap();
    let cert = check_hopf(&HopfInput { v, ..input }).unwrap();
    assert!((cert.measured["d"] - 1.0).abs() <= 4.0 * f64::EPSILON);
}

#[test]
fn hopf_smaller_k_needs_larger_alpha() {
    let q = p(2, 0.5);
    let big = check_hopf(&hopf_example(q, 1.0 / 32.0, 0.2).unwrap()).unwrap();
    let small = check_hopf(&hopf_example(q, 1.0 / 32.0, 0.1).unwrap()).unwrap();
    assert!(big.passed() && small.passed());
    assert!(small.measured["c1"] < big.measured["c1"]);
    assert!(small.measured["alpha"] > big.measured["alpha"]);
    assert!(small.measured["d_barrier_route"] < big.measured["d_barrier_route"]);
    let ratio = (small.measured["alpha"] * small.measured["c1"]) / (big.measured["alpha"] * big.measured["c1"]);
    assert!((ratio - 1.0).abs() < 1e-12);
}

#[test]
fn hopf_hypotheses() {
    let q = p(2, 0.5);
    let mut input = hopf_example(q, 1.0 / 32.0, 0.2).unwrap();
    input.c_bound = 1e3;
    assert_eq!(check_hopf(&input).unwrap().status, CertStatus::NotApplicable);
    let mut input = hopf_example(q, 1.0 / 32.0, 0.2).unwrap();
    input.k = Domain::ball(vec![0.9, 0.0], 0.1).unwrap();
    assert_eq!(check_hopf(&input).unwrap().status, CertStatus::NotApplicable);
}

#[test]
fn corner_barrier_growth() {
    let q = p(2, 0.5);
    let (ok, zero) = corner_examples(q, 1.0 / 64.0).unwrap();
    let cert = check_corner_lemma(&ok).unwrap();
    assert!(cert.passed(), "{cert:?}");
    assert!((cert.measured["growth_exponent"] - 1.5).abs() <= 0.05, "{cert:?}");
    let c = cert.measured["growth_constant"];
    assert!((c / 2f64.sqrt() - 1.0).abs() <= 0.1, "{c}");
    assert!(cert.measured["barrier_m"] > 0.0);
    let neg = check_corner_lemma(&zero).unwrap();
    assert_eq!(neg.status, CertStatus::Fail);
}

#[test]
fn corner_ladder_too_short() {
    let q = p(2, 0.5);
    let (ok, _) = corner_examples(q, 1.0 / 16.0).unwrap();
    assert_eq!(check_corner_lemma(&ok).unwrap().status, CertStatus::Inconclusive);
}

#[test]
fn decay_lemma_controls() {
    let (ball, ellipse) = decay_examples(p(2, 0.5)).unwrap();
    assert!(ball.passed(), "{ball:?}");
    assert_eq!(ball.measured["first_ratio"], 0.0);
    assert_eq!(ellipse.status, CertStatus::Fail, "{ellipse:?}");
    assert!(ellipse.measured["last_ratio"] > 0.5 * ellipse.measured["first_ratio"]);
}

#[test]
fn decay_on_a_grid_field() {
    let q = p(2, 0.5);
    let bt = BallTorsion::new(q, vec![0.0, 0.0], 1.0).unwrap();
    let d = bt.domain();
    let u = Field::sample(grid_for(&d, 1.0 / 64.0).unwrap(), Some(d), &bt).unwrap();
    let cfg = ContactConfig { point: vec![0.0, -1.0], plane_normal: vec![1.0, 0.0], inner_normal: vec![0.0, 1.0] };
    let cert = check_decay_lemma(&u, &cfg, q, &DecayOptions { t0: 0.25, floor: 2.0 / 64.0, levels: 8 }).unwrap();
    assert!(cert.passed());
    let short = check_decay_lemma(&u, &cfg, q, &DecayOptions { t0: 0.1, floor: 2.0 / 64.0, levels: 8 }).unwrap();
    assert_eq!(short.status, CertStatus::Inconclusive);
}

#[test]
fn certificates_are_reproducible() {
    let a = check_weak_mp(&random_weak_mp_cases(9, 1, 1.0 / 16.0).unwrap()[0].input).unwrap();
    let b = check_weak_mp(&random_weak_mp_cases(9, 1, 1.0 / 16.0).unwrap()[0].input).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = check_weak_mp(&random_weak_mp_cases(10, 1, 1.0 / 16.0).unwrap()[0].input).unwrap();
    assert_ne!(a.inputs_digest, c.inputs_digest);
    assert_eq!(a.inputs_digest.len(), 64);
}

#[test]
fn symmetric_grid_is_invariant() {
    let hs = HalfSpace::new(vec![0.0, -1.0], -0.3).unwrap();
    let g = symmetric_grid(&hs, &[-1.0, 0.5], &[1.0, 2.0], 0.1).unwrap();
    for i in 0..g.len() {
        assert!(g.node_at(&hs.reflect(&g.node(i)), 1e-6).is_some());
    }
    assert!(symmetric_grid(&HalfSpace::new(vec![0.6, 0.8], 0.0).unwrap(), &[0.0, 0.0], &[1.0, 1.0], 0.1).is_err());
}

#[test]
fn suite_names_parse() {
    assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
    assert_eq!("hopf".parse::<Suite>().unwrap(), Suite::Hopf);
    assert!("nope".parse::<Suite>().is_err());
}
