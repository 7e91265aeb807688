use super::*;
use crate::closed_form::BallTorsion;
use crate::constants::FracParams;
use crate::operator::grid_for;
use crate::solver::{solve_dirichlet, SolveConfig};
use proptest::prelude::*;

fn p(n: usize, s: f64) -> FracParams {
    FracParams::new(n, s).unwrap()
}

fn unit(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

fn sampled(d: &Domain, h: f64, f: &(impl Fn(&[f64]) -> f64 + Sync)) -> Field {
    Field::sample(grid_for(d, h).unwrap(), Some(d.clone()), f).unwrap()
}

#[test]
fn ball_critical_plane_through_center() {
    let d = Domain::ball(vec![0.3, -0.2], 1.5).unwrap();
    for k in 0..16 {
        let e = unit(0.37 + k as f64 * std::f64::consts::TAU / 16.0);
        let cp = find_critical_plane(&d, &e).unwrap();
        let expect = dot(&e, &[0.3, -0.2]);
        assert!((cp.lambda0 - expect).abs() < 1e-4, "{k}: {} vs {expect}", cp.lambda0);
        assert_eq!(cp.situation, Situation::OrthogonalContact);
        assert!(cp.both, "the whole reflected cap lands on the sphere");
    }
}

#[test]
fn interval_critical_plane() {
    let d = Domain::interval(-1.0, 3.0).unwrap();
    let cp = find_critical_plane(&d, &[1.0]).unwrap();
    assert!((cp.lambda0 - 1.0).abs() < 1e-5);
    // no boundary point lies on the plane in one dimension
    assert_eq!(cp.situation, Situation::InternalTouch);
    assert!((cp.contact_point[0] + 1.0).abs() < 1e-4);
}

#[test]
fn ellipse_planes() {
    let d = Domain::ellipsoid(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
    let major = find_critical_plane(&d, &[1.0, 0.0]).unwrap();
    assert!(major.lambda0.abs() < 1e-4);
    assert_eq!(major.situation, Situation::OrthogonalContact);

    // off the axes the cap leaves where the normal turns orthogonal to e:
    // tan t = -b/a on (a cos t, b sin t)
    let (a, b) = (1.0f64, 0.5f64);
    let diag = find_critical_plane(&d, &unit(std::f64::consts::FRAC_PI_4)).unwrap();
    let expect = (a * a - b * b) / (2.0 * (a * a + b * b)).sqrt();
    assert!((diag.lambda0 - expect).abs() < 1e-4, "{} vs {expect}", diag.lambda0);
    assert_eq!(diag.situation, Situation::OrthogonalContact);
    assert!(!diag.both);
    let r = (a * a + b * b).sqrt();
    let p0 = [a * a / r, -b * b / r];
    assert!((diag.contact_point[0] - p0[0]).hypot(diag.contact_point[1] - p0[1]) < 1e-2);
}

#[test]
fn two_balls_stop_at_right_center() {
    let d =
        Domain::union(vec![Domain::ball(vec![-2.0, 0.0], 1.0).unwrap(), Domain::ball(vec![2.0, 0.0], 1.0).unwrap()])
            .unwrap();
    let cp = find_critical_plane(&d, &[1.0, 0.0]).unwrap();
    assert!((cp.lambda0 - 2.0).abs() < 1e-4, "{}", cp.lambda0);
    assert!(!cp.margin_history.is_empty());
}

#[test]
fn aligned_lattices() {
    let g = Grid::new(vec![-1.0, -0.5], 0.25, vec![9, 5]).unwrap();
    assert_eq!(aligned_lattice(&g, &[1.0, 0.0]), Some((-1.0, 0.125)));
    assert_eq!(aligned_lattice(&g, &[0.0, -1.0]), Some((0.5, 0.125)));
    let (b, s) = aligned_lattice(&g, &unit(std::f64::consts::FRAC_PI_4)).unwrap();
    assert!((b - (-1.5) / 2f64.sqrt()).abs() < 1e-14);
    assert!((s - 0.25 / 2f64.sqrt()).abs() < 1e-14);
    assert_eq!(aligned_lattice(&g, &unit(0.3)), None);
    let up = snap_up(&g, &[1.0, 0.0], 0.01).unwrap();
    assert!((up - 0.125).abs() < 1e-14);
}

#[test]
fn exact_ball_field_is_symmetric() {
    let q = p(2, 0.5);
    let bt = BallTorsion::new(q, vec![0.0, 0.0], 1.0).unwrap();
    let d = bt.domain();
    let u = sampled(&d, 1.0 / 16.0, &|x: &[f64]| bt.eval(x));
    let rep = moving_plane_analyze(&u, &d, &default_directions(2)).unwrap();
    assert_eq!(rep.directions.len(), 8);
    for r in &rep.directions {
        assert!(r.aligned);
        assert!(r.max_abs <= 1e-10, "{:?} {}", r.plane.direction, r.max_abs);
        assert!(r.sweep_passed);
        assert!(r.sweep.iter().all(|s| s.min_difference >= -1e-12));
    }
    assert_eq!(rep.verdict, SymmetryVerdict::Symmetric);
    let c = rep.detected_center.unwrap();
    assert!(c[0].abs() < 1e-5 && c[1].abs() < 1e-5);
}

#[test]
fn solved_ball_is_symmetric() {
    let q = p(2, 0.5);
    let d = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let h = 1.0 / 16.0;
    let sol = solve_dirichlet(&d, &|_: &[f64]| 1.0, q, &SolveConfig::new(h)).unwrap();
    let opts = MovingPlaneOptions { solver_residual: sol.residual, ..Default::default() };
    let rep = moving_plane_analyze_with(&sol.field, &d, &default_directions(2), &opts).unwrap();
    assert_eq!(rep.verdict, SymmetryVerdict::Symmetric);
    let c = rep.detected_center.unwrap();
    assert!(c.iter().all(|v| v.abs() <= 2.0 * h));
    assert!(rep.directions.iter().all(|r| r.sweep_passed));
}

#[test]
fn off_grid_plane_uses_interpolation() {
    let q = p(2, 0.5);
    let bt = BallTorsion::new(q, vec![0.0, 0.0], 1.0).unwrap();
    let d = bt.domain();
    let u = sampled(&d, 1.0 / 32.0, &|x: &[f64]| bt.eval(x));
    let rep = moving_plane_analyze(&u, &d, &[unit(0.3)]).unwrap();
    let r = &rep.directions[0];
    assert!(!r.aligned);
    assert_eq!(r.verdict, SymmetryVerdict::Symmetric);
}

#[test]
fn ellipse_profile_is_not_symmetric_diagonally() {
    // (1 - |A^{-1}x|^2)_+^s with A = diag(1, 1/2)
    let d = Domain::ellipsoid(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
    let f = |x: &[f64]| (1.0 - x[0] * x[0] - 4.0 * x[1] * x[1]).max(0.0).sqrt();
    let u = sampled(&d, 1.0 / 32.0, &f);
    let rep = moving_plane_analyze(&u, &d, &default_directions(2)).unwrap();
    assert_eq!(rep.verdict, SymmetryVerdict::Asymmetric);
    for r in &rep.directions {
        let axis = r.plane.direction.iter().filter(|v| v.abs() > 1e-12).count() == 1;
        let expect = if axis { SymmetryVerdict::Symmetric } else { SymmetryVerdict::Asymmetric };
        assert_eq!(r.verdict, expect, "{:?}", r.plane.direction);
    }
    assert!(rep.detected_center.is_none());
}

#[test]
fn radial_test_finds_center() {
    let q = p(2, 0.5);
    let h = 1.0 / 16.0;
    for c in [[0.0, 0.0], [0.25, -0.125]] {
        let bt = BallTorsion::new(q, c.to_vec(), 1.0).unwrap();
        let d = bt.domain();
        let g = Grid::covering(&[-1.5, -1.5], &[1.5, 1.5], h, &[0.0, 0.0]).unwrap();
        let u = Field::sample(g, Some(d), &bt).unwrap();
        let offsets: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.1).collect();
        let rep = radial_monotone_test(&u, &default_directions(2), &offsets).unwrap();
        match rep.verdict {
            RadialVerdict::Radial { center } => {
                assert!((center[0] - c[0]).abs() <= h / 4.0 + 1e-12, "{center:?}");
                assert!((center[1] - c[1]).abs() <= h / 4.0 + 1e-12, "{center:?}");
            }
            v => panic!("{v:?}"),
        }
    }
}

#[test]
fn radial_test_rejects_two_bumps() {
    let h = 1.0 / 16.0;
    let bump = |x: &[f64], c: f64| (0.25 - (x[0] - c).powi(2) - x[1] * x[1]).max(0.0);
    let g = Grid::covering(&[-2.0, -1.0], &[2.0, 1.0], h, &[0.0, 0.0]).unwrap();
    let u = Field::sample(g, None, &|x: &[f64]| bump(x, -1.0) + bump(x, 1.0)).unwrap();
    let rep = radial_monotone_test(&u, &[vec![1.0, 0.0]], &[0.5]).unwrap();
    match rep.verdict {
        RadialVerdict::NotRadial { witness: Some(w) } => {
            assert!(w.max_difference > 0.0 && w.min_difference < 0.0);
            assert!((w.lambda - 0.5).abs() < 1e-12);
        }
        v => panic!("{v:?}"),
    }
    assert_eq!(field_components(&u, 0.0).count, 2);
}

#[test]
fn components() {
    let d = Domain::union(vec![Domain::interval(-2.0, -1.0).unwrap(), Domain::interval(1.0, 2.0).unwrap()]).unwrap();
    assert_eq!(domain_components(&d).count, 2);
    let u = sampled(&d, 1.0 / 16.0, &|_: &[f64]| 1.0);
    let c = field_components(&u, 0.5);
    assert_eq!(c.count, 2);
    let g = u.grid();
    let left = (0..g.len()).find(|&i| g.node(i)[0] < 0.0 && u.value(i) > 0.5).unwrap();
    let right = (0..g.len()).find(|&i| g.node(i)[0] > 0.0 && u.value(i) > 0.5).unwrap();
    assert_ne!(c.labels[left], c.labels[right]);
    assert_eq!(domain_components(&Domain::ball(vec![0.0], 1.0).unwrap()).count, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn difference_is_antisymmetric(k in -8i64..8, axis in 0usize..2) {
        let g = Grid::new(vec![-1.0, -1.0], 0.125, vec![17, 17]).unwrap();
        let u = Field::sample(g.clone(), None, &|x: &[f64]| (x[0] + 2.0 * x[1]).sin() + x[0] * x[1]).unwrap();
        let mut e = vec![0.0, 0.0];
        e[axis] = 1.0;
        let hs = HalfSpace::new(e, k as f64 * 0.0625).unwrap();
        let v = antisymmetric_difference(&u, &hs);
        for i in 0..g.len() {
            let y = hs.reflect(&g.node(i));
            if let Some(j) = g.node_at(&y, 1e-6) {
                prop_assert!((v.value(i) + v.value(j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translated_ball_lambda(cx in -1.0f64..1.0, cy in -1.0f64..1.0, t in 0.0f64..std::f64::consts::TAU) {
        let d = Domain::ball(vec![cx, cy], 0.7).unwrap();
        let e = unit(t);
        let cp = find_critical_plane(&d, &e).unwrap();
        prop_assert!((cp.lambda0 - dot(&e, &[cx, cy])).abs() < 1e-4);
    }
}

#[test]
fn internal_touch_in_the_plane() {
    // the right end reflects onto the inner end of the right piece
    let d = Domain::union(vec![Domain::interval(-1.0, 0.0).unwrap(), Domain::interval(0.5, 1.0).unwrap()]).unwrap();
    let cp = find_critical_plane(&d, &[1.0]).unwrap();
    assert!((cp.lambda0 - 0.75).abs() < 1e-5);
    assert_eq!(cp.situation, Situation::InternalTouch);
}
