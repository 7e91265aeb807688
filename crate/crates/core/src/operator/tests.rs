use super::*;
use crate::closed_form::BallTorsion;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(n: usize, s: f64) -> FracParams {
    FracParams::new(n, s).unwrap()
}

fn torsion_field(n: usize, s: f64, h: f64) -> (BallTorsion, Field) {
    let bt = BallTorsion::new(p(n, s), vec![0.0; n], 1.0).unwrap();
    let d = bt.domain();
    let g = grid_for(&d, h).unwrap();
    let f = Field::sample(g, Some(d), &bt).unwrap();
    (bt, f)
}

/// Max deviation of `A psi_B` from 1 at nodes with `delta >= 0.2`.
fn torsion_residual(n: usize, s: f64, h: f64) -> f64 {
    let (_, f) = torsion_field(n, s, h);
    let d = f.support().unwrap().clone();
    let nodes: Vec<usize> = (0..f.grid().len()).filter(|&i| d.signed_distance(&f.grid().node(i)) >= 0.2).collect();
    let op = DiscreteOperator::new(p(n, s), h).unwrap();
    op.apply(&f, &nodes).iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()))
}

#[test]
fn torsion_center_value() {
    let (_, f) = torsion_field(1, 0.5, 1.0 / 256.0);
    let e = frac_laplacian_at(&f, &[0.0], p(1, 0.5), &QuadratureScheme::default()).unwrap();
    assert!((e.value - 1.0).abs() < 0.02);
    assert!(!e.flagged);
}

#[test]
fn torsion_residual_decreases_with_h() {
    for &s in &[0.25, 0.5, 0.75] {
        let errs: Vec<f64> = [64.0, 128.0, 256.0].iter().map(|&m| torsion_residual(1, s, 1.0 / m)).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "s={s}: {errs:?}");
        assert!(errs[2] < 0.05);
    }
    assert!(torsion_residual(2, 0.5, 1.0 / 32.0) < 0.05);
}

#[test]
fn zero_field_gives_zero() {
    let g = Grid::new(vec![-1.0, -1.0], 0.1, vec![21, 21]).unwrap();
    let f = Field::zeros(g, None);
    let e = frac_laplacian_at(&f, &[0.0, 0.0], p(2, 0.3), &QuadratureScheme::default()).unwrap();
    assert_eq!(e.value, 0.0);
}

#[test]
fn callable_matches_field() {
    let bt = BallTorsion::new(p(2, 0.5), vec![0.0, 0.0], 1.0).unwrap();
    let (_, f) = torsion_field(2, 0.5, 1.0 / 16.0);
    let q = QuadratureScheme::default();
    let x = [0.25, -0.125];
    let a = frac_laplacian_at(&f, &x, p(2, 0.5), &q).unwrap();
    let b = frac_laplacian_of_fn(&bt, &bt.domain(), &x, 1.0 / 16.0, p(2, 0.5), &q).unwrap();
    assert!((a.value - b.value).abs() < 1e-10);
    // off-lattice evaluation point
    let c = frac_laplacian_of_fn(&bt, &bt.domain(), &[0.1, 0.2], 1.0 / 32.0, p(2, 0.5), &q).unwrap();
    assert!((c.value - 1.0).abs() < 0.02);
    // too small a window is refused
    assert!(
        frac_laplacian_of_fn(&bt, &bt.domain(), &[0.0, 0.0], 0.1, p(2, 0.5), &QuadratureScheme::with_rho(0.5)).is_err()
    );
    assert!(frac_laplacian_at(&f, &[0.0, 0.0], p(2, 0.5), &QuadratureScheme::with_rho(0.5)).is_err());
}

#[test]
fn boundary_points_are_flagged() {
    let (_, f) = torsion_field(1, 0.5, 1.0 / 64.0);
    let q = QuadratureScheme::default();
    let near = frac_laplacian_at(&f, &[1.0 - 1.0 / 64.0], p(1, 0.5), &q).unwrap();
    assert!(near.flagged && near.value.is_finite());
    assert!(frac_laplacian_at(&f, &[0.001], p(1, 0.5), &q).is_err());
}

#[test]
fn translation_invariance() {
    let bt = BallTorsion::new(p(2, 0.4), vec![0.0, 0.0], 1.0).unwrap();
    let shifted = BallTorsion::new(p(2, 0.4), vec![0.25, -0.5], 1.0).unwrap();
    let q = QuadratureScheme::default();
    let h = 1.0 / 16.0;
    let a = frac_laplacian_of_fn(&bt, &bt.domain(), &[0.3, 0.1], h, p(2, 0.4), &q).unwrap();
    let b = frac_laplacian_of_fn(&shifted, &shifted.domain(), &[0.55, -0.4], h, p(2, 0.4), &q).unwrap();
    assert!((a.value - b.value).abs() < 1e-10);
}

#[test]
fn scaling_law() {
    // u_2(x) = u(x/2): (-Δ)^s u_2(2x) = 2^{-2s} (-Δ)^s u(x)
    let s = 0.6;
    let bt = BallTorsion::new(p(1, s), vec![0.0], 1.0).unwrap();
    let d2 = Domain::interval(-2.0, 2.0).unwrap();
    let u2 = |x: &[f64]| bt.eval(&[x[0] / 2.0]);
    let q = QuadratureScheme::default();
    let x = 0.3;
    let a = frac_laplacian_of_fn(&bt, &bt.domain(), &[x], 1.0 / 512.0, p(1, s), &q).unwrap();
    let b = frac_laplacian_of_fn(&u2, &d2, &[2.0 * x], 1.0 / 256.0, p(1, s), &q).unwrap();
    assert!((b.value - 2f64.powf(-2.0 * s) * a.value).abs() < 1e-10);
    assert!((a.value - 1.0).abs() < 0.01);
}

#[test]
fn stiffness_structure() {
    let d = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let g = grid_for(&d, 0.25).unwrap();
    let st = assemble_stiffness(&g, &d, p(2, 0.5), &QuadratureScheme::default()).unwrap();
    let a = st.matrix();
    let n = st.len();
    let mut asym: f64 = 0.0;
    for i in 0..n {
        assert!(a[(i, i)] > 0.0);
        let mut off = 0.0;
        for j in 0..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
            if i != j {
                assert!(a[(i, j)] <= 0.0);
                off += a[(i, j)].abs();
            }
        }
        assert!(a[(i, i)] > off);
    }
    assert!(asym <= 1e-10);
}

#[test]
fn stiffness_matches_pointwise_operator() {
    let (bt, f) = torsion_field(2, 0.5, 1.0 / 16.0);
    let d = bt.domain();
    let st = assemble_stiffness(f.grid(), &d, p(2, 0.5), &QuadratureScheme::default()).unwrap();
    let au = st.matrix() * st.restrict(&f);
    let op = DiscreteOperator::new(p(2, 0.5), 1.0 / 16.0).unwrap();
    let direct = op.apply(&f, st.nodes());
    for (a, b) in au.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-10);
    }
    for (k, &i) in st.nodes().iter().enumerate() {
        if d.signed_distance(&f.grid().node(i)) >= 0.2 {
            assert!((au[k] - 1.0).abs() < 0.05);
        }
    }
}

#[test]
fn one_node_stiffness() {
    let g = Grid::new(vec![-0.5, -0.5], 0.5, vec![3, 3]).unwrap();
    let d = Domain::ball(vec![0.0, 0.0], 0.3).unwrap();
    let st = assemble_stiffness(&g, &d, p(2, 0.5), &QuadratureScheme::default()).unwrap();
    assert_eq!(st.len(), 1);
    let op = DiscreteOperator::new(p(2, 0.5), 0.5).unwrap();
    assert!((st.matrix()[(0, 0)] - op.self_weight()).abs() < 1e-12);
}

#[test]
fn stiffness_cap() {
    let d = Domain::interval(-1.0, 1.0).unwrap();
    let g = grid_for(&d, 0.01).unwrap();
    let err = assemble_stiffness_capped(&g, &d, p(1, 0.5), &QuadratureScheme::default(), 50).unwrap_err();
    assert!(matches!(err, Error::TooLarge { count: 199, cap: 50 }));
}

#[test]
fn constants_are_in_the_kernel() {
    // rows sum to zero over the full lattice: a constant window away from
    // the grid edge sees no operator
    let g = Grid::new(vec![0.0], 1.0, vec![4001]).unwrap();
    let f = Field::sample(g, None, &|_: &[f64]| 1.0).unwrap();
    let op = DiscreteOperator::new(p(1, 0.7), 1.0).unwrap();
    let mid = op.apply(&f, &[2000])[0];
    // what is missing is the lattice tail beyond 2000 nodes
    let tail = lattice::exterior_sum(1, -2.4, 2000) * c_ns(p(1, 0.7));
    assert!((mid - tail).abs() < 1e-9, "{mid} vs {tail}");
}

#[test]
fn weak_form_of_torsion() {
    // E(psi, psi) = int psi
    let (bt, f) = torsion_field(1, 0.5, 1.0 / 256.0);
    let e = bilinear_form(&f, &f, p(1, 0.5)).unwrap();
    // int_{-1}^{1} sqrt(1 - x^2) = pi / 2
    let exact = std::f64::consts::PI / 2.0 * bt.eval(&[0.0]);
    assert!((e / exact - 1.0).abs() < 0.03, "{e} vs {exact}");
}

#[test]
fn bilinear_rejects_mismatched_grids() {
    let a = Field::zeros(Grid::new(vec![0.0], 0.1, vec![10]).unwrap(), None);
    let b = Field::zeros(Grid::new(vec![0.0], 0.2, vec![10]).unwrap(), None);
    assert!(matches!(bilinear_form(&a, &b, p(1, 0.5)), Err(Error::GridMismatch(_))));
}

fn random_field(seed: u64, grid: &Grid) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values =
        (0..grid.len()).map(|_| if rng.random_bool(0.7) { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
    Field::new(grid.clone(), None, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bilinear_form_symmetric_and_nonnegative(seed in 0u64..1000, s in 0.05f64..0.95, c in -3.0f64..3.0) {
        let g = Grid::new(vec![-1.0, -1.0], 0.2, vec![11, 11]).unwrap();
        let u = random_field(seed, &g);
        let v = random_field(seed + 7919, &g);
        let pp = p(2, s);
        let uv = bilinear_form(&u, &v, pp).unwrap();
        let vu = bilinear_form(&v, &u, pp).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-10 * (1.0 + uv.abs()));
        prop_assert!(bilinear_form(&u, &u, pp).unwrap() >= 0.0);
        let cv = bilinear_form(&u, &v.scaled(c), pp).unwrap();
        prop_assert!((cv - c * uv).abs() <= 1e-12 * (1.0 + uv.abs()) * (1.0 + c.abs()));
    }
}
