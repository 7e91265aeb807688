//! Lattice sums behind the collocation weights.
//!
//! For the unit lattice `Z^N` and kernel exponent `p = -N - 2s`:
//!
//! * `self_sum = sum_{k != 0} |k|^p` is the diagonal weight of a node whose
//!   neighbours all vanish (the whole exterior contributes through it);
//! * `laplace_defect = sum_{k != 0} |k|^a - int |z|^a dz` with `a = 2 - N - 2s`,
//!   the regularized difference between the lattice sum and the integral
//!   for a quadratic profile. It sets the strength of the near-field
//!   Taylor correction.
//!
//! Both are evaluated by a truncated sum over the cube `|k|_inf <= K` plus
//! the integral over the exterior of the cube `[-(K+1/2), K+1/2]^N` with the
//! first midpoint-rule correction `-(1/24) int Laplacian`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::constants::FracParams;
use crate::quadrature::integrate_cube;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConstants {
    pub self_sum: f64,
    pub laplace_defect: f64,
}

/// `int_{[-1,1]^{N-1}} (1 + |y|^2)^{p/2} dy`.
fn face_integral(dim: usize, p: f64) -> f64 {
    integrate_cube(dim - 1, 48, |y| {
        let r2: f64 = 1.0 + y.iter().map(|v| v * v).sum::<f64>();
        r2.powf(0.5 * p)
    })
}

/// `2N L^{p+N} / (p+N) * face_integral`: the integral of `|z|^p` over the
/// cube of half-width `L` when `p > -N`, and minus the integral over its
/// exterior when `p < -N`.
fn cube_power_integral(dim: usize, p: f64, half_width: f64) -> f64 {
    let n = dim as f64;
    2.0 * n * half_width.powf(p + n) / (p + n) * face_integral(dim, p)
}

/// Compensated (Neumaier) summation.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `sum_{0 < |k|_inf <= K} |k|^p` using the symmetry of the lattice.
pub(crate) fn window_sum(dim: usize, p: f64, k_max: usize) -> f64 {
    let half = 0.5 * p;
    let mult = |k: usize| if k == 0 { 1.0 } else { 2.0 };
    let mut acc = Accumulator::default();
    match dim {
        1 => {
            for k in 1..=k_max {
                acc.add(2.0 * (k as f64).powf(p));
            }
        }
        2 => {
            for i in 0..=k_max {
                for j in 0..=k_max {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let r2 = (i * i + j * j) as f64;
                    acc.add(mult(i) * mult(j) * r2.powf(half));
                }
            }
        }
        _ => {
            for i in 0..=k_max {
                for j in 0..=k_max {
                    for l in 0..=k_max {
                        if i == 0 && j == 0 && l == 0 {
                            continue;
                        }
                        let r2 = (i * i + j * j + l * l) as f64;
                        acc.add(mult(i) * mult(j) * mult(l) * r2.powf(half));
                    }
                }
            }
        }
    }
    acc.total()
}

/// Exterior part `sum_{|k|_inf > K} |k|^p` for `p < -N`, from the exterior
/// integral with the leading midpoint correction.
pub(crate) fn exterior_sum(dim: usize, p: f64, k_max: usize) -> f64 {
    let n = dim as f64;
    let l = k_max as f64 + 0.5;
    let integral = -cube_power_integral(dim, p, l);
    let laplacian = -p * (p + n - 2.0) * cube_power_integral(dim, p - 2.0, l);
    integral - laplacian / 24.0
}

fn truncation(dim: usize) -> usize {
    match dim {
        1 => 1 << 14,
        2 => 320,
        _ => 64,
    }
}

fn compute(p: FracParams) -> LatticeConstants {
    let dim = p.dim();
    let n = dim as f64;
    let s = p.s();
    let k_max = truncation(dim);
    let kernel = -n - 2.0 * s;
    let self_sum = window_sum(dim, kernel, k_max) + exterior_sum(dim, kernel, k_max);

    let a = 2.0 - n - 2.0 * s;
    let l = k_max as f64 + 0.5;
    let inside = window_sum(dim, a, k_max) - cube_power_integral(dim, a, l);
    let laplacian = -a * (a + n - 2.0) * cube_power_integral(dim, a - 2.0, l);
    let laplace_defect = inside - laplacian / 24.0;
    LatticeConstants { self_sum, laplace_defect }
}

/// Cached per `(N, s)`.
pub fn lattice_constants(p: FracParams) -> LatticeConstants {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), LatticeConstants>>> = OnceLock::new();
    let key = (p.dim(), p.s().to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return *v;
    }
    let v = compute(p);
    cache.lock().unwrap().insert(key, v);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Hurwitz-free Riemann zeta for real arguments via the alternating
    /// (Dirichlet eta) series with Euler-Maclaurin-free Borwein weights.
    fn zeta(x: f64) -> f64 {
        // Borwein's algorithm 2 with n = 60, valid for x != 1 (including x < 1
        // through the analytic continuation of eta)
        let n = 60usize;
        let mut d = vec![0.0f64; n + 1];
        let mut sum = 0.0;
        let nf = n as f64;
        for i in 0..=n {
            let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
            let term = nf * fact(n + i - 1) * 4f64.powi(i as i32) / (fact(n - i) * fact(2 * i));
            sum += term;
            d[i] = sum;
        }
        let mut acc = 0.0;
        for k in 0..n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (d[k] - d[n]) / ((k + 1) as f64).powf(x);
        }
        -acc / (d[n] * (1.0 - 2f64.powf(1.0 - x)))
    }

    #[test]
    fn zeta_oracle_sanity() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta(0.0) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_sums_match_zeta() {
        for &s in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let c = lattice_constants(FracParams::new(1, s).unwrap());
            let e = 2.0 * zeta(1.0 + 2.0 * s);
            let z = 2.0 * zeta(2.0 * s - 1.0);
            assert!((c.self_sum - e).abs() < 1e-10 * e, "s={s}: {} vs {e}", c.self_sum);
            assert!((c.laplace_defect - z).abs() < 1e-8, "s={s}: {} vs {z}", c.laplace_defect);
        }
        let half = lattice_constants(FracParams::new(1, 0.5).unwrap());
        assert!((half.self_sum - PI * PI / 3.0).abs() < 1e-10);
        assert!((half.laplace_defect + 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_sum_against_brute_force() {
        // sum_{k != 0} |k|^{-3} in 2D (s = 1/2) is 4 zeta(3/2) beta(3/2)
        // with Dirichlet beta(3/2) = 0.8645026534612020...
        let c = lattice_constants(FracParams::new(2, 0.5).unwrap());
        let exact = 4.0 * zeta(1.5) * 0.864_502_653_461_202_1;
        assert!((c.self_sum - exact).abs() < 1e-9 * exact, "{} vs {exact}", c.self_sum);
    }

    #[test]
    fn truncation_is_converged() {
        for dim in 1..=3 {
            for &s in &[0.25, 0.5, 0.75] {
                let p = -(dim as f64) - 2.0 * s;
                let k = truncation(dim);
                let a = window_sum(dim, p, k) + exterior_sum(dim, p, k);
                let b = window_sum(dim, p, k / 2) + exterior_sum(dim, p, k / 2);
                assert!((a - b).abs() < 1e-8 * a, "dim={dim} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn defect_is_negative() {
        for dim in 1..=3 {
            for &s in &[0.1, 0.5, 0.9] {
                let c = lattice_constants(FracParams::new(dim, s).unwrap());
                assert!(c.laplace_defect < 0.0, "dim={dim} s={s}: {c:?}");
            }
        }
    }
}
