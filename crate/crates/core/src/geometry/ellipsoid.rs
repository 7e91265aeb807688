//! Exact distance from a point to an axis-aligned ellipse or ellipsoid.
//!
//! Robust bisection on the Lagrange-multiplier equation, following
//! D. Eberly, "Distance from a Point to an Ellipse, an Ellipsoid, or a
//! Hyperellipsoid". Inputs are in the first orthant with semi-axes sorted
//! in decreasing order; the caller handles signs and permutations.

fn robust_length(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
}

/// Root of `sum_i (r_i z_i / (s + r_i))^2 = 1` by bisection; `r` has its
/// last entry equal to 1.
fn get_root(r: &[f64], z: &[f64], g: f64) -> f64 {
    let n: Vec<f64> = r.iter().zip(z).map(|(r, z)| r * z).collect();
    let last = z.len() - 1;
    let mut s0 = z[last] - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { robust_length(&n) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let g: f64 = n
            .iter()
            .zip(r)
            .map(|(n, r)| {
                let ratio = n / (s + r);
                ratio * ratio
            })
            .sum::<f64>()
            - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// `e0 >= e1 > 0`, `y0, y1 >= 0`. Returns the closest point and distance.
pub(crate) fn distance_ellipse(e: [f64; 2], y: [f64; 2]) -> ([f64; 2], f64) {
    let [e0, e1] = e;
    let [y0, y1] = y;
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1) * (e0 / e1);
                let sbar = get_root(&[r0, 1.0], &[z0, z1], g);
                let x0 = r0 * y0 / (sbar + r0);
                let x1 = y1 / (sbar + 1.0);
                ([x0, x1], ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt())
            } else {
                ([y0, y1], 0.0)
            }
        } else {
            ([0.0, e1], (y1 - e1).abs())
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            ([x0, x1], ((x0 - y0).powi(2) + x1 * x1).sqrt())
        } else {
            ([e0, 0.0], (y0 - e0).abs())
        }
    }
}

/// `e0 >= e1 >= e2 > 0`, `y >= 0` componentwise.
pub(crate) fn distance_ellipsoid(e: [f64; 3], y: [f64; 3]) -> ([f64; 3], f64) {
    let [e0, e1, e2] = e;
    let [y0, y1, y2] = y;
    if y2 > 0.0 {
        if y1 > 0.0 {
            if y0 > 0.0 {
                let z = [y0 / e0, y1 / e1, y2 / e2];
                let g = z.iter().map(|z| z * z).sum::<f64>() - 1.0;
                if g != 0.0 {
                    let r0 = (e0 / e2) * (e0 / e2);
                    let r1 = (e1 / e2) * (e1 / e2);
                    let sbar = get_root(&[r0, r1, 1.0], &z, g);
                    let x = [r0 * y0 / (sbar + r0), r1 * y1 / (sbar + r1), y2 / (sbar + 1.0)];
                    let d = ((x[0] - y0).powi(2) + (x[1] - y1).powi(2) + (x[2] - y2).powi(2)).sqrt();
                    (x, d)
                } else {
                    (y, 0.0)
                }
            } else {
                let ([x1, x2], d) = distance_ellipse([e1, e2], [y1, y2]);
                ([0.0, x1, x2], d)
            }
        } else if y0 > 0.0 {
            let ([x0, x2], d) = distance_ellipse([e0, e2], [y0, y2]);
            ([x0, 0.0, x2], d)
        } else {
            ([0.0, 0.0, e2], (y2 - e2).abs())
        }
    } else {
        let denom0 = e0 * e0 - e2 * e2;
        let denom1 = e1 * e1 - e2 * e2;
        let numer0 = e0 * y0;
        let numer1 = e1 * y1;
        if numer0 < denom0 && numer1 < denom1 {
            let xde0 = numer0 / denom0;
            let xde1 = numer1 / denom1;
            let discr = 1.0 - xde0 * xde0 - xde1 * xde1;
            if discr > 0.0 {
                let x = [e0 * xde0, e1 * xde1, e2 * discr.sqrt()];
                let d = ((x[0] - y0).powi(2) + (x[1] - y1).powi(2) + x[2] * x[2]).sqrt();
                return (x, d);
            }
        }
        let ([x0, x1], d) = distance_ellipse([e0, e1], [y0, y1]);
        ([x0, x1, 0.0], d)
    }
}

/// Closest boundary point and unsigned distance for an axis-aligned
/// ellipsoid centred at the origin, in any of 2 or 3 dimensions.
pub(crate) fn closest_point(semi_axes: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let dim = semi_axes.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| semi_axes[b].partial_cmp(&semi_axes[a]).unwrap());
    let e: Vec<f64> = order.iter().map(|&i| semi_axes[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| x[i].abs()).collect();
    let (xs, d) = match dim {
        2 => {
            let (p, d) = distance_ellipse([e[0], e[1]], [y[0], y[1]]);
            (p.to_vec(), d)
        }
        3 => {
            let (p, d) = distance_ellipsoid([e[0], e[1], e[2]], [y[0], y[1], y[2]]);
            (p.to_vec(), d)
        }
        _ => unreachable!("ellipsoids are 2D or 3D"),
    };
    let mut out = vec![0.0; dim];
    for (k, &i) in order.iter().enumerate() {
        out[i] = xs[k].copysign(if x[i] == 0.0 { 1.0 } else { x[i] });
    }
    (out, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(semi: &[f64], x: &[f64]) -> f64 {
        let m = 200_000;
        (0..m)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                let p = [semi[0] * t.cos(), semi[1] * t.sin()];
                ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_dense_boundary_search() {
        let semi = [2.0, 1.0];
        for x in [[0.0, 0.0], [0.3, 0.2], [1.9, 0.0], [1.5, -0.4], [3.0, 2.0], [-0.1, 1.5], [0.0, 0.5], [1.0, 0.0]] {
            let (_, d) = closest_point(&semi, &x);
            let bf = brute_force(&semi, &x);
            assert!((d - bf).abs() < 1e-6, "{x:?}: {d} vs {bf}");
        }
    }

    #[test]
    fn ellipsoid_reduces_to_sphere() {
        let (p, d) = closest_point(&[1.0, 1.0, 1.0], &[0.2, 0.3, -0.1]);
        let r = (0.04f64 + 0.09 + 0.01).sqrt();
        assert!((d - (1.0 - r)).abs() < 1e-12);
        let n: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
