//! Cutoff selection and enumeration shared by the lattice sums.

use crate::error::{Error, Result};

/// Bound on `sum_{n >= n0, n integer} exp(f(n))` for concave `f` decreasing
/// at `n0`: the terms are dominated by a geometric series of ratio
/// `exp(f(n0+1) - f(n0))`.
pub(crate) fn concave_tail(f: &impl Fn(f64) -> f64, n0: f64) -> f64 {
    let r = (f(n0 + 1.0) - f(n0)).exp();
    if !(r < 1.0) {
        return f64::INFINITY;
    }
    f(n0).exp() / (1.0 - r)
}

/// Smallest integer `n0 >= start` with `concave_tail(f, n0) <= tol`, or
/// an error once `n0` passes `limit`.
pub(crate) fn tail_start(f: &impl Fn(f64) -> f64, tol: f64, start: f64, limit: f64) -> Result<f64> {
    let start = start.max(1.0).ceil();
    let ok = |n: f64| concave_tail(f, n) <= tol;
    if ok(start) {
        return Ok(start);
    }
    let mut hi = start * 2.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 4.0 * limit {
            return Err(Error::CutoffExceeded { cutoff: limit, tolerance: tol });
        }
    }
    let mut lo = start;
    // Invariant: !ok(lo), ok(hi).
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > limit {
        return Err(Error::CutoffExceeded { cutoff: limit, tolerance: tol });
    }
    Ok(hi)
}

/// Integer points with `x^T m x <= cut` for a positive definite `m`, in
/// lexicographic order.
pub(crate) fn ellipsoid_points(m: &[[f64; 3]; 3], cut: f64) -> Vec<[i64; 3]> {
    let inv = invert3(m);
    let bound = |i: usize| (cut * inv[i][i]).max(0.0).sqrt().floor() as i64 + 1;
    let (b0, b1) = (bound(0), bound(1));
    let mut out = Vec::new();
    for x0 in -b0..=b0 {
        for x1 in -b1..=b1 {
            // Solve m22 x2^2 + 2 (m02 x0 + m12 x1) x2 + rest <= cut for x2.
            let (f0, f1) = (x0 as f64, x1 as f64);
            let qa = m[2][2];
            let qb = 2.0 * (m[0][2] * f0 + m[1][2] * f1);
            let qc = m[0][0] * f0 * f0 + 2.0 * m[0][1] * f0 * f1 + m[1][1] * f1 * f1 - cut;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            let s = disc.sqrt();
            let lo = ((-qb - s) / (2.0 * qa)).floor() as i64 - 1;
            let hi = ((-qb + s) / (2.0 * qa)).ceil() as i64 + 1;
            for x2 in lo..=hi {
                let p = [f0, f1, x2 as f64];
                let mut val = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        val += m[i][j] * p[i] * p[j];
                    }
                }
                if val <= cut {
                    out.push([x0, x1, x2]);
                }
            }
        }
    }
    out
}

pub(crate) fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    inv
}

/// Integer square root of `n`, when `n` is a perfect square.
pub(crate) fn exact_sqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|&k| k >= 0 && k * k == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_of_geometric_series() {
        // sum_{n>=n0} 2^-n = 2^(1-n0)
        let f = |n: f64| -n * std::f64::consts::LN_2;
        assert!((concave_tail(&f, 3.0) - 0.25).abs() < 1e-15);
        assert_eq!(tail_start(&f, 1e-6, 1.0, 1e3).unwrap(), 21.0);
        assert!(tail_start(&f, 1e-300, 1.0, 10.0).is_err());
    }

    #[test]
    fn ellipsoid_matches_brute_force() {
        let m = [[2.0, 0.3, -0.1], [0.3, 1.0, 0.2], [-0.1, 0.2, 0.7]];
        let pts = ellipsoid_points(&m, 9.5);
        let mut brute = Vec::new();
        for a in -10i64..=10 {
            for b in -10i64..=10 {
                for c in -10i64..=10 {
                    let p = [a as f64, b as f64, c as f64];
                    let mut v = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            v += m[i][j] * p[i] * p[j];
                        }
                    }
                    if v <= 9.5 {
                        brute.push([a, b, c]);
                    }
                }
            }
        }
        assert_eq!(pts, brute);
    }

    #[test]
    fn squares() {
        assert_eq!(exact_sqrt(49), Some(7));
        assert_eq!(exact_sqrt(0), Some(0));
        assert_eq!(exact_sqrt(50), None);
        assert_eq!(exact_sqrt(-4), None);
    }
}
