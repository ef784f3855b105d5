//! Shared helpers for integration tests: an independent one-sided Jacobi
//! SVD oracle and small utilities. The oracle deliberately shares no code
//! with the library's char-poly singular value path.

#![allow(dead_code)]

pub type M3 = [[f64; 3]; 3];

fn col_dot(a: &M3, p: usize, q: usize) -> f64 {
    (0..3).map(|i| a[i][p] * a[i][q]).sum()
}

fn rotate_cols(a: &mut M3, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..3 {
        let (x, y) = (a[i][p], a[i][q]);
        a[i][p] = c * x - s * y;
        a[i][q] = s * x + c * y;
    }
}

/// One-sided Jacobi SVD: returns (singular values descending, U, V) with
/// a ≈ U · diag(σ) · Vᵀ. Columns of the working copy are orthogonalized by
/// right rotations accumulated into V.
pub fn jacobi_svd(a: &M3) -> ([f64; 3], M3, M3) {
    let mut u = *a;
    let mut v: M3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..2 {
            for q in p + 1..3 {
                let app = col_dot(&u, p, p);
                let aqq = col_dot(&u, q, q);
                let apq = col_dot(&u, p, q);
                let denom = (app * aqq).sqrt();
                if denom == 0.0 || apq.abs() <= 1e-17 * denom {
                    continue;
                }
                off = off.max(apq.abs() / denom);
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut u, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
        if off < 1e-16 {
            break;
        }
    }
    let mut sv: Vec<(f64, usize)> = (0..3)
        .map(|j| (col_dot(&u, j, j).sqrt(), j))
        .collect();
    sv.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut sigma = [0.0; 3];
    let mut uu = [[0.0; 3]; 3];
    let mut vv = [[0.0; 3]; 3];
    for (rank, &(s, j)) in sv.iter().enumerate() {
        sigma[rank] = s;
        for i in 0..3 {
            uu[i][rank] = if s > 0.0 { u[i][j] / s } else { 0.0 };
            vv[i][rank] = v[i][j];
        }
    }
    (sigma, uu, vv)
}

/// Largest real root of x³ + ax² + bx + c by bisection from a safe upper
/// bound, independent of the library's cubic solver.
pub fn cubic_largest_root(a: f64, b: f64, c: f64) -> f64 {
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let f = |x: f64| ((x + a) * x + b) * x + c;
    let (mut lo, mut hi) = (-bound, bound);
    assert!(f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
