//! 3×3 matrices of the Rauzy semigroup in two representations.
//!
//! Every element of the semigroup has nonnegative integer entries and
//! determinant 1, so the canonical representation is exact (`u128` entries,
//! checked arithmetic). Products too large for exact arithmetic are promoted
//! automatically to a log-scaled float representation: the matrix is stored
//! with unit max-entry and a separate additive natural-log scale, so products
//! of thousands of factors never overflow.

use num_bigint::BigInt;

use crate::error::{Error, Result};

/// Matrix entries normalized to max |entry| = 1 plus an additive log scale:
/// the represented matrix is `exp(log_scale) * m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMat3 {
    pub m: [[f64; 3]; 3],
    pub log_scale: f64,
    /// Set when this value originated from an exact-integer overflow.
    pub promoted: bool,
    /// Set when |det| = 1 is known exactly (inherited from exact ancestry);
    /// the singular-value code then uses log det² = −6·log_scale instead of
    /// the cancellation-prone float determinant.
    pub unit_det: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mat3 {
    /// Exact nonnegative integer entries (all semigroup elements).
    Exact([[u128; 3]; 3]),
    /// Log-scaled float64 for products beyond the exact window.
    Scaled(ScaledMat3),
}

impl ScaledMat3 {
    fn normalized(
        mut m: [[f64; 3]; 3],
        extra_log_scale: f64,
        promoted: bool,
        unit_det: bool,
    ) -> Result<Self> {
        let mut maxabs = 0.0_f64;
        for row in &m {
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::Numeric("non-finite matrix entry".into()));
                }
                maxabs = maxabs.max(x.abs());
            }
        }
        if maxabs == 0.0 {
            return Err(Error::Numeric("zero matrix has no log-scaled form".into()));
        }
        for row in &mut m {
            for x in row.iter_mut() {
                *x /= maxabs;
            }
        }
        Ok(ScaledMat3 {
            m,
            log_scale: extra_log_scale + maxabs.ln(),
            promoted,
            unit_det,
        })
    }
}

impl Mat3 {
    pub fn identity() -> Self {
        Mat3::Exact([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    /// Builds a float matrix (log-scaled, normalized). Intended for
    /// non-semigroup inputs such as explicit diagonal witnesses; no
    /// determinant knowledge is assumed.
    pub fn from_f64(entries: [[f64; 3]; 3]) -> Result<Self> {
        Ok(Mat3::Scaled(ScaledMat3::normalized(
            entries, 0.0, false, false,
        )?))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Mat3::Exact(_))
    }

    pub fn promoted(&self) -> bool {
        match self {
            Mat3::Exact(_) => false,
            Mat3::Scaled(s) => s.promoted,
        }
    }

    pub fn exact_entries(&self) -> Option<&[[u128; 3]; 3]> {
        match self {
            Mat3::Exact(e) => Some(e),
            Mat3::Scaled(_) => None,
        }
    }

    /// Normalized float entries plus the additive log scale:
    /// the represented matrix equals `exp(log_scale) * entries`.
    pub fn f64_parts(&self) -> ([[f64; 3]; 3], f64) {
        match self {
            Mat3::Exact(e) => {
                let mut maxe = 0_u128;
                for row in e {
                    for &x in row {
                        maxe = maxe.max(x);
                    }
                }
                // Identity and generators have max entry 1; any semigroup
                // element has at least one positive entry per column.
                let s = maxe as f64;
                let mut m = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = e[i][j] as f64 / s;
                    }
                }
                (m, s.ln())
            }
            Mat3::Scaled(sm) => (sm.m, sm.log_scale),
        }
    }

    pub fn to_scaled(&self) -> ScaledMat3 {
        match self {
            Mat3::Exact(_) => {
                let (m, log_scale) = self.f64_parts();
                let unit_det = self
                    .det_exact()
                    .map(|d| d.magnitude() == &1u8.into())
                    .unwrap_or(false);
                ScaledMat3 {
                    m,
                    log_scale,
                    promoted: false,
                    unit_det,
                }
            }
            Mat3::Scaled(s) => *s,
        }
    }

    pub fn transpose(&self) -> Mat3 {
        match self {
            Mat3::Exact(e) => {
                let mut t = [[0_u128; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        t[i][j] = e[j][i];
                    }
                }
                Mat3::Exact(t)
            }
            Mat3::Scaled(s) => {
                let mut t = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        t[i][j] = s.m[j][i];
                    }
                }
                Mat3::Scaled(ScaledMat3 { m: t, ..*s })
            }
        }
    }

    /// Exact determinant (Exact repr only). BigInt, so it never overflows.
    pub fn det_exact(&self) -> Option<BigInt> {
        let e = self.exact_entries()?;
        let b = |i: usize, j: usize| BigInt::from(e[i][j]);
        let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
        Some(det)
    }

    /// log |det| computed in float; for semigroup elements this is 0.
    pub fn log_abs_det(&self) -> f64 {
        let (m, ls) = self.f64_parts();
        let det = det3(&m);
        det.abs().ln() + 3.0 * ls
    }

    /// Max column sum (the ∞→1 induced norm), in the normalized/log-scale
    /// split. Monotone under right multiplication by any generator, which is
    /// what makes it a safe pruning proxy: σ₁/√3 ≤ maxcolsum ≤ √3·σ₁.
    pub fn log_max_column_sum(&self) -> f64 {
        match self {
            Mat3::Exact(e) => {
                let mut best = 0_u128;
                for j in 0..3 {
                    let s = e[0][j] + e[1][j] + e[2][j];
                    best = best.max(s);
                }
                (best as f64).ln()
            }
            Mat3::Scaled(s) => {
                let mut best = 0.0_f64;
                for j in 0..3 {
                    let sum = s.m[0][j].abs() + s.m[1][j].abs() + s.m[2][j].abs();
                    best = best.max(sum);
                }
                best.ln() + s.log_scale
            }
        }
    }

    /// Euclidean norms of the three columns, as (normalized value, log scale):
    /// true norm = value·exp(log_scale). Callers that only need ratios can
    /// ignore the scale.
    pub fn column_norms_scaled(&self) -> ([f64; 3], f64) {
        let (m, ls) = self.f64_parts();
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (m[0][j] * m[0][j] + m[1][j] * m[1][j] + m[2][j] * m[2][j]).sqrt();
        }
        (out, ls)
    }

    /// Column coordinate sums ω(γe_j) as (normalized value, log scale).
    pub fn column_sums_scaled(&self) -> ([f64; 3], f64) {
        let (m, ls) = self.f64_parts();
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = m[0][j] + m[1][j] + m[2][j];
        }
        (out, ls)
    }

    /// Applies the normalized part to a vector; the true image is
    /// `exp(log_scale)` times this. Scale-free callers (projective work,
    /// norm ratios) use this directly.
    pub fn apply_normalized(&self, v: [f64; 3]) -> [f64; 3] {
        let (m, _) = self.f64_parts();
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
        }
        out
    }
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// The generator A_i exactly as defined: A_i = I + E_i where row i of E_i is
/// 1 in the two off-diagonal positions.
pub fn generator(i: u8) -> Result<Mat3> {
    let e = match i {
        1 => [[1, 1, 1], [0, 1, 0], [0, 0, 1]],
        2 => [[1, 0, 0], [1, 1, 1], [0, 0, 1]],
        3 => [[1, 0, 0], [0, 1, 0], [1, 1, 1]],
        _ => return Err(Error::Input(format!("invalid generator symbol {i}"))),
    };
    Ok(Mat3::Exact(e))
}

pub fn generator_transpose(i: u8) -> Result<Mat3> {
    let e = match i {
        1 => [[1, 0, 0], [1, 1, 0], [1, 0, 1]],
        2 => [[1, 1, 0], [0, 1, 0], [0, 1, 1]],
        3 => [[1, 0, 1], [0, 1, 1], [0, 0, 1]],
        _ => return Err(Error::Input(format!("invalid generator symbol {i}"))),
    };
    Ok(Mat3::Exact(e))
}

fn multiply_exact(a: &[[u128; 3]; 3], b: &[[u128; 3]; 3]) -> Option<[[u128; 3]; 3]> {
    let mut c = [[0_u128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0_u128;
            for k in 0..3 {
                acc = acc.checked_add(a[i][k].checked_mul(b[k][j])?)?;
            }
            c[i][j] = acc;
        }
    }
    Some(c)
}

fn multiply_scaled(a: &ScaledMat3, b: &ScaledMat3, promoted: bool) -> Result<ScaledMat3> {
    let mut c = [[0.0_f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j] + a.m[i][2] * b.m[2][j];
        }
    }
    ScaledMat3::normalized(
        c,
        a.log_scale + b.log_scale,
        promoted || a.promoted || b.promoted,
        a.unit_det && b.unit_det,
    )
}

/// Matrix product. Exact×exact stays exact unless an entry overflows, in
/// which case both factors are promoted to the log-scaled repr and the result
/// carries the promotion flag.
pub fn multiply(a: &Mat3, b: &Mat3) -> Result<Mat3> {
    match (a, b) {
        (Mat3::Exact(ea), Mat3::Exact(eb)) => match multiply_exact(ea, eb) {
            Some(c) => Ok(Mat3::Exact(c)),
            None => Ok(Mat3::Scaled(multiply_scaled(
                &a.to_scaled(),
                &b.to_scaled(),
                true,
            )?)),
        },
        _ => Ok(Mat3::Scaled(multiply_scaled(
            &a.to_scaled(),
            &b.to_scaled(),
            false,
        )?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_match_their_transposes() {
        for i in 1..=3 {
            let a = generator(i).unwrap();
            let at = generator_transpose(i).unwrap();
            assert_eq!(a.transpose(), at, "generator {i}");
        }
    }

    #[test]
    fn invalid_symbol_rejected() {
        assert!(generator(0).is_err());
        assert!(generator(4).is_err());
        assert!(generator_transpose(0).is_err());
    }

    #[test]
    fn product_of_first_two_generators() {
        let p = multiply(&generator(1).unwrap(), &generator(2).unwrap()).unwrap();
        assert_eq!(p, Mat3::Exact([[2, 1, 2], [1, 1, 1], [0, 0, 1]]));
    }

    #[test]
    fn identity_is_neutral() {
        let a3 = generator(3).unwrap();
        assert_eq!(multiply(&Mat3::identity(), &a3).unwrap(), a3);
        assert_eq!(multiply(&a3, &Mat3::identity()).unwrap(), a3);
    }

    #[test]
    fn det_one_is_preserved_exactly() {
        let mut g = Mat3::identity();
        for i in [1_u8, 2, 3, 1, 1, 2, 3, 3, 2, 1, 2] {
            g = multiply(&g, &generator(i).unwrap()).unwrap();
        }
        assert_eq!(g.det_exact().unwrap(), BigInt::from(1));
    }

    #[test]
    fn overflow_promotes_to_scaled() {
        // Squaring repeatedly overflows u128 quickly; the product must
        // promote and remember that its determinant is 1.
        let b = multiply(&generator(1).unwrap(), &generator(2).unwrap()).unwrap();
        let mut g = b.clone();
        for _ in 0..9 {
            g = multiply(&g, &g).unwrap();
        }
        assert!(!g.is_exact());
        assert!(g.promoted());
        let s = g.to_scaled();
        assert!(s.unit_det);
        // B = A₁A₂ has top eigenvalue (3+√5)/2, so log scale of B⁵¹² is
        // 512·ln((3+√5)/2) up to an O(1) projector constant.
        let lam = (3.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((s.log_scale - 512.0 * lam.ln()).abs() < 2.0, "{}", s.log_scale);
    }

    #[test]
    fn scaled_product_tracks_scale() {
        let a = generator(1).unwrap().to_scaled();
        let mut g = Mat3::Scaled(a);
        for _ in 0..2000 {
            g = multiply(&g, &generator(1).unwrap()).unwrap();
        }
        // A₁^n has max entry n, so log scale ≈ ln(2001).
        let s = g.to_scaled();
        assert!((s.log_scale - 2001f64.ln()).abs() < 1e-6);
    }
}
