//! Singular values and Cartan projections via exact characteristic
//! polynomials of the Gram matrix.
//!
//! For an exact-integer matrix g the Gram matrix gᵀg has exact integer
//! entries, and the characteristic polynomial λ³ − c₂λ² + c₁λ − c₀ has
//! c₂ = tr(gᵀg), c₁ = sum of principal 2×2 minors, c₀ = det(g)² = 1. Both
//! c₂ and c₁ are computed exactly (u128 fast path, BigUint beyond) and only
//! then rounded to f64; since all three quantities are sums of nonnegative
//! terms there is no cancellation and the rounded coefficients carry full
//! relative accuracy.
//!
//! Root extraction deliberately solves only for the LARGEST root, twice:
//! λ₁ = largest root of the polynomial itself, and μ₁ = 1/λ₃ = largest root
//! of the reversed polynomial μ³ − c₁μ² + c₂μ − c₀ (reversal is exact when
//! c₀ = 1). The largest root of a positive cubic is well conditioned, so
//! σ₁ = √λ₁ and σ₃ = 1/√μ₁ come out with ~1e-15 relative accuracy even when
//! σ₁/σ₃ is astronomically large, and σ₂ = √(μ₁/λ₁) inherits that.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::linalg::mat3::{det3, Mat3};

/// Cartan projection κ(g) = (ln σ₁, ln σ₂, ln σ₃), nonincreasing and summing
/// to zero for determinant-1 matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanVec {
    pub kappa: [f64; 3],
}

impl CartanVec {
    /// κ₁ − κ₂ and κ₂ − κ₃, the two simple-root gaps.
    pub fn gaps(&self) -> (f64, f64) {
        (
            self.kappa[0] - self.kappa[1],
            self.kappa[1] - self.kappa[2],
        )
    }

    pub fn sum(&self) -> f64 {
        self.kappa[0] + self.kappa[1] + self.kappa[2]
    }

    pub fn singular_values(&self) -> [f64; 3] {
        [
            self.kappa[0].exp(),
            self.kappa[1].exp(),
            self.kappa[2].exp(),
        ]
    }
}

/// Entries at or below this bound keep the 2×2 Gram minors inside u128.
/// (Minor terms are products of two Gram entries, each ≤ 3·entry².)
const FAST_ENTRY_LIMIT: u128 = 2_000_000_000;

/// Largest root of λ³ − bλ² + cλ − d for real coefficients of a polynomial
/// whose roots are all real and nonnegative (characteristic polynomial of a
/// positive semidefinite matrix). Trig closed form for the top root followed
/// by a guarded Newton polish.
pub(crate) fn cubic_max_root(b: f64, c: f64, d: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    // Depressed form in units of b: t³ + P t + Q with λ = b(1/3 + t).
    let cb = c / (b * b);
    let db = d / (b * b * b);
    let p = cb - 1.0 / 3.0;
    let q = -2.0 / 27.0 + cb / 3.0 - db;
    let mut lam = if p >= -1e-24 {
        // Near-triple root (all σ comparable): λ ≈ b/3.
        b * (1.0 / 3.0 + 2.0 * (-p.min(0.0) / 3.0).sqrt())
    } else {
        let a = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        b * (1.0 / 3.0 + a * theta.cos())
    };
    // Newton on f(λ) = ((λ − b)λ + c)λ − d. The derivative at the top root is
    // (λ₁−λ₂)(λ₁−λ₃) ≥ 0; skip polishing when roots cluster (trig value is
    // already accurate there) or when a step would jump outside [b/3, b].
    for _ in 0..4 {
        let f = ((lam - b) * lam + c) * lam - d;
        let fp = (3.0 * lam - 2.0 * b) * lam + c;
        if fp.abs() <= 1e-12 * b * b {
            break;
        }
        let step = f / fp;
        if !step.is_finite() || step.abs() > 0.25 * lam {
            break;
        }
        lam -= step;
    }
    lam.clamp(b / 3.0, b)
}

/// Exact Gram char-poly coefficients (c₂, c₁) on the u128 fast path.
/// Returns None if any intermediate would overflow.
fn gram_coeffs_u128(e: &[[u128; 3]; 3]) -> Option<(f64, f64)> {
    let mut g = [[0_u128; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut acc = 0_u128;
            for row in e {
                acc = acc.checked_add(row[i].checked_mul(row[j])?)?;
            }
            g[i][j] = acc;
            g[j][i] = acc;
        }
    }
    let c2 = g[0][0].checked_add(g[1][1])?.checked_add(g[2][2])?;
    // Principal minors are ≥ 0 by Cauchy–Schwarz; the subtraction is exact in
    // u128 and each minor converts to f64 with one rounding. The minors are
    // summed in f64 (they can jointly exceed u128), still cancellation-free.
    let minor = |i: usize, j: usize| -> Option<u128> {
        let prod = g[i][i].checked_mul(g[j][j])?;
        let sq = g[i][j].checked_mul(g[i][j])?;
        Some(prod - sq)
    };
    let c1 = minor(0, 1)? as f64 + minor(0, 2)? as f64 + minor(1, 2)? as f64;
    Some((c2 as f64, c1))
}

/// Same coefficients with arbitrary-precision integers; exact for any
/// representable matrix, only the final f64 conversions round.
fn gram_coeffs_big(e: &[[u128; 3]; 3]) -> Result<(f64, f64)> {
    let mut g = vec![vec![BigUint::from(0_u8); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut acc = BigUint::from(0_u8);
            for row in e {
                acc += BigUint::from(row[i]) * BigUint::from(row[j]);
            }
            g[i][j] = acc.clone();
            g[j][i] = acc;
        }
    }
    let c2 = (&g[0][0] + &g[1][1] + &g[2][2])
        .to_f64()
        .ok_or_else(|| Error::Numeric("gram trace exceeds f64 range".into()))?;
    let minor = |i: usize, j: usize| -> BigUint {
        &g[i][i] * &g[j][j] - &g[i][j] * &g[i][j]
    };
    let c1 = (minor(0, 1) + minor(0, 2) + minor(1, 2))
        .to_f64()
        .ok_or_else(|| Error::Numeric("gram minors exceed f64 range".into()))?;
    Ok((c2, c1))
}

/// Gram coefficients for the normalized float repr, plus det(m)². The minors
/// here can cancel, so relative accuracy degrades with the square of the
/// condition number; this path only serves matrices already beyond exact
/// range, where the documented accuracy contract is weaker.
fn gram_coeffs_f64(m: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let mut g = [[0.0_f64; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut acc = 0.0;
            for row in m {
                acc += row[i] * row[j];
            }
            g[i][j] = acc;
            g[j][i] = acc;
        }
    }
    let c2 = g[0][0] + g[1][1] + g[2][2];
    let minor = |i: usize, j: usize| g[i][i] * g[j][j] - g[i][j] * g[i][j];
    let c1 = (minor(0, 1) + minor(0, 2) + minor(1, 2)).max(0.0);
    let det = det3(m);
    (c2, c1, det * det)
}

/// Cartan projection from char-poly coefficients of the Gram matrix, with
/// ln c₀ = 2·ln|det| passed separately so the determinant constraint survives
/// even when det² underflows in the normalized units. Both λ₁ and μ₁ = c₀/λ₃
/// are extracted as largest roots; κ₂ comes from λ₂ = μ₁/λ₁, so the three
/// components sum to ln c₀ up to one rounding.
fn kappa_from_coeffs(c2: f64, c1: f64, log_c0: f64, log_scale: f64) -> Result<CartanVec> {
    if !(c2.is_finite() && c1.is_finite()) || c2 <= 0.0 || log_c0 > f64::MAX.ln() {
        return Err(Error::Numeric("gram coefficients out of range".into()));
    }
    let c0 = log_c0.exp();
    let lam1 = cubic_max_root(c2, c1, c0);
    if !(lam1 > 0.0) {
        return Err(Error::Numeric("nonpositive top gram eigenvalue".into()));
    }
    let k1 = 0.5 * lam1.ln() + log_scale;
    // Reversed polynomial μ³ − (c₁/c₀)μ² + (c₂/c₀)μ − 1/c₀ has roots 1/λᵢ,
    // largest μ₁ = 1/λ₃, and its top root is as well conditioned as λ₁ was;
    // then λ₂ = c₀/(λ₁λ₃) = c₀μ₁/λ₁.
    let rev_ok = c0 > 0.0
        && (c1 / c0).is_finite()
        && (c2 / c0).is_finite()
        && (1.0 / c0).is_finite();
    let (log_lam2, log_lam3) = if rev_ok {
        let mu1 = cubic_max_root(c1 / c0, c2 / c0, 1.0 / c0);
        if !(mu1 > 0.0) {
            return Err(Error::Numeric("nonpositive reversed gram root".into()));
        }
        (log_c0 + mu1.ln() - lam1.ln(), -mu1.ln())
    } else {
        // det² underflowed: fall back to dominant balance λ₂ ≈ c₁/c₂,
        // λ₃ ≈ c₀/c₁, exact in the limit of extreme spread (the only way to
        // get here with determinant-1 inputs).
        let c1p = c1.max(f64::MIN_POSITIVE);
        (c1p.ln() - c2.ln(), log_c0 - c1p.ln())
    };
    let k2 = (0.5 * log_lam2 + log_scale).min(k1);
    let k3 = (0.5 * log_lam3 + log_scale).min(k2);
    Ok(CartanVec {
        kappa: [k1, k2, k3],
    })
}

/// κ(g) = (ln σ₁, ln σ₂, ln σ₃).
pub fn cartan(g: &Mat3) -> Result<CartanVec> {
    match g {
        Mat3::Exact(e) => {
            let maxe = e.iter().flatten().copied().max().unwrap_or(0);
            if maxe == 0 {
                return Err(Error::Numeric("zero matrix".into()));
            }
            let (c2, c1) = if maxe <= FAST_ENTRY_LIMIT {
                match gram_coeffs_u128(e) {
                    Some(c) => c,
                    None => gram_coeffs_big(e)?,
                }
            } else {
                gram_coeffs_big(e)?
            };
            // det(g)² for semigroup elements is 1; honor other exact inputs.
            let det = g
                .det_exact()
                .expect("exact repr always has exact determinant");
            let detf = det.to_f64().unwrap_or(f64::INFINITY);
            if !detf.is_finite() {
                return Err(Error::Numeric("determinant exceeds f64 range".into()));
            }
            kappa_from_coeffs(c2, c1, 2.0 * detf.abs().ln(), 0.0)
        }
        Mat3::Scaled(sm) => {
            let (c2, c1, det_sq_direct) = gram_coeffs_f64(&sm.m);
            // With |det| = 1 known exactly, det(m) = ±exp(−3·log_scale) and
            // the float determinant (pure cancellation noise once the matrix
            // is strongly contracted) is not needed at all.
            let log_c0 = if sm.unit_det {
                -6.0 * sm.log_scale
            } else {
                det_sq_direct.ln()
            };
            kappa_from_coeffs(c2, c1, log_c0, sm.log_scale)
        }
    }
}

/// Singular values (σ₁ ≥ σ₂ ≥ σ₃). Values outside f64 range are reported as
/// an error; use [`cartan`] for the log-space quantities, which stay finite
/// far beyond that.
pub fn singular_values(g: &Mat3) -> Result<[f64; 3]> {
    let k = cartan(g)?;
    let s = k.singular_values();
    if !s[0].is_finite() {
        return Err(Error::Numeric(
            "largest singular value exceeds f64 range; use the Cartan projection".into(),
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat3::{generator, multiply};

    fn word_matrix(word: &[u8]) -> Mat3 {
        let mut g = Mat3::identity();
        for &i in word {
            g = multiply(&g, &generator(i).unwrap()).unwrap();
        }
        g
    }

    #[test]
    fn identity_has_zero_cartan() {
        let k = cartan(&Mat3::identity()).unwrap();
        assert_eq!(k.kappa, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_generator_closed_form() {
        // gᵀg for one generator has eigenvalues 2±√3 and 1.
        let s = singular_values(&generator(1).unwrap()).unwrap();
        let expect = [(2.0_f64 + 3.0_f64.sqrt()).sqrt(), 1.0, (2.0_f64 - 3.0_f64.sqrt()).sqrt()];
        for (got, want) in s.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-15 * want, "{got} vs {want}");
        }
        for i in 2..=3u8 {
            let si = singular_values(&generator(i).unwrap()).unwrap();
            for (a, b) in si.iter().zip(s) {
                assert!((a - b).abs() <= 1e-15, "generator {i} differs");
            }
        }
    }

    #[test]
    fn cartan_sums_to_zero_exactly_in_f64() {
        for word in [
            &[1_u8][..],
            &[1, 2],
            &[1, 2, 3],
            &[3, 3, 2, 1, 1, 2, 3],
            &[1, 1, 1, 1, 1, 2, 3, 2, 1, 3, 3, 2],
        ] {
            let k = cartan(&word_matrix(word)).unwrap();
            assert!(
                k.sum().abs() < 1e-13 * k.kappa[0].abs().max(1.0),
                "word {word:?}: sum {}",
                k.sum()
            );
            assert!(k.kappa[0] >= k.kappa[1] && k.kappa[1] >= k.kappa[2]);
        }
    }

    #[test]
    fn product_det_constraint_sigma() {
        // σ₁σ₂σ₃ = 1 must hold to full precision even at long lengths.
        let g = word_matrix(&[1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3]);
        let s = singular_values(&g).unwrap();
        let prod = s[0] * s[1] * s[2];
        assert!((prod - 1.0).abs() < 1e-12, "σ product {prod}");
    }

    #[test]
    fn huge_power_uses_big_path_and_stays_accurate() {
        // (A₁A₂A₃)^48 has entries ≈ 9e37: exact in u128 but far past the
        // fast Gram window, so this exercises the big-integer coefficients.
        // B = A₁A₂A₃ has three distinct positive eigenvalues, so
        // κ₁(Bⁿ)/n → ln λ₁(B) with an O(1/n) correction from the Perron
        // projector; 2e-2 absorbs that correction comfortably.
        let b = word_matrix(&[1, 2, 3]);
        let mut p = Mat3::identity();
        for _ in 0..48 {
            p = multiply(&p, &b).unwrap();
        }
        assert!(p.is_exact());
        let k = cartan(&p).unwrap();
        // Perron root of B: λ³ = 7λ² − 5λ + 1.
        let lam = cubic_max_root(7.0, 5.0, 1.0);
        assert!((k.kappa[0] / 48.0 - lam.ln()).abs() < 2e-2);
        assert!(k.sum().abs() < 1e-10 * k.kappa[0]);
        assert!(k.kappa[0] >= k.kappa[1] && k.kappa[1] >= k.kappa[2]);
    }

    #[test]
    fn scaled_representation_matches_exact_for_moderate_words() {
        // The float Gram minors cancel once (σ₂/σ₁)² approaches machine
        // precision, so full-component agreement is only promised while the
        // spread is moderate; a length-3 word is well inside that window.
        let g = word_matrix(&[1, 2, 3]);
        let ks = cartan(&Mat3::Scaled(g.to_scaled())).unwrap();
        let ke = cartan(&g).unwrap();
        for i in 0..3 {
            assert!(
                (ks.kappa[i] - ke.kappa[i]).abs() < 1e-12,
                "component {i}: {} vs {}",
                ks.kappa[i],
                ke.kappa[i]
            );
        }
        // For a long word only κ₁ (cancellation-free trace) and the exact
        // sum constraint survive in the scaled representation.
        let g = word_matrix(&[1, 2, 3, 3, 2, 1, 2, 2, 3, 1, 1, 2, 3, 2]);
        let ks = cartan(&Mat3::Scaled(g.to_scaled())).unwrap();
        let ke = cartan(&g).unwrap();
        assert!((ks.kappa[0] - ke.kappa[0]).abs() < 1e-12 * ke.kappa[0]);
        assert!(ks.sum().abs() < 1e-12 * ks.kappa[0]);
    }
}
