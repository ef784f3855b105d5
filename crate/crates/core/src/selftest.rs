//! Named identity checks a healthy build must reproduce: closed-form
//! singular values, counting identities, tiling landmarks, exactness
//! contracts. Each check recomputes its expected value from an independent
//! derivation (hand formulas, Newton on characteristic polynomials, brute
//! counts), so a regression anywhere in the numeric stack shows up as a
//! named failure instead of a silent drift.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use serde::Serialize;

use crate::edge::{arc_of, lower_bound_evidence, tiling_check};
use crate::error::Result;
use crate::gasket::{coding_point, diam_area, triangle_of};
use crate::linalg::{
    cartan, cartan_frames, generator, generator_transpose, multiply, proj_distance,
    proj_point_to_line, singular_values, CartanVec, Mat3, ProjPoint, DEFAULT_GAP_TOL,
};
use crate::poincare::{partial_poincare_sum, phi_s, psi_s};
use crate::schottky::{cartan_additivity_defect, certify_loxodromic, certify_narrow};
use crate::walk::{lyapunov_dimension, lyapunov_spectrum, rw_entropy, MeasureSpec, Provenance};
use crate::words::{
    collect_words, count_words, is_prefix_free_power, minimal_subset, word_to_matrix, EnumFilter,
    Word,
};

/// One named check: what was verified, whether it held, and the measured
/// versus expected values (or the error that interrupted it).
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// (passed, failed) counts.
    pub fn counts(&self) -> (usize, usize) {
        let p = self.checks.iter().filter(|c| c.passed).count();
        (p, self.checks.len() - p)
    }
}

fn run(
    checks: &mut Vec<Check>,
    name: &'static str,
    f: impl FnOnce() -> Result<(bool, String)>,
) {
    match f() {
        Ok((passed, detail)) => checks.push(Check {
            name,
            passed,
            detail,
        }),
        Err(e) => checks.push(Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        }),
    }
}

fn close(measured: f64, expected: f64, tol: f64) -> (bool, String) {
    (
        (measured - expected).abs() <= tol,
        format!("measured {measured:.15} expected {expected:.15} tol {tol:.0e}"),
    )
}

fn all_close(pairs: &[(f64, f64)], tol: f64) -> (bool, String) {
    let worst = pairs
        .iter()
        .map(|(m, e)| (m - e).abs())
        .fold(0.0_f64, f64::max);
    (
        worst <= tol,
        format!("worst deviation {worst:.3e} over {} values, tol {tol:.0e}", pairs.len()),
    )
}

fn entries_equal(a: &Mat3, b: &Mat3) -> bool {
    match (a.exact_entries(), b.exact_entries()) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

fn word(s: &str) -> Word {
    s.parse().expect("selftest words are literals")
}

/// Runs the whole suite. Cheap enough to execute at startup: no check
/// enumerates beyond depth 3 or walks more than a few thousand steps.
pub fn run_selftest() -> SelfTestReport {
    let mut checks = Vec::new();
    let c = &mut checks;
    let sqrt3 = 3.0_f64.sqrt();

    run(c, "generator-entries", || {
        let expected: [[[u128; 3]; 3]; 3] = [
            [[1, 1, 1], [0, 1, 0], [0, 0, 1]],
            [[1, 0, 0], [1, 1, 1], [0, 0, 1]],
            [[1, 0, 0], [0, 1, 0], [1, 1, 1]],
        ];
        let mut ok = true;
        for i in 1..=3u8 {
            ok &= generator(i)?.exact_entries() == Some(&expected[(i - 1) as usize]);
        }
        Ok((ok, "three defining matrices, exact entries".into()))
    });

    run(c, "generator-transpose", || {
        let mut ok = true;
        for i in 1..=3u8 {
            ok &= entries_equal(&generator(i)?.transpose(), &generator_transpose(i)?);
        }
        Ok((ok, "transpose(generator) matches the transposed family".into()))
    });

    run(c, "identity-product", || {
        let a3 = generator(3)?;
        let ok = entries_equal(&multiply(&Mat3::identity(), &a3)?, &a3)
            && entries_equal(&multiply(&a3, &Mat3::identity())?, &a3);
        Ok((ok, "I·A₃ = A₃·I = A₃".into()))
    });

    run(c, "two-letter-product", || {
        let m = multiply(&generator(1)?, &generator(2)?)?;
        let ok = m.exact_entries() == Some(&[[2, 1, 2], [1, 1, 1], [0, 0, 1]]);
        Ok((ok, "A₁A₂ entries by hand multiplication".into()))
    });

    run(c, "unit-determinant", || {
        let one = BigInt::from(1);
        let mut ok = true;
        for w in ["123", "1122", "12321", "332211"] {
            ok &= word(w).matrix().det_exact().as_ref() == Some(&one);
        }
        Ok((ok, "det = 1 on sample words (multiplicativity)".into()))
    });

    run(c, "generator-singular-values", || {
        // Gram matrix of A₁ has characteristic polynomial
        // (λ − 1)(λ² − 4λ + 1), so σ = (√(2+√3), 1, √(2−√3)).
        let s = singular_values(&generator(1)?)?;
        Ok(all_close(
            &[
                (s[0], (2.0 + sqrt3).sqrt()),
                (s[1], 1.0),
                (s[2], (2.0 - sqrt3).sqrt()),
            ],
            1e-12,
        ))
    });

    run(c, "generator-conjugacy", || {
        // A₂ and A₃ are coordinate-permutation conjugates of A₁, so all
        // three share a singular spectrum.
        let s1 = singular_values(&generator(1)?)?;
        let s2 = singular_values(&generator(2)?)?;
        let s3 = singular_values(&generator(3)?)?;
        Ok(all_close(
            &[
                (s2[0], s1[0]),
                (s2[1], s1[1]),
                (s2[2], s1[2]),
                (s3[0], s1[0]),
                (s3[1], s1[1]),
                (s3[2], s1[2]),
            ],
            1e-14,
        ))
    });

    run(c, "identity-singular-values", || {
        let s = singular_values(&Mat3::identity())?;
        let k = cartan(&Mat3::identity())?;
        let ok = s == [1.0, 1.0, 1.0] && k.kappa == [0.0, 0.0, 0.0];
        Ok((ok, "σ(I) = (1,1,1), κ(I) = 0 exactly".into()))
    });

    run(c, "cartan-trace-zero", || {
        let mut worst = 0.0_f64;
        for w in [
            "12312312312312312312",
            "13213213213213213213",
            "11223311223311223311",
        ] {
            worst = worst.max(cartan(&word(w).matrix())?.sum().abs());
        }
        Ok((
            worst <= 1e-9,
            format!("|Σκ| ≤ {worst:.3e} on length-20 words, tol 1e-9"),
        ))
    });

    run(c, "sine-metric-landmarks", || {
        let e1 = ProjPoint::basis(1);
        let e2 = ProjPoint::basis(2);
        let mid = ProjPoint::new([1.0, 1.0, 0.0])?;
        let p = ProjPoint::new([1.0, 2.0, 3.0])?;
        Ok(all_close(
            &[
                (proj_distance(&e1, &e2), 1.0),
                (proj_distance(&p, &p), 0.0),
                (proj_distance(&e1, &mid), 0.5_f64.sqrt()),
            ],
            1e-15,
        ))
    });

    run(c, "diagonal-frames", || {
        // diag(4, 2, 1/8) is already in Cartan form: attracting point and
        // repelling-hyperplane normal are both the first axis.
        let g = Mat3::from_f64([[4.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.125]])?;
        let f = cartan_frames(&g, DEFAULT_GAP_TOL)?;
        let e1 = ProjPoint::basis(1);
        Ok(all_close(
            &[
                (proj_distance(&f.v_plus, &e1), 0.0),
                (proj_distance(&f.h_minus_normal, &e1), 0.0),
                (proj_point_to_line(&f.v_plus, &f.h_minus_normal), 1.0),
            ],
            1e-12,
        ))
    });

    run(c, "empty-word-identity", || {
        let ok = entries_equal(&word_to_matrix(&Word::new()), &Mat3::identity());
        Ok((ok, "matrix of the empty word".into()))
    });

    run(c, "word-matrix-multiplicativity", || {
        let ok = entries_equal(
            &word("12").matrix(),
            &multiply(&generator(1)?, &generator(2)?)?,
        ) && entries_equal(
            &word("3121").matrix(),
            &multiply(&word("31").matrix(), &word("21").matrix())?,
        );
        Ok((ok, "matrix(uv) = matrix(u)·matrix(v)".into()))
    });

    run(c, "unipotent-subexponential-growth", || {
        // A₁ⁿ = [[1,n,n],[0,1,0],[0,0,1]]: κ₁ grows like ln n, so the
        // per-step rate must fall with depth.
        let r20 = cartan(&Word::from_symbols(&[1; 20])?.matrix())?.kappa[0] / 20.0;
        let r60 = cartan(&Word::from_symbols(&[1; 60])?.matrix())?.kappa[0] / 60.0;
        Ok((
            r60 < r20 && r60 <= 0.08,
            format!("κ₁/n at n=20: {r20:.4}, at n=60: {r60:.4}"),
        ))
    });

    run(c, "word-counting", || {
        let with_empty = count_words(&EnumFilter::up_to_length(2))?;
        let without = count_words(&EnumFilter {
            include_empty: false,
            ..EnumFilter::up_to_length(2)
        })?;
        let digit = |n: usize| {
            count_words(&EnumFilter {
                last_n_digits_not_same: Some(2),
                include_empty: false,
                ..EnumFilter::up_to_length(n)
            })
        };
        let exactly3 = digit(3)? - digit(2)?;
        let pair = |n: usize| {
            count_words(&EnumFilter {
                restrict_alphabet: Some(vec![1, 2]),
                include_empty: false,
                ..EnumFilter::up_to_length(n)
            })
        };
        let exactly12 = pair(12)? - pair(11)?;
        let ok = with_empty == 13 && without == 12 && exactly3 == 18 && exactly12 == 4096;
        Ok((
            ok,
            format!(
                "1+3+9 = {with_empty}, 3+9 = {without}, 3·3·2 = {exactly3}, 2¹² = {exactly12}"
            ),
        ))
    });

    run(c, "minimal-subset", || {
        let s: BTreeSet<Word> = ["1", "12", "3"].iter().map(|w| word(w)).collect();
        let expect: BTreeSet<Word> = ["1", "3"].iter().map(|w| word(w)).collect();
        let free: BTreeSet<Word> = ["2", "13"].iter().map(|w| word(w)).collect();
        let ok = minimal_subset(&s) == expect && minimal_subset(&free) == free;
        Ok((ok, "covered words dropped, prefix-free sets fixed".into()))
    });

    run(c, "prefix-free-powers", || {
        let free: BTreeSet<Word> = ["1", "2"].iter().map(|w| word(w)).collect();
        let tied: BTreeSet<Word> = ["1", "12"].iter().map(|w| word(w)).collect();
        let ok = is_prefix_free_power(&free, 3)? && !is_prefix_free_power(&tied, 1)?;
        Ok((ok, "{1,2}³ free, {1,12} already tied at power 1".into()))
    });

    run(c, "weight-at-identity", || {
        let zero = CartanVec {
            kappa: [0.0, 0.0, 0.0],
        };
        let mut ok = true;
        for s in [0.5, 1.0, 1.5, 2.0] {
            ok &= phi_s(&zero, s)? == 1.0 && psi_s(&zero, s)? == 0.0;
        }
        Ok((ok, "φ_s(0) = 1 and ψ_s(0) = 0 exactly, all s".into()))
    });

    run(c, "weight-piecewise-endpoint", || {
        let k = cartan(&word("123").matrix())?;
        let (g12, g13) = (k.kappa[0] - k.kappa[1], k.kappa[0] - k.kappa[2]);
        let (ok_end, d_end) = close(psi_s(&k, 2.0)?, g12 + g13, 1e-15);
        let scaled = CartanVec {
            kappa: [3.5 * k.kappa[0], 3.5 * k.kappa[1], 3.5 * k.kappa[2]],
        };
        let (ok_lin, d_lin) = close(psi_s(&scaled, 1.3)?, 3.5 * psi_s(&k, 1.3)?, 1e-12);
        Ok((ok_end && ok_lin, format!("endpoint: {d_end}; linearity: {d_lin}")))
    });

    run(c, "generator-weight", || {
        let m = phi_s(&cartan(&generator(1)?)?, 1.0)?;
        Ok(close(m, 1.0 / (2.0 + sqrt3).sqrt(), 1e-12))
    });

    run(c, "depth-one-sum", || {
        let filter = EnumFilter {
            include_empty: false,
            ..EnumFilter::up_to_length(1)
        };
        let (sum, count) = partial_poincare_sum(&filter, 1.0)?;
        let (ok, detail) = close(sum, 3.0 / (2.0 + sqrt3).sqrt(), 1e-12);
        Ok((ok && count == 3, detail))
    });

    run(c, "convergent-endpoint-bounded", || {
        // At s = 2 each term is σ₂σ₃/σ₁² ≤ 1.
        let filter = EnumFilter {
            include_empty: false,
            ..EnumFilter::up_to_length(3)
        };
        let mut worst = 0.0_f64;
        for w in collect_words(&filter)? {
            worst = worst.max(phi_s(&cartan(&w.matrix())?, 2.0)?);
        }
        Ok((
            worst <= 1.0 + 1e-12,
            format!("max term {worst:.15} over 39 words, bound 1"),
        ))
    });

    run(c, "base-triangle", || {
        let t = triangle_of(&Word::new());
        let ok = *t.vertices()
            == [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ];
        Ok((ok, "triangle of the empty word is the simplex".into()))
    });

    run(c, "first-subdivision-triangle", || {
        // A₁ maps the vertices to e₁, (e₁+e₂)/2, (e₁+e₃)/2; the entries are
        // dyadic so the float match is exact.
        let t = triangle_of(&word("1"));
        let ok = *t.vertices()
            == [
                [1.0, 0.0, 0.0],
                [0.5, 0.5, 0.0],
                [0.5, 0.0, 0.5],
            ];
        Ok((ok, "columns of A₁ normalized by coordinate sum".into()))
    });

    run(c, "simplex-diameter-area", || {
        let (diam, area) = diam_area(&triangle_of(&Word::new()));
        Ok(all_close(
            &[(diam, 2.0_f64.sqrt()), (area, sqrt3 / 2.0)],
            1e-15,
        ))
    });

    run(c, "triangle-nesting", || {
        let outer = triangle_of(&word("1"));
        let inner = triangle_of(&word("12"));
        let deeper = triangle_of(&word("121"));
        let mut ok = true;
        for v in inner.vertices() {
            ok &= outer.contains(v, 1e-12);
        }
        for v in deeper.vertices() {
            ok &= inner.contains(v, 1e-12);
        }
        Ok((ok, "vertices of Δ(wu) lie in Δ(w)".into()))
    });

    run(c, "corner-coding", || {
        // Triangles along the spine 1ⁿ shrink to the fixed vertex E₁ at
        // rate ~1/n.
        let (p, bound) = coding_point(&Word::from_symbols(&[1; 50])?, 2)?;
        let d = proj_distance(&p, &ProjPoint::basis(1));
        Ok((
            d <= 0.1 && bound <= 0.1,
            format!("distance to E₁ {d:.3e}, triangle bound {bound:.3e}"),
        ))
    });

    run(c, "two-letter-word-contraction", || {
        // Independent oracle: the Gram matrix of A₁A₂ has characteristic
        // polynomial λ³ − 13λ² + 9λ − 1; Newton from λ = 12 gives σ₁², and
        // the smallest column of [[2,1,2],[1,1,1],[0,0,1]] has norm √2.
        let mut lam = 12.0_f64;
        for _ in 0..60 {
            let f = lam * lam * lam - 13.0 * lam * lam + 9.0 * lam - 1.0;
            let df = 3.0 * lam * lam - 26.0 * lam + 9.0;
            lam -= f / df;
        }
        let sigma1 = lam.sqrt();
        let (ok_anchor, d_anchor) = close(sigma1, 3.503333, 1e-6);
        let m = word("12").matrix();
        let (ok_svd, d_svd) = close(singular_values(&m)?[0], sigma1, 1e-12);
        let (norms, nls) = m.column_norms_scaled();
        let min_ratio = norms
            .iter()
            .map(|&x| (x.ln() + nls - cartan(&m).unwrap().kappa[0]).exp())
            .fold(f64::INFINITY, f64::min);
        let (ok_col, d_col) = close(min_ratio, 2.0_f64.sqrt() / sigma1, 1e-12);
        Ok((
            ok_anchor && ok_svd && ok_col,
            format!("σ₁ anchor: {d_anchor}; svd: {d_svd}; min column ratio: {d_col}"),
        ))
    });

    run(c, "edge-arcs-of-generators", || {
        // A₁ maps the edge [E₂, E₁] onto [mediant, E₁], A₂ onto [E₂,
        // mediant]; both images have chordal length 1/√2.
        let a1 = arc_of(&word("1"))?;
        let a2 = arc_of(&word("2"))?;
        let (hi1, lo1) = a1.params();
        let (hi2, lo2) = a2.params();
        Ok(all_close(
            &[
                (a1.chordal_length, 0.5_f64.sqrt()),
                (a2.chordal_length, 0.5_f64.sqrt()),
                (hi1, 1.0),
                (lo1, 0.5),
                (hi2, 0.5),
                (lo2, 0.0),
            ],
            1e-15,
        ))
    });

    run(c, "first-tiling-level", || {
        let r = tiling_check(1)?;
        let (ok, detail) = close(r.angular_sum, PI / 2.0, 1e-12);
        Ok((
            ok && r.pass && r.arcs == 2,
            format!("{} arcs; {detail}", r.arcs),
        ))
    });

    run(c, "chordal-lengths-do-not-tile", || {
        // Only angular lengths are additive along the edge: the two level-1
        // chordal lengths sum to √2, not 1.
        let sum = arc_of(&word("1"))?.chordal_length + arc_of(&word("2"))?.chordal_length;
        let (ok, detail) = close(sum, 2.0_f64.sqrt(), 1e-15);
        Ok((ok && (sum - 1.0).abs() > 0.4, detail))
    });

    run(c, "level-two-edge-weights", || {
        // At depth 2 only "12" and "21" qualify (distinct last digits), and
        // they share a Cartan vector by transpose symmetry.
        let rows = lower_bound_evidence(2)?;
        let row = rows.last().expect("depth-2 evidence row");
        let expected = 2.0 * phi_s(&cartan(&word("12").matrix())?, 1.5)?;
        let (ok, detail) = close(row.level_sum, expected, 1e-12);
        Ok((ok && row.count == 2, format!("{} words; {detail}", row.count)))
    });

    run(c, "exact-entropy-values", || {
        let uniform = MeasureSpec::uniform(
            vec![word("1"), word("2"), word("3")],
            Provenance::Manual,
        )?;
        let h3 = rw_entropy(&uniform, 6)?.h;
        let dirac = MeasureSpec::dirac(word("1"));
        let h1 = rw_entropy(&dirac, 6)?.h;
        let ok = h3 == 3.0_f64.ln() && h1 == 0.0;
        Ok((ok, format!("uniform: {h3:.15} = ln 3 bitwise; Dirac: {h1}")))
    });

    run(c, "dimension-substitutions", || {
        let d0 = lyapunov_dimension(0.0, (1.0, 2.0))?.dim_ly;
        let d1 = lyapunov_dimension(1.0, (1.0, 2.0))?.dim_ly;
        let dm = lyapunov_dimension(2.0, (1.0, 2.0))?.dim_ly;
        let ok = d0 == 0.0 && d1 == 1.0 && dm == 1.5;
        Ok((ok, format!("h=0 → {d0}, h=χ₁ → {d1}, h=χ₁+χ₂/2 → {dm}")))
    });

    run(c, "unipotent-walk-spectrum", || {
        // Deterministic products of A₁ grow polynomially, so every per-step
        // exponent tends to zero like ln(steps)/steps.
        let est = lyapunov_spectrum(&MeasureSpec::dirac(word("1")), 4000, 8, Some(7))?;
        let worst = est.lambda.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
        Ok((
            worst <= 0.02,
            format!("max |λ| = {worst:.3e} at 4000 steps, tol 2e-2"),
        ))
    });

    run(c, "loxodromy-gap-threshold", || {
        // σ₁/σ₂ of a generator is √(2+√3) ≈ 1.93: the gap test must fail
        // at 1/ε = 2 and pass at 1/ε ≈ 1.67.
        let a1 = generator(1)?;
        let tight = certify_loxodromic(&a1, 0.01, 0.5)?;
        let loose = certify_loxodromic(&a1, 0.01, 0.6)?;
        let ok = !tight.gap_condition.passed() && loose.gap_condition.passed();
        Ok((
            ok,
            format!(
                "gap at ε=0.5: {:?}, at ε=0.6: {:?}",
                tight.gap_condition, loose.gap_condition
            ),
        ))
    });

    run(c, "singleton-narrowness", || {
        let g = word("12").matrix();
        let cert = certify_narrow(std::slice::from_ref(&g), 1e-6, None)?;
        let ok = cert.state.passed()
            && cert.attracting_diam_proj == Some(0.0)
            && cert.hyperplane_diam_proj == Some(0.0);
        Ok((ok, "one element is η-narrow for every η with diameter 0".into()))
    });

    run(c, "single-factor-defect", || {
        let d = cartan_additivity_defect(std::slice::from_ref(&word("123").matrix()))?;
        Ok((d == 0.0, format!("‖κ(g) − κ(g)‖ = {d}")))
    });

    SelfTestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn every_named_check_passes() {
        let report = run_selftest();
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
        let (passed, failed) = report.counts();
        assert!(report.all_passed());
        assert_eq!(failed, 0);
        assert_eq!(passed, report.checks.len());
    }

    #[test]
    fn check_names_are_unique_and_plentiful() {
        let report = run_selftest();
        let names: BTreeSet<&str> = report.checks.iter().map(|c| c.name).collect();
        assert_eq!(names.len(), report.checks.len(), "duplicate check name");
        assert!(report.checks.len() >= 25, "suite shrank: {}", report.checks.len());
    }
}
