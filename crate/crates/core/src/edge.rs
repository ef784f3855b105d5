//! The two-generator subsemigroup ⟨A₁, A₂⟩ acting on the simplex edge
//! between E₁ and E₂.
//!
//! Both generators fix the plane x₃ = 0, where they act as the integer
//! Möbius maps of the Stern–Brocot subdivision: the 2ⁿ images of the edge
//! arc at level n tile the arc with Farey-mediant endpoints. Because the
//! restricted 2×2 blocks have determinant one, the chordal arc length has
//! the exact reciprocal form |γI| = 1/(‖γe₁‖‖γe₂‖); summing the arcsin of
//! those lengths over a level reproduces the quarter turn π/2, and the
//! per-level sums of the weight φ_{3/2} give the finite-depth evidence that
//! the series behind the 3/2 lower bound diverges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::linalg::{cartan, proj_distance, Mat3, ProjPoint};
use crate::poincare::phi_s;
use crate::words::{enumerate, EnumFilter, Word};

/// Hard depth cap: level n holds 2ⁿ words and every word is visited.
pub const EDGE_DEPTH_CAP: usize = 26;

/// Tiling checks sort 2ⁿ arcs; above this the check stops being a test and
/// becomes a workload.
pub const TILING_DEPTH_CAP: usize = 24;

/// The image γ·I of the edge arc I = I(E₁, E₂) under a word over {1, 2}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeArc {
    /// [γE₁, γE₂]; the first endpoint has the larger edge parameter.
    pub endpoints: [ProjPoint; 2],
    pub word: Word,
    /// d(γE₁, γE₂) in the sine metric; equals 1/(‖γe₁‖‖γe₂‖) exactly
    /// because the restricted block has determinant one.
    pub chordal_length: f64,
    /// arcsin of the chordal length; additive along the arc.
    pub angular_length: f64,
}

impl EdgeArc {
    /// Edge parameter t(p) = p₁/(p₁+p₂) of an endpoint; E₂ ↦ 0, E₁ ↦ 1.
    pub fn params(&self) -> (f64, f64) {
        (param(&self.endpoints[0]), param(&self.endpoints[1]))
    }
}

fn param(p: &ProjPoint) -> f64 {
    let c = p.coords();
    c[0] / (c[0] + c[1])
}

fn arc_of_matrix(w: &Word, g: &Mat3) -> Result<EdgeArc> {
    // Exact integer columns when available: a shared mediant endpoint is
    // then the same float vector regardless of which word produced it, so
    // tiling junctions match bitwise. Entry products below 2^53 also make
    // the wedge cross-check exact.
    let (c1, c2, log_scale, check) = match g.exact_entries() {
        Some(e) if e.iter().flatten().all(|&x| x < (1u128 << 26)) => (
            [e[0][0] as f64, e[1][0] as f64, e[2][0] as f64],
            [e[0][1] as f64, e[1][1] as f64, e[2][1] as f64],
            0.0,
            true,
        ),
        _ => {
            let (m, ls) = g.f64_parts();
            (
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                ls,
                false,
            )
        }
    };
    let n1 = (c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]).sqrt();
    let n2 = (c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2]).sqrt();
    let chordal = if log_scale == 0.0 {
        1.0 / (n1 * n2)
    } else {
        (-(n1.ln() + n2.ln() + 2.0 * log_scale)).exp()
    };
    if check {
        // The reciprocal shortcut assumes ‖γe₁ ∧ γe₂‖ = 1; verify against
        // the wedge formula while the arithmetic below 2^53 is exact.
        let cr = [
            c1[1] * c2[2] - c1[2] * c2[1],
            c1[2] * c2[0] - c1[0] * c2[2],
            c1[0] * c2[1] - c1[1] * c2[0],
        ];
        let wedge = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt() / (n1 * n2);
        if (wedge - chordal).abs() > 1e-12 * chordal {
            return Err(Error::Numeric(format!(
                "arc length formulas disagree on {w}: reciprocal {chordal} vs wedge {wedge}"
            )));
        }
    }
    Ok(EdgeArc {
        endpoints: [ProjPoint::new(c1)?, ProjPoint::new(c2)?],
        word: w.clone(),
        chordal_length: chordal,
        angular_length: chordal.asin(),
    })
}

/// The arc γ·I for a word over {1, 2}.
pub fn arc_of(w: &Word) -> Result<EdgeArc> {
    if w.symbols().any(|s| s == 3) {
        return Err(Error::Domain(format!(
            "word {w} leaves the edge subsemigroup: symbol 3 moves the plane x₃ = 0"
        )));
    }
    arc_of_matrix(w, &w.matrix())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TilingReport {
    pub n: usize,
    pub arcs: u64,
    /// Largest sine distance between endpoints that should coincide,
    /// including the outer ones against E₁ and E₂.
    pub max_endpoint_gap: f64,
    pub angular_sum: f64,
    /// |angular_sum − π/2|.
    pub angular_defect: f64,
    pub pass: bool,
}

/// Mismatch tolerance for shared tile endpoints.
pub const TILING_ENDPOINT_TOL: f64 = 1e-12;
/// Tolerance for the angular lengths summing to the quarter turn.
pub const TILING_ANGLE_TOL: f64 = 1e-9;

#[derive(Clone)]
struct TileAcc {
    count: u64,
    first_hi: Option<ProjPoint>,
    last_lo: Option<ProjPoint>,
    last_lo_param: f64,
    max_gap: f64,
    angular: KahanSum,
}

impl TileAcc {
    fn new() -> Self {
        TileAcc {
            count: 0,
            first_hi: None,
            last_lo: None,
            last_lo_param: f64::INFINITY,
            max_gap: 0.0,
            angular: KahanSum::new(),
        }
    }

    fn push(&mut self, arc: &EdgeArc) {
        // DFS emits arcs in strictly decreasing edge position (symbol 1
        // maps the arc right of symbol 2 and both generators preserve
        // order), so each arc's high endpoint must meet the previous low.
        let (hi_p, _) = arc.params();
        if let Some(prev) = &self.last_lo {
            self.max_gap = self.max_gap.max(proj_distance(prev, &arc.endpoints[0]));
            debug_assert!(hi_p <= self.last_lo_param + 1e-9, "arc order broke");
        } else {
            self.first_hi = Some(arc.endpoints[0].clone());
        }
        self.last_lo = Some(arc.endpoints[1].clone());
        self.last_lo_param = arc.params().1;
        self.angular.add(arc.angular_length);
        self.count += 1;
    }

    fn merge(&mut self, other: TileAcc) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let boundary = proj_distance(
            self.last_lo.as_ref().expect("nonempty"),
            other.first_hi.as_ref().expect("nonempty"),
        );
        self.max_gap = self.max_gap.max(other.max_gap).max(boundary);
        self.last_lo = other.last_lo;
        self.last_lo_param = other.last_lo_param;
        self.angular.merge(other.angular);
        self.count += other.count;
    }
}

/// Verifies that the 2ⁿ level-n arcs tile the edge: consecutive endpoints
/// coincide, the outer endpoints are E₁ and E₂, and the angular lengths sum
/// to π/2. Runs in DFS order with O(1) state; the DFS order is the edge
/// order.
pub fn tiling_check(n: usize) -> Result<TilingReport> {
    if n > TILING_DEPTH_CAP {
        return Err(Error::Input(format!(
            "tiling level {n} exceeds the cap {TILING_DEPTH_CAP}"
        )));
    }
    let filter = EnumFilter {
        max_length: Some(n),
        restrict_alphabet: Some(vec![1, 2]),
        include_empty: n == 0,
        ..EnumFilter::default()
    };
    let (acc, _) = enumerate(
        &filter,
        TileAcc::new,
        |w, g, acc: &mut TileAcc| {
            if w.len() == n {
                acc.push(&arc_of_matrix(w, g)?);
            }
            Ok(())
        },
        TileAcc::merge,
    )?;
    let e1 = ProjPoint::basis(1);
    let e2 = ProjPoint::basis(2);
    let outer = match (&acc.first_hi, &acc.last_lo) {
        (Some(hi), Some(lo)) => proj_distance(hi, &e1).max(proj_distance(lo, &e2)),
        _ => return Err(Error::Logic("tiling enumeration emitted no arcs".into())),
    };
    let max_gap = acc.max_gap.max(outer);
    let angular_sum = acc.angular.value();
    let angular_defect = (angular_sum - std::f64::consts::FRAC_PI_2).abs();
    Ok(TilingReport {
        n,
        arcs: acc.count,
        max_endpoint_gap: max_gap,
        angular_sum,
        angular_defect,
        pass: max_gap <= TILING_ENDPOINT_TOL && angular_defect <= TILING_ANGLE_TOL,
    })
}

/// The empirical separation constant of the edge words: the largest ε with
/// σ₂(γ) ≥ ε and ε·|γI| ≤ σ₁(γ)⁻² over all tested γ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeEpsilonReport {
    pub depth: usize,
    /// Words tested: length in [2, depth] over {1,2}, last two digits
    /// distinct.
    pub words: u64,
    /// min over tested γ of min(σ₂, ‖γe₁‖‖γe₂‖/σ₁²).
    pub value: f64,
    pub worst_word: Word,
    pub sigma2_min: f64,
    pub sigma2_argmin: Word,
    /// min of ‖γe₁‖‖γe₂‖/σ₁² = 1/(σ₁²|γI|).
    pub norm_bound_min: f64,
    pub norm_bound_argmin: Word,
    /// min over tested γ of φ_{3/2}(γ)/(ε̂²·|γI|); at least 1 exactly when
    /// the arc-length inequality φ_{3/2} ≥ ε̂²|γI| holds for every word.
    pub phi_margin: f64,
}

#[derive(Clone)]
struct Tracked {
    value: f64,
    word: Word,
}

impl Tracked {
    fn new() -> Self {
        Tracked {
            value: f64::INFINITY,
            word: Word::new(),
        }
    }

    /// Keeps the first (lexicographically earliest, given DFS emission and
    /// in-order merging) minimizer on ties.
    fn offer(&mut self, value: f64, word: &Word) {
        if value < self.value {
            self.value = value;
            self.word = word.clone();
        }
    }

    fn merge(&mut self, other: Tracked) {
        if other.value < self.value {
            *self = other;
        }
    }
}

struct EpsAcc {
    words: u64,
    sigma2: Tracked,
    norm_bound: Tracked,
    phi_over_arc: f64,
}

/// Per-word data entering the edge inequalities: σ₂, the norm bound
/// ‖γe₁‖‖γe₂‖/σ₁², the arc length, and φ_{3/2}.
fn edge_quantities(g: &Mat3) -> Result<(f64, f64, f64, f64)> {
    let k = cartan(g)?;
    let (m, ls) = g.f64_parts();
    let mut log_norms = [0.0; 2];
    for (j, ln) in log_norms.iter_mut().enumerate() {
        let c = [m[0][j], m[1][j], m[2][j]];
        *ln = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt().ln() + ls;
    }
    let sigma2 = k.kappa[1].exp();
    let norm_bound = (log_norms[0] + log_norms[1] - 2.0 * k.kappa[0]).exp();
    let arc = (-(log_norms[0] + log_norms[1])).exp();
    let phi = phi_s(&k, 1.5)?;
    Ok((sigma2, norm_bound, arc, phi))
}

fn edge_word_filter(depth: usize) -> EnumFilter {
    EnumFilter {
        max_length: Some(depth),
        restrict_alphabet: Some(vec![1, 2]),
        last_n_digits_not_same: Some(2),
        ..EnumFilter::default()
    }
}

/// Scans all edge words of length 2…depth with distinct last two digits and
/// reports the separation constant ε̂ together with the margin by which
/// φ_{3/2} ≥ ε̂²|γI| holds on the same set.
pub fn edge_epsilon(depth: usize) -> Result<EdgeEpsilonReport> {
    if depth < 2 {
        return Err(Error::Input(format!(
            "need depth ≥ 2 (no word shorter than 2 has distinct last digits), got {depth}"
        )));
    }
    if depth > EDGE_DEPTH_CAP {
        return Err(Error::Input(format!(
            "depth {depth} exceeds the cap {EDGE_DEPTH_CAP}"
        )));
    }
    let (acc, _) = enumerate(
        &edge_word_filter(depth),
        || EpsAcc {
            words: 0,
            sigma2: Tracked::new(),
            norm_bound: Tracked::new(),
            phi_over_arc: f64::INFINITY,
        },
        |w, g, acc: &mut EpsAcc| {
            if w.len() < 2 {
                return Ok(());
            }
            let (sigma2, norm_bound, arc, phi) = edge_quantities(g)?;
            acc.words += 1;
            acc.sigma2.offer(sigma2, w);
            acc.norm_bound.offer(norm_bound, w);
            acc.phi_over_arc = acc.phi_over_arc.min(phi / arc);
            Ok(())
        },
        |a, b| {
            a.words += b.words;
            a.sigma2.merge(b.sigma2);
            a.norm_bound.merge(b.norm_bound);
            a.phi_over_arc = a.phi_over_arc.min(b.phi_over_arc);
        },
    )?;
    let (value, worst_word) = if acc.sigma2.value <= acc.norm_bound.value {
        (acc.sigma2.value, acc.sigma2.word.clone())
    } else {
        (acc.norm_bound.value, acc.norm_bound.word.clone())
    };
    Ok(EdgeEpsilonReport {
        depth,
        words: acc.words,
        value,
        worst_word,
        sigma2_min: acc.sigma2.value,
        sigma2_argmin: acc.sigma2.word,
        norm_bound_min: acc.norm_bound.value,
        norm_bound_argmin: acc.norm_bound.word,
        phi_margin: acc.phi_over_arc / (value * value),
    })
}

/// One level of the divergence series Σ φ_{3/2} over edge words with
/// distinct last two digits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub n: usize,
    pub count: u64,
    /// Σ φ_{3/2}(γ) over the level.
    pub level_sum: f64,
    /// Running sum of level sums up to n.
    pub cumulative: f64,
    /// ε̂ over all qualifying words of length ≤ n.
    pub eps_so_far: f64,
}

/// Per-level sums of φ_{3/2} for n = 2…depth. A critical-exponent value of
/// exactly 3/2 for the edge subsemigroup would make the level sums
/// asymptotically flat; decay would indicate convergence.
pub fn lower_bound_evidence(depth: usize) -> Result<Vec<EvidenceRow>> {
    if depth < 2 {
        return Err(Error::Input(format!("need depth ≥ 2, got {depth}")));
    }
    if depth > EDGE_DEPTH_CAP {
        return Err(Error::Input(format!(
            "depth {depth} exceeds the cap {EDGE_DEPTH_CAP}"
        )));
    }
    struct Level {
        count: u64,
        sum: KahanSum,
        eps: f64,
    }
    let (levels, _) = enumerate(
        &edge_word_filter(depth),
        || {
            (0..=depth)
                .map(|_| Level {
                    count: 0,
                    sum: KahanSum::new(),
                    eps: f64::INFINITY,
                })
                .collect::<Vec<_>>()
        },
        |w, g, acc: &mut Vec<Level>| {
            if w.len() < 2 {
                return Ok(());
            }
            let (sigma2, norm_bound, _, phi) = edge_quantities(g)?;
            let lvl = &mut acc[w.len()];
            lvl.count += 1;
            lvl.sum.add(phi);
            lvl.eps = lvl.eps.min(sigma2.min(norm_bound));
            Ok(())
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.count += y.count;
                x.sum.merge(y.sum);
                x.eps = x.eps.min(y.eps);
            }
        },
    )?;
    let mut rows = Vec::with_capacity(depth.saturating_sub(1));
    let mut cumulative = KahanSum::new();
    let mut eps = f64::INFINITY;
    for (n, lvl) in levels.iter().enumerate().skip(2) {
        let level_sum = lvl.sum.value();
        cumulative.add(level_sum);
        eps = eps.min(lvl.eps);
        rows.push(EvidenceRow {
            n,
            count: lvl.count,
            level_sum,
            cumulative: cumulative.value(),
            eps_so_far: eps,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn empty_word_arc_is_the_whole_edge() {
        let a = arc_of(&Word::new()).unwrap();
        assert_eq!(a.chordal_length, 1.0);
        assert!((a.angular_length - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(a.endpoints[0], ProjPoint::basis(1));
        assert_eq!(a.endpoints[1], ProjPoint::basis(2));
        let (hi, lo) = a.params();
        assert_eq!((hi, lo), (1.0, 0.0));
    }

    #[test]
    fn generator_arcs_split_the_edge_at_the_first_mediant() {
        // A₁e₂ = A₂e₁ = e₁+e₂, so both arcs have chordal length
        // 1/(1·√2) and meet at the midpoint parameter 1/2.
        let one = arc_of(&"1".parse().unwrap()).unwrap();
        let two = arc_of(&"2".parse().unwrap()).unwrap();
        for a in [&one, &two] {
            assert!((a.chordal_length - 0.5_f64.sqrt()).abs() < 1e-15);
        }
        assert_eq!(one.endpoints[1], two.endpoints[0]);
        assert!((one.params().1 - 0.5).abs() < 1e-15);
        // Two half-arcs of angle π/4 recover the quarter turn exactly:
        // the chordal lengths sum to √2 instead, which is why tiling sums
        // must use the angular metric.
        let total = one.angular_length + two.angular_length;
        assert!((total - FRAC_PI_2).abs() < 1e-15);
        assert!((one.chordal_length + two.chordal_length - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn third_symbol_is_rejected() {
        let err = arc_of(&"132".parse().unwrap()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn small_tilings_pass_with_exact_endpoints() {
        for n in 0..=6 {
            let r = tiling_check(n).unwrap();
            assert!(r.pass, "level {n}: {r:?}");
            assert_eq!(r.arcs, 1 << n);
            // Shared endpoints are the same integer vector computed once
            // per mediant, so they agree bitwise.
            assert_eq!(r.max_endpoint_gap, 0.0);
            assert!(r.angular_defect < 1e-12);
        }
        assert!(tiling_check(TILING_DEPTH_CAP + 1).is_err());
    }

    #[test]
    fn epsilon_report_counts_and_monotonicity() {
        // Level k contributes 2^{k−1} qualifying words.
        let mut prev = f64::INFINITY;
        for depth in 2..=8 {
            let r = edge_epsilon(depth).unwrap();
            let expect: u64 = (2..=depth).map(|k| 1u64 << (k - 1)).sum();
            assert_eq!(r.words, expect);
            assert!(r.value > 0.0 && r.value <= prev);
            assert!(r.phi_margin >= 1.0, "depth {depth}: {}", r.phi_margin);
            assert_eq!(r.value, r.sigma2_min.min(r.norm_bound_min));
            prev = r.value;
        }
        assert!(edge_epsilon(1).is_err());
        assert!(edge_epsilon(EDGE_DEPTH_CAP + 1).is_err());
    }

    #[test]
    fn evidence_rows_accumulate_positively() {
        let rows = lower_bound_evidence(10).unwrap();
        assert_eq!(rows.len(), 9);
        let mut prev_cum = 0.0;
        for row in &rows {
            assert_eq!(row.count, 1 << (row.n - 1));
            assert!(row.level_sum > 0.0);
            assert!(row.cumulative > prev_cum);
            assert!(row.eps_so_far > 0.0);
            prev_cum = row.cumulative;
        }
        // ε̂ so far matches the standalone scan at equal depth.
        let eps = edge_epsilon(10).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.eps_so_far, eps.value);
    }
}
