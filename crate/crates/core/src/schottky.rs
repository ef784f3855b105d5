//! Ping-pong certificates for finite sets of semigroup elements: loxodromy
//! (strong singular gaps plus attracting/repelling separation in both the
//! standard and wedge representations), Schottky separation of families,
//! narrowness of frame clusters, and the near-additivity of Cartan
//! projections that separated families enjoy.
//!
//! Every certificate evaluates strict inequalities with a symmetric float
//! margin of [`CERT_MARGIN`]; values inside the margin band come back as
//! [`CertState::Inconclusive`] instead of a pass or fail that one rounding
//! error could flip. Certificates are deterministic functions of their
//! inputs and serialize to JSON with the full distance matrices for audit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cartan, cartan_frames, multiply, proj_point_to_line, CartanFrames, Mat3, DEFAULT_GAP_TOL,
};
use crate::words::{collect_words, EnumFilter, Word};

/// Additive margin for certifying strict inequalities. Gap conditions are
/// compared in log units, distances in chordal units.
pub const CERT_MARGIN: f64 = 1e-10;

/// Cap on the number of matrices [`products_up_to`] will materialize.
pub const PRODUCT_BUDGET: usize = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertState {
    Pass,
    Fail,
    Inconclusive,
}

impl CertState {
    pub fn passed(self) -> bool {
        self == CertState::Pass
    }

    fn and(self, other: CertState) -> CertState {
        use CertState::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Pass, Pass) => Pass,
        }
    }
}

/// Certifies `lhs > rhs`: pass or fail only outside the margin band.
fn strict(lhs: f64, rhs: f64) -> CertState {
    if lhs > rhs + CERT_MARGIN {
        CertState::Pass
    } else if lhs < rhs - CERT_MARGIN {
        CertState::Fail
    } else {
        CertState::Inconclusive
    }
}

/// Loxodromy certificate: singular-gap ratios σ₁/σ₂ and σ₂/σ₃ at least 1/ε
/// (equivalently, both log gaps at least ln(1/ε)), and the attracting point
/// farther than r from the repelling hyperplane in P(R³) and in P(∧²R³).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoxodromyCert {
    pub r: f64,
    pub epsilon: f64,
    /// ln(σ₁/σ₂); stored in log units so extreme gaps stay finite.
    pub log_gap_12: f64,
    /// ln(σ₂/σ₃).
    pub log_gap_23: f64,
    /// d(V⁺, H⁻) in P(R³); absent when frame extraction failed.
    pub dist_proj: Option<f64>,
    /// d(V⁺, H⁻) in P(∧²R³).
    pub dist_wedge: Option<f64>,
    pub gap_condition: CertState,
    pub distance_condition: CertState,
    pub state: CertState,
    /// Why frames were unavailable, when they were.
    pub failure_reason: Option<String>,
}

impl LoxodromyCert {
    /// Worst slack over the evaluable conditions: gap slacks in log units,
    /// distance slacks in chordal units.
    fn min_slack(&self) -> f64 {
        let log_inv_eps = -self.epsilon.ln();
        let mut slack = (self.log_gap_12 - log_inv_eps).min(self.log_gap_23 - log_inv_eps);
        if let (Some(dp), Some(dw)) = (self.dist_proj, self.dist_wedge) {
            slack = slack.min(dp - self.r).min(dw - self.r);
        }
        slack
    }
}

fn check_params(r: f64, eps: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) || !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Input(format!(
            "certificate thresholds must be positive and finite, got r = {r}, eps = {eps}"
        )));
    }
    Ok(())
}

/// Certifies that g is (r, ε)-loxodromic. Frame-extraction failures (gaps
/// too small to split the singular directions) fail the distance condition
/// with the reason recorded instead of aborting.
pub fn certify_loxodromic(g: &Mat3, r: f64, eps: f64) -> Result<LoxodromyCert> {
    check_params(r, eps)?;
    let kappa = cartan(g)?;
    let (log_gap_12, log_gap_23) = kappa.gaps();
    let log_inv_eps = -eps.ln();
    let gap_condition = strict(log_gap_12, log_inv_eps).and(strict(log_gap_23, log_inv_eps));
    let (dist_proj, dist_wedge, distance_condition, failure_reason) =
        match cartan_frames(g, DEFAULT_GAP_TOL) {
            Ok(f) => {
                let dp = proj_point_to_line(&f.v_plus, &f.h_minus_normal);
                let dw = proj_point_to_line(&f.v_plus_wedge, &f.h_minus_wedge_normal);
                (Some(dp), Some(dw), strict(dp, r).and(strict(dw, r)), None)
            }
            Err(e) => (None, None, CertState::Fail, Some(e.to_string())),
        };
    let state = gap_condition.and(distance_condition);
    Ok(LoxodromyCert {
        r,
        epsilon: eps,
        log_gap_12,
        log_gap_23,
        dist_proj,
        dist_wedge,
        gap_condition,
        distance_condition,
        state,
        failure_reason,
    })
}

/// Schottky certificate: every member loxodromic, and every ordered pair
/// (g, h), the diagonal included, keeps g's attracting point farther than
/// 6r from h's repelling hyperplane in both representations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchottkyCert {
    pub r: f64,
    pub epsilon: f64,
    pub size: usize,
    pub members: Vec<LoxodromyCert>,
    /// pair_dist_proj[i][j] = d(V_i⁺, H_j⁻) in P(R³); None when a frame of
    /// either member was unavailable.
    pub pair_dist_proj: Vec<Vec<Option<f64>>>,
    pub pair_dist_wedge: Vec<Vec<Option<f64>>>,
    pub min_pair_dist: Option<f64>,
    /// Worst slack across every evaluated condition; gap slacks are in log
    /// units, distance slacks in chordal units.
    pub min_slack: f64,
    pub pair_condition: CertState,
    pub state: CertState,
}

fn family_frames(family: &[Mat3]) -> Vec<std::result::Result<CartanFrames, String>> {
    family
        .iter()
        .map(|g| cartan_frames(g, DEFAULT_GAP_TOL).map_err(|e| e.to_string()))
        .collect()
}

fn pair_matrix(
    frames: &[std::result::Result<CartanFrames, String>],
    wedge: bool,
) -> Vec<Vec<Option<f64>>> {
    frames
        .par_iter()
        .map(|fg| {
            frames
                .iter()
                .map(|fh| match (fg, fh) {
                    (Ok(a), Ok(b)) => Some(if wedge {
                        proj_point_to_line(&a.v_plus_wedge, &b.h_minus_wedge_normal)
                    } else {
                        proj_point_to_line(&a.v_plus, &b.h_minus_normal)
                    }),
                    _ => None,
                })
                .collect()
        })
        .collect()
}

pub fn certify_schottky(family: &[Mat3], r: f64, eps: f64) -> Result<SchottkyCert> {
    check_params(r, eps)?;
    if family.is_empty() {
        return Err(Error::Input("a Schottky family needs at least one member".into()));
    }
    let members: Vec<LoxodromyCert> = family
        .iter()
        .map(|g| certify_loxodromic(g, r, eps))
        .collect::<Result<_>>()?;
    let frames = family_frames(family);
    let pair_dist_proj = pair_matrix(&frames, false);
    let pair_dist_wedge = pair_matrix(&frames, true);

    let mut pair_condition = CertState::Pass;
    let mut min_pair_dist: Option<f64> = None;
    let mut min_slack = members
        .iter()
        .map(LoxodromyCert::min_slack)
        .fold(f64::INFINITY, f64::min);
    for matrix in [&pair_dist_proj, &pair_dist_wedge] {
        for row in matrix.iter() {
            for entry in row {
                match entry {
                    Some(d) => {
                        pair_condition = pair_condition.and(strict(*d, 6.0 * r));
                        min_pair_dist = Some(min_pair_dist.map_or(*d, |m: f64| m.min(*d)));
                        min_slack = min_slack.min(d - 6.0 * r);
                    }
                    // A missing frame already failed that member's cert;
                    // the pair cannot be certified either.
                    None => pair_condition = CertState::Fail,
                }
            }
        }
    }
    let state = members
        .iter()
        .fold(CertState::Pass, |acc, c| acc.and(c.state))
        .and(pair_condition);
    Ok(SchottkyCert {
        r,
        epsilon: eps,
        size: family.len(),
        members,
        pair_dist_proj,
        pair_dist_wedge,
        min_pair_dist,
        min_slack,
        pair_condition,
        state,
    })
}

/// Narrowness certificate: attracting points within η of one another (or of
/// the anchor) and repelling-hyperplane unit normals within η in the
/// chordal metric, in both representations. For hyperplanes through the
/// origin the Hausdorff distance between their projectivizations equals the
/// chordal distance between unit normals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NarrownessCert {
    pub eta: f64,
    pub size: usize,
    pub anchored: bool,
    pub attracting_diam_proj: Option<f64>,
    pub attracting_diam_wedge: Option<f64>,
    pub hyperplane_diam_proj: Option<f64>,
    pub hyperplane_diam_wedge: Option<f64>,
    pub state: CertState,
    pub failure_reason: Option<String>,
}

pub fn certify_narrow(family: &[Mat3], eta: f64, around: Option<&Mat3>) -> Result<NarrownessCert> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Input(format!("eta must be positive and finite, got {eta}")));
    }
    if family.is_empty() {
        return Err(Error::Input("a narrow family needs at least one member".into()));
    }
    let mut frames = Vec::with_capacity(family.len() + 1);
    for g in family.iter().chain(around) {
        match cartan_frames(g, DEFAULT_GAP_TOL) {
            Ok(f) => frames.push(f),
            Err(e) => {
                return Ok(NarrownessCert {
                    eta,
                    size: family.len(),
                    anchored: around.is_some(),
                    attracting_diam_proj: None,
                    attracting_diam_wedge: None,
                    hyperplane_diam_proj: None,
                    hyperplane_diam_wedge: None,
                    state: CertState::Fail,
                    failure_reason: Some(e.to_string()),
                });
            }
        }
    }
    // Anchored: distances to the anchor's frame. Unanchored: all pairs.
    let pairs: Vec<(usize, usize)> = if around.is_some() {
        let anchor = frames.len() - 1;
        (0..family.len()).map(|i| (i, anchor)).collect()
    } else {
        let mut v = Vec::new();
        for i in 0..frames.len() {
            for j in (i + 1)..frames.len() {
                v.push((i, j));
            }
        }
        v
    };
    let mut diam = [0.0_f64; 4];
    for &(i, j) in &pairs {
        let (a, b) = (&frames[i], &frames[j]);
        diam[0] = diam[0].max(crate::linalg::proj_distance(&a.v_plus, &b.v_plus));
        diam[1] = diam[1].max(crate::linalg::proj_distance(&a.v_plus_wedge, &b.v_plus_wedge));
        diam[2] = diam[2].max(crate::linalg::proj_distance(
            &a.h_minus_normal,
            &b.h_minus_normal,
        ));
        diam[3] = diam[3].max(crate::linalg::proj_distance(
            &a.h_minus_wedge_normal,
            &b.h_minus_wedge_normal,
        ));
    }
    let state = diam
        .iter()
        .fold(CertState::Pass, |acc, &d| acc.and(strict(eta, d)));
    Ok(NarrownessCert {
        eta,
        size: family.len(),
        anchored: around.is_some(),
        attracting_diam_proj: Some(diam[0]),
        attracting_diam_wedge: Some(diam[1]),
        hyperplane_diam_proj: Some(diam[2]),
        hyperplane_diam_wedge: Some(diam[3]),
        state,
        failure_reason: None,
    })
}

/// ‖κ(g₁⋯g_ℓ) − Σκ(gᵢ)‖₂. Zero for ℓ = 1 and for commuting positive
/// diagonals; bounded by ℓ·C for products drawn from separated families.
pub fn cartan_additivity_defect(gs: &[Mat3]) -> Result<f64> {
    if gs.is_empty() {
        return Err(Error::Input("need at least one factor".into()));
    }
    let mut product = gs[0].clone();
    let mut sum = cartan(&gs[0])?.kappa;
    for g in &gs[1..] {
        product = multiply(&product, g)?;
        let k = cartan(g)?.kappa;
        for i in 0..3 {
            sum[i] += k[i];
        }
    }
    let kp = cartan(&product)?.kappa;
    let mut d2 = 0.0;
    for i in 0..3 {
        d2 += (kp[i] - sum[i]) * (kp[i] - sum[i]);
    }
    Ok(d2.sqrt())
}

/// All products of 1..=depth factors from the family, lengths ascending and
/// factor indices lexicographic within a length.
pub fn products_up_to(family: &[Mat3], depth: usize) -> Result<Vec<Mat3>> {
    if family.is_empty() || depth == 0 {
        return Err(Error::Input("need a nonempty family and depth ≥ 1".into()));
    }
    let mut total = 0usize;
    let mut level_size = 1usize;
    for _ in 0..depth {
        level_size = level_size.saturating_mul(family.len());
        total = total.saturating_add(level_size);
    }
    if total > PRODUCT_BUDGET {
        return Err(Error::Size(format!(
            "{total} products exceed the budget of {PRODUCT_BUDGET}"
        )));
    }
    let mut all: Vec<Mat3> = family.to_vec();
    let mut level: Vec<Mat3> = family.to_vec();
    for _ in 1..depth {
        let mut next = Vec::with_capacity(level.len() * family.len());
        for p in &level {
            for g in family {
                next.push(multiply(p, g)?);
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    Ok(all)
}

/// Summary of additivity defects over seeded random products: the defect of
/// each product divided by its length, with max, median and mean.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefectStats {
    pub samples: usize,
    pub max_len: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub mean_ratio: f64,
}

pub fn defect_statistics(
    family: &[Mat3],
    max_len: usize,
    samples: usize,
    seed: u64,
) -> Result<DefectStats> {
    if family.is_empty() || max_len == 0 || samples == 0 {
        return Err(Error::Input(
            "need a nonempty family, max_len ≥ 1 and samples ≥ 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(samples);
    let mut mean = 0.0;
    for _ in 0..samples {
        let len = rng.gen_range(1..=max_len);
        let gs: Vec<Mat3> = (0..len)
            .map(|_| family[rng.gen_range(0..family.len())].clone())
            .collect();
        let ratio = cartan_additivity_defect(&gs)? / len as f64;
        mean += ratio;
        ratios.push(ratio);
    }
    ratios.sort_by(f64::total_cmp);
    let median = if samples % 2 == 1 {
        ratios[samples / 2]
    } else {
        0.5 * (ratios[samples / 2 - 1] + ratios[samples / 2])
    };
    Ok(DefectStats {
        samples,
        max_len,
        max_ratio: ratios[samples - 1],
        median_ratio: median,
        mean_ratio: mean / samples as f64,
    })
}

/// First generator word f (in length-then-lexicographic order, up to
/// max_len) whose left product f·g certifies (r, ε)-loxodromic, if any.
/// This is the finite, constructive replacement for the existential
/// multiplier set of the proximality theorem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiplierHit {
    pub word: Word,
    pub cert: LoxodromyCert,
    /// Candidates examined before (and including) the hit.
    pub tried: usize,
}

pub fn find_loxodromic_multiplier(
    g: &Mat3,
    max_len: usize,
    r: f64,
    eps: f64,
) -> Result<Option<MultiplierHit>> {
    check_params(r, eps)?;
    if max_len == 0 {
        return Err(Error::Input("need max_len ≥ 1".into()));
    }
    let mut words = collect_words(&EnumFilter {
        max_length: Some(max_len),
        ..EnumFilter::default()
    })?;
    words.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let mut tried = 0;
    for w in words {
        tried += 1;
        let cert = certify_loxodromic(&multiply(&w.matrix(), g)?, r, eps)?;
        if cert.state.passed() {
            return Ok(Some(MultiplierHit {
                word: w,
                cert,
                tried,
            }));
        }
    }
    Ok(None)
}

/// Result of scanning a (r, ε) parameter grid for a family: the feasibility
/// brackets measured from the family itself, the best passing certificate,
/// and whether it achieves the separation r > 4ε that product families
/// inherit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridReport {
    /// Smallest ε any certificate can pass, exp(−min log gap) over members.
    pub feasible_epsilon: Option<f64>,
    /// Largest r any certificate can pass: min(member distances,
    /// pairwise distances / 6).
    pub r_ceiling: Option<f64>,
    pub evaluated: usize,
    pub best: Option<SchottkyCert>,
    /// Whether the best certificate satisfies r > 4ε.
    pub separated: bool,
}

/// Scans a geometric grid of (r, ε) pairs bracketed by the family's
/// measured gaps and distances and returns the best certified pair:
/// passing certificates with r > 4ε first, then larger r, then smaller ε.
pub fn schottky_grid_search(
    family: &[Mat3],
    r_steps: usize,
    eps_steps: usize,
) -> Result<GridReport> {
    if family.is_empty() {
        return Err(Error::Input("a Schottky family needs at least one member".into()));
    }
    if r_steps == 0 || eps_steps == 0 {
        return Err(Error::Input("need at least one grid step per axis".into()));
    }
    // Measure the family once: smallest log gap bounds ε from below, and
    // the distance minima bound r from above.
    let mut min_log_gap = f64::INFINITY;
    for g in family {
        let (g12, g23) = cartan(g)?.gaps();
        min_log_gap = min_log_gap.min(g12).min(g23);
    }
    let frames = family_frames(family);
    let mut min_dist = f64::INFINITY;
    let mut frames_ok = true;
    for f in &frames {
        match f {
            Ok(f) => {
                min_dist = min_dist
                    .min(proj_point_to_line(&f.v_plus, &f.h_minus_normal))
                    .min(proj_point_to_line(&f.v_plus_wedge, &f.h_minus_wedge_normal));
            }
            Err(_) => frames_ok = false,
        }
    }
    let mut min_pair = f64::INFINITY;
    for matrix in [pair_matrix(&frames, false), pair_matrix(&frames, true)] {
        for row in matrix {
            for entry in row.into_iter().flatten() {
                min_pair = min_pair.min(entry);
            }
        }
    }
    let feasible_epsilon = (min_log_gap > 0.0).then(|| (-min_log_gap).exp());
    let r_ceiling = frames_ok.then_some(min_dist.min(min_pair / 6.0));
    let (eps_floor, r_cap) = match (feasible_epsilon, r_ceiling) {
        (Some(e), Some(r)) if r > 4.0 * CERT_MARGIN => (e, r),
        _ => {
            return Ok(GridReport {
                feasible_epsilon,
                r_ceiling,
                evaluated: 0,
                best: None,
                separated: false,
            });
        }
    };
    // Geometric ladders spanning the boundary on both sides, so the scan
    // locates the feasibility frontier rather than assuming it.
    let ladder = |lo: f64, hi: f64, steps: usize| -> Vec<f64> {
        if steps == 1 {
            return vec![hi];
        }
        let ratio = (hi / lo).powf(1.0 / (steps - 1) as f64);
        (0..steps).map(|k| lo * ratio.powi(k as i32)).collect()
    };
    let r_values = ladder(r_cap / 64.0, r_cap * 1.5, r_steps);
    let eps_values = ladder(eps_floor / 2.0, (eps_floor * 4.0).min(1.0).max(eps_floor), eps_steps);

    let mut best: Option<(bool, f64, f64)> = None;
    let mut evaluated = 0;
    for &r in &r_values {
        for &eps in &eps_values {
            evaluated += 1;
            // Same inequalities certify_schottky checks, against the same
            // measured values.
            let pass = min_log_gap > -eps.ln() + CERT_MARGIN
                && min_dist > r + CERT_MARGIN
                && min_pair > 6.0 * r + CERT_MARGIN;
            if !pass {
                continue;
            }
            let sep = r > 4.0 * eps;
            let candidate = (sep, r, -eps);
            if best.map_or(true, |b| candidate > b) {
                best = Some(candidate);
            }
        }
    }
    match best {
        Some((separated, r, neg_eps)) => {
            let cert = certify_schottky(family, r, -neg_eps)?;
            debug_assert!(cert.state.passed());
            Ok(GridReport {
                feasible_epsilon,
                r_ceiling,
                evaluated,
                best: Some(cert),
                separated,
            })
        }
        None => Ok(GridReport {
            feasible_epsilon,
            r_ceiling,
            evaluated,
            best: None,
            separated: false,
        }),
    }
}
