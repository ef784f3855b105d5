//! Singular-value weights φ_s/ψ_s, truncated Poincaré sums, pressure
//! slopes, and the critical-exponent estimator.
//!
//! The weight of a word is φ_s(γ) = exp(−ψ_s(κ(γ))) with
//! ψ_s(κ) = s(κ₁−κ₂) on 0 ≤ s ≤ 1 and (κ₁−κ₂) + (s−1)(κ₁−κ₃) on 1 < s ≤ 2.
//! The series Σ_γ φ_s(γ) diverges below the critical exponent and converges
//! above it; at finite truncation the observable is the growth rate of the
//! depth-n slice Z_n(s), estimated by a least-squares slope of log Z_n in n
//! and driven to zero by bisection in s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::kahan::KahanSum;
use crate::linalg::{cartan, CartanVec};
use crate::words::{enumerate, EnumFilter};

/// Validated weight parameter s ∈ (0, 2].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    s: f64,
}

impl PhiParams {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 2.0) {
            return Err(Error::Domain(format!("s must lie in (0, 2], got {s}")));
        }
        Ok(PhiParams { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// ψ_s(κ): linear in κ, piecewise-linear and continuous in s on [0, 2].
pub fn psi_s(kappa: &CartanVec, s: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [0, 2], got {s}")));
    }
    let (gap12, _) = kappa.gaps();
    let gap13 = kappa.kappa[0] - kappa.kappa[2];
    Ok(if s <= 1.0 {
        s * gap12
    } else {
        gap12 + (s - 1.0) * gap13
    })
}

/// φ_s(κ) = exp(−ψ_s(κ)) ∈ (0, 1], evaluated in the log domain.
pub fn phi_s(kappa: &CartanVec, s: f64) -> Result<f64> {
    PhiParams::new(s)?;
    Ok((-psi_s(kappa, s)?).exp())
}

/// Σ φ_s over the filtered words, with the number of terms. Shard sums are
/// compensated and merged in a fixed order, so the result is identical for
/// any thread count.
pub fn partial_poincare_sum(filter: &EnumFilter, s: f64) -> Result<(f64, u64)> {
    PhiParams::new(s)?;
    let (sum, stats) = enumerate(
        filter,
        KahanSum::new,
        |_, g, acc: &mut KahanSum| {
            let k = cartan(g)?;
            acc.add(phi_s(&k, s)?);
            Ok(())
        },
        |a, b| a.merge(b),
    )?;
    Ok((sum.value(), stats.emitted))
}

/// Fit model for the growth rate of log Z_n in n.
///
/// The depth-n slices carry a polynomial prefactor: the parabolic branches
/// (powers of a single generator have top singular value growing only
/// linearly) make Z_n ≈ C·n^(−β)·e^(n·P) rather than purely exponential, so
/// a straight line through log Z_n underestimates P at any reachable depth.
/// The corrected model fits log Z_n = a + P·n − β·ln n and reports P; the
/// plain linear model is kept for comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PressureFit {
    Linear,
    #[default]
    LogCorrected,
}

/// Pressure diagnostic at one s: per-depth log sums and their growth rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PressureReport {
    pub s: f64,
    /// Depths n with their slice sums Z_n(s); strictly increasing.
    pub depths: Vec<usize>,
    /// log Z_n(s) per depth.
    pub log_sums: Vec<f64>,
    /// Number of words per depth (3ⁿ here; kept for the record).
    pub counts: Vec<u64>,
    /// Fitted growth rate of log Z_n in n over the kept depths: the
    /// coefficient of n under `fit`.
    pub slope: f64,
    pub slope_stderr: f64,
    /// How many of the smallest depths were discarded from the fit.
    pub discarded: usize,
    pub fit: PressureFit,
}

/// Fraction of the smallest depths dropped from the pressure fit; the
/// shallow slices sit in a transient regime that biases the slope.
pub const PRESSURE_DISCARD_FRACTION: f64 = 0.25;

/// Hard ceiling on DFS nodes for one pressure evaluation.
pub const PRESSURE_NODE_BUDGET: f64 = 2e9;

fn tree_nodes(n_max: usize) -> f64 {
    // 1 + 3 + … + 3^n.
    (3.0_f64.powi(n_max as i32 + 1) - 1.0) / 2.0
}

/// Least squares y = a + b·x + c·ln x; returns (b, stderr of b). Centering
/// the regressors makes the intercept drop out of the normal equations.
fn ls_slope_log_corrected(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let ls: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / m;
    let lbar = ls.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxl, mut sll, mut sxy, mut sly) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        let (dx, dl, dy) = (xs[i] - xbar, ls[i] - lbar, ys[i] - ybar);
        sxx += dx * dx;
        sxl += dx * dl;
        sll += dl * dl;
        sxy += dx * dy;
        sly += dl * dy;
    }
    // det > 0 strictly: ln x is not affine in x over ≥ 3 distinct points.
    let det = sxx * sll - sxl * sxl;
    let slope = (sxy * sll - sly * sxl) / det;
    let c = (sxx * sly - sxl * sxy) / det;
    let ss_res: f64 = (0..xs.len())
        .map(|i| {
            let r = (ys[i] - ybar) - slope * (xs[i] - xbar) - c * (ls[i] - lbar);
            r * r
        })
        .sum();
    let dof = (xs.len().max(4) - 3) as f64;
    (slope, (ss_res / dof * sll / det).sqrt())
}

/// Computes log Z_n(s) for n in [n_min, n_max] in a single sharded DFS and
/// fits the growth rate with the default model, discarding the smallest
/// 25% of depths.
pub fn pressure_slope(s: f64, n_min: usize, n_max: usize) -> Result<PressureReport> {
    pressure_slope_with(s, n_min, n_max, PressureFit::default(), PRESSURE_DISCARD_FRACTION)
}

/// Full-control variant: choice of fit model and discard fraction.
pub fn pressure_slope_with(
    s: f64,
    n_min: usize,
    n_max: usize,
    fit: PressureFit,
    discard_fraction: f64,
) -> Result<PressureReport> {
    PhiParams::new(s)?;
    if n_min < 4 {
        return Err(Error::Input(format!("n_min must be ≥ 4, got {n_min}")));
    }
    if n_max < n_min + 4 {
        return Err(Error::Input(format!(
            "n_max must be ≥ n_min + 4, got n_min {n_min}, n_max {n_max}"
        )));
    }
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::Input(format!(
            "discard fraction must lie in [0, 1), got {discard_fraction}"
        )));
    }
    let work = tree_nodes(n_max);
    if work > PRESSURE_NODE_BUDGET {
        return Err(Error::Resource {
            what: format!("pressure evaluation at depth {n_max}"),
            estimate: work,
            budget: PRESSURE_NODE_BUDGET,
            unit: "DFS nodes",
        });
    }

    let filter = EnumFilter {
        include_empty: false,
        ..EnumFilter::up_to_length(n_max)
    };
    #[derive(Clone)]
    struct Slices {
        sums: Vec<KahanSum>,
        counts: Vec<u64>,
    }
    let (slices, _) = enumerate(
        &filter,
        || Slices {
            sums: vec![KahanSum::new(); n_max + 1],
            counts: vec![0; n_max + 1],
        },
        |w, g, acc: &mut Slices| {
            let n = w.len();
            if n >= n_min {
                let k = cartan(g)?;
                acc.sums[n].add(phi_s(&k, s)?);
                acc.counts[n] += 1;
            }
            Ok(())
        },
        |a, b| {
            for (x, y) in a.sums.iter_mut().zip(b.sums) {
                x.merge(y);
            }
            for (x, y) in a.counts.iter_mut().zip(b.counts) {
                *x += y;
            }
        },
    )?;

    let depths: Vec<usize> = (n_min..=n_max).collect();
    let log_sums: Vec<f64> = depths
        .iter()
        .map(|&n| {
            let z = slices.sums[n].value();
            if z > 0.0 {
                Ok(z.ln())
            } else {
                Err(Error::Numeric(format!("slice sum at depth {n} not positive")))
            }
        })
        .collect::<Result<_>>()?;
    let counts: Vec<u64> = depths.iter().map(|&n| slices.counts[n]).collect();

    let discarded = ((depths.len() as f64) * discard_fraction).floor() as usize;
    let min_kept = match fit {
        PressureFit::Linear => 3,
        PressureFit::LogCorrected => 4,
    };
    if depths.len() - discarded < min_kept {
        return Err(Error::Input(format!(
            "discard fraction {discard_fraction} leaves fewer than {min_kept} depths"
        )));
    }
    let xs: Vec<f64> = depths[discarded..].iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = log_sums[discarded..].to_vec();
    let (slope, slope_stderr) = match fit {
        PressureFit::Linear => {
            let f = line_fit(&xs, &ys);
            (f.slope, f.slope_stderr)
        }
        PressureFit::LogCorrected => ls_slope_log_corrected(&xs, &ys),
    };
    if !slope.is_finite() {
        return Err(Error::Numeric("pressure slope not finite".into()));
    }
    Ok(PressureReport {
        s,
        depths,
        log_sums,
        counts,
        slope,
        slope_stderr,
        discarded,
        fit,
    })
}

/// Bisection bracket (left, right) with slope(left) > 0 > slope(right).
pub type Bracket = (f64, f64);

/// Locates the zero of the pressure slope: the truncated-series estimate of
/// the critical exponent. Returns the bracket midpoint and the bracket.
pub fn estimate_affinity_exponent(n_max: usize, tol: f64) -> Result<(f64, Bracket)> {
    estimate_affinity_exponent_within(n_max, tol, (1.0, 2.0))
}

/// Same, with an explicit starting bracket.
pub fn estimate_affinity_exponent_within(
    n_max: usize,
    tol: f64,
    bracket: Bracket,
) -> Result<(f64, Bracket)> {
    if tol < 1e-3 {
        return Err(Error::Input(format!(
            "tolerance below 1e-3 is not resolvable by truncated sums, got {tol}"
        )));
    }
    let n_min = 4;
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Input(format!("invalid bracket ({lo}, {hi})")));
    }
    let slope_at = |s: f64| -> Result<f64> { Ok(pressure_slope(s, n_min, n_max)?.slope) };
    let slo = slope_at(lo)?;
    let shi = slope_at(hi)?;
    if !(slo > 0.0 && shi < 0.0) {
        return Err(Error::Logic(format!(
            "bracket does not straddle the pressure zero: slope({lo}) = {slo}, \
             slope({hi}) = {shi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let smid = slope_at(mid)?;
        if smid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), (lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generator;
    use crate::words::Word;

    fn kappa_of(word: &str) -> CartanVec {
        let w: Word = word.parse().unwrap();
        cartan(&w.matrix()).unwrap()
    }

    #[test]
    fn identity_weight_is_one_for_all_s() {
        let k = CartanVec { kappa: [0.0; 3] };
        for s in [0.25, 0.5, 1.0, 1.5, 2.0] {
            assert_eq!(phi_s(&k, s).unwrap(), 1.0);
            assert_eq!(psi_s(&k, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn generator_weight_at_s_one() {
        // φ₁(A₁) = σ₂/σ₁ = 1/√(2+√3).
        let k = cartan(&generator(1).unwrap()).unwrap();
        let want = 1.0 / (2.0_f64 + 3.0_f64.sqrt()).sqrt();
        let got = phi_s(&k, 1.0).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn psi_matches_piecewise_closed_form_and_is_linear() {
        let k = kappa_of("12321");
        let (g12, g13) = (k.kappa[0] - k.kappa[1], k.kappa[0] - k.kappa[2]);
        assert!((psi_s(&k, 2.0).unwrap() - (g12 + g13)).abs() < 1e-14);
        assert!((psi_s(&k, 0.5).unwrap() - 0.5 * g12).abs() < 1e-14);
        // Linearity in κ.
        let k2 = CartanVec {
            kappa: [3.0 * k.kappa[0], 3.0 * k.kappa[1], 3.0 * k.kappa[2]],
        };
        for s in [0.3, 1.0, 1.7] {
            let a = psi_s(&k2, s).unwrap();
            let b = 3.0 * psi_s(&k, s).unwrap();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn phi_agrees_with_direct_sigma_ratios() {
        // Compare the log-domain evaluation against the direct ratio
        // formulas (σ₂/σ₁)^s and (σ₂/σ₁)(σ₃/σ₁)^{s−1}.
        for word in ["1", "12", "321", "112233", "3212131"] {
            let k = kappa_of(word);
            let sv = k.singular_values();
            for s in [0.25, 0.5, 1.0, 1.5, 2.0] {
                let direct = if s <= 1.0 {
                    (sv[1] / sv[0]).powf(s)
                } else {
                    (sv[1] / sv[0]) * (sv[2] / sv[0]).powf(s - 1.0)
                };
                let got = phi_s(&k, s).unwrap();
                assert!(
                    (got - direct).abs() <= 1e-12 * direct,
                    "word {word}, s {s}: {got} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn continuity_at_the_kink() {
        let k = kappa_of("2113");
        let below = phi_s(&k, 1.0 - 1e-9).unwrap();
        let above = phi_s(&k, 1.0 + 1e-9).unwrap();
        assert!((below - above).abs() < 1e-7);
    }

    #[test]
    fn domain_errors() {
        let k = kappa_of("1");
        assert!(phi_s(&k, 0.0).is_err());
        assert!(phi_s(&k, 2.5).is_err());
        assert!(psi_s(&k, -0.1).is_err());
        assert!(psi_s(&k, 0.0).is_ok());
    }

    #[test]
    fn depth_one_sum_closed_form() {
        // Three permutation-conjugate generators share φ₁ = 1/√(2+√3).
        let f = EnumFilter {
            include_empty: false,
            ..EnumFilter::up_to_length(1)
        };
        let (sum, count) = partial_poincare_sum(&f, 1.0).unwrap();
        assert_eq!(count, 3);
        let want = 3.0 / (2.0_f64 + 3.0_f64.sqrt()).sqrt();
        assert!((sum - want).abs() < 1e-13, "{sum} vs {want}");
    }

    #[test]
    fn weight_bounded_by_one_at_s_two() {
        let f = EnumFilter {
            include_empty: false,
            ..EnumFilter::up_to_length(5)
        };
        let (sum, count) = partial_poincare_sum(&f, 2.0).unwrap();
        assert!(sum > 0.0 && sum <= count as f64);
    }

    #[test]
    fn slice_sums_decrease_in_s() {
        let r1 = pressure_slope(0.8, 4, 9).unwrap();
        let r2 = pressure_slope(1.3, 4, 9).unwrap();
        for (a, b) in r1.log_sums.iter().zip(&r2.log_sums) {
            assert!(a > b, "slice sums must strictly decrease in s");
        }
    }

    #[test]
    fn slope_signs_at_the_extremes() {
        assert!(pressure_slope(0.1, 4, 9).unwrap().slope > 0.0);
        assert!(pressure_slope(2.0, 4, 9).unwrap().slope < 0.0);
    }

    #[test]
    fn slope_nonincreasing_in_s() {
        let mut prev = f64::INFINITY;
        for s in [0.5, 1.0, 1.5, 2.0] {
            let r = pressure_slope(s, 4, 9).unwrap();
            assert!(r.slope <= prev + 1e-12, "slope rose at s = {s}");
            prev = r.slope;
        }
    }

    #[test]
    fn pressure_preconditions() {
        assert!(pressure_slope(1.0, 3, 9).is_err());
        assert!(pressure_slope(1.0, 4, 7).is_err());
        assert!(matches!(
            pressure_slope(1.0, 4, 40),
            Err(Error::Resource { .. })
        ));
        assert!(pressure_slope_with(1.0, 4, 9, PressureFit::Linear, 1.0).is_err());
        assert!(pressure_slope_with(1.0, 4, 9, PressureFit::LogCorrected, 0.5).is_err());
    }

    #[test]
    fn corrected_fit_removes_downward_bias() {
        // Near the critical point the slice sums still carry their
        // polynomial transient, so the linear slope sits strictly below
        // the log-corrected one.
        let lin = pressure_slope_with(1.7, 4, 10, PressureFit::Linear, 0.25).unwrap();
        let cor = pressure_slope(1.7, 4, 10).unwrap();
        assert!(cor.slope > lin.slope + 0.01, "{} vs {}", cor.slope, lin.slope);
    }

    #[test]
    fn bisection_brackets_the_zero() {
        let (s_hat, (lo, hi)) = estimate_affinity_exponent(10, 0.05).unwrap();
        assert!(hi - lo <= 0.05);
        assert!(lo <= s_hat && s_hat <= hi);
        assert!(
            pressure_slope(lo, 4, 10).unwrap().slope > 0.0
                && pressure_slope(hi, 4, 10).unwrap().slope < 0.0
        );
        // Shallow-depth estimate already sits in the expected band.
        assert!((1.6..=1.7407).contains(&s_hat), "s_hat {s_hat}");
    }
}
