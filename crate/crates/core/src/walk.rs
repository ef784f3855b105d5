//! Finitely supported random walks on the matrix semigroup: Monte-Carlo
//! Lyapunov spectra, exact random-walk entropy over the free semigroup, the
//! entropy-over-gaps dimension, and a search for measures whose Cartan
//! growth matches a prescribed weight level.
//!
//! Words index semigroup elements faithfully (the semigroup is free), so a
//! measure is a finite map word → weight, convolutions concatenate word
//! strings exactly, and prefix-free supports generate free sub-semigroups
//! whose entropy is the plain Shannon entropy of the weights.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::linalg::{cartan, CartanVec};
use crate::poincare::psi_s;
use crate::words::{enumerate, minimal_subset, EnumFilter, Word};

/// Steps between orthonormalizations of the running frame. Mean per-step
/// log growth of these generators is well under 1, so 16 steps stay far
/// from overflow while amortizing the Gram–Schmidt cost.
pub const RENORM_PERIOD: u64 = 16;

/// Renormalize early once the accumulated singular gap Σ(κ₁−κ₃) of the
/// sampled factors reaches this many log units. The frame's mutual angles
/// contract at most that fast (gaps are subadditive), so capping the sum at
/// 10 keeps the angles ≥ e⁻¹⁰, far above float epsilon, and Gram–Schmidt
/// cancellation stays benign even when the support holds long words.
pub const RENORM_GAP_BUDGET: f64 = 10.0;

/// Cap on the exact-convolution support size |supp ν|^k.
pub const CONVOLUTION_CAP: f64 = 1e7;

/// Deepest word tree the variational search will enumerate.
pub const SEARCH_DEPTH_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Manual,
    VariationalSearch,
}

/// One weighted word of a finitely supported measure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportAtom {
    pub word: Word,
    pub weight: f64,
}

/// A finitely supported probability measure on the semigroup, stored with
/// the support sorted by word so that serialization, sampling and
/// convolution are order-independent of how it was built.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureSpec {
    support: Vec<SupportAtom>,
    pub provenance: Provenance,
}

impl<'de> Deserialize<'de> for MeasureSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            support: Vec<SupportAtom>,
            provenance: Provenance,
        }
        let raw = Raw::deserialize(d)?;
        MeasureSpec::new(
            raw.support.into_iter().map(|a| (a.word, a.weight)).collect(),
            raw.provenance,
        )
        .map_err(serde::de::Error::custom)
    }
}

impl MeasureSpec {
    /// Validates and canonicalizes: positive weights summing to 1 within
    /// 1e-12, distinct words, support sorted by word.
    pub fn new(support: Vec<(Word, f64)>, provenance: Provenance) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Input("measure needs a nonempty support".into()));
        }
        let mut atoms: Vec<SupportAtom> = support
            .into_iter()
            .map(|(word, weight)| SupportAtom { word, weight })
            .collect();
        atoms.sort_by(|a, b| a.word.cmp(&b.word));
        for pair in atoms.windows(2) {
            if pair[0].word == pair[1].word {
                return Err(Error::Input(format!(
                    "duplicate support word {}",
                    pair[0].word
                )));
            }
        }
        let mut total = KahanSum::new();
        for a in &atoms {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::Input(format!(
                    "weight of {} must be positive and finite, got {}",
                    a.word, a.weight
                )));
            }
            total.add(a.weight);
        }
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!(
                "weights sum to {}, expected 1 within 1e-12",
                total.value()
            )));
        }
        Ok(MeasureSpec {
            support: atoms,
            provenance,
        })
    }

    pub fn uniform(words: Vec<Word>, provenance: Provenance) -> Result<Self> {
        let k = words.len();
        if k == 0 {
            return Err(Error::Input("measure needs a nonempty support".into()));
        }
        let w = 1.0 / k as f64;
        MeasureSpec::new(words.into_iter().map(|word| (word, w)).collect(), provenance)
    }

    pub fn dirac(word: Word) -> Self {
        MeasureSpec {
            support: vec![SupportAtom { word, weight: 1.0 }],
            provenance: Provenance::Manual,
        }
    }

    pub fn support(&self) -> &[SupportAtom] {
        &self.support
    }

    /// No support word is a proper prefix of another; such supports
    /// generate free sub-semigroups.
    pub fn is_prefix_free(&self) -> bool {
        let set: BTreeSet<Word> = self.support.iter().map(|a| a.word.clone()).collect();
        minimal_subset(&set).len() == set.len()
    }

    /// Shannon entropy of the weights, −Σ w·ln w. Uniform weights take the
    /// closed form ln k, avoiding the rounding that −k·fl(1/k)·ln fl(1/k)
    /// would add.
    pub fn shannon_entropy(&self) -> f64 {
        let w0 = self.support[0].weight;
        if self.support.iter().all(|a| a.weight == w0) {
            return (self.support.len() as f64).ln();
        }
        let mut h = KahanSum::new();
        for a in &self.support {
            h.add(-a.weight * a.weight.ln());
        }
        h.value()
    }

    /// (1−β)·self + β·other, merging shared words.
    pub fn mix(&self, other: &MeasureSpec, beta: f64) -> Result<MeasureSpec> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Input(format!("mixing weight must lie in [0,1], got {beta}")));
        }
        let mut map: BTreeMap<Word, f64> = BTreeMap::new();
        for a in &self.support {
            *map.entry(a.word.clone()).or_insert(0.0) += (1.0 - beta) * a.weight;
        }
        for a in &other.support {
            *map.entry(a.word.clone()).or_insert(0.0) += beta * a.weight;
        }
        map.retain(|_, w| *w > 0.0);
        MeasureSpec::new(map.into_iter().collect(), Provenance::Manual)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Per-step exponents λ₁ ≥ λ₂ ≥ λ₃ in natural-log units; λ₃ is set to
    /// −λ₁−λ₂ after averaging (the per-trial sums already vanish to float
    /// precision because the generators have determinant one).
    pub lambda: [f64; 3],
    /// Standard error of the trial mean, per component.
    pub stderr: [f64; 3],
    pub steps: u64,
    pub trials: u32,
}

impl LyapunovEstimate {
    /// The simple-root gaps (χ₁, χ₂) = (λ₁−λ₂, λ₁−λ₃).
    pub fn chi(&self) -> (f64, f64) {
        (
            self.lambda[0] - self.lambda[1],
            self.lambda[0] - self.lambda[2],
        )
    }
}

/// Modified Gram–Schmidt on the columns of q, accumulating the log column
/// norms (the diagonal of R with positive convention) into `logs`.
fn orthonormalize(q: &mut [[f64; 3]; 3], logs: &mut [f64; 3]) -> Result<()> {
    for j in 0..3 {
        let mut col = [q[0][j], q[1][j], q[2][j]];
        let r = (col[0] * col[0] + col[1] * col[1] + col[2] * col[2]).sqrt();
        if !r.is_finite() || r <= 1e-300 {
            return Err(Error::Numeric(
                "random product frame degenerated during renormalization".into(),
            ));
        }
        for x in &mut col {
            *x /= r;
        }
        logs[j] += r.ln();
        for (row, &c) in col.iter().enumerate() {
            q[row][j] = c;
        }
        for k in (j + 1)..3 {
            let dot = col[0] * q[0][k] + col[1] * q[1][k] + col[2] * q[2][k];
            for (row, &c) in col.iter().enumerate() {
                q[row][k] -= dot * c;
            }
        }
    }
    Ok(())
}

fn mul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// Monte-Carlo Lyapunov spectrum of the ν-walk: per trial, `steps` i.i.d.
/// samples are multiplied onto an orthonormal frame with a Gram–Schmidt
/// renormalization every [`RENORM_PERIOD`] steps; the log diagonal growth
/// divided by the step count estimates (λ₁, λ₂, λ₃). Trials use disjoint
/// counter-based ChaCha streams of the one seed, so results are
/// reproducible and independent of scheduling.
pub fn lyapunov_spectrum(
    nu: &MeasureSpec,
    steps: u64,
    trials: u32,
    seed: Option<u64>,
) -> Result<LyapunovEstimate> {
    if steps < 1000 {
        return Err(Error::Input(format!("need steps ≥ 1000, got {steps}")));
    }
    if trials < 8 {
        return Err(Error::Input(format!("need trials ≥ 8, got {trials}")));
    }
    let seed = seed.ok_or_else(|| {
        Error::Input("a seed is required: Lyapunov estimates must be reproducible".into())
    })?;
    let parts: Vec<([[f64; 3]; 3], f64)> = nu
        .support
        .iter()
        .map(|a| a.word.matrix().f64_parts())
        .collect();
    let gap13: Vec<f64> = nu
        .support
        .iter()
        .map(|a| {
            let k = cartan(&a.word.matrix())?;
            Ok(k.kappa[0] - k.kappa[2])
        })
        .collect::<Result<_>>()?;
    let mut cumulative = Vec::with_capacity(nu.support.len());
    let mut acc = 0.0;
    for a in &nu.support {
        acc += a.weight;
        cumulative.push(acc);
    }

    let per_trial: Vec<Result<[f64; 3]>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64 + 1);
            let mut q = [[0.0; 3]; 3];
            for (i, row) in q.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            let mut logs = [0.0; 3];
            let mut scale = 0.0;
            let mut hyp = 0.0;
            for step in 0..steps {
                let u: f64 = rng.gen();
                let idx = cumulative.partition_point(|&c| c <= u).min(parts.len() - 1);
                let (m, ls) = &parts[idx];
                q = mul3(m, &q);
                scale += ls;
                hyp += gap13[idx];
                if (step + 1) % RENORM_PERIOD == 0
                    || hyp >= RENORM_GAP_BUDGET
                    || step + 1 == steps
                {
                    orthonormalize(&mut q, &mut logs)?;
                    hyp = 0.0;
                }
            }
            let mut lam = [0.0; 3];
            for i in 0..3 {
                lam[i] = (logs[i] + scale) / steps as f64;
            }
            // The Gram-Schmidt diagonal converges to a permutation of the
            // spectrum, not necessarily the sorted one: when the initial
            // flag meets an invariant flag of the walk (a point mass on a
            // two-generator word keeps the plane x₃ = 0 invariant, and
            // complex eigenvalue pairs leave the lower two diagonals
            // oscillating around their common modulus), the order flips.
            lam.sort_by(|a, b| b.total_cmp(a));
            let sum = lam[0] + lam[1] + lam[2];
            if sum.abs() > 1e-9 {
                return Err(Error::Numeric(format!(
                    "per-trial exponents sum to {sum:e}; determinant-one drift exceeded 1e-9"
                )));
            }
            Ok(lam)
        })
        .collect();

    let mut samples = Vec::with_capacity(trials as usize);
    for t in per_trial {
        samples.push(t?);
    }
    let mut lambda = [0.0; 3];
    let mut stderr = [0.0; 3];
    let tn = trials as f64;
    for i in 0..3 {
        let mean = samples.iter().map(|s| s[i]).sum::<f64>() / tn;
        let var = samples
            .iter()
            .map(|s| (s[i] - mean) * (s[i] - mean))
            .sum::<f64>()
            / (tn - 1.0);
        lambda[i] = mean;
        stderr[i] = (var / tn).sqrt();
    }
    lambda[2] = -lambda[0] - lambda[1];
    for i in 0..2 {
        let noise = 1e-9 + 3.0 * (stderr[i] + stderr[i + 1]);
        if lambda[i] + noise < lambda[i + 1] {
            return Err(Error::Numeric(format!(
                "exponent {} fell below exponent {} beyond noise: {} vs {}",
                i + 1,
                i + 2,
                lambda[i],
                lambda[i + 1]
            )));
        }
    }
    Ok(LyapunovEstimate {
        lambda,
        stderr,
        steps,
        trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyBranch {
    /// Prefix-free support: H(ν^{*k}) = k·H(ν), so the entropy is exact.
    Free,
    /// Exact convolution of word strings up to k_max.
    Convolution,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyReport {
    /// The random-walk entropy estimate: H(ν) itself on the free branch,
    /// H(ν^{*k_max})/k_max on the convolution branch.
    pub h: f64,
    pub branch: EntropyBranch,
    /// H(ν^{*k})/k for k = 1…k_max (convolution branch only); nonincreasing
    /// by subadditivity.
    pub per_k: Vec<f64>,
}

fn convolve(cur: &BTreeMap<Word, f64>, base: &MeasureSpec) -> BTreeMap<Word, f64> {
    let mut next = BTreeMap::new();
    for (w, p) in cur {
        for a in &base.support {
            *next.entry(w.concat(&a.word)).or_insert(0.0) += p * a.weight;
        }
    }
    next
}

fn shannon(dist: &BTreeMap<Word, f64>) -> f64 {
    let mut h = KahanSum::new();
    for p in dist.values() {
        if *p > 0.0 {
            h.add(-p * p.ln());
        }
    }
    h.value()
}

/// Random-walk entropy lim H(ν^{*k})/k. Prefix-free supports give the limit
/// exactly; otherwise the convolutions are computed exactly on word strings
/// and the value at k_max is returned together with the k-ladder.
pub fn rw_entropy(nu: &MeasureSpec, k_max: usize) -> Result<EntropyReport> {
    if k_max < 1 {
        return Err(Error::Input("need k_max ≥ 1".into()));
    }
    if nu.is_prefix_free() {
        return Ok(EntropyReport {
            h: nu.shannon_entropy(),
            branch: EntropyBranch::Free,
            per_k: Vec::new(),
        });
    }
    let estimate = (nu.support.len() as f64).powi(k_max as i32);
    if estimate > CONVOLUTION_CAP {
        return Err(Error::Resource {
            what: "exact convolution support".into(),
            estimate,
            budget: CONVOLUTION_CAP,
            unit: "concatenated words",
        });
    }
    let mut cur: BTreeMap<Word, f64> = nu
        .support
        .iter()
        .map(|a| (a.word.clone(), a.weight))
        .collect();
    let mut per_k = Vec::with_capacity(k_max);
    per_k.push(shannon(&cur));
    for k in 2..=k_max {
        cur = convolve(&cur, nu);
        per_k.push(shannon(&cur) / k as f64);
    }
    Ok(EntropyReport {
        h: *per_k.last().expect("k_max ≥ 1"),
        branch: EntropyBranch::Convolution,
        per_k,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimReport {
    pub h_rw: f64,
    /// (χ₁, χ₂) = (λ₁−λ₂, λ₁−λ₃), nondecreasing.
    pub chi: (f64, f64),
    /// Number of full gaps the entropy fills: the largest d ∈ {0,1} with
    /// Σ_{i≤d} χᵢ ≤ h.
    pub d: u8,
    pub dim_ly: f64,
    /// Set when the raw value exceeded the ambient dimension 2 and was
    /// clamped (h > χ₁ + χ₂).
    pub clamped: bool,
    pub entropy_branch: Option<EntropyBranch>,
    /// Standard errors of the λ estimate behind χ, when Monte-Carlo.
    pub lambda_stderr: Option<[f64; 3]>,
}

/// Entropy-over-gaps dimension: d + (h − Σ_{i≤d} χᵢ)/χ_{d+1}, clamped to
/// the ambient [0, 2].
pub fn lyapunov_dimension(h: f64, chi: (f64, f64)) -> Result<DimReport> {
    let (chi1, chi2) = chi;
    if !(chi1 > 0.0) || !(chi2 >= chi1) {
        return Err(Error::Domain(format!(
            "gaps must satisfy 0 < χ₁ ≤ χ₂, got ({chi1}, {chi2})"
        )));
    }
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("entropy must be nonnegative, got {h}")));
    }
    let (d, raw) = if h <= chi1 {
        (0u8, h / chi1)
    } else {
        (1u8, 1.0 + (h - chi1) / chi2)
    };
    let clamped = raw > 2.0;
    Ok(DimReport {
        h_rw: h,
        chi,
        d,
        dim_ly: raw.clamp(0.0, 2.0),
        clamped,
        entropy_branch: None,
        lambda_stderr: None,
    })
}

/// End-to-end dimension estimate of one measure: entropy (exact on
/// prefix-free supports), Monte-Carlo spectrum, entropy-over-gaps formula.
/// Refuses measures whose sampled spectrum is not simple beyond three
/// standard errors, since the formula needs strict gaps.
pub fn dimension_of_measure(
    nu: &MeasureSpec,
    k_max: usize,
    steps: u64,
    trials: u32,
    seed: Option<u64>,
) -> Result<(DimReport, LyapunovEstimate, EntropyReport)> {
    let entropy = rw_entropy(nu, k_max)?;
    let lambda = lyapunov_spectrum(nu, steps, trials, seed)?;
    let (chi1, chi2) = lambda.chi();
    let noise1 = (3.0 * (lambda.stderr[0] + lambda.stderr[1])).max(1e-9);
    let noise2 = (3.0 * (lambda.stderr[1] + lambda.stderr[2])).max(1e-9);
    if chi1 <= noise1 || chi2 - chi1 <= noise2 {
        return Err(Error::Numeric(format!(
            "sampled spectrum is not simple at this precision: χ₁ = {chi1:.3e}, \
             χ₂−χ₁ = {:.3e} against noise floors ({noise1:.3e}, {noise2:.3e}); \
             increase steps or trials",
            chi2 - chi1
        )));
    }
    let mut dim = lyapunov_dimension(entropy.h, (chi1, chi2))?;
    dim.entropy_branch = Some(entropy.branch);
    dim.lambda_stderr = Some(lambda.stderr);
    Ok((dim, lambda, entropy))
}

/// Pass/fail record of the mixing lower bound
/// H(((1−β)ν₁+βν₂)^{*k})/k ≥ (1−β)·H(ν₁) − 2·ln(support)/k.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixingReport {
    pub lhs: f64,
    pub rhs: f64,
    /// The finite-k defect subtracted on the right side.
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that mixing a small amount of ν₂ into a prefix-free ν₁ cannot
/// destroy more entropy than the finite-k defect allows.
pub fn entropy_mixing_check(
    nu1: &MeasureSpec,
    nu2: &MeasureSpec,
    beta: f64,
    k: usize,
) -> Result<MixingReport> {
    if !nu1.is_prefix_free() {
        return Err(Error::Input(
            "the base measure must have prefix-free support".into(),
        ));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Input(format!("mixing weight must lie in [0,1], got {beta}")));
    }
    let mixture = nu1.mix(nu2, beta)?;
    let lhs = rw_entropy(&mixture, k)?.h;
    let tolerance = 2.0 * (mixture.support.len() as f64).ln() / k as f64;
    let rhs = (1.0 - beta) * nu1.shannon_entropy() - tolerance;
    Ok(MixingReport {
        lhs,
        rhs,
        tolerance,
        pass: lhs >= rhs,
    })
}

/// Parameters of the variational search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchParams {
    /// Weight-level parameter of ψ_s, in (0, 2].
    pub s: f64,
    /// Window half-width and cluster-grid side, in (0, 0.2].
    pub beta: f64,
    /// Target ψ_s level: words with ψ_s(κ) ∈ [(1−β)n, (1+β)n] qualify.
    pub n: usize,
    /// Most clusters evaluated by Monte-Carlo, largest first.
    pub budget: usize,
    pub seed: Option<u64>,
    pub steps: u64,
    pub trials: u32,
}

impl SearchParams {
    pub fn new(s: f64, beta: f64, n: usize) -> Self {
        SearchParams {
            s,
            beta,
            n,
            budget: 8,
            seed: None,
            steps: 20_000,
            trials: 16,
        }
    }
}

/// Result of the variational search: the best measure found, its dimension
/// report, and the diagnostics tying it back to the window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub measure: MeasureSpec,
    pub dim: DimReport,
    pub lambda: LyapunovEstimate,
    /// Center of the winning κ/n grid cell.
    pub cluster_center: [f64; 3],
    /// Words in the winning cell before prefix-minimal filtering.
    pub cluster_size: usize,
    /// ψ_s(λ(ν))/n, the Monte-Carlo analogue of the window condition.
    pub psi_ratio: f64,
    pub window: (f64, f64),
    pub words_in_window: usize,
    pub candidates_evaluated: usize,
}

fn split_seed(seed: u64, idx: u64) -> u64 {
    // splitmix64 step: decorrelates per-candidate seeds from a master seed.
    let mut z = seed.wrapping_add(idx.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Searches for a measure maximizing the Lyapunov dimension among uniform
/// measures on prefix-minimal subsets of κ/n grid clusters inside the
/// window ψ_s(κ(γ)) ∈ [(1−β)n, (1+β)n].
///
/// Enumeration covers words up to [`SEARCH_DEPTH_CAP`] symbols, pruned for
/// s > 1 by σ₁ ≤ exp(ψ_max/(1.5(s−1))) (valid because κ₁−κ₃ ≥ 1.5·κ₁ on
/// the positive Weyl chamber). Candidate clusters are ranked by size with
/// lexicographic center tie-break; each is scored by exact entropy
/// ln #support and Monte-Carlo gaps, and candidates whose spectrum is not
/// simple beyond noise are discarded.
pub fn variational_search(params: &SearchParams) -> Result<SearchOutcome> {
    let SearchParams {
        s,
        beta,
        n,
        budget,
        seed,
        steps,
        trials,
    } = *params;
    if !(beta > 0.0 && beta <= 0.2) {
        return Err(Error::Input(format!("need 0 < beta ≤ 0.2, got {beta}")));
    }
    if n < 2 {
        return Err(Error::Input(format!("need n ≥ 2, got {n}")));
    }
    if budget < 1 {
        return Err(Error::Input("need budget ≥ 1".into()));
    }
    let seed = seed.ok_or_else(|| {
        Error::Input("a seed is required: search results must be reproducible".into())
    })?;
    let window = ((1.0 - beta) * n as f64, (1.0 + beta) * n as f64);
    let sigma1_ceiling = if s > 1.0 {
        Some((window.1 / (1.5 * (s - 1.0))).exp().max(2.0))
    } else {
        None
    };
    let filter = EnumFilter {
        max_length: Some(SEARCH_DEPTH_CAP),
        sigma1_ceiling,
        ..EnumFilter::default()
    };
    // One pass collecting (word, κ) for the whole window.
    let (in_window, _) = enumerate(
        &filter,
        Vec::new,
        |w, g, acc: &mut Vec<(Word, [f64; 3])>| {
            let k = cartan(g)?;
            let psi = psi_s(&k, s)?;
            if psi >= window.0 && psi <= window.1 {
                acc.push((w.clone(), k.kappa));
            }
            Ok(())
        },
        |a, b| a.extend(b),
    )?;
    if in_window.is_empty() {
        return Err(Error::Domain(format!(
            "no word of length ≤ {SEARCH_DEPTH_CAP} has ψ_{s}(κ) in [{:.3}, {:.3}]; \
             try a larger beta or a different n",
            window.0, window.1
        )));
    }
    // Grid clusters of side β in κ/n space; deterministic pigeonholing.
    let mut cells: BTreeMap<[i64; 3], Vec<usize>> = BTreeMap::new();
    let side = beta * n as f64;
    for (i, (_, kappa)) in in_window.iter().enumerate() {
        let key = [
            (kappa[0] / side).floor() as i64,
            (kappa[1] / side).floor() as i64,
            (kappa[2] / side).floor() as i64,
        ];
        cells.entry(key).or_default().push(i);
    }
    let mut ranked: Vec<(&[i64; 3], &Vec<usize>)> = cells.iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    ranked.truncate(budget);

    struct Candidate {
        outcome: SearchOutcome,
    }
    let evaluated: Vec<Option<Candidate>> = ranked
        .par_iter()
        .enumerate()
        .map(|(idx, (key, members))| {
            let words: BTreeSet<Word> = members
                .iter()
                .map(|&i| in_window[i].0.clone())
                .collect();
            let support = minimal_subset(&words);
            let measure = MeasureSpec::uniform(
                support.into_iter().collect(),
                Provenance::VariationalSearch,
            )
            .expect("cluster is nonempty");
            let h = (measure.support.len() as f64).ln();
            let lambda = match lyapunov_spectrum(
                &measure,
                steps,
                trials,
                Some(split_seed(seed, idx as u64)),
            ) {
                Ok(l) => l,
                Err(_) => return None,
            };
            let (chi1, chi2) = lambda.chi();
            // Post-hoc simple-spectrum check: both gaps must clear noise.
            let noise1 = 3.0 * (lambda.stderr[0] + lambda.stderr[1]);
            let noise2 = 3.0 * (lambda.stderr[1] + lambda.stderr[2]);
            if chi1 <= noise1.max(1e-9) || (chi2 - chi1) <= noise2.max(1e-9) {
                return None;
            }
            let mut dim = match lyapunov_dimension(h, (chi1, chi2)) {
                Ok(d) => d,
                Err(_) => return None,
            };
            dim.entropy_branch = Some(EntropyBranch::Free);
            dim.lambda_stderr = Some(lambda.stderr);
            // Per-step λ of the ν-walk scales with the support words'
            // Cartan data, so ψ_s(λ)/n mirrors the window condition.
            let psi_ratio = match psi_s(
                &CartanVec {
                    kappa: lambda.lambda,
                },
                s,
            ) {
                Ok(p) => p / n as f64,
                Err(_) => return None,
            };
            let center = [
                (key[0] as f64 + 0.5) * side / n as f64,
                (key[1] as f64 + 0.5) * side / n as f64,
                (key[2] as f64 + 0.5) * side / n as f64,
            ];
            Some(Candidate {
                outcome: SearchOutcome {
                    cluster_size: members.len(),
                    measure,
                    dim,
                    lambda,
                    cluster_center: center,
                    psi_ratio,
                    window,
                    words_in_window: in_window.len(),
                    candidates_evaluated: 0,
                },
            })
        })
        .collect();

    let mut best: Option<Candidate> = None;
    let mut evaluated_count = 0;
    for cand in evaluated.into_iter().flatten() {
        evaluated_count += 1;
        let better = match &best {
            None => true,
            Some(b) => cand.outcome.dim.dim_ly > b.outcome.dim.dim_ly,
        };
        if better {
            best = Some(cand);
        }
    }
    match best {
        Some(mut c) => {
            c.outcome.candidates_evaluated = evaluated_count;
            Ok(c.outcome)
        }
        None => Err(Error::Domain(
            "every candidate cluster failed the simple-spectrum check; \
             try a larger beta or a different n"
                .into(),
        )),
    }
}
