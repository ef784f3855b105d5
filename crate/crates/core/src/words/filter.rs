//! Enumeration filters: which words are emitted and where the DFS may stop
//! descending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::Word;

/// Ratio between the max-column-sum pruning proxy and the spectral norm:
/// maxcolsum/√3 ≤ σ₁ ≤ √3·maxcolsum for 3×3 matrices. A word is emitted
/// under `sigma1_ceiling` T iff maxcolsum ≤ √3·T, which sandwiches the
/// emitted set between {σ₁ ≤ T} and {σ₁ ≤ 3T}.
pub const SIGMA1_PROXY_CONSTANT: f64 = 3.0;

/// Filter describing one enumeration of the free semigroup on {1,2,3}.
///
/// At least one stopping criterion must be set: `max_length`,
/// `sigma1_ceiling`, or `diam_ceiling`. Setting `diam_ceiling` switches to
/// adaptive-cover mode: instead of emitting every passing word, the DFS
/// emits exactly the minimal words whose simplex triangle has diameter at
/// most the ceiling (and which satisfy the digit filter, when set), stopping
/// there; in that mode `max_length` is a hard resource guard whose violation
/// is an error rather than a silent truncation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EnumFilter {
    /// Emit only words of length at most this; also bounds the DFS depth.
    pub max_length: Option<usize>,
    /// Emit only words whose last n symbols are not all equal
    /// (words shorter than n pass vacuously).
    pub last_n_digits_not_same: Option<usize>,
    /// Emit only words ending in this suffix.
    pub ends_with: Option<Word>,
    /// Restrict the alphabet to a nonempty subset of {1,2,3}.
    pub restrict_alphabet: Option<Vec<u8>>,
    /// Ball enumeration by the column-sum proxy; see
    /// [`SIGMA1_PROXY_CONSTANT`].
    pub sigma1_ceiling: Option<f64>,
    /// Adaptive-cover mode: emit minimal words with simplex diameter ≤ this.
    pub diam_ceiling: Option<f64>,
    /// Whether the empty word is emitted when it passes the other filters.
    pub include_empty: bool,
}

impl EnumFilter {
    /// A plain depth filter with the identity included.
    pub fn up_to_length(n: usize) -> Self {
        EnumFilter {
            max_length: Some(n),
            include_empty: true,
            ..EnumFilter::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_length.is_none()
            && self.sigma1_ceiling.is_none()
            && self.diam_ceiling.is_none()
        {
            return Err(Error::Input(
                "filter needs a stopping criterion: max_length, sigma1_ceiling, or diam_ceiling"
                    .into(),
            ));
        }
        if let Some(n) = self.last_n_digits_not_same {
            if n == 0 {
                return Err(Error::Input("last_n_digits_not_same needs n ≥ 1".into()));
            }
        }
        if let Some(t) = self.sigma1_ceiling {
            if !(t >= 1.0) {
                return Err(Error::Input(format!(
                    "sigma1_ceiling must be ≥ 1 (σ₁ ≥ 1 on the semigroup), got {t}"
                )));
            }
        }
        if let Some(d) = self.diam_ceiling {
            if !(d > 0.0) {
                return Err(Error::Input(format!("diam_ceiling must be positive, got {d}")));
            }
        }
        if let Some(ref a) = self.restrict_alphabet {
            if a.is_empty() {
                return Err(Error::Input("restrict_alphabet must be nonempty".into()));
            }
            if a.iter().any(|s| !(1..=3).contains(s)) {
                return Err(Error::Input(format!(
                    "restrict_alphabet must be a subset of {{1,2,3}}, got {a:?}"
                )));
            }
        }
        Ok(())
    }

    /// Sorted, deduplicated branching alphabet.
    pub(crate) fn alphabet(&self) -> Vec<u8> {
        match &self.restrict_alphabet {
            None => vec![1, 2, 3],
            Some(a) => {
                let mut a = a.clone();
                a.sort_unstable();
                a.dedup();
                a
            }
        }
    }

    pub(crate) fn digit_ok(&self, w: &Word) -> bool {
        match self.last_n_digits_not_same {
            None => true,
            Some(n) => w.last_n_digits_not_same(n),
        }
    }

    pub(crate) fn suffix_ok(&self, w: &Word) -> bool {
        match &self.ends_with {
            None => true,
            Some(sfx) => w.ends_with(sfx),
        }
    }

    /// Proxy ball test: ln(maxcolsum) ≤ ln(√3·T), in log domain so huge
    /// ceilings stay usable.
    pub(crate) fn proxy_ok(&self, log_max_colsum: f64) -> bool {
        match self.sigma1_ceiling {
            None => true,
            Some(t) => log_max_colsum <= t.ln() + 0.5 * 3.0_f64.ln(),
        }
    }
}
