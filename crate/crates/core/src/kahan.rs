//! Compensated (Kahan–Neumaier) summation.
//!
//! Partial Poincaré sums accumulate millions of terms spanning many orders of
//! magnitude; plain f64 accumulation loses enough precision to move pressure
//! slopes. Every shard keeps its own `KahanSum` and shard totals are merged
//! in a fixed order, so results are reproducible at equal shard counts.

/// Neumaier variant: also compensates when the running sum is smaller than
/// the incoming term.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another compensated sum (its value enters as one term, its
    /// compensation as another, so nothing accumulated is discarded).
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
