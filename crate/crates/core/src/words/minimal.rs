//! Prefix-minimal extraction and prefix-freeness checks.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::words::Word;

/// Cap on the number of concatenations materialized by
/// [`is_prefix_free_power`].
const POWER_CAP: usize = 1_000_000;

/// The words of S with no strict prefix in S. The output is prefix-free and
/// therefore freely generates a free subsemigroup.
///
/// In lexicographic order a word follows all of its prefixes, and every word
/// between a prefix p and an extension of p itself starts with p; so a
/// single sweep keeping the last retained word suffices. If S contains the
/// empty word, the empty word is the unique minimal element.
pub fn minimal_subset(s: &BTreeSet<Word>) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    let mut last: Option<&Word> = None;
    for w in s {
        if let Some(l) = last {
            if l.is_prefix_of(w) {
                continue;
            }
        }
        out.insert(w.clone());
        last = Some(w);
    }
    out
}

/// True when no element of S^{*m} (all m-fold concatenations) is a strict
/// prefix of another, verified by materializing the power set. Duplicate
/// concatenations (two factorizations of the same word) also report false,
/// since they already witness a relation.
pub fn is_prefix_free_power(s: &BTreeSet<Word>, m: usize) -> Result<bool> {
    if m == 0 {
        return Err(Error::Input("power m must be ≥ 1".into()));
    }
    let n = s.len();
    if n == 0 {
        return Ok(true);
    }
    let total = n.checked_pow(m as u32).filter(|&t| t <= POWER_CAP);
    let total = match total {
        Some(t) => t,
        None => {
            return Err(Error::Size(format!(
                "|S|^m = {n}^{m} exceeds the {POWER_CAP} concatenation cap; \
                 check a sampled subset instead"
            )))
        }
    };
    let base: Vec<&Word> = s.iter().collect();
    let mut power: Vec<Word> = Vec::with_capacity(total);
    let mut idx = vec![0usize; m];
    let mut done = false;
    while !done {
        let mut w = Word::new();
        for &i in &idx {
            w = w.concat(base[i]);
        }
        power.push(w);
        // Odometer over the m factor indices.
        done = true;
        for pos in (0..m).rev() {
            idx[pos] += 1;
            if idx[pos] < n {
                done = false;
                break;
            }
            idx[pos] = 0;
        }
    }
    power.sort();
    // In sorted order any prefix pair implies an adjacent prefix pair, and
    // duplicates are adjacent too.
    for pair in power.windows(2) {
        if pair[0].is_prefix_of(&pair[1]) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> BTreeSet<Word> {
        words.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn extension_is_dropped() {
        assert_eq!(minimal_subset(&set(&["1", "12", "3"])), set(&["1", "3"]));
    }

    #[test]
    fn prefix_free_set_is_fixed_point() {
        let s = set(&["12", "13", "2", "311"]);
        assert_eq!(minimal_subset(&s), s);
    }

    #[test]
    fn empty_word_dominates() {
        assert_eq!(minimal_subset(&set(&["", "1", "23"])), set(&[""]));
    }

    #[test]
    fn nested_chain_keeps_only_the_root() {
        // "21", "212", "2122" and "23" all extend "2".
        assert_eq!(
            minimal_subset(&set(&["2", "21", "212", "2122", "23"])),
            set(&["2"])
        );
        // With the root absent, the two incomparable branches survive.
        assert_eq!(
            minimal_subset(&set(&["21", "212", "2122", "23"])),
            set(&["21", "23"])
        );
    }

    #[test]
    fn power_of_prefix_free_code_is_prefix_free() {
        assert!(is_prefix_free_power(&set(&["1", "2"]), 3).unwrap());
        assert!(is_prefix_free_power(&set(&["12", "13", "2", "3"]), 2).unwrap());
    }

    #[test]
    fn prefix_pair_is_detected_at_power_one() {
        assert!(!is_prefix_free_power(&set(&["1", "12"]), 1).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        // 70 words of length 4 over {1,2,3}: 70^4 ≈ 2.4e7 > cap.
        let mut s = BTreeSet::new();
        'outer: for a in 1..=3u8 {
            for b in 1..=3u8 {
                for c in 1..=3u8 {
                    for d in 1..=3u8 {
                        s.insert(Word::from_symbols(&[a, b, c, d]).unwrap());
                        if s.len() >= 70 {
                            break 'outer;
                        }
                    }
                }
            }
        }
        assert!(matches!(
            is_prefix_free_power(&s, 4),
            Err(Error::Size(_))
        ));
    }
}
