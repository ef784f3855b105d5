//! Sharded depth-first enumeration of filtered words.
//!
//! The DFS carries the word and its matrix incrementally (one generator
//! multiplication per edge). The top of the tree (depth < shard depth, 6 by
//! default) is walked serially; the subtrees hanging at exactly shard depth
//! are processed in parallel, and their accumulators are merged back at the
//! positions the serial walk encounters them. Emission order and merge
//! order are therefore exactly the order of a fully serial lexicographic
//! DFS, independent of thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{generator, multiply, Mat3};
use crate::simplex::simplex_diameter;
use crate::words::{EnumFilter, Word};

/// Depth at which subtrees are handed to worker threads (3⁶ = 729 shards).
const SHARD_DEPTH: usize = 6;

/// Cover-mode escape hatch for digit-blocked spines. A word ending in a
/// repeated symbol is normally subdivided rather than kept, but the pure
/// spine w·i·i·i… converges to a vertex point that no triangle with two
/// distinct trailing symbols contains, so subdivision alone never
/// terminates. A spine node therefore closes as a leaf once its diameter
/// falls below this fraction of the ceiling: the cover stays exact, the
/// few off-rule leaves are half the target size, and every other leaf
/// keeps the distinct-digit property.
pub const SPINE_CLOSE_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// Words passed to the visitor.
    pub emitted: u64,
    /// Tree nodes whose children were explored.
    pub expanded: u64,
    /// Subtrees cut by the σ₁ proxy or closed as cover leaves.
    pub pruned: u64,
    /// Deepest node reached.
    pub deepest: usize,
}

impl EnumStats {
    fn absorb(&mut self, other: EnumStats) {
        self.emitted += other.emitted;
        self.expanded += other.expanded;
        self.pruned += other.pruned;
        self.deepest = self.deepest.max(other.deepest);
    }
}

/// What the DFS does at one node.
enum NodeAction {
    /// Emit if the emission filters pass, then descend.
    Continue { emit: bool },
    /// Emit if filters pass, do not descend (cover leaf or pruned subtree).
    Stop { emit: bool, pruned: bool },
}

fn classify(filter: &EnumFilter, w: &Word, g: &Mat3) -> Result<NodeAction> {
    let log_colsum = g.log_max_column_sum();
    if !filter.proxy_ok(log_colsum) {
        // Column sums only grow to the right: the whole subtree fails.
        return Ok(NodeAction::Stop {
            emit: false,
            pruned: true,
        });
    }
    let len_ok = |w: &Word| !w.is_empty() || filter.include_empty;
    if let Some(delta) = filter.diam_ceiling {
        // Adaptive-cover mode: a node is a leaf when its triangle is small
        // enough AND the digit filter allows it (or the spine escape fires;
        // see SPINE_CLOSE_FACTOR); otherwise descend. The resource guard
        // fires when max_length would truncate the cover.
        let d = simplex_diameter(g);
        let leaf = d <= delta && (filter.digit_ok(w) || d <= SPINE_CLOSE_FACTOR * delta);
        if leaf {
            return Ok(NodeAction::Stop {
                emit: len_ok(w) && filter.suffix_ok(w),
                pruned: true,
            });
        }
        if let Some(ml) = filter.max_length {
            if w.len() >= ml {
                return Err(Error::Resource {
                    what: "adaptive cover depth".into(),
                    estimate: w.len() as f64,
                    budget: ml as f64,
                    unit: "symbols before reaching the diameter ceiling",
                });
            }
        }
        return Ok(NodeAction::Continue { emit: false });
    }
    let emit = len_ok(w) && filter.digit_ok(w) && filter.suffix_ok(w);
    match filter.max_length {
        Some(ml) if w.len() >= ml => Ok(NodeAction::Stop {
            emit,
            pruned: false,
        }),
        _ => Ok(NodeAction::Continue { emit }),
    }
}

/// Iterative DFS with an explicit heap stack: adaptive covers descend
/// parabolic spines (words ending in one repeated symbol contract only
/// polynomially) thousands of levels deep, far past what recursion on a
/// worker thread stack could absorb. On error the word buffer is left
/// unspecified; the enumeration aborts as a whole.
fn dfs<A, V>(
    filter: &EnumFilter,
    alphabet: &[u8],
    w: &mut Word,
    g: &Mat3,
    visit: &V,
    acc: &mut A,
    stats: &mut EnumStats,
) -> Result<()>
where
    V: Fn(&Word, &Mat3, &mut A) -> Result<()> + Sync,
{
    struct Frame {
        g: Mat3,
        next: usize,
    }
    let handle = |w: &Word, g: &Mat3, acc: &mut A, stats: &mut EnumStats| -> Result<bool> {
        stats.deepest = stats.deepest.max(w.len());
        let (emit, descend) = match classify(filter, w, g)? {
            NodeAction::Continue { emit } => (emit, true),
            NodeAction::Stop { emit, pruned } => {
                if pruned {
                    stats.pruned += 1;
                }
                (emit, false)
            }
        };
        if emit {
            stats.emitted += 1;
            visit(w, g, acc)?;
        }
        if descend {
            stats.expanded += 1;
        }
        Ok(descend)
    };
    if !handle(w, g, acc, stats)? {
        return Ok(());
    }
    let mut stack = vec![Frame {
        g: g.clone(),
        next: 0,
    }];
    while let Some(top) = stack.last_mut() {
        if top.next == alphabet.len() {
            stack.pop();
            if !stack.is_empty() {
                w.pop();
            }
            continue;
        }
        let s = alphabet[top.next];
        top.next += 1;
        let a = generator(s).expect("alphabet validated");
        let child = multiply(&top.g, &a)?;
        w.push(s);
        if handle(w, &child, acc, stats)? {
            stack.push(Frame { g: child, next: 0 });
        } else {
            w.pop();
        }
    }
    Ok(())
}

/// One step of the serial trunk walk (depth < shard depth).
enum TrunkEvent<'a> {
    /// A trunk node together with its emission flag.
    Node {
        word: &'a Word,
        mat: &'a Mat3,
        emit: bool,
    },
    /// A surviving node at exactly shard depth, encountered in
    /// lexicographic order.
    ShardRoot { word: &'a Word, mat: &'a Mat3 },
}

fn walk_trunk<F>(
    filter: &EnumFilter,
    alphabet: &[u8],
    shard_depth: usize,
    w: &mut Word,
    g: &Mat3,
    stats: &mut EnumStats,
    handler: &mut F,
) -> Result<()>
where
    F: FnMut(TrunkEvent<'_>) -> Result<()>,
{
    if w.len() == shard_depth {
        return handler(TrunkEvent::ShardRoot { word: w, mat: g });
    }
    stats.deepest = stats.deepest.max(w.len());
    let action = classify(filter, w, g)?;
    let (emit, descend) = match action {
        NodeAction::Continue { emit } => (emit, true),
        NodeAction::Stop { emit, pruned } => {
            if pruned {
                stats.pruned += 1;
            }
            (emit, false)
        }
    };
    if emit {
        stats.emitted += 1;
    }
    handler(TrunkEvent::Node {
        word: w,
        mat: g,
        emit,
    })?;
    if !descend {
        return Ok(());
    }
    stats.expanded += 1;
    for &s in alphabet {
        let a = generator(s).expect("alphabet validated");
        let child = multiply(g, &a)?;
        w.push(s);
        let r = walk_trunk(filter, alphabet, shard_depth, w, &child, stats, handler);
        w.pop();
        r?;
    }
    Ok(())
}

/// Enumerates all words passing the filter, folding them into an accumulator.
///
/// `visit` is called exactly once per passing word, in lexicographic DFS
/// order; `merge` combines a subtree accumulator into the running one, and is
/// called in the same deterministic order regardless of how many threads the
/// ambient rayon pool has. Visitor errors abort the enumeration; when several
/// shards fail, the lexicographically first failure is reported.
pub fn enumerate<A, I, V, M>(
    filter: &EnumFilter,
    init: I,
    visit: V,
    merge: M,
) -> Result<(A, EnumStats)>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&Word, &Mat3, &mut A) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    filter.validate()?;
    let alphabet = filter.alphabet();
    let shard_depth = match filter.max_length {
        Some(ml) => SHARD_DEPTH.min(ml),
        None => SHARD_DEPTH,
    };

    // Pass 1: find the surviving shard roots.
    let mut roots: Vec<(Word, Mat3)> = Vec::new();
    let mut pre_stats = EnumStats::default();
    {
        let mut w = Word::new();
        walk_trunk(
            filter,
            &alphabet,
            shard_depth,
            &mut w,
            &Mat3::identity(),
            &mut pre_stats,
            &mut |event| {
                if let TrunkEvent::ShardRoot { word, mat } = event {
                    roots.push((word.clone(), mat.clone()));
                }
                Ok(())
            },
        )?;
    }

    // Pass 2: run the shard subtrees in parallel.
    let shard_results: Vec<Result<(A, EnumStats)>> = roots
        .par_iter()
        .map(|(rw, rg)| {
            let mut acc = init();
            let mut stats = EnumStats::default();
            let mut w = rw.clone();
            dfs(filter, &alphabet, &mut w, rg, &visit, &mut acc, &mut stats)?;
            Ok((acc, stats))
        })
        .collect();

    // Pass 3: replay the trunk, emitting its own nodes and splicing shard
    // results at the positions they occupy in the lexicographic DFS.
    let mut acc = init();
    let mut trunk_stats = EnumStats::default();
    let mut shard_stats = EnumStats::default();
    let mut shard_iter = shard_results.into_iter();
    let mut w = Word::new();
    walk_trunk(
        filter,
        &alphabet,
        shard_depth,
        &mut w,
        &Mat3::identity(),
        &mut trunk_stats,
        &mut |event| match event {
            TrunkEvent::Node { word, mat, emit } => {
                if emit {
                    visit(word, mat, &mut acc)?;
                }
                Ok(())
            }
            TrunkEvent::ShardRoot { .. } => {
                let (shard_acc, st) = shard_iter
                    .next()
                    .expect("pass 3 visits the same shard roots as pass 1")?;
                merge(&mut acc, shard_acc);
                shard_stats.absorb(st);
                Ok(())
            }
        },
    )?;
    trunk_stats.absorb(shard_stats);
    Ok((acc, trunk_stats))
}

/// Number of words passing the filter.
pub fn count_words(filter: &EnumFilter) -> Result<u64> {
    let (_, stats) = enumerate(filter, || (), |_, _, _| Ok(()), |_, _| ())?;
    Ok(stats.emitted)
}

/// All passing words, in lexicographic DFS order.
pub fn collect_words(filter: &EnumFilter) -> Result<Vec<Word>> {
    let (words, _) = enumerate(
        filter,
        Vec::new,
        |w, _, acc: &mut Vec<Word>| {
            acc.push(w.clone());
            Ok(())
        },
        |a, b| a.extend(b),
    )?;
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_with_plain_depth_filter() {
        // 1 + 3 + 9 = 13 including the identity; 12 without it.
        let f = EnumFilter::up_to_length(2);
        assert_eq!(count_words(&f).unwrap(), 13);
        let f2 = EnumFilter {
            include_empty: false,
            ..EnumFilter::up_to_length(2)
        };
        assert_eq!(count_words(&f2).unwrap(), 12);
    }

    #[test]
    fn digit_filter_count_at_length_three() {
        // Words of length exactly 3 not ending in a repeated digit:
        // 3·3·2 = 18.
        let f = EnumFilter {
            last_n_digits_not_same: Some(2),
            include_empty: false,
            ..EnumFilter::up_to_length(3)
        };
        let words = collect_words(&f).unwrap();
        let exact3 = words.iter().filter(|w| w.len() == 3).count();
        assert_eq!(exact3, 18);
    }

    #[test]
    fn restricted_alphabet_counts() {
        let f = EnumFilter {
            restrict_alphabet: Some(vec![1, 2]),
            include_empty: false,
            ..EnumFilter::up_to_length(5)
        };
        let words = collect_words(&f).unwrap();
        let exact5 = words.iter().filter(|w| w.len() == 5).count();
        assert_eq!(exact5, 32);
    }

    #[test]
    fn missing_stopping_criterion_is_rejected() {
        let f = EnumFilter {
            last_n_digits_not_same: Some(2),
            ..EnumFilter::default()
        };
        assert!(matches!(count_words(&f), Err(Error::Input(_))));
    }

    #[test]
    fn emission_order_is_lexicographic_dfs() {
        let f = EnumFilter::up_to_length(3);
        let words = collect_words(&f).unwrap();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(words.len(), 40); // 1+3+9+27
        assert_eq!(words[0], Word::new());
        assert_eq!(words[1], "1".parse().unwrap());
        assert_eq!(words[2], "11".parse().unwrap());
    }

    #[test]
    fn cover_mode_with_large_delta_keeps_root() {
        let f = EnumFilter {
            diam_ceiling: Some(1.5),
            include_empty: true,
            ..EnumFilter::default()
        };
        // diam(Δ) = √2 ≤ 1.5, so the identity is the single leaf.
        let words = collect_words(&f).unwrap();
        assert_eq!(words, vec![Word::new()]);
    }

    #[test]
    fn cover_mode_at_delta_one_gives_the_three_generators() {
        let f = EnumFilter {
            diam_ceiling: Some(1.0),
            include_empty: true,
            ..EnumFilter::default()
        };
        let words = collect_words(&f).unwrap();
        let expect: Vec<Word> = ["1", "2", "3"].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(words, expect);
    }

    #[test]
    fn cover_mode_resource_guard_fires() {
        let f = EnumFilter {
            diam_ceiling: Some(1e-4),
            max_length: Some(8),
            include_empty: true,
            ..EnumFilter::default()
        };
        assert!(matches!(
            collect_words(&f),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn visitor_abort_propagates() {
        let f = EnumFilter::up_to_length(4);
        let r = enumerate(
            &f,
            || 0u64,
            |w, _, n| {
                *n += 1;
                if w.len() == 3 && w.to_string() == "222" {
                    Err(Error::Logic("stop here".into()))
                } else {
                    Ok(())
                }
            },
            |a, b| *a += b,
        );
        assert!(matches!(r, Err(Error::Logic(_))));
    }
}
