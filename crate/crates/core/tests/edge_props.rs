//! Edge-subsemigroup checks against independent oracles: Jacobi SVD for the
//! first qualifying level, exact Farey fractions for the mediant structure,
//! and a sort-based retiling of level 12.

mod common;

use std::collections::BTreeSet;

use common::jacobi_svd;
use rauzy_core::edge::{arc_of, edge_epsilon, lower_bound_evidence, tiling_check};
use rauzy_core::linalg::{cartan, proj_distance, ProjPoint};
use rauzy_core::words::{collect_words, enumerate, EnumFilter, Word};

fn edge_words(max_len: usize) -> EnumFilter {
    EnumFilter {
        max_length: Some(max_len),
        restrict_alphabet: Some(vec![1, 2]),
        ..EnumFilter::default()
    }
}

#[test]
fn first_qualifying_level_matches_jacobi_oracle() {
    // The only words of length 2 with distinct digits are "12" and "21",
    // conjugate by the coordinate swap, so level 2 carries twice the
    // φ_{3/2} weight of A₁A₂ and ε̂(2) is its norm bound √10/σ₁².
    let m = [[2.0, 1.0, 2.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0]];
    let (s, _, _) = jacobi_svd(&m);
    let phi = (s[1] / s[0]) * (s[2] / s[0]).sqrt();
    let rows = lower_bound_evidence(2).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].count, 2);
    assert!((rows[0].level_sum - 2.0 * phi).abs() <= 1e-10 * phi);
    assert!((rows[0].cumulative - rows[0].level_sum).abs() <= 1e-15);

    let eps = edge_epsilon(2).unwrap();
    let norm_bound = 10.0_f64.sqrt() / (s[0] * s[0]);
    assert!((eps.value - norm_bound).abs() <= 1e-10 * norm_bound);
    assert!(norm_bound < s[1], "σ₂ should not be the binding branch here");
    assert_eq!(eps.worst_word.to_string(), "12");
    assert_eq!(rows[0].eps_so_far, eps.value);
}

#[test]
fn reciprocal_and_wedge_arc_lengths_agree_to_depth_20() {
    // Independent of arc_of: raw integer columns, both formulas.
    let (worst, _) = enumerate(
        &edge_words(20),
        || 0.0_f64,
        |_, g, worst: &mut f64| {
            let e = g.exact_entries().expect("edge words of depth 20 stay exact");
            let c1 = [e[0][0] as f64, e[1][0] as f64, e[2][0] as f64];
            let c2 = [e[0][1] as f64, e[1][1] as f64, e[2][1] as f64];
            let n1 = (c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]).sqrt();
            let n2 = (c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2]).sqrt();
            let cr = [
                c1[1] * c2[2] - c1[2] * c2[1],
                c1[2] * c2[0] - c1[0] * c2[2],
                c1[0] * c2[1] - c1[1] * c2[0],
            ];
            let wedge = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt() / (n1 * n2);
            let recip = 1.0 / (n1 * n2);
            *worst = worst.max((wedge - recip).abs() / recip);
            Ok(())
        },
        |a, b| *a = a.max(b),
    )
    .unwrap();
    assert!(worst <= 1e-12, "formulas diverge by {worst}");
}

#[test]
fn restricted_block_is_unimodular_and_sigma3_reciprocal() {
    let words = collect_words(&edge_words(12)).unwrap();
    assert_eq!(words.len(), (2u64.pow(13) - 2) as usize);
    for w in &words {
        let g = w.matrix();
        let e = g.exact_entries().unwrap();
        // The e₁e₂-plane is invariant with determinant-one restriction, the
        // identity behind ‖γe₁ ∧ γe₂‖ = 1.
        assert_eq!(e[2][0], 0);
        assert_eq!(e[2][1], 0);
        assert_eq!(e[2][2], 1);
        let det2 = (e[0][0] * e[1][1]) as i128 - (e[0][1] * e[1][0]) as i128;
        assert_eq!(det2, 1, "word {w}");
        let k = cartan(&g).unwrap();
        // log(σ₁σ₂σ₃) = 0 ⇔ σ₃ = 1/(σ₁σ₂).
        assert!(k.sum().abs() <= 1e-10, "word {w}: κ sum {}", k.sum());
    }
}

#[test]
fn mediant_refinement_adds_one_endpoint_per_arc() {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    // Endpoints as exact reduced fractions (p : q) on the edge.
    let endpoint_set = |n: usize| -> BTreeSet<(u128, u128)> {
        let mut set = BTreeSet::new();
        for w in collect_words(&edge_words(n)).unwrap() {
            if w.len() != n {
                continue;
            }
            let e = w.matrix();
            let e = e.exact_entries().unwrap();
            for col in 0..2 {
                let (p, q) = (e[0][col], e[1][col]);
                let d = gcd(p, q).max(1);
                set.insert((p / d, q / d));
            }
        }
        set
    };
    let mut prev = {
        let mut s = BTreeSet::new();
        s.insert((1, 0));
        s.insert((0, 1));
        s
    };
    for n in 1..=8 {
        let cur = endpoint_set(n);
        assert_eq!(cur.len(), (1 << n) + 1);
        assert!(prev.is_subset(&cur), "level {n} lost an endpoint");
        assert_eq!(cur.len() - prev.len(), 1 << (n - 1));
        prev = cur;
    }
}

#[test]
fn level_12_tiling_matches_a_sort_based_retiling() {
    // Oracle: materialize all 4096 arcs, order them along the edge by
    // midpoint, and re-derive every quantity the streaming check reports.
    let mut arcs: Vec<_> = collect_words(&edge_words(12))
        .unwrap()
        .into_iter()
        .filter(|w| w.len() == 12)
        .map(|w| arc_of(&w).unwrap())
        .collect();
    assert_eq!(arcs.len(), 4096);
    arcs.sort_by(|a, b| {
        let ma = a.params().0 + a.params().1;
        let mb = b.params().0 + b.params().1;
        mb.partial_cmp(&ma).unwrap()
    });
    let mut max_gap =
        proj_distance(&arcs[0].endpoints[0], &ProjPoint::basis(1)).max(proj_distance(
            &arcs.last().unwrap().endpoints[1],
            &ProjPoint::basis(2),
        ));
    let mut angular = 0.0;
    for pair in arcs.windows(2) {
        max_gap = max_gap.max(proj_distance(&pair[0].endpoints[1], &pair[1].endpoints[0]));
    }
    for a in &arcs {
        angular += a.angular_length;
    }
    assert!(max_gap <= 1e-12);
    assert!((angular - std::f64::consts::FRAC_PI_2).abs() <= 1e-9);

    let report = tiling_check(12).unwrap();
    assert!(report.pass);
    assert_eq!(report.arcs, 4096);
    assert!(report.max_endpoint_gap <= max_gap + 1e-15);
    assert!((report.angular_sum - angular).abs() <= 1e-12);
}

#[test]
fn arcs_nest_along_prefixes() {
    let mut word = Word::new();
    let digits = [1u8, 2, 2, 1, 2, 1, 1, 2, 1, 2];
    let mut prev = arc_of(&word).unwrap();
    for d in digits {
        word.push(d);
        let arc = arc_of(&word).unwrap();
        let (hi, lo) = arc.params();
        let (phi, plo) = prev.params();
        assert!(lo >= plo - 1e-15 && hi <= phi + 1e-15, "arc escaped its parent");
        assert!(arc.chordal_length < prev.chordal_length);
        prev = arc;
    }
}
