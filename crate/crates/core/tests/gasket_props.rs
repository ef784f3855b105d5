//! Geometric properties of the simplex subdivision: nesting, diameter
//! comparability with singular values, cover correctness, and determinism.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rauzy_core::gasket::{
    adaptive_cover, box_count_dimension, coding_point, cover_leaves, diam_area, triangle_of,
    ProjTriangle,
};
use rauzy_core::linalg::cartan;
use rauzy_core::words::{enumerate, EnumFilter, Word};

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Word {
    let mut w = Word::new();
    for _ in 0..len {
        w.push(rng.gen_range(1..=3));
    }
    w
}

#[test]
fn children_nest_inside_parents() {
    // Δ_{wu} ⊂ Δ_w for every extension u; checked on the vertices, which
    // span the child triangle, so containment of a convex set follows.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let wl = rng.gen_range(0..=8);
        let ul = rng.gen_range(1..=6);
        let w = random_word(&mut rng, wl);
        let u = random_word(&mut rng, ul);
        let parent = triangle_of(&w);
        let child = triangle_of(&w.concat(&u));
        for v in child.vertices() {
            assert!(
                parent.contains(v, 1e-10),
                "Δ_{{{}·{}}} escapes Δ_{{{}}}",
                w,
                u,
                w
            );
        }
    }
}

#[test]
fn diameter_comparable_to_singular_value_ratio() {
    // For x, y in the solid simplex the affine images satisfy
    //   ‖f(x)−f(y)‖ ≤ √3·σ₁σ₂·‖x−y‖ / μ²,   μ = min_j ‖γe_j‖,
    // because the numerator is an interior product of 1 with γx ∧ γy and
    // every column sum is at least the smallest column norm. With
    // ‖x−y‖ ≤ √2 this bounds the diameter; the reverse bound comes from
    // ‖γe_i ∧ γe_j‖ ≥ σ₂σ₃ and column sums ≤ √3·σ₁. Both are per-word
    // inequalities, so they pin diam(Δ_γ) to the ratio σ₂/σ₁ that the
    // pressure series is built from.
    let filter = EnumFilter {
        max_length: Some(12),
        last_n_digits_not_same: Some(2),
        ..EnumFilter::default()
    };
    let (worst, _) = enumerate(
        &filter,
        || (0.0_f64, 0.0_f64),
        |w, g, acc: &mut (f64, f64)| {
            let t = ProjTriangle::from_word_matrix(w, g);
            let (diam, _) = diam_area(&t);
            let k = cartan(g)?.kappa;
            let (norms, ls) = g.column_norms_scaled();
            let ln_mu = norms.iter().fold(f64::INFINITY, |a, &b| a.min(b)).ln() + ls;
            let upper = 6.0_f64.sqrt().ln() + k[0] + k[1] - 2.0 * ln_mu;
            let lower = k[1] + k[2] - 2.0 * k[0] - 3.0_f64.ln();
            acc.0 = acc.0.max(diam.ln() - upper);
            acc.1 = acc.1.max(lower - diam.ln());
            Ok(())
        },
        |a, b| {
            a.0 = a.0.max(b.0);
            a.1 = a.1.max(b.1);
        },
    )
    .unwrap();
    assert!(worst.0 <= 1e-9, "upper bound violated by e^{}", worst.0);
    assert!(worst.1 <= 1e-9, "lower bound violated by e^{}", worst.1);
}

#[test]
fn cover_contains_coded_points() {
    // Leaves of an adaptive cover form a full antichain in the word tree,
    // so every coded point lies in the leaf its coding passes through.
    let leaves = cover_leaves(0.125).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let prefix = random_word(&mut rng, 20);
        let (p, err) = coding_point(&prefix, 40).unwrap();
        assert!(err < 1e-6);
        let b = p.barycentric().unwrap();
        assert!(
            leaves.iter().any(|t| t.contains(&b, 1e-9)),
            "coded point of {prefix}(123)^∞ missed by the cover"
        );
    }
}

#[test]
fn cover_cost_is_nonincreasing_in_s() {
    // Every leaf has diam ≤ δ < 1 and area ≤ (√3/4)·diam², so each leaf's
    // cost term decreases in s on both sides of s = 1 and matches at 1.
    let costs: Vec<f64> = [0.5, 0.8, 1.0, 1.2, 1.5, 1.8, 2.0]
        .iter()
        .map(|&s| adaptive_cover(0.25, s).unwrap().cost)
        .collect();
    for pair in costs.windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "cost rose: {pair:?}");
    }
}

#[test]
fn box_counts_grow_as_delta_shrinks() {
    // The gasket contains the three simplex edges, so any δ-cover needs at
    // least ~1/δ boxes; counts must also be monotone under refinement.
    let deltas = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125];
    let boxes: Vec<u64> = deltas
        .iter()
        .map(|&d| adaptive_cover(d, 1.5).unwrap().boxes)
        .collect();
    for pair in boxes.windows(2) {
        assert!(pair[1] >= pair[0], "box count fell: {boxes:?}");
    }
    for (d, n) in deltas.iter().zip(&boxes) {
        assert!(*n as f64 >= 1.0 / d, "too few boxes at δ={d}: {n}");
    }
}

#[test]
fn box_dimension_fit_on_a_small_grid() {
    let r = box_count_dimension(&[0.125, 0.0625, 0.03125, 0.015625]).unwrap();
    assert!(
        r.slope > 1.0 && r.slope < 2.0,
        "slope {} outside the plane-curve sandwich",
        r.slope
    );
    assert!(r.r_squared > 0.95, "poor fit: R² = {}", r.r_squared);
}

#[test]
fn cover_leaves_identical_across_thread_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cover_leaves(0.0625).unwrap())
    };
    let reference = run(1);
    assert!(reference.len() > 100);
    for threads in [4, 8] {
        let got = run(threads);
        assert_eq!(got.len(), reference.len());
        for (a, b) in got.iter().zip(&reference) {
            assert_eq!(a.word(), b.word());
            for (va, vb) in a.vertices().iter().zip(b.vertices()) {
                for i in 0..3 {
                    assert_eq!(va[i].to_bits(), vb[i].to_bits(), "vertex bits differ");
                }
            }
        }
    }
}
