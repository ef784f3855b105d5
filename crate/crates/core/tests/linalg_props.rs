//! Randomized properties of the Cartan machinery: the contraction lemma
//! relating ‖gv‖ to the repelling hyperplane, submultiplicativity of the
//! singular values, and the metric axioms of the sine distance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rauzy_core::linalg::{
    cartan, cartan_frames, multiply, proj_distance, proj_point_to_line, ProjPoint,
    DEFAULT_GAP_TOL,
};
use rauzy_core::words::Word;

fn random_word(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> Word {
    let len = rng.gen_range(min_len..=max_len);
    let mut w = Word::new();
    for _ in 0..len {
        w.push(rng.gen_range(1..=3));
    }
    w
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[test]
fn contraction_lemma_on_random_pairs() {
    // For any g and any line V = Rv:
    //   d(V,H⁻) ≤ ‖gv‖/(σ₁‖v‖) ≤ d(V,H⁻) + σ₂/σ₁
    //   d(gV,V⁺)·d(V,H⁻) ≤ σ₂/σ₁
    // with the sine metric. Slack tolerance 1e-12 absorbs roundoff only.
    let mut rng = ChaCha8Rng::seed_from_u64(2021);
    for trial in 0..2500 {
        let w = random_word(&mut rng, 1, 10);
        let g = w.matrix();
        let f = cartan_frames(&g, DEFAULT_GAP_TOL).unwrap();
        let ratio = (f.kappa.kappa[1] - f.kappa.kappa[0]).exp();
        let v = random_unit(&mut rng);
        let (m, ls) = g.f64_parts();
        let gv = [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ];
        let gv_norm = (gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2]).sqrt();
        let growth = (ls + gv_norm.ln() - f.kappa.kappa[0]).exp();
        let p = ProjPoint::new(v).unwrap();
        let d_rep = proj_point_to_line(&p, &f.h_minus_normal);
        let d_att = proj_distance(&ProjPoint::new(gv).unwrap(), &f.v_plus);
        assert!(
            d_rep <= growth + 1e-12,
            "trial {trial} word {w}: d(V,H⁻)={d_rep} > ‖gv‖/σ₁={growth}"
        );
        assert!(
            growth <= d_rep + ratio + 1e-12,
            "trial {trial} word {w}: ‖gv‖/σ₁={growth} > {d_rep}+{ratio}"
        );
        assert!(
            d_att * d_rep <= ratio + 1e-12,
            "trial {trial} word {w}: {d_att}·{d_rep} > σ₂/σ₁={ratio}"
        );
    }
}

#[test]
fn kappa_one_is_subadditive_and_bounded_below() {
    // σ₁(gh) ≤ σ₁(g)σ₁(h) and σ₁(gh) ≥ σ₁(g)σ₃(h), σ₃(g)σ₁(h).
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..800 {
        let wg = random_word(&mut rng, 1, 12);
        let wh = random_word(&mut rng, 1, 12);
        let (g, h) = (wg.matrix(), wh.matrix());
        let kg = cartan(&g).unwrap().kappa;
        let kh = cartan(&h).unwrap().kappa;
        let kgh = cartan(&multiply(&g, &h).unwrap()).unwrap().kappa;
        assert!(kgh[0] <= kg[0] + kh[0] + 1e-9, "{wg}·{wh} breaks κ₁ subadditivity");
        assert!(kgh[0] >= kg[0] + kh[2] - 1e-9, "{wg}·{wh} breaks σ₁(g)σ₃(h) bound");
        assert!(kgh[0] >= kg[2] + kh[0] - 1e-9, "{wg}·{wh} breaks σ₃(g)σ₁(h) bound");
    }
}

#[test]
fn sine_distance_is_a_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..2000 {
        let p = ProjPoint::new(random_unit(&mut rng)).unwrap();
        let q = ProjPoint::new(random_unit(&mut rng)).unwrap();
        let r = ProjPoint::new(random_unit(&mut rng)).unwrap();
        let (pq, qr, pr) = (proj_distance(&p, &q), proj_distance(&q, &r), proj_distance(&p, &r));
        assert_eq!(pq, proj_distance(&q, &p));
        assert_eq!(proj_distance(&p, &p), 0.0);
        assert!((0.0..=1.0).contains(&pq));
        assert!(pr <= pq + qr + 1e-12, "triangle fails: {pr} > {pq}+{qr}");
    }
    // Anchors: orthogonal lines at distance 1; a 45° pair at 1/√2.
    let e1 = ProjPoint::basis(1);
    let e2 = ProjPoint::basis(2);
    let diag = ProjPoint::new([1.0, 1.0, 0.0]).unwrap();
    assert_eq!(proj_distance(&e1, &e2), 1.0);
    assert!((proj_distance(&e1, &diag) - 0.5_f64.sqrt()).abs() < 1e-15);
}
