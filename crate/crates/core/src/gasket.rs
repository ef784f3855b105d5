//! Geometry of the simplex images Δ_γ: the coding map, diameters and areas,
//! the column-norm separation constant, adaptive covers, box counting, and
//! raster rendering.
//!
//! All geometry lives on the plane x+y+z = 1 with the Euclidean metric.
//! The planar chart used for grids and images is
//! u = (1,−1,0)/√2, v = (1,1,−2)/√6 about the centroid (1/3,1/3,1/3).

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::kahan::KahanSum;
use crate::linalg::{cartan, Mat3, ProjPoint};
use crate::simplex::{dist3, simplex_vertices};
use crate::words::{enumerate, EnumFilter, Word};

/// Image of the standard simplex under a word: three column directions
/// normalized onto the plane x+y+z = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjTriangle {
    /// Nonnegative vertices, each summing to 1; positively oriented
    /// (the matrices have positive determinant and nonnegative entries,
    /// which normalization preserves).
    vertices: [[f64; 3]; 3],
    word: Word,
}

fn det3f(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl ProjTriangle {
    /// Builds the triangle from a word and its already-computed matrix.
    pub fn from_word_matrix(w: &Word, g: &Mat3) -> ProjTriangle {
        ProjTriangle {
            vertices: simplex_vertices(g),
            word: w.clone(),
        }
    }

    pub fn vertices(&self) -> &[[f64; 3]; 3] {
        &self.vertices
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    /// Barycentric membership test with additive slack on the coordinates.
    pub fn contains(&self, p: &[f64; 3], slack: f64) -> bool {
        // Solve p = Σ tᵢ·vertexᵢ by Cramer; t sums to 1 automatically
        // because p and the vertices all sum to 1.
        let v = &self.vertices;
        let base = [
            [v[0][0], v[1][0], v[2][0]],
            [v[0][1], v[1][1], v[2][1]],
            [v[0][2], v[1][2], v[2][2]],
        ];
        let d = det3f(&base);
        for i in 0..3 {
            let mut num = base;
            for r in 0..3 {
                num[r][i] = p[r];
            }
            if det3f(&num) / d < -slack {
                return false;
            }
        }
        true
    }

    /// Mean of the vertices, a canonical interior point.
    pub fn barycenter(&self) -> [f64; 3] {
        let v = &self.vertices;
        [
            (v[0][0] + v[1][0] + v[2][0]) / 3.0,
            (v[0][1] + v[1][1] + v[2][1]) / 3.0,
            (v[0][2] + v[1][2] + v[2][2]) / 3.0,
        ]
    }
}

/// The triangle Δ_w.
pub fn triangle_of(w: &Word) -> ProjTriangle {
    ProjTriangle::from_word_matrix(w, &w.matrix())
}

/// Euclidean diameter (max pairwise vertex distance) and Euclidean area of
/// the triangle in its plane. The area equals half the cross-product norm,
/// and also √3/2·|det(vertices)| (the wedge identity: the plane sits at
/// distance 1/√3 from the origin).
pub fn diam_area(t: &ProjTriangle) -> (f64, f64) {
    let v = t.vertices();
    let diam = dist3(v[0], v[1])
        .max(dist3(v[0], v[2]))
        .max(dist3(v[1], v[2]));
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1], v[2][2] - v[0][2]];
    let cr = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    let area = 0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
    (diam, area)
}

/// Planar chart on x+y+z = 1: coordinates along u = (1,−1,0)/√2 and
/// v = (1,1,−2)/√6 about the centroid.
pub fn plane_coords(p: &[f64; 3]) -> (f64, f64) {
    let c = 1.0 / 3.0;
    let (a, b, d) = (p[0] - c, p[1] - c, p[2] - c);
    (
        (a - b) / 2.0_f64.sqrt(),
        (a + b - 2.0 * d) / 6.0_f64.sqrt(),
    )
}

/// Empirical column-norm separation constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    /// min over enumerated words of min_i ‖γeᵢ‖/σ₁(γ).
    pub value: f64,
    /// The minimizing word (first in lexicographic order on ties).
    pub attained_at: Word,
    pub n: usize,
    pub depth: usize,
}

/// Estimates the smallest ratio ‖γeᵢ‖/σ₁(γ) over words of length ≤ depth
/// whose last n symbols are not all equal. A lower-confidence estimate:
/// nonincreasing in depth, no extrapolation.
pub fn estimate_epsilon_n(n: usize, depth: usize) -> Result<EpsilonEstimate> {
    if n < 2 {
        return Err(Error::Input(format!("n must be ≥ 2, got {n}")));
    }
    if depth < n {
        return Err(Error::Input(format!(
            "depth must be ≥ n, got n {n}, depth {depth}"
        )));
    }
    let filter = EnumFilter {
        last_n_digits_not_same: Some(n),
        include_empty: false,
        ..EnumFilter::up_to_length(depth)
    };
    struct Min {
        value: f64,
        word: Option<Word>,
    }
    let (min, _) = enumerate(
        &filter,
        || Min {
            value: f64::INFINITY,
            word: None,
        },
        |w, g, acc: &mut Min| {
            let k1 = cartan(g)?.kappa[0];
            let (norms, nls) = g.column_norms_scaled();
            let log_ratio = norms
                .iter()
                .map(|&x| x.ln() + nls - k1)
                .fold(f64::INFINITY, f64::min);
            let ratio = log_ratio.exp();
            if ratio < acc.value {
                acc.value = ratio;
                acc.word = Some(w.clone());
            }
            Ok(())
        },
        |a, b| {
            // Merge order is lexicographic, so `<` keeps the first minimizer.
            if b.value < a.value {
                *a = b;
            }
        },
    )?;
    Ok(EpsilonEstimate {
        value: min.value,
        attained_at: min.word.ok_or_else(|| Error::Logic("empty enumeration".into()))?,
        n,
        depth,
    })
}

/// Budget for one adaptive cover, in estimated leaves.
pub const COVER_LEAF_BUDGET: f64 = 5e7;

fn cover_filter(delta: f64) -> Result<EnumFilter> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Input(format!(
            "cover diameter must lie in (0, 1], got {delta}"
        )));
    }
    // Leaf count scales roughly like δ^(−1.8) (one power per dimension
    // bounded by the box-counting estimates).
    let estimate = 3.0 * (2.0_f64.sqrt() / delta).powf(1.8);
    if estimate > COVER_LEAF_BUDGET {
        return Err(Error::Resource {
            what: format!("adaptive cover at diameter {delta}"),
            estimate,
            budget: COVER_LEAF_BUDGET,
            unit: "estimated leaf triangles",
        });
    }
    // Parabolic spines reach diameter δ after ~√2/δ repeats; the guard is a
    // loose multiple so a genuine runaway still errors out.
    let guard = (8.0 / delta).ceil() as usize + 64;
    Ok(EnumFilter {
        diam_ceiling: Some(delta),
        last_n_digits_not_same: Some(2),
        max_length: Some(guard),
        include_empty: true,
        ..EnumFilter::default()
    })
}

/// Materializes the cover's leaf triangles in lexicographic word order.
pub fn cover_leaves(delta: f64) -> Result<Vec<ProjTriangle>> {
    let filter = cover_filter(delta)?;
    let (leaves, _) = enumerate(
        &filter,
        Vec::new,
        |w, g, acc: &mut Vec<ProjTriangle>| {
            acc.push(ProjTriangle::from_word_matrix(w, g));
            Ok(())
        },
        |a, mut b| a.append(&mut b),
    )?;
    Ok(leaves)
}

/// Barycentric sampling pattern for rasterization: the degree-3 barycentric
/// grid (10 points) plus the three edge midpoints.
const SAMPLE_BARY: [[f64; 3]; 13] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [2.0 / 3.0, 1.0 / 3.0, 0.0],
    [2.0 / 3.0, 0.0, 1.0 / 3.0],
    [1.0 / 3.0, 2.0 / 3.0, 0.0],
    [0.0, 2.0 / 3.0, 1.0 / 3.0],
    [1.0 / 3.0, 0.0, 2.0 / 3.0],
    [0.0, 1.0 / 3.0, 2.0 / 3.0],
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [0.5, 0.5, 0.0],
    [0.5, 0.0, 0.5],
    [0.0, 0.5, 0.5],
];

fn sample_cells(t: &ProjTriangle, side: f64, out: &mut HashSet<(i64, i64)>) {
    let v = t.vertices();
    for bary in &SAMPLE_BARY {
        let p = [
            bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0],
            bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1],
            bary[0] * v[0][2] + bary[1] * v[1][2] + bary[2] * v[2][2],
        ];
        let (x, y) = plane_coords(&p);
        out.insert(((x / side).floor() as i64, (y / side).floor() as i64));
    }
}

/// Adaptive-cover accounting at one diameter and one dimension parameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverReport {
    pub delta: f64,
    pub s: f64,
    /// Leaf triangles in the cover.
    pub triangles: u64,
    /// Σ diam^s over leaves for s ≤ 1; Σ diam^(2−s)·area^(s−1) for s > 1.
    pub cost: f64,
    /// Occupied half-open grid cells of side delta (13-point sampling; a
    /// conservative undercount at the leaf scale).
    pub boxes: u64,
    /// Longest leaf word (parabolic spines make this exceed log(1/δ)).
    pub deepest_word: usize,
}

/// Covers the attractor by maximal triangles of diameter ≤ delta whose
/// words end in two distinct symbols (words ending in a repeated symbol are
/// subdivided further rather than dropped, so no mass is lost), then
/// accounts the cover cost at dimension parameter s.
pub fn adaptive_cover(delta: f64, s: f64) -> Result<CoverReport> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::Domain(format!("s must lie in (0, 2], got {s}")));
    }
    let filter = cover_filter(delta)?;
    struct Acc {
        cost: KahanSum,
        cells: HashSet<(i64, i64)>,
        deepest: usize,
    }
    let (acc, stats) = enumerate(
        &filter,
        || Acc {
            cost: KahanSum::new(),
            cells: HashSet::new(),
            deepest: 0,
        },
        |w, g, acc: &mut Acc| {
            let t = ProjTriangle::from_word_matrix(w, g);
            let (diam, area) = diam_area(&t);
            let term = if s <= 1.0 {
                diam.powf(s)
            } else {
                diam.powf(2.0 - s) * area.powf(s - 1.0)
            };
            acc.cost.add(term);
            sample_cells(&t, delta, &mut acc.cells);
            acc.deepest = acc.deepest.max(w.len());
            Ok(())
        },
        |a, b| {
            a.cost.merge(b.cost);
            a.cells.extend(b.cells);
            a.deepest = a.deepest.max(b.deepest);
        },
    )?;
    let cost = acc.cost.value();
    if !cost.is_finite() {
        return Err(Error::Numeric("cover cost overflowed".into()));
    }
    Ok(CoverReport {
        delta,
        s,
        triangles: stats.emitted,
        cost,
        boxes: acc.cells.len() as u64,
        deepest_word: acc.deepest,
    })
}

/// Box-counting diagnostic over a ladder of grid scales.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxCountReport {
    pub deltas: Vec<f64>,
    pub counts: Vec<u64>,
    /// Least-squares slope of log N(δ) against log(1/δ).
    pub slope: f64,
    pub slope_stderr: f64,
    /// Fitted log N at δ = 1; with the slope this reproduces the whole line.
    pub intercept: f64,
    pub r_squared: f64,
}

/// Counts occupied grid cells at every requested scale against a single
/// cover refined to min(deltas)/4, so every counted leaf is small next to
/// every grid. Deltas must be strictly decreasing, at least 4 of them.
pub fn box_count_dimension(deltas: &[f64]) -> Result<BoxCountReport> {
    if deltas.len() < 4 {
        return Err(Error::Input(format!(
            "need at least 4 grid scales, got {}",
            deltas.len()
        )));
    }
    if deltas.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::Input("grid scales must be strictly decreasing".into()));
    }
    let finest = *deltas.last().expect("nonempty");
    let filter = cover_filter(finest / 4.0)?;
    let (cell_sets, _) = enumerate(
        &filter,
        || vec![HashSet::<(i64, i64)>::new(); deltas.len()],
        |w, g, acc: &mut Vec<HashSet<(i64, i64)>>| {
            let t = ProjTriangle::from_word_matrix(w, g);
            for (set, &d) in acc.iter_mut().zip(deltas) {
                sample_cells(&t, d, set);
            }
            Ok(())
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.extend(y);
            }
        },
    )?;
    let counts: Vec<u64> = cell_sets.iter().map(|s| s.len() as u64).collect();
    let xs: Vec<f64> = deltas.iter().map(|&d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let f = line_fit(&xs, &ys);
    Ok(BoxCountReport {
        deltas: deltas.to_vec(),
        counts,
        slope: f.slope,
        slope_stderr: f.slope_stderr,
        intercept: f.intercept,
        r_squared: f.r_squared,
    })
}

/// Approximates the coded point of prefix·(123)^∞ by the barycenter of the
/// nested triangle after `tail_iterations` repetitions of the tail; the
/// returned bound is the triangle diameter.
pub fn coding_point(prefix: &Word, tail_iterations: usize) -> Result<(ProjPoint, f64)> {
    if tail_iterations < 1 {
        return Err(Error::Input("tail_iterations must be ≥ 1".into()));
    }
    let mut w = prefix.clone();
    for _ in 0..tail_iterations {
        w.push(1);
        w.push(2);
        w.push(3);
    }
    let t = triangle_of(&w);
    let (diam, _) = diam_area(&t);
    Ok((ProjPoint::new(t.barycenter())?, diam))
}

/// What to draw: every triangle at an exact word length, or an adaptive
/// cover at a diameter.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum RenderSpec {
    Depth(usize),
    Delta(f64),
}

const RENDER_MAX_SIZE: usize = 16384;
const RENDER_MAX_DEPTH: usize = 13;
/// Fill color (RGB) for triangles on the white background.
const INK: [u8; 3] = [24, 56, 120];

fn render_triangles(spec: &RenderSpec) -> Result<Vec<ProjTriangle>> {
    match *spec {
        RenderSpec::Depth(n) => {
            if n > RENDER_MAX_DEPTH {
                return Err(Error::Resource {
                    what: format!("render at depth {n}"),
                    estimate: 3.0_f64.powi(n as i32),
                    budget: 3.0_f64.powi(RENDER_MAX_DEPTH as i32),
                    unit: "triangles",
                });
            }
            let filter = EnumFilter {
                include_empty: n == 0,
                ..EnumFilter::up_to_length(n)
            };
            let (leaves, _) = enumerate(
                &filter,
                Vec::new,
                |w, g, acc: &mut Vec<ProjTriangle>| {
                    if w.len() == n {
                        acc.push(ProjTriangle::from_word_matrix(w, g));
                    }
                    Ok(())
                },
                |a, mut b| a.append(&mut b),
            )?;
            Ok(leaves)
        }
        RenderSpec::Delta(d) => cover_leaves(d),
    }
}

/// Renders the triangle set to a binary PPM (P6) raster. Bytes are a pure
/// function of the inputs.
pub fn render_image(spec: &RenderSpec, size: usize) -> Result<Vec<u8>> {
    if !(16..=RENDER_MAX_SIZE).contains(&size) {
        return Err(Error::Input(format!(
            "image size must lie in [16, {RENDER_MAX_SIZE}], got {size}"
        )));
    }
    let triangles = render_triangles(spec)?;
    // Chart bounds of Δ: x ∈ [−1/√2, 1/√2], y ∈ [−2/√6, 1/√6].
    let y_mid = -0.5 / 6.0_f64.sqrt();
    let half_w = 1.0 / 2.0_f64.sqrt();
    let half_h = 1.5 / 6.0_f64.sqrt();
    let scale = 0.48 * size as f64 / half_w.max(half_h);
    let px = |x: f64| 0.5 * size as f64 + scale * x;
    let py = |y: f64| 0.5 * size as f64 - scale * (y - y_mid);
    let mut img = vec![255u8; 3 * size * size];
    for t in &triangles {
        let v = t.vertices();
        let q: Vec<(f64, f64)> = v
            .iter()
            .map(|p| {
                let (x, y) = plane_coords(p);
                (px(x), py(y))
            })
            .collect();
        let xmin = q.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let xmax = (q.iter().map(|p| p.0).fold(0.0, f64::max).ceil() as usize).min(size - 1);
        let ymin = q.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let ymax = (q.iter().map(|p| p.1).fold(0.0, f64::max).ceil() as usize).min(size - 1);
        let edge = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
            (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
        };
        for row in ymin..=ymax {
            for col in xmin..=xmax {
                let c = (col as f64 + 0.5, row as f64 + 0.5);
                let (e0, e1, e2) = (
                    edge(q[0], q[1], c),
                    edge(q[1], q[2], c),
                    edge(q[2], q[0], c),
                );
                let inside = (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0)
                    || (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
                if inside {
                    let at = 3 * (row * size + col);
                    img[at..at + 3].copy_from_slice(&INK);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(img.len() + 256);
    out.extend_from_slice(b"P6\n");
    out.extend_from_slice(
        format!(
            "# simplex chart u=(1,-1,0)/sqrt2 v=(1,1,-2)/sqrt6 about the centroid;\n\
             # px = size/2 + s*u, py = size/2 - s*(v + 0.5/sqrt6), s = 0.48*size/(1/sqrt2)\n"
        )
        .as_bytes(),
    );
    out.extend_from_slice(format!("{size} {size}\n255\n").as_bytes());
    out.extend_from_slice(&img);
    Ok(out)
}

/// Writes the raster to disk, attaching the path to any I/O failure.
pub fn render_to_file(spec: &RenderSpec, size: usize, path: &Path) -> Result<()> {
    let bytes = render_image(spec, size)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}
