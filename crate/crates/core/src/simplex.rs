//! The standard 2-simplex chart: column images and diameters of the
//! projective triangles Δ_γ = γΔ.
//!
//! The simplex Δ = {x ≥ 0, x₁+x₂+x₃ = 1} is the chart in which diameters,
//! areas and covers are measured (Euclidean metric of the ambient plane
//! x₁+x₂+x₃ = 1). A nonnegative matrix maps Δ into itself projectively; the
//! image triangle has vertices at the sum-normalized columns.

use crate::linalg::Mat3;

/// Sum-normalized columns of the matrix: the vertices of Δ_γ in the simplex
/// chart, in column order. Scale factors cancel, so this is exact for both
/// representations.
pub(crate) fn simplex_vertices(g: &Mat3) -> [[f64; 3]; 3] {
    let (m, _) = g.f64_parts();
    let mut v = [[0.0; 3]; 3];
    for j in 0..3 {
        let s = m[0][j] + m[1][j] + m[2][j];
        for i in 0..3 {
            v[j][i] = m[i][j] / s;
        }
    }
    v
}

pub(crate) fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Euclidean diameter of Δ_γ in the simplex chart: the triangle is the
/// convex hull of its vertices, so the diameter is the largest pairwise
/// vertex distance.
pub(crate) fn simplex_diameter(g: &Mat3) -> f64 {
    let v = simplex_vertices(g);
    dist3(v[0], v[1]).max(dist3(v[0], v[2])).max(dist3(v[1], v[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{generator, Mat3};

    #[test]
    fn base_simplex_diameter_is_sqrt2() {
        let d = simplex_diameter(&Mat3::identity());
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn generator_images_have_diameter_sqrt2_over_2() {
        // A₁Δ has vertices e₁, (1,1,0)/2, (1,0,1)/2, an equilateral triangle
        // of side √2/2; same for A₂, A₃ by symmetry.
        for i in 1..=3 {
            let d = simplex_diameter(&generator(i).unwrap());
            assert!((d - 0.5_f64 * 2.0_f64.sqrt()).abs() < 1e-15, "generator {i}: {d}");
        }
    }
}
