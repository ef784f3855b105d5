//! Points of the real projective plane with a canonical representative.
//!
//! A point is stored as a unit vector whose first coordinate of magnitude
//! above a fixed threshold is positive, so equal points compare bitwise-equal
//! up to float rounding and serialized output is reproducible.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Threshold below which a coordinate is treated as zero when picking the
/// sign-defining coordinate. Well above accumulated rounding, well below any
/// geometrically meaningful coordinate in this toolkit.
const SIGN_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPoint {
    v: [f64; 3],
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.v.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        // Round-trips through the constructor so the canonical-representative
        // invariant survives hand-edited input.
        let v = <[f64; 3]>::deserialize(deserializer)?;
        ProjPoint::new(v).map_err(serde::de::Error::custom)
    }
}

impl ProjPoint {
    /// Canonicalizes a representative: unit norm, first coordinate with
    /// |x| > 1e-12 made positive (falling back to the first nonzero one).
    pub fn new(v: [f64; 3]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("projective point with non-finite coordinate".into()));
        }
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-300 {
            return Err(Error::Input("zero vector does not define a projective point".into()));
        }
        let mut u = [v[0] / norm, v[1] / norm, v[2] / norm];
        let lead = u
            .iter()
            .find(|x| x.abs() > SIGN_EPS)
            .or_else(|| u.iter().find(|x| **x != 0.0))
            .copied()
            .unwrap_or(1.0);
        if lead < 0.0 {
            for x in &mut u {
                *x = -*x;
            }
        }
        Ok(ProjPoint { v: u })
    }

    /// The standard basis point [e_i], i ∈ {1,2,3}.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i - 1] = 1.0;
        ProjPoint { v }
    }

    pub fn coords(&self) -> [f64; 3] {
        self.v
    }

    pub fn dot(&self, other: &ProjPoint) -> f64 {
        self.v[0] * other.v[0] + self.v[1] * other.v[1] + self.v[2] * other.v[2]
    }

    /// Coordinates rescaled to sum 1, for points inside the positive cone
    /// (barycentric coordinates on the standard simplex).
    pub fn barycentric(&self) -> Result<[f64; 3]> {
        let s = self.v[0] + self.v[1] + self.v[2];
        if s.abs() < 1e-300 {
            return Err(Error::Domain(
                "point lies on the coordinate-sum-zero plane; no barycentric form".into(),
            ));
        }
        Ok([self.v[0] / s, self.v[1] / s, self.v[2] / s])
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Sine metric on the projective plane: d([x],[y]) = ‖x∧y‖/(‖x‖‖y‖), which
/// for the stored unit representatives is just ‖x × y‖, clamped to [0,1].
pub fn proj_distance(p: &ProjPoint, q: &ProjPoint) -> f64 {
    norm3(cross(p.v, q.v)).clamp(0.0, 1.0)
}

/// Distance from a point to the projective line with the given unit normal:
/// the minimum of the sine metric over the line, which equals |⟨x, n⟩|.
pub fn proj_point_to_line(p: &ProjPoint, normal: &ProjPoint) -> f64 {
    p.dot(normal).abs().clamp(0.0, 1.0)
}

/// Distance between two projective lines given by unit normals; by duality
/// this is the sine metric between the normals.
pub fn proj_line_distance(n1: &ProjPoint, n2: &ProjPoint) -> f64 {
    proj_distance(n1, n2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sign_is_stable() {
        let p = ProjPoint::new([-2.0, 1.0, 0.0]).unwrap();
        assert!(p.coords()[0] > 0.0);
        let q = ProjPoint::new([4.0, -2.0, 0.0]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn basis_points_are_orthogonal() {
        let e1 = ProjPoint::basis(1);
        let e2 = ProjPoint::basis(2);
        assert_eq!(proj_distance(&e1, &e2), 1.0);
        assert_eq!(proj_distance(&e1, &e1), 0.0);
    }

    #[test]
    fn midpoint_distance_matches_closed_form() {
        // d([e₁], [e₁+e₂]) = sin(π/4) = 1/√2.
        let e1 = ProjPoint::basis(1);
        let m = ProjPoint::new([1.0, 1.0, 0.0]).unwrap();
        let d = proj_distance(&e1, &m);
        assert!((d - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_to_line_is_sine_of_complement() {
        // Point [e₃], line {z = 0} with normal [e₃]: distance 1.
        let e3 = ProjPoint::basis(3);
        assert_eq!(proj_point_to_line(&e3, &e3), 1.0);
        // Point on the line: distance 0.
        let p = ProjPoint::new([3.0, -1.0, 0.0]).unwrap();
        assert!(proj_point_to_line(&p, &e3) < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(ProjPoint::new([0.0, 0.0, 0.0]).is_err());
    }
}
