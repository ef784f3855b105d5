//! Exact-first linear algebra for the 3×3 Rauzy semigroup: matrices,
//! singular values / Cartan projections, projective geometry, and
//! attracting/repelling frames.

mod frames;
mod mat3;
mod proj;
mod svd;

pub use frames::{cartan_frames, CartanFrames, DEFAULT_GAP_TOL};
pub use mat3::{generator, generator_transpose, multiply, Mat3, ScaledMat3};
pub use proj::{
    proj_distance, proj_line_distance, proj_point_to_line, ProjPoint,
};
pub use svd::{cartan, singular_values, CartanVec};
