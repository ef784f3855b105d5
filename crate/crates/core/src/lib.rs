//! Numerical toolkit for dimension-theoretic quantities of the Rauzy gasket
//! and the semigroup of nonnegative matrices that generates it.
//!
//! The semigroup is generated by the three unipotent matrices
//! A₁ = I + E₁, A₂ = I + E₂, A₃ = I + E₃ (row i of Eᵢ is 1 off the
//! diagonal), acting projectively on the standard simplex. The crate
//! provides:
//!
//! - exact-first 3×3 linear algebra: products, singular values, Cartan
//!   projections, and attracting/repelling frames ([`linalg`]);
//! - word enumeration over the alphabet {1,2,3} with pruning filters
//!   ([`words`]);
//! - singular-value Poincaré series, pressure slopes, and the critical
//!   exponent of the affinity series ([`poincare`]);
//! - gasket geometry: projective triangles, adaptive covers, box-counting
//!   dimension, coding, and rendering ([`gasket`]);
//! - the two-generator subsemigroup on the simplex edge: Stern-Brocot
//!   arc tilings and the divergence evidence behind the 3/2 lower bound
//!   ([`edge`]);
//! - random matrix products: Lyapunov spectra, random-walk entropy,
//!   Lyapunov dimension, and a variational search over candidate measures
//!   ([`walk`]);
//! - ping-pong (Schottky) certificates for finite generating sets
//!   ([`schottky`]);
//! - a self-test battery of hand-checkable identities ([`selftest`]).
//!
//! Determinism: every public computation is deterministic for a fixed seed
//! and independent of thread count; parallel reductions merge shard results
//! in a fixed order.

pub mod edge;
pub mod error;
pub mod kahan;
mod fit;
pub mod gasket;
pub mod linalg;
pub mod poincare;
pub mod schottky;
pub mod selftest;
mod simplex;
pub mod walk;
pub mod words;

pub use error::{Error, Result};
