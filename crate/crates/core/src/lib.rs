//! Spherical metrics with three conic singularities.
//!
//! The crate decides exactly whether a conformal metric of curvature one with
//! cone angles `2πθ1, 2πθ2, 2πθ3` at `0, 1, ∞` exists, and checks the answer
//! numerically: hypergeometric monodromy, the developing map and its metric
//! density, Gauss–Bonnet area, rational developing maps for integer angles and
//! circular-arc triangles.

pub mod angles;
pub mod hypergeom;
pub mod membrane;
pub mod metric;
pub mod monodromy;
pub mod rational;
pub mod rational_maps;

pub use angles::{decide, AngleTriple, CanonicalTriple, ExistenceVerdict, Rule};
pub use rational::Rational;
