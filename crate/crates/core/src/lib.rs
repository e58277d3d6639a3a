//! Bellman functions on planar strip domains `cl(Ω₀) \ Ω₁` between two strictly
//! convex curves.
//!
//! The crate computes the martingale Bellman function by value iteration over
//! chord splits, verifies local concavity of the result, converts between class
//! functions and martingales, and carries the supporting machinery: class
//! membership (BMO, Muckenhoupt-type), monotone rearrangement, the projective
//! transform, strictly concave perturbations and cheese-domain martingales.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cheese;
pub mod classes;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod io;
pub mod martingale;
pub mod solver;
pub mod transforms;

pub use boundary::BoundaryFn;
pub use cheese::CheeseDomain;
pub use curve::{Curve, Tabulated};
pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, Chord, Point, PointClass, SegmentCheck, StripDomain, ValidationReport};
pub use io::DomainSpec;
