//! Discrete minimal surfaces for the Björling problem.
//!
//! The pipeline turns a curve with a normal field into Weierstrass Cauchy
//! data, evolves a cross-ratio preserving map on a rectangular lattice and
//! integrates the discrete Weierstrass representation into a quad mesh:
//!
//! ```text
//! BjorlingData -> ReparamCurve -> LatticeGrid -> ZigzagData -> CRMapField -> DiscreteSurface
//! ```
//!
//! [`analysis`] compares the results with smooth reference surfaces and
//! fits convergence orders under mesh refinement.

// `!(x > 0.0)` is used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod analytic;
pub mod aux_evolution;
pub mod bjorling;
pub mod cr_evolve;
pub mod error;
pub mod io;
pub mod lattice;
pub mod moebius;
pub mod quadrature;
pub mod surface;
pub mod zigzag;

pub use error::{Error, Result};
pub use moebius::{C64, UnitVector3};
