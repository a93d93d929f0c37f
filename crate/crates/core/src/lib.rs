//! Pointwise verification engine for torsion-free surface connections with
//! skew-symmetric Ricci tensor and the neutral-signature Walker
//! four-manifolds obtained from them as Riemann extensions of the cotangent
//! bundle.
//!
//! The crate builds the relevant connections in explicit charts, evaluates
//! every operator through truncated Taylor jets (so derivatives are exact up
//! to rounding), and checks the local identities the theory asserts at
//! seeded random chart points.

// tensor formulas use explicit index loops; the loop variables mirror the
// index notation of the identities being checked
#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod chart;
pub mod error;
pub mod expr;
pub mod jets;
pub mod moduli_special;
pub mod randfields;
pub mod petrov;
pub mod riemann_extension;
pub mod surface_rsts;
pub mod tensorfield;

pub use chart::Chart;
pub use error::{Error, Result};
pub use expr::Ex;
pub use jets::{jet_lift, jet_partial, Jet};
pub use tensorfield::{Connection, TensorField};
