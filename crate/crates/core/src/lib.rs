//! Localized topological simplification (LTS) of piecewise-linear scalar fields.
//!
//! Given a scalar field on a triangulated domain and either an explicit set of
//! extrema to keep or a persistence threshold, the simplifier reorders vertices
//! inside the hills and valleys of the discarded extrema so that exactly the
//! requested extrema remain, then realizes the new vertex order numerically.
//! Vertices outside the flattened regions keep their values bit-for-bit.
//!
//! The pipeline is
//!
//! 1. [`order::compute_order_field`] turns `f` into an injective vertex order.
//! 2. [`engine::remove_extrema`] discovers one region per chain of discarded
//!    hills (or valleys), simplifies each region locally and splices the local
//!    orders back into the global order.
//! 3. [`order::realize_numeric`] flattens the reordered regions numerically.
//!
//! [`engine::simplify_field`] and [`persistence::persistence_simplify`] wrap the
//! whole pipeline for constraint-driven and threshold-driven use respectively.

mod clock;
pub mod collections;
pub mod criticality;
pub mod engine;
mod error;
pub mod io;
pub mod mesh;
pub mod oracle;
pub mod order;
pub mod persistence;

pub use error::{Error, Result};
pub use mesh::Triangulation;
pub use order::{OrderField, ScalarField, ZetaPolicy};
