//! Integrable cross-fields on triangulated surfaces from prescribed
//! singularity configurations.
//!
//! The isotropic path solves a Poisson problem for the log-scale `H`, fits
//! the rotation field `theta` to `n x grad H` on a cut-open mesh, and reports
//! boundary alignment and cut holonomy. The anisotropic path alternates
//! between `(H1, H2)` and `theta` to drive the integrability error down.

// Index loops mirror the mesh formulas; negated float comparisons reject NaN on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod anisotropic;
pub mod branch_cut;
pub mod config;
pub mod error;
pub mod fem;
pub mod isotropic;
pub mod mesh;
pub mod pipeline;
pub mod report;
pub mod streamline;
pub mod vtk;

pub use error::{Error, Result};
