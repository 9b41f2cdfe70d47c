//! Finite elements on triangle meshes: P1 Poisson solves for scale fields and
//! Crouzeix-Raviart gradient fits for angle fields.

mod cr;
mod p1;
mod sparse;

pub use cr::{assemble_cr_gradient_fit, CrEdgeRule, CrSpace, Slot, ThetaFieldCR};
pub use p1::barycentric_gradients_2d;
pub use p1::{
    assemble_cotan_laplacian, corner_load, curvature_neumann_load, default_compat_tol, dirac_load,
    l2_norm_per_triangle, p1_gradient, p1_gradient_local, solve_pinned, PinnedSolution, ScalarFieldP1, SparseSystem,
};
pub use sparse::{conjugate_gradient, CgOptions, CgOutcome, CsrMatrix};
