//! Crouzeix-Raviart angle fields on the cut-open mesh.
//!
//! Every halfedge `3 t + i` is a slot holding the value of the field at the
//! midpoint of local edge `i`, measured in triangle `t`'s frame. Slots are
//! tied to unknowns with an additive offset so the value seen from the
//! second triangle of an edge already includes the connection angle (and,
//! for fixed jumps, the jump).

use serde::Serialize;

use super::p1::{barycentric_gradients_2d, SparseSystem};
use super::sparse::{conjugate_gradient, CgOptions, CsrMatrix};
use crate::error::{CutError, SolverError};
use crate::mesh::{wrap_angle, FrameAtlas, TriMesh, Vec2};

/// How the two sides of an edge relate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrEdgeRule {
    /// One unknown; continuous up to the connection angle.
    Shared,
    /// Two unknowns; the jump is free. Only meaningful on cut edges.
    FreeJump,
    /// One unknown; the far side differs by the connection plus this jump.
    FixedJump(f64),
    /// Known value on the owning side.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Dof { index: usize, offset: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrSpace {
    slots: Vec<Slot>,
    num_dofs: usize,
}

/// Crouzeix-Raviart field: one value per halfedge slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaFieldCR {
    pub values: Vec<f64>,
}

/// Gradients of the three edge basis functions. Basis `i` is one at the
/// midpoint of local edge `i` (vertices `i`, `i + 1`) and minus one at the
/// opposite vertex.
pub(crate) fn cr_basis_gradients(local: &[Vec2; 3]) -> [Vec2; 3] {
    let g = barycentric_gradients_2d(local);
    [0, 1, 2].map(|i| g[(i + 2) % 3] * -2.0)
}

impl CrSpace {
    pub fn new(mesh: &TriMesh, atlas: &FrameAtlas, rules: &[CrEdgeRule]) -> Self {
        let mut slots = vec![Slot::Fixed(0.0); mesh.num_halfedges()];
        let mut num_dofs = 0;
        let mut fresh = || {
            num_dofs += 1;
            num_dofs - 1
        };
        for e in 0..mesh.num_edges() {
            let [h0, h1] = mesh.edge_halfedges(e);
            let h0 = h0.expect("every edge has an owning halfedge");
            let r = atlas.connection(e);
            match rules[e] {
                CrEdgeRule::Fixed(v) => {
                    slots[h0] = Slot::Fixed(v);
                    if let Some(h1) = h1 {
                        slots[h1] = Slot::Fixed(v + r);
                    }
                }
                CrEdgeRule::Shared => {
                    let d = fresh();
                    slots[h0] = Slot::Dof { index: d, offset: 0.0 };
                    if let Some(h1) = h1 {
                        slots[h1] = Slot::Dof { index: d, offset: r };
                    }
                }
                CrEdgeRule::FixedJump(j) => {
                    let d = fresh();
                    slots[h0] = Slot::Dof { index: d, offset: 0.0 };
                    if let Some(h1) = h1 {
                        slots[h1] = Slot::Dof { index: d, offset: r + j };
                    }
                }
                CrEdgeRule::FreeJump => {
                    slots[h0] = Slot::Dof { index: fresh(), offset: 0.0 };
                    if let Some(h1) = h1 {
                        slots[h1] = Slot::Dof { index: fresh(), offset: r };
                    }
                }
            }
        }
        CrSpace { slots, num_dofs }
    }

    /// Shared unknowns off the cut, free jumps on it, and a single pinned
    /// edge, which must not lie on the cut.
    pub fn free_jumps(mesh: &TriMesh, atlas: &FrameAtlas, pin: (usize, f64)) -> Result<Self, CutError> {
        if atlas.is_cut(pin.0) {
            return Err(CutError::PinOnCut(pin.0));
        }
        let rules: Vec<CrEdgeRule> = (0..mesh.num_edges())
            .map(|e| {
                if e == pin.0 {
                    CrEdgeRule::Fixed(pin.1)
                } else if atlas.is_cut(e) {
                    CrEdgeRule::FreeJump
                } else {
                    CrEdgeRule::Shared
                }
            })
            .collect();
        Ok(CrSpace::new(mesh, atlas, &rules))
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn field(&self, x: &[f64]) -> ThetaFieldCR {
        let values = self
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Dof { index, offset } => x[index] + offset,
                Slot::Fixed(v) => v,
            })
            .collect();
        ThetaFieldCR { values }
    }

    /// Unknowns reproducing `theta` on the owning side of each edge (used as
    /// an initial guess).
    pub fn restrict(&self, theta: &ThetaFieldCR) -> Vec<f64> {
        let mut x = vec![0.0; self.num_dofs];
        for (h, s) in self.slots.iter().enumerate().rev() {
            if let Slot::Dof { index, offset } = *s {
                x[index] = theta.values[h] - offset;
            }
        }
        x
    }

    /// Normal equations of `min sum_T area(T) |grad theta - target_T|^2`.
    pub fn assemble_fit(&self, mesh: &TriMesh, atlas: &FrameAtlas, target: &[Vec2]) -> SparseSystem {
        let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
        let mut rhs = vec![0.0; self.num_dofs];
        for t in 0..mesh.num_triangles() {
            let b = cr_basis_gradients(atlas.local_coords(t));
            let area = mesh.triangle_area(t);
            let slots = [0, 1, 2].map(|i| self.slots[3 * t + i]);
            // Known part of the gradient: offsets and fixed values.
            let mut known = Vec2::zeros();
            for i in 0..3 {
                known += b[i]
                    * match slots[i] {
                        Slot::Dof { offset, .. } => offset,
                        Slot::Fixed(v) => v,
                    };
            }
            let residual_target = target[t] - known;
            for i in 0..3 {
                let Slot::Dof { index: di, .. } = slots[i] else { continue };
                rhs[di] += area * b[i].dot(&residual_target);
                for j in 0..3 {
                    if let Slot::Dof { index: dj, .. } = slots[j] {
                        triplets.push((di, dj, area * b[i].dot(&b[j])));
                    }
                }
            }
        }
        SparseSystem { matrix: CsrMatrix::from_triplets(self.num_dofs, &triplets), rhs, pin: None }
    }

    pub fn solve_fit(
        &self,
        mesh: &TriMesh,
        atlas: &FrameAtlas,
        target: &[Vec2],
        x0: Option<&[f64]>,
        opts: &CgOptions,
    ) -> Result<(ThetaFieldCR, usize), SolverError> {
        let sys = self.assemble_fit(mesh, atlas, target);
        let zeros = vec![0.0; self.num_dofs];
        let out = conjugate_gradient(&sys.matrix, &sys.rhs, x0.unwrap_or(&zeros), &[], opts)?;
        Ok((self.field(&out.x), out.iterations))
    }
}

/// Normal equations for the gradient fit with free jumps across the cut and
/// one pinned edge, paired with the space that maps unknowns to slots.
pub fn assemble_cr_gradient_fit(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    target: &[Vec2],
    pin: (usize, f64),
) -> Result<(CrSpace, SparseSystem), CutError> {
    let space = CrSpace::free_jumps(mesh, atlas, pin)?;
    let sys = space.assemble_fit(mesh, atlas, target);
    Ok((space, sys))
}

impl ThetaFieldCR {
    pub fn slot(&self, he: usize) -> f64 {
        self.values[he]
    }

    pub fn triangle_mean(&self, t: usize) -> f64 {
        (self.values[3 * t] + self.values[3 * t + 1] + self.values[3 * t + 2]) / 3.0
    }

    pub fn triangle_means(&self) -> Vec<f64> {
        (0..self.values.len() / 3).map(|t| self.triangle_mean(t)).collect()
    }

    /// Constant gradient on triangle `t`, in its frame.
    pub fn gradient(&self, atlas: &FrameAtlas, t: usize) -> Vec2 {
        let b = cr_basis_gradients(atlas.local_coords(t));
        (0..3).map(|i| b[i] * self.values[3 * t + i]).sum()
    }

    pub fn gradients(&self, atlas: &FrameAtlas) -> Vec<Vec2> {
        (0..self.values.len() / 3).map(|t| self.gradient(atlas, t)).collect()
    }

    /// `theta` on the far side minus `theta` carried over from the owning
    /// side. Zero off the cut for conforming data; `None` on the boundary.
    pub fn jump(&self, mesh: &TriMesh, atlas: &FrameAtlas, e: usize) -> Option<f64> {
        let [h0, h1] = mesh.edge_halfedges(e);
        let (h0, h1) = (h0?, h1?);
        Some(self.values[h1] - self.values[h0] - atlas.connection(e))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ThetaFieldCR {
        ThetaFieldCR { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Largest angular distance modulo `pi / 2` between two fields, slot by slot.
    pub fn max_cross_distance(&self, other: &ThetaFieldCR) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d = wrap_angle(4.0 * (a - b)) / 4.0;
                d.abs()
            })
            .fold(0.0, f64::max)
    }
}
