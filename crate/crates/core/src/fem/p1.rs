use std::f64::consts::PI;

use serde::Serialize;

use super::sparse::{conjugate_gradient, CgOptions, CsrMatrix};
use crate::branch_cut::SingularityConfig;
use crate::error::{CompatibilityError, ConfigError, Error, MeshError, SolverError};
use crate::mesh::{CurvatureData, FrameAtlas, TriMesh, Vec2, Vec3, VertexKind};

/// Piecewise-linear field with one value per vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarFieldP1 {
    pub values: Vec<f64>,
}

impl ScalarFieldP1 {
    pub fn zeros(n: usize) -> Self {
        ScalarFieldP1 { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max - min` over all vertices.
    pub fn spread(&self) -> f64 {
        let (lo, hi) =
            self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }

    pub fn exp(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.exp()).collect()
    }
}

/// Symmetric matrix with an optional right-hand side and pin.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub pin: Option<(usize, f64)>,
}

/// Gradient of the barycentric coordinates of triangle `t` in 3-space.
pub(crate) fn barycentric_gradients(mesh: &TriMesh, t: usize) -> [Vec3; 3] {
    let tri = mesh.triangles()[t];
    let p = tri.map(|v| mesh.position(v));
    let n2 = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let area2 = n2.norm();
    let n = n2 / area2;
    [0, 1, 2].map(|k| n.cross(&(p[(k + 2) % 3] - p[(k + 1) % 3])) / area2)
}

/// Same as [`barycentric_gradients`] for a triangle given in planar coordinates.
pub fn barycentric_gradients_2d(p: &[Vec2; 3]) -> [Vec2; 3] {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let area2 = e1.x * e2.y - e1.y * e2.x;
    [0, 1, 2].map(|k| {
        let d = p[(k + 2) % 3] - p[(k + 1) % 3];
        Vec2::new(-d.y, d.x) / area2
    })
}

/// Piecewise-linear stiffness matrix `K_ij = int grad phi_i . grad phi_j`.
pub fn assemble_cotan_laplacian(mesh: &TriMesh) -> Result<SparseSystem, MeshError> {
    crate::mesh::check_nondegenerate(mesh)?;
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for tri in mesh.triangles() {
        let p = tri.map(|v| mesh.position(v));
        for k in 0..3 {
            // Edge (i, j) opposite corner k gets half the cotangent at k.
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let a = p[i] - p[k];
            let b = p[j] - p[k];
            let w = 0.5 * a.dot(&b) / a.cross(&b).norm();
            triplets.push((tri[i], tri[j], -w));
            triplets.push((tri[j], tri[i], -w));
            triplets.push((tri[i], tri[i], w));
            triplets.push((tri[j], tri[j], w));
        }
    }
    let n = mesh.num_vertices();
    Ok(SparseSystem { matrix: CsrMatrix::from_triplets(n, &triplets), rhs: vec![0.0; n], pin: None })
}

/// Nodal point loads `2 pi k / 4` at the singular vertices.
pub fn dirac_load(mesh: &TriMesh, sing: &SingularityConfig) -> Result<Vec<f64>, ConfigError> {
    let mut load = vec![0.0; mesh.num_vertices()];
    let mut seen = vec![false; mesh.num_vertices()];
    for s in sing.entries() {
        if s.vertex >= load.len() {
            return Err(ConfigError::AnchorOutOfRange { vertex: s.vertex });
        }
        if std::mem::replace(&mut seen[s.vertex], true) {
            return Err(ConfigError::DuplicateAnchor { vertex: s.vertex });
        }
        load[s.vertex] = 2.0 * PI * s.index as f64 / 4.0;
    }
    Ok(load)
}

/// Minus the angle defect inside, minus the turning angle on the boundary.
pub fn curvature_neumann_load(curv: &CurvatureData) -> Vec<f64> {
    curv.vertex_gaussian.iter().zip(&curv.boundary_turning).map(|(k, t)| -(k + t)).collect()
}

/// Corners act as boundary singularities: `2 pi m / 4` for a corner turning
/// by `m` quarter turns, zero elsewhere.
pub fn corner_load(mesh: &TriMesh) -> Vec<f64> {
    (0..mesh.num_vertices())
        .map(|v| match mesh.vertex_kind(v) {
            VertexKind::Corner(m) => 2.0 * PI * m as f64 / 4.0,
            _ => 0.0,
        })
        .collect()
}

pub fn default_compat_tol(rhs: &[f64]) -> f64 {
    1e-8 * rhs.iter().map(|v| v.abs()).sum::<f64>()
}

/// Result of a pinned solve with convergence data.
#[derive(Debug, Clone)]
pub struct PinnedSolution {
    pub field: ScalarFieldP1,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// `||A x - rhs||` on the free rows, relative to the reduced right-hand side.
    pub residual: f64,
}

/// Solves `A x = rhs` with `x[pin] = 0` after checking that `rhs` is
/// orthogonal to constants.
pub fn solve_pinned(
    system: &SparseSystem,
    rhs: &[f64],
    pin: usize,
    compat_tol: Option<f64>,
    opts: &CgOptions,
) -> Result<PinnedSolution, Error> {
    let n = system.matrix.dim();
    if pin >= n {
        return Err(SolverError::InvalidPin { pin, size: n }.into());
    }
    let sum: f64 = rhs.iter().sum();
    let tolerance = compat_tol.unwrap_or_else(|| default_compat_tol(rhs));
    if !(sum.abs() <= tolerance) {
        return Err(CompatibilityError { sum, tolerance }.into());
    }
    let mut fixed = vec![false; n];
    fixed[pin] = true;
    let out = conjugate_gradient(&system.matrix, rhs, &vec![0.0; n], &fixed, opts)?;
    let residual = *out.history.last().unwrap_or(&0.0);
    Ok(PinnedSolution {
        field: ScalarFieldP1 { values: out.x },
        iterations: out.iterations,
        history: out.history,
        residual,
    })
}

/// Exact gradient of the linear interpolant on each triangle, in 3-space.
pub fn p1_gradient(mesh: &TriMesh, field: &ScalarFieldP1) -> Vec<Vec3> {
    (0..mesh.num_triangles())
        .map(|t| {
            let g = barycentric_gradients(mesh, t);
            let tri = mesh.triangles()[t];
            (0..3).map(|k| g[k] * field.values[tri[k]]).sum()
        })
        .collect()
}

/// Per-triangle gradient expressed in the atlas basis of each triangle.
pub fn p1_gradient_local(mesh: &TriMesh, atlas: &FrameAtlas, field: &ScalarFieldP1) -> Vec<Vec2> {
    p1_gradient(mesh, field).iter().enumerate().map(|(t, g)| atlas.frame(t).to_local(g)).collect()
}

/// Area-weighted L2 norm of a per-triangle vector field.
pub fn l2_norm_per_triangle(mesh: &TriMesh, v: &[Vec2]) -> f64 {
    v.iter().enumerate().map(|(t, g)| mesh.triangle_area(t) * g.norm_squared()).sum::<f64>().sqrt()
}
