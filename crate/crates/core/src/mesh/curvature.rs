use std::f64::consts::PI;

use super::{angle_between, TriMesh};
use crate::error::MeshError;

/// Discrete curvature measures.
///
/// `vertex_gaussian` holds the angle defect at interior vertices and zero on
/// the boundary; `boundary_turning` holds the exterior turning angle at
/// boundary vertices and zero inside. Together they satisfy discrete
/// Gauss-Bonnet exactly up to rounding.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub vertex_gaussian: Vec<f64>,
    pub boundary_turning: Vec<f64>,
    pub edge_lengths: Vec<f64>,
}

impl CurvatureData {
    pub fn total(&self) -> f64 {
        self.vertex_gaussian.iter().sum::<f64>() + self.boundary_turning.iter().sum::<f64>()
    }

    /// Angle defect or turning angle, whichever applies to `v`.
    pub fn at(&self, v: usize) -> f64 {
        self.vertex_gaussian[v] + self.boundary_turning[v]
    }
}

/// The three corner angles of triangle `t`.
pub fn triangle_angles(mesh: &TriMesh, t: usize) -> [f64; 3] {
    let tri = mesh.triangles()[t];
    let p = |i: usize| mesh.position(tri[i % 3]);
    let mut out = [0.0; 3];
    for (i, a) in out.iter_mut().enumerate() {
        *a = angle_between(&(p(i + 1) - p(i)), &(p(i + 2) - p(i)));
    }
    out
}

pub(crate) fn check_nondegenerate(mesh: &TriMesh) -> Result<(), MeshError> {
    let scale = mesh.mean_edge_length();
    let tol = 1e-14 * scale * scale;
    for t in 0..mesh.num_triangles() {
        let area = mesh.triangle_area(t);
        if !(area > tol) {
            return Err(MeshError::DegenerateTriangle { triangle: t, area });
        }
    }
    Ok(())
}

pub fn compute_curvature(mesh: &TriMesh) -> Result<CurvatureData, MeshError> {
    check_nondegenerate(mesh)?;
    let nv = mesh.num_vertices();
    let mut angle_sum = vec![0.0; nv];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let angles = triangle_angles(mesh, t);
        for i in 0..3 {
            angle_sum[tri[i]] += angles[i];
        }
    }
    let mut vertex_gaussian = vec![0.0; nv];
    let mut boundary_turning = vec![0.0; nv];
    for v in 0..nv {
        if mesh.is_boundary_vertex(v) {
            boundary_turning[v] = PI - angle_sum[v];
        } else {
            vertex_gaussian[v] = 2.0 * PI - angle_sum[v];
        }
    }
    let edge_lengths = (0..mesh.num_edges()).map(|e| mesh.edge_length(e)).collect();
    Ok(CurvatureData { vertex_gaussian, boundary_turning, edge_lengths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, Vec3};

    #[test]
    fn flat_interior_vertex_has_zero_defect() {
        let m = generate::square(4, 1.0);
        let c = compute_curvature(&m).unwrap();
        for v in 0..m.num_vertices() {
            if !m.is_boundary_vertex(v) {
                assert!(c.vertex_gaussian[v].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cube_corner_defect_is_quarter_turn_pair() {
        // Closed cube surface; every corner meets three right angles.
        let m = generate::cube_surface();
        let c = compute_curvature(&m).unwrap();
        let corner = m.nearest_vertex(&Vec3::new(1.0, 1.0, 1.0)).0;
        assert!((c.vertex_gaussian[corner] - PI / 2.0).abs() < 1e-12);
        assert!((c.total() - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn degenerate_triangle_is_named() {
        let m = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), 2.0 * Vec3::x()], vec![[0, 1, 2]]).unwrap();
        assert_eq!(compute_curvature(&m).unwrap_err(), MeshError::DegenerateTriangle { triangle: 0, area: 0.0 });
    }
}
