use std::collections::VecDeque;
use std::f64::consts::PI;

use super::curvature::triangle_angles;
use super::{prev_he, wrap_angle, TriMesh, Vec2, Vec3};
use crate::branch_cut::BranchCut;
use crate::error::CutError;

/// Orthonormal right-handed basis of a triangle plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleFrame {
    pub u: Vec3,
    pub v: Vec3,
    pub n: Vec3,
}

impl TriangleFrame {
    pub fn to_local(&self, w: &Vec3) -> Vec2 {
        Vec2::new(w.dot(&self.u), w.dot(&self.v))
    }

    pub fn to_world(&self, w: &Vec2) -> Vec3 {
        self.u * w.x + self.v * w.y
    }

    /// Direction angle of an in-plane vector, measured from `u`.
    pub fn angle_of(&self, w: &Vec3) -> f64 {
        w.dot(&self.v).atan2(w.dot(&self.u))
    }

    pub fn direction(&self, angle: f64) -> Vec3 {
        self.u * angle.cos() + self.v * angle.sin()
    }
}

/// Per-triangle tangent bases propagated by hinge flattening over the dual
/// spanning forest of non-cut edges.
///
/// `connection[e]` is the angle added to a direction expressed in the frame
/// of the triangle owning the oriented halfedge of `e` when it is carried
/// into the opposite triangle. It vanishes on tree edges up to whole turns; on
/// cut edges it is the recorded frame jump.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAtlas {
    frames: Vec<TriangleFrame>,
    local_coords: Vec<[Vec2; 3]>,
    connection: Vec<f64>,
    is_cut: Vec<bool>,
    seeds: Vec<usize>,
}

fn transport_across(u: &Vec3, edge_dir: &Vec3, n_from: &Vec3, n_to: &Vec3) -> Vec3 {
    let side_from = n_from.cross(edge_dir);
    let side_to = n_to.cross(edge_dir);
    edge_dir * u.dot(edge_dir) + side_to * u.dot(&side_from)
}

pub fn build_frame_atlas(mesh: &TriMesh, cut: &BranchCut) -> Result<FrameAtlas, CutError> {
    let nt = mesh.num_triangles();
    let is_cut = cut.edge_mask(mesh.num_edges());
    let normals: Vec<Vec3> = (0..nt).map(|t| mesh.triangle_normal_unnormalized(t).normalize()).collect();

    let mut frames: Vec<Option<TriangleFrame>> = vec![None; nt];
    let mut seeds = Vec::new();
    for seed in 0..nt {
        if frames[seed].is_some() {
            continue;
        }
        seeds.push(seed);
        let tri = mesh.triangles()[seed];
        let n = normals[seed];
        let e0 = mesh.position(tri[1]) - mesh.position(tri[0]);
        let u = (e0 - n * e0.dot(&n)).normalize();
        frames[seed] = Some(TriangleFrame { u, v: n.cross(&u), n });
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let f = frames[t].expect("queued triangles have frames");
            for i in 0..3 {
                let he = 3 * t + i;
                let Some(tw) = mesh.he_twin(he) else { continue };
                let e = mesh.he_edge(he);
                let nb = tw / 3;
                if is_cut[e] || frames[nb].is_some() {
                    continue;
                }
                let dir = (mesh.position(mesh.he_head(he)) - mesh.position(mesh.he_tail(he))).normalize();
                let n2 = normals[nb];
                let mut u2 = transport_across(&f.u, &dir, &f.n, &n2);
                u2 = (u2 - n2 * u2.dot(&n2)).normalize();
                frames[nb] = Some(TriangleFrame { u: u2, v: n2.cross(&u2), n: n2 });
                queue.push_back(nb);
            }
        }
    }
    let mesh_components = mesh.num_components();
    if seeds.len() != mesh_components {
        return Err(CutError::DisconnectsDual { components: seeds.len() });
    }
    let frames: Vec<TriangleFrame> = frames.into_iter().map(|f| f.expect("all triangles reached")).collect();

    let local_coords = (0..nt)
        .map(|t| {
            let tri = mesh.triangles()[t];
            let o = mesh.position(tri[0]);
            let f = &frames[t];
            [Vec2::zeros(), f.to_local(&(mesh.position(tri[1]) - o)), f.to_local(&(mesh.position(tri[2]) - o))]
        })
        .collect();

    let connection = (0..mesh.num_edges())
        .map(|e| {
            let (t0, t1) = mesh.edge_triangles(e);
            match t1 {
                None => 0.0,
                Some(t1) => {
                    let [a, b] = mesh.edge_vertices(e);
                    let dir = mesh.position(b) - mesh.position(a);
                    wrap_angle(frames[t1].angle_of(&dir) - frames[t0].angle_of(&dir))
                }
            }
        })
        .collect();

    let mut atlas = FrameAtlas { frames, local_coords, connection, is_cut, seeds };
    atlas.lift_connection(mesh);
    Ok(atlas)
}

impl FrameAtlas {
    /// Shifts connection angles by multiples of `2 pi` so the holonomy around
    /// every interior vertex equals its angle defect exactly, not just modulo
    /// `2 pi`. Wrapped values can be off by a full turn on edges closing long
    /// dual loops. Mismatches are pushed along a spanning tree towards a root
    /// that carries no constraint: a boundary vertex, or a cut vertex on a
    /// closed component, where the Euler characteristic has to go.
    fn lift_connection(&mut self, mesh: &TriMesh) {
        let nv = mesh.num_vertices();
        let mut defect = vec![2.0 * PI; nv];
        for t in 0..mesh.num_triangles() {
            for (i, a) in triangle_angles(mesh, t).iter().enumerate() {
                defect[mesh.triangles()[t][i]] -= a;
            }
        }
        let on_cut = |v: usize| mesh.vertex_fan(v).iter().any(|&he| self.is_cut[mesh.he_edge(he)]);
        let mut roots: Vec<usize> = (0..nv).filter(|&v| mesh.is_boundary_vertex(v)).collect();
        roots.extend((0..nv).filter(|&v| !mesh.is_boundary_vertex(v) && on_cut(v)));
        roots.extend(0..nv);

        // Breadth-first order over interior edges with the parent edge of each vertex.
        let mut parent: Vec<Option<usize>> = vec![None; nv];
        let mut seen = vec![false; nv];
        let mut order = Vec::with_capacity(nv);
        for r in roots {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            let mut queue = VecDeque::from([r]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for he in mesh.vertex_fan(v) {
                    let e = mesh.he_edge(he);
                    let w = mesh.he_head(he);
                    if !mesh.is_boundary_edge(e) && !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        for &v in order.iter().rev() {
            let Some(e) = parent[v] else { continue };
            if mesh.is_boundary_vertex(v) {
                continue;
            }
            let turns = ((self.vertex_holonomy(mesh, v) - defect[v]) / (2.0 * PI)).round();
            if turns == 0.0 {
                continue;
            }
            // Sign with which `connection[e]` enters the holonomy at `v`.
            let sign = mesh
                .vertex_fan(v)
                .iter()
                .find(|&&he| mesh.he_edge(prev_he(he)) == e)
                .map(|&he| if mesh.edge_triangles(e).0 == he / 3 { 1.0 } else { -1.0 })
                .expect("parent edge is incident");
            self.connection[e] -= sign * turns * 2.0 * PI;
        }
    }

    pub fn frame(&self, t: usize) -> &TriangleFrame {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[TriangleFrame] {
        &self.frames
    }

    /// Triangle vertices in the triangle's own frame, vertex 0 at the origin.
    pub fn local_coords(&self, t: usize) -> &[Vec2; 3] {
        &self.local_coords[t]
    }

    pub fn connection(&self, e: usize) -> f64 {
        self.connection[e]
    }

    pub fn is_cut(&self, e: usize) -> bool {
        self.is_cut[e]
    }

    pub fn seed_triangles(&self) -> &[usize] {
        &self.seeds
    }

    /// Angle added when carrying a direction across `e` out of triangle `from`.
    pub fn transport(&self, mesh: &TriMesh, e: usize, from: usize) -> f64 {
        let (t0, _) = mesh.edge_triangles(e);
        if from == t0 {
            self.connection[e]
        } else {
            -self.connection[e]
        }
    }

    /// Sum of connection angles walking counter-clockwise around an interior
    /// vertex. Matches the angle defect modulo `2 pi`.
    pub fn vertex_holonomy(&self, mesh: &TriMesh, v: usize) -> f64 {
        mesh.vertex_fan(v)
            .iter()
            .map(|&he| {
                // Crossing from this halfedge's triangle into the next one
                // counter-clockwise, over the edge `prev(he)`.
                let crossing = super::prev_he(he);
                self.transport(mesh, mesh.he_edge(crossing), he / 3)
            })
            .sum()
    }

    /// Direction angle of edge `e` (oriented as stored) in triangle `t`'s frame.
    pub fn edge_angle(&self, mesh: &TriMesh, t: usize, e: usize) -> f64 {
        let [a, b] = mesh.edge_vertices(e);
        self.frames[t].angle_of(&(mesh.position(b) - mesh.position(a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch_cut::{build_branch_cut, Singularity, SingularityConfig};
    use crate::mesh::{compute_curvature, generate, wrap_angle};

    #[test]
    fn planar_mesh_has_zero_connection() {
        let m = generate::square(5, 1.0);
        let atlas = build_frame_atlas(&m, &BranchCut::empty()).unwrap();
        let f0 = *atlas.frame(0);
        for t in 0..m.num_triangles() {
            let f = atlas.frame(t);
            assert!((f.u - f0.u).norm() < 1e-12 && (f.v - f0.v).norm() < 1e-12);
        }
        for e in 0..m.num_edges() {
            assert!(atlas.connection(e).abs() < 1e-12);
        }
    }

    #[test]
    fn frames_are_orthonormal_and_right_handed() {
        let m = generate::icosphere(2);
        let atlas = build_frame_atlas(&m, &BranchCut::empty()).unwrap();
        for t in 0..m.num_triangles() {
            let f = atlas.frame(t);
            assert!((f.u.norm() - 1.0).abs() < 1e-12);
            assert!(f.u.dot(&f.v).abs() < 1e-12);
            assert!((f.u.cross(&f.v) - f.n).norm() < 1e-12);
            assert!(f.n.dot(&m.triangle_normal_unnormalized(t)) > 0.0);
        }
    }

    #[test]
    fn holonomy_matches_angle_defect() {
        let m = generate::icosphere(2);
        let curv = compute_curvature(&m).unwrap();
        let cut = build_branch_cut(&m, &SingularityConfig::default()).unwrap();
        let atlas = build_frame_atlas(&m, &cut).unwrap();
        for v in 0..m.num_vertices() {
            let d = wrap_angle(atlas.vertex_holonomy(&m, v) - curv.vertex_gaussian[v]);
            assert!(d.abs() < 1e-9, "vertex {v}: {d}");
        }
    }

    #[test]
    fn holonomy_is_lifted_exactly() {
        for n in [3, 12] {
            let m = generate::octasphere(n);
            let curv = compute_curvature(&m).unwrap();
            let corners: Vec<Singularity> = [1.0, -1.0]
                .iter()
                .flat_map(|&z| [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].map(|(x, y)| Vec3::new(x, y, z)))
                .map(|c| Singularity { vertex: m.nearest_vertex(&c.normalize()).0, index: 1 })
                .collect();
            let s = SingularityConfig::new(&m, corners).unwrap();
            let cut = build_branch_cut(&m, &s).unwrap();
            let atlas = build_frame_atlas(&m, &cut).unwrap();
            let mut mismatched = 0;
            for v in 0..m.num_vertices() {
                let d = atlas.vertex_holonomy(&m, v) - curv.vertex_gaussian[v];
                if d.abs() > 1e-9 {
                    mismatched += 1;
                    // The root absorbs the full turns of the Euler characteristic.
                    assert!((d.abs() - 4.0 * PI).abs() < 1e-9, "vertex {v}: {d}");
                }
            }
            assert!(mismatched <= 1);
        }
    }

    #[test]
    fn cube_corner_holonomy() {
        let m = generate::cube_surface();
        let atlas = build_frame_atlas(&m, &BranchCut::empty()).unwrap();
        let corner = m.nearest_vertex(&Vec3::new(1.0, 1.0, 1.0)).0;
        let h = wrap_angle(atlas.vertex_holonomy(&m, corner));
        assert!((h - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "{h}");
    }

    #[test]
    fn connection_is_antisymmetric() {
        let m = generate::icosphere(1);
        let atlas = build_frame_atlas(&m, &BranchCut::empty()).unwrap();
        for e in 0..m.num_edges() {
            let (t0, t1) = m.edge_triangles(e);
            let t1 = t1.unwrap();
            assert_eq!(atlas.transport(&m, e, t0), -atlas.transport(&m, e, t1));
        }
    }

    #[test]
    fn atlas_is_deterministic() {
        let m = generate::torus(12, 8, 1.0, 0.4);
        let cut = build_branch_cut(&m, &SingularityConfig::default()).unwrap();
        let a = build_frame_atlas(&m, &cut).unwrap();
        let b = build_frame_atlas(&m, &cut).unwrap();
        assert_eq!(a, b);
    }
}
