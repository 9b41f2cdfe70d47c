//! Triangulated 2-manifold kernel.
//!
//! [`TriMesh`] stores an oriented triangulation together with halfedge
//! connectivity. Halfedge `3 * t + i` runs from `triangles[t][i]` to
//! `triangles[t][(i + 1) % 3]`; it is the local edge `i` of triangle `t`.

mod curvature;
mod frames;
pub mod generate;
pub mod io;
mod refine;

pub(crate) use curvature::check_nondegenerate;
pub use curvature::{compute_curvature, triangle_angles, CurvatureData};
pub use frames::{build_frame_atlas, FrameAtlas, TriangleFrame};
pub use refine::{adapt_mesh, project_boundary_to_circle, refine_uniform};

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Vector2, Vector3};

use crate::error::MeshError;

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Classification of a vertex with respect to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum VertexKind {
    Interior,
    Boundary,
    /// Boundary vertex whose turning angle rounds to a non-zero number of
    /// quarter turns. The payload is that number.
    Corner(i32),
}

impl VertexKind {
    pub fn is_boundary(self) -> bool {
        !matches!(self, VertexKind::Interior)
    }
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    he_twin: Vec<Option<usize>>,
    he_edge: Vec<usize>,
    /// Edge endpoints, oriented like `edge_he[e][0]`.
    edges: Vec<[usize; 2]>,
    edge_he: Vec<[Option<usize>; 2]>,
    /// An outgoing halfedge per vertex; the outgoing boundary halfedge for
    /// boundary vertices.
    vertex_he: Vec<usize>,
    boundary_loops: Vec<Vec<usize>>,
    vertex_kind: Vec<VertexKind>,
}

#[inline]
pub fn next_he(he: usize) -> usize {
    if he % 3 == 2 {
        he - 2
    } else {
        he + 1
    }
}

#[inline]
pub fn prev_he(he: usize) -> usize {
    if he.is_multiple_of(3) {
        he + 2
    } else {
        he - 1
    }
}

/// Interior angle between two vectors, robust near 0 and pi.
pub(crate) fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Distance from `a` to the nearest multiple of `pi / 2`.
pub fn quarter_turn_distance(a: f64) -> f64 {
    let r = a.rem_euclid(FRAC_PI_2);
    r.min(FRAC_PI_2 - r)
}

impl TriMesh {
    /// Builds connectivity and validates manifoldness and orientation.
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() || positions.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = positions.len();
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { triangle: t, vertex: v });
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex { triangle: t });
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::IsolatedVertex { vertex: v });
        }

        let nh = 3 * triangles.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(nh);
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let key = (tri[i], tri[(i + 1) % 3]);
                if directed.insert(key, 3 * t + i).is_some() {
                    // Either a third triangle on the edge or a flipped neighbour.
                    let undirected_count = triangles
                        .iter()
                        .filter(|o| {
                            (0..3).any(|j| {
                                let (a, b) = (o[j], o[(j + 1) % 3]);
                                (a, b) == key || (b, a) == key
                            })
                        })
                        .count();
                    if undirected_count > 2 {
                        return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 });
                    }
                    return Err(MeshError::InconsistentOrientation { triangle: t, a: key.0, b: key.1 });
                }
            }
        }

        let mut he_twin = vec![None; nh];
        let mut he_edge = vec![usize::MAX; nh];
        let mut edges = Vec::new();
        let mut edge_he = Vec::new();
        for he in 0..nh {
            if he_edge[he] != usize::MAX {
                continue;
            }
            let t = he / 3;
            let i = he % 3;
            let (a, b) = (triangles[t][i], triangles[t][(i + 1) % 3]);
            let twin = directed.get(&(b, a)).copied();
            let e = edges.len();
            edges.push([a, b]);
            edge_he.push([Some(he), twin]);
            he_edge[he] = e;
            if let Some(tw) = twin {
                he_twin[he] = Some(tw);
                he_twin[tw] = Some(he);
                he_edge[tw] = e;
            }
        }
        // Edges shared by three or more triangles always trip the directed
        // duplicate check above, so every edge here has at most two sides.

        let mut vertex_he = vec![usize::MAX; nv];
        let mut boundary_out: Vec<Option<usize>> = vec![None; nv];
        for he in 0..nh {
            let v = triangles[he / 3][he % 3];
            if vertex_he[v] == usize::MAX {
                vertex_he[v] = he;
            }
            if he_twin[he].is_none() {
                if boundary_out[v].is_some() {
                    return Err(MeshError::NonManifoldVertex { vertex: v });
                }
                boundary_out[v] = Some(he);
            }
        }
        for v in 0..nv {
            if let Some(he) = boundary_out[v] {
                vertex_he[v] = he;
            }
        }

        let mut mesh = TriMesh {
            positions,
            triangles,
            he_twin,
            he_edge,
            edges,
            edge_he,
            vertex_he,
            boundary_loops: Vec::new(),
            vertex_kind: vec![VertexKind::Interior; nv],
        };

        // Every vertex fan must be a single disk or half-disk.
        for v in 0..nv {
            let fan = mesh.vertex_fan(v);
            let degree = mesh.triangles.iter().filter(|t| t.contains(&v)).count();
            if fan.len() != degree {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
        }

        mesh.boundary_loops = mesh.extract_boundary_loops(&boundary_out);
        for lp in &mesh.boundary_loops {
            for &v in lp {
                let tau = mesh.turning_angle(v);
                let quarter = (tau / FRAC_PI_2).round() as i32;
                mesh.vertex_kind[v] = if tau.abs() > FRAC_PI_4 + 1e-9 && quarter != 0 {
                    VertexKind::Corner(quarter)
                } else {
                    VertexKind::Boundary
                };
            }
        }
        Ok(mesh)
    }

    fn extract_boundary_loops(&self, boundary_out: &[Option<usize>]) -> Vec<Vec<usize>> {
        let nv = self.positions.len();
        let mut visited = vec![false; nv];
        let mut loops = Vec::new();
        for start in 0..nv {
            if visited[start] || boundary_out[start].is_none() {
                continue;
            }
            let mut lp = Vec::new();
            let mut v = start;
            loop {
                visited[v] = true;
                lp.push(v);
                let he = boundary_out[v].expect("boundary vertex has outgoing boundary halfedge");
                v = self.he_head(he);
                if v == start {
                    break;
                }
            }
            loops.push(lp);
        }
        loops
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Vec3 {
        self.positions[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_halfedges(&self) -> usize {
        self.he_edge.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    /// Genus of the closed surface obtained by capping every boundary loop.
    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic() - self.boundary_loops.len() as i64) / 2
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn vertex_kind(&self, v: usize) -> VertexKind {
        self.vertex_kind[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_kind[v].is_boundary()
    }

    /// Sum over corners of their quarter-turn count.
    pub fn corner_quarter_turns(&self) -> i64 {
        self.vertex_kind
            .iter()
            .map(|k| match k {
                VertexKind::Corner(q) => *q as i64,
                _ => 0,
            })
            .sum()
    }

    pub fn edge_vertices(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// The halfedge carrying the edge orientation, and its twin if any.
    pub fn edge_halfedges(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_he[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_he[e][1].is_none()
    }

    /// Triangles on either side of the edge, first one owning the oriented halfedge.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_he[e];
        (a.expect("edge has a halfedge") / 3, b.map(|h| h / 3))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.positions[b] - self.positions[a]).norm()
    }

    pub fn mean_edge_length(&self) -> f64 {
        (0..self.num_edges()).map(|e| self.edge_length(e)).sum::<f64>() / self.num_edges() as f64
    }

    pub fn he_twin(&self, he: usize) -> Option<usize> {
        self.he_twin[he]
    }

    pub fn he_edge(&self, he: usize) -> usize {
        self.he_edge[he]
    }

    pub fn he_tail(&self, he: usize) -> usize {
        self.triangles[he / 3][he % 3]
    }

    pub fn he_head(&self, he: usize) -> usize {
        self.triangles[he / 3][(he + 1) % 3]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        [self.he_edge[3 * t], self.he_edge[3 * t + 1], self.he_edge[3 * t + 2]]
    }

    /// Outgoing halfedges of `v` in counter-clockwise order. For boundary
    /// vertices the fan starts at the outgoing boundary halfedge.
    pub fn vertex_fan(&self, v: usize) -> Vec<usize> {
        let start = self.vertex_he[v];
        let mut fan = vec![start];
        let mut he = start;
        loop {
            match self.he_twin[prev_he(he)] {
                Some(next) if next == start => break,
                Some(next) => {
                    fan.push(next);
                    he = next;
                    if fan.len() > self.he_edge.len() {
                        break;
                    }
                }
                None => break,
            }
        }
        fan
    }

    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        let fan = self.vertex_fan(v);
        let mut out: Vec<usize> = fan.iter().map(|&he| self.he_head(he)).collect();
        if self.is_boundary_vertex(v) {
            let last = *fan.last().expect("non-empty fan");
            out.push(self.he_tail(prev_he(last)));
        }
        out
    }

    pub fn triangle_normal_unnormalized(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.positions[a], self.positions[b], self.positions[c]);
        (pb - pa).cross(&(pc - pa))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.triangle_normal_unnormalized(t).norm()
    }

    pub fn triangle_centroid(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangles[t];
        (self.positions[a] + self.positions[b] + self.positions[c]) / 3.0
    }

    /// Sum of the triangle angles incident at `v`.
    pub fn angle_sum(&self, v: usize) -> f64 {
        self.vertex_fan(v)
            .iter()
            .map(|&he| {
                let a = self.positions[self.he_head(he)] - self.positions[v];
                let b = self.positions[self.he_tail(prev_he(he))] - self.positions[v];
                angle_between(&a, &b)
            })
            .sum()
    }

    /// `pi` minus the incident angle sum; only meaningful at boundary vertices.
    pub fn turning_angle(&self, v: usize) -> f64 {
        PI - self.angle_sum(v)
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        let mut lo = self.positions[0];
        let mut hi = self.positions[0];
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Connected components of the triangle adjacency graph.
    pub fn triangle_components(&self) -> Vec<usize> {
        let nt = self.num_triangles();
        let mut comp = vec![usize::MAX; nt];
        let mut next = 0;
        for seed in 0..nt {
            if comp[seed] != usize::MAX {
                continue;
            }
            let mut stack = vec![seed];
            comp[seed] = next;
            while let Some(t) = stack.pop() {
                for i in 0..3 {
                    if let Some(tw) = self.he_twin[3 * t + i] {
                        let n = tw / 3;
                        if comp[n] == usize::MAX {
                            comp[n] = next;
                            stack.push(n);
                        }
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn num_components(&self) -> usize {
        self.triangle_components().iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Vertices within `rings` edge hops of `seeds`.
    pub fn vertex_rings(&self, seeds: &[usize], rings: usize) -> Vec<bool> {
        let mut inside = vec![false; self.num_vertices()];
        let mut frontier: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            inside[s] = true;
        }
        for _ in 0..rings {
            let mut next = Vec::new();
            for &v in &frontier {
                for n in self.vertex_neighbors(v) {
                    if !inside[n] {
                        inside[n] = true;
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        inside
    }

    pub fn nearest_vertex(&self, p: &Vec3) -> (usize, f64) {
        self.positions.iter().enumerate().map(|(i, q)| (i, (q - p).norm())).fold((0, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        })
    }

    /// Moves vertex positions in place; connectivity is untouched.
    pub fn map_positions(&self, f: impl Fn(usize, &Vec3) -> Vec3) -> Result<TriMesh, MeshError> {
        let positions = self.positions.iter().enumerate().map(|(i, p)| f(i, p)).collect();
        TriMesh::new(positions, self.triangles.clone())
    }
}
