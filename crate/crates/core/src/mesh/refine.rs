use super::{TriMesh, Vec3};
use crate::branch_cut::SingularityConfig;
use crate::error::MeshError;

const ADAPT_RINGS: usize = 2;
const ADAPT_MAX_ROUNDS: usize = 8;

/// Splits the marked edges at their midpoints and retriangulates: triangles
/// with three split edges are cut 1-to-4, triangles with one split edge are
/// bisected. `split` must already be closed (no triangle with exactly two).
fn split_edges(mesh: &TriMesh, split: &[bool]) -> TriMesh {
    let mut positions = mesh.positions().to_vec();
    let mut midpoint = vec![usize::MAX; mesh.num_edges()];
    for e in 0..mesh.num_edges() {
        if split[e] {
            let [a, b] = mesh.edge_vertices(e);
            midpoint[e] = positions.len();
            positions.push((mesh.position(a) + mesh.position(b)) * 0.5);
        }
    }
    let mut triangles = Vec::with_capacity(mesh.num_triangles() * 2);
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let edges = mesh.triangle_edges(t);
        let mids = edges.map(|e| midpoint[e]);
        let count = mids.iter().filter(|&&m| m != usize::MAX).count();
        match count {
            0 => triangles.push(tri),
            3 => {
                let [m0, m1, m2] = mids;
                triangles.push([tri[0], m0, m2]);
                triangles.push([tri[1], m1, m0]);
                triangles.push([tri[2], m2, m1]);
                triangles.push([m0, m1, m2]);
            }
            1 => {
                let i = mids.iter().position(|&m| m != usize::MAX).expect("one split edge");
                let m = mids[i];
                triangles.push([tri[i], m, tri[(i + 2) % 3]]);
                triangles.push([m, tri[(i + 1) % 3], tri[(i + 2) % 3]]);
            }
            _ => unreachable!("split set must be closed before subdividing"),
        }
    }
    TriMesh::new(positions, triangles).expect("midpoint subdivision preserves manifoldness")
}

/// One round of uniform 1-to-4 midpoint subdivision. Original vertex ids are kept.
pub fn refine_uniform(mesh: &TriMesh) -> TriMesh {
    split_edges(mesh, &vec![true; mesh.num_edges()])
}

fn close_split_set(mesh: &TriMesh, split: &mut [bool]) {
    loop {
        let mut changed = false;
        for t in 0..mesh.num_triangles() {
            let edges = mesh.triangle_edges(t);
            let count = edges.iter().filter(|&&e| split[e]).count();
            if count == 2 {
                for e in edges {
                    split[e] = true;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Refines around singular vertices until every edge within two rings of a
/// singularity is no longer than `target_edge_ratio` times the mean edge
/// length of the input mesh. Ratios of one or more leave the mesh untouched.
/// Existing vertex ids, and therefore the singularity anchors, are preserved.
pub fn adapt_mesh(
    mesh: &TriMesh,
    sing: &SingularityConfig,
    target_edge_ratio: f64,
) -> Result<(TriMesh, SingularityConfig), MeshError> {
    if !(target_edge_ratio > 0.0) || !target_edge_ratio.is_finite() {
        return Err(MeshError::InvalidRatio(target_edge_ratio));
    }
    let mut current = mesh.clone();
    if target_edge_ratio >= 1.0 || sing.is_empty() {
        return Ok((current, sing.clone()));
    }
    let target = target_edge_ratio * mesh.mean_edge_length();
    let anchors: Vec<usize> = sing.entries().iter().map(|s| s.vertex).collect();
    for _ in 0..ADAPT_MAX_ROUNDS {
        let region = current.vertex_rings(&anchors, ADAPT_RINGS);
        let mut split: Vec<bool> = (0..current.num_edges())
            .map(|e| {
                let [a, b] = current.edge_vertices(e);
                region[a] && region[b] && current.edge_length(e) > target * (1.0 + 1e-12)
            })
            .collect();
        if !split.iter().any(|&s| s) {
            break;
        }
        close_split_set(&current, &mut split);
        current = split_edges(&current, &split);
    }
    log::debug!("adapt_mesh: {} -> {} triangles", mesh.num_triangles(), current.num_triangles());
    Ok((current, sing.clone()))
}

/// Radially projects the boundary vertices of a planar mesh onto the circle
/// of the given radius about the origin.
pub fn project_boundary_to_circle(mesh: &TriMesh, radius: f64) -> TriMesh {
    mesh.map_positions(|v, p| {
        if mesh.is_boundary_vertex(v) {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            Vec3::new(p.x * radius / r, p.y * radius / r, p.z)
        } else {
            *p
        }
    })
    .expect("projection keeps connectivity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch_cut::Singularity;
    use crate::mesh::generate;

    #[test]
    fn uniform_refinement_quadruples() {
        let m = generate::square(2, 1.0);
        let r = refine_uniform(&m);
        assert_eq!(r.num_triangles(), 4 * m.num_triangles());
        assert_eq!(r.euler_characteristic(), 1);
        for v in 0..m.num_vertices() {
            assert_eq!(r.position(v), m.position(v));
        }
    }

    #[test]
    fn ratio_one_is_noop() {
        let m = generate::disk(4);
        let s = SingularityConfig::new(&m, vec![Singularity { vertex: 0, index: 1 }]).unwrap();
        let (r, s2) = adapt_mesh(&m, &s, 1.0).unwrap();
        assert_eq!(r.triangles(), m.triangles());
        assert_eq!(s2, s);
    }

    #[test]
    fn invalid_ratio_is_rejected() {
        let m = generate::disk(2);
        let s = SingularityConfig::default();
        assert_eq!(adapt_mesh(&m, &s, 0.0).unwrap_err(), MeshError::InvalidRatio(0.0));
        assert!(adapt_mesh(&m, &s, -1.0).is_err());
    }

    #[test]
    fn adapt_preserves_topology_and_halves_near_singularity() {
        let m = generate::square(8, 1.0);
        let centre = m.nearest_vertex(&Vec3::new(0.5, 0.5, 0.0)).0;
        let s = SingularityConfig::new(&m, vec![Singularity { vertex: centre, index: 1 }]).unwrap();
        let (r, s2) = adapt_mesh(&m, &s, 0.5).unwrap();
        assert_eq!(r.euler_characteristic(), m.euler_characteristic());
        assert_eq!(r.boundary_loops().len(), m.boundary_loops().len());
        assert_eq!(r.position(centre), m.position(centre));
        assert_eq!(s2.entries()[0].vertex, centre);
        let target = 0.5 * m.mean_edge_length();
        let region = r.vertex_rings(&[centre], 2);
        for e in 0..r.num_edges() {
            let [a, b] = r.edge_vertices(e);
            if region[a] && region[b] {
                assert!(r.edge_length(e) <= target * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn overlapping_rings_split_each_edge_once() {
        let m = generate::square(8, 1.0);
        let a = m.nearest_vertex(&Vec3::new(0.5, 0.5, 0.0)).0;
        let b = m.nearest_vertex(&Vec3::new(0.625, 0.5, 0.0)).0;
        let s =
            SingularityConfig::new(&m, vec![Singularity { vertex: a, index: 1 }, Singularity { vertex: b, index: -1 }])
                .unwrap();
        let (r, _) = adapt_mesh(&m, &s, 0.9).unwrap();
        // Each new vertex is a distinct midpoint.
        let mut seen = std::collections::HashSet::new();
        for p in &r.positions()[m.num_vertices()..] {
            assert!(seen.insert([p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]));
        }
        for p in m.positions() {
            assert!(!seen.contains(&[p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]));
        }
    }
}
