//! Parametric test meshes.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{TriMesh, Vec3};

fn build(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> TriMesh {
    TriMesh::new(positions, triangles).expect("generated meshes are valid manifolds")
}

/// Flips triangles whose normal points towards the origin. Only meant for
/// surfaces that are star-shaped about the origin.
fn orient_outward(positions: &[Vec3], triangles: &mut [[usize; 3]]) {
    for tri in triangles.iter_mut() {
        let (a, b, c) = (positions[tri[0]], positions[tri[1]], positions[tri[2]]);
        let n = (b - a).cross(&(c - a));
        if n.dot(&(a + b + c)) < 0.0 {
            tri.swap(1, 2);
        }
    }
}

/// `[0, size]^2` split into `n x n` cells, two triangles each.
pub fn square(n: usize, size: f64) -> TriMesh {
    let n = n.max(1);
    let stride = n + 1;
    let mut positions = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            positions.push(Vec3::new(size * i as f64 / n as f64, size * j as f64 / n as f64, 0.0));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = i + j * stride;
            let (b, c, d) = (a + 1, a + 1 + stride, a + stride);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    build(positions, triangles)
}

/// Unit disk built from eight sectors, each subdivided into `rings` layers.
/// Ring `j` holds `8 j` vertices at radius `j / rings`, so the mesh has the
/// symmetry group of the regular octagon and `8 rings^2` triangles.
pub fn disk(rings: usize) -> TriMesh {
    polygon_disk(8, rings.max(1), 1.0)
}

fn ring_offset(sectors: usize, j: usize) -> usize {
    if j == 0 {
        0
    } else {
        1 + sectors * j * (j - 1) / 2
    }
}

fn polygon_disk(sectors: usize, rings: usize, radius: f64) -> TriMesh {
    let mut positions = vec![Vec3::zeros()];
    for j in 1..=rings {
        let count = sectors * j;
        let r = radius * j as f64 / rings as f64;
        for i in 0..count {
            let a = 2.0 * PI * i as f64 / count as f64;
            positions.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let idx = |j: usize, i: usize| -> usize {
        if j == 0 {
            0
        } else {
            ring_offset(sectors, j) + i % (sectors * j)
        }
    };
    let mut triangles = Vec::with_capacity(sectors * rings * rings);
    for j in 0..rings {
        for k in 0..sectors {
            let inner = |m: usize| idx(j, k * j + m);
            let outer = |m: usize| idx(j + 1, k * (j + 1) + m);
            for m in 0..=j {
                triangles.push([inner(m), outer(m), outer(m + 1)]);
                if m < j {
                    triangles.push([inner(m), outer(m + 1), inner(m + 1)]);
                }
            }
        }
    }
    build(positions, triangles)
}

/// Vertex of [`disk`] at ring `j`, position `i` counter-clockwise from the +x axis.
pub fn disk_vertex(j: usize, i: usize) -> usize {
    if j == 0 {
        0
    } else {
        ring_offset(8, j) + i % (8 * j)
    }
}

/// Planar annulus with `n_theta` angular and `n_r` radial subdivisions.
pub fn annulus(n_theta: usize, n_r: usize, r_in: f64, r_out: f64) -> TriMesh {
    let stride = n_r + 1;
    let mut positions = Vec::with_capacity(n_theta * stride);
    for i in 0..n_theta {
        let a = 2.0 * PI * i as f64 / n_theta as f64;
        for j in 0..=n_r {
            let r = r_in + (r_out - r_in) * j as f64 / n_r as f64;
            positions.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let id = |i: usize, j: usize| (i % n_theta) * stride + j;
    let mut triangles = Vec::with_capacity(2 * n_theta * n_r);
    for i in 0..n_theta {
        for j in 0..n_r {
            let (a, b, c, d) = (id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j));
            // Alternate diagonals so the pattern has no preferred handedness.
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    build(positions, triangles)
}

/// Vertex of [`annulus`] at angular index `i`, radial index `j`.
pub fn annulus_vertex(n_r: usize, i: usize, j: usize) -> usize {
    i * (n_r + 1) + j
}

/// Torus of revolution about the z axis, outward oriented.
pub fn torus(n_major: usize, n_minor: usize, major: f64, minor: f64) -> TriMesh {
    let mut positions = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let phi = 2.0 * PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let psi = 2.0 * PI * j as f64 / n_minor as f64;
            positions.push(torus_point(major, minor, phi, psi));
        }
    }
    let id = |i: usize, j: usize| (i % n_major) * n_minor + (j % n_minor);
    let mut triangles = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    build(positions, triangles)
}

/// Point of the torus of revolution at major angle `phi` and tube angle `psi`.
pub fn torus_point(major: f64, minor: f64, phi: f64, psi: f64) -> Vec3 {
    let rho = major + minor * psi.cos();
    Vec3::new(rho * phi.cos(), rho * phi.sin(), minor * psi.sin())
}

/// [`torus`] with a grid-aligned rectangular hole on the inner side: the
/// quads with `i < n_major / 8` and `3 n_minor / 8 <= j < 5 n_minor / 8`
/// are removed. The hole has four reflex corners, so `chi = -1` is balanced
/// by the corners and any zero-sum singularity set is compatible.
pub fn holed_torus(n_major: usize, n_minor: usize, major: f64, minor: f64) -> TriMesh {
    let full = torus(n_major, n_minor, major, minor);
    let hole_i = (n_major / 8).max(1);
    let hole_j = (3 * n_minor / 8)..(5 * n_minor / 8).max(3 * n_minor / 8 + 1);
    let mut index = vec![usize::MAX; full.num_vertices()];
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for (k, tri) in full.triangles().iter().enumerate() {
        let (i, j) = (k / 2 / n_minor, k / 2 % n_minor);
        if i < hole_i && hole_j.contains(&j) {
            continue;
        }
        triangles.push(tri.map(|v| {
            if index[v] == usize::MAX {
                index[v] = positions.len();
                positions.push(full.position(v));
            }
            index[v]
        }));
    }
    build(positions, triangles)
}

/// Unit sphere from an icosahedron with `level` rounds of 1-to-4 subdivision.
pub fn icosphere(level: usize) -> TriMesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3> = [
        (-1.0, p, 0.0),
        (1.0, p, 0.0),
        (-1.0, -p, 0.0),
        (1.0, -p, 0.0),
        (0.0, -1.0, p),
        (0.0, 1.0, p),
        (0.0, -1.0, -p),
        (0.0, 1.0, -p),
        (p, 0.0, -1.0),
        (p, 0.0, 1.0),
        (-p, 0.0, -1.0),
        (-p, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                positions.push(((positions[a] + positions[b]) * 0.5).normalize());
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    orient_outward(&positions, &mut triangles);
    build(positions, triangles)
}

/// Unit sphere from an octahedron whose faces are split with frequency `n`.
///
/// The triangulation is invariant under the full octahedral group, and when
/// `n` is a multiple of 3 the eight points `(+-1, +-1, +-1) / sqrt 3` are
/// vertices.
pub fn octasphere(n: usize) -> TriMesh {
    let n = n.max(1) as i64;
    let axes = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    let mut vertex = |key: [i64; 3], positions: &mut Vec<Vec3>| -> usize {
        *index.entry(key).or_insert_with(|| {
            positions.push(Vec3::new(key[0] as f64, key[1] as f64, key[2] as f64).normalize());
            positions.len() - 1
        })
    };
    for sx in [1i64, -1] {
        for sy in [1i64, -1] {
            for sz in [1i64, -1] {
                let a = axes[0].map(|c| c * sx);
                let b = axes[1].map(|c| c * sy);
                let c = axes[2].map(|c| c * sz);
                let lattice = |i: i64, j: i64| -> [i64; 3] {
                    let k = n - i - j;
                    [0, 1, 2].map(|d| i * a[d] + j * b[d] + k * c[d])
                };
                for i in 0..n {
                    for j in 0..(n - i) {
                        let p0 = vertex(lattice(i, j), &mut positions);
                        let p1 = vertex(lattice(i + 1, j), &mut positions);
                        let p2 = vertex(lattice(i, j + 1), &mut positions);
                        triangles.push([p0, p1, p2]);
                        if i + j + 1 < n {
                            let p3 = vertex(lattice(i + 1, j + 1), &mut positions);
                            triangles.push([p1, p3, p2]);
                        }
                    }
                }
            }
        }
    }
    orient_outward(&positions, &mut triangles);
    build(positions, triangles)
}

/// Surface of the cube `[-1, 1]^3`, two triangles per face.
pub fn cube_surface() -> TriMesh {
    let mut positions = Vec::new();
    for i in 0..8 {
        positions.push(Vec3::new(
            if i & 1 == 0 { -1.0 } else { 1.0 },
            if i & 2 == 0 { -1.0 } else { 1.0 },
            if i & 4 == 0 { -1.0 } else { 1.0 },
        ));
    }
    let faces = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]];
    let mut triangles = Vec::new();
    for f in faces {
        triangles.push([f[0], f[1], f[2]]);
        triangles.push([f[0], f[2], f[3]]);
    }
    orient_outward(&positions, &mut triangles);
    build(positions, triangles)
}
