//! Triangle-only OBJ and Gmsh MSH v2 (ASCII) readers, plus an OBJ writer.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{TriMesh, Vec3};
use crate::error::{Error, MeshError};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh, Error> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let is_msh = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("msh"));
    let mesh = if is_msh { parse_msh(&text, &name)? } else { parse_obj(&text, &name)? };
    Ok(mesh)
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { path: path.to_string(), line, message: message.into() }
}

pub fn parse_obj(text: &str, path: &str) -> Result<TriMesh, MeshError> {
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tok = content.split_whitespace();
        match tok.next() {
            Some("v") => {
                let coords: Vec<f64> = tok
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|_| parse_err(path, line, format!("bad coordinate `{s}`"))))
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(parse_err(path, line, "vertex needs three coordinates"));
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tok
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let i: i64 =
                            head.parse().map_err(|_| parse_err(path, line, format!("bad face index `{s}`")))?;
                        let resolved = if i > 0 { i - 1 } else { positions.len() as i64 + i };
                        if i == 0 || resolved < 0 {
                            return Err(parse_err(path, line, format!("face index `{s}` out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(MeshError::Unsupported {
                        path: path.to_string(),
                        message: format!("line {line}: face with {} vertices (triangles only)", idx.len()),
                    });
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriMesh::new(positions, triangles)
}

pub fn parse_msh(text: &str, path: &str) -> Result<TriMesh, MeshError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let mut node_index: HashMap<i64, usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut raw_triangles: Vec<([i64; 3], usize)> = Vec::new();
    let next_line = |i: &mut usize| -> Result<(usize, &str), MeshError> {
        let l = lines.get(*i).ok_or_else(|| parse_err(path, *i + 1, "unexpected end of file"))?;
        *i += 1;
        Ok((*i, l.trim()))
    };
    while i < lines.len() {
        let (_, line) = next_line(&mut i)?;
        match line {
            "$MeshFormat" => {
                let (ln, fmt) = next_line(&mut i)?;
                let version = fmt.split_whitespace().next().unwrap_or("");
                if !version.starts_with('2') {
                    return Err(parse_err(path, ln, format!("MSH version {version} unsupported (need 2.x)")));
                }
                if fmt.split_whitespace().nth(1) != Some("0") {
                    return Err(parse_err(path, ln, "binary MSH is not supported"));
                }
            }
            "$Nodes" => {
                let (ln, count) = next_line(&mut i)?;
                let n: usize = count.parse().map_err(|_| parse_err(path, ln, "bad node count"))?;
                for _ in 0..n {
                    let (ln, l) = next_line(&mut i)?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 4 {
                        return Err(parse_err(path, ln, "node needs id and three coordinates"));
                    }
                    let id: i64 = f[0].parse().map_err(|_| parse_err(path, ln, "bad node id"))?;
                    let c: Vec<f64> = f[1..4]
                        .iter()
                        .map(|s| s.parse::<f64>().map_err(|_| parse_err(path, ln, "bad coordinate")))
                        .collect::<Result<_, _>>()?;
                    node_index.insert(id, positions.len());
                    positions.push(Vec3::new(c[0], c[1], c[2]));
                }
            }
            "$Elements" => {
                let (ln, count) = next_line(&mut i)?;
                let n: usize = count.parse().map_err(|_| parse_err(path, ln, "bad element count"))?;
                for _ in 0..n {
                    let (ln, l) = next_line(&mut i)?;
                    let f: Vec<i64> = l
                        .split_whitespace()
                        .map(|s| s.parse::<i64>().map_err(|_| parse_err(path, ln, "bad element field")))
                        .collect::<Result<_, _>>()?;
                    if f.len() < 3 {
                        return Err(parse_err(path, ln, "truncated element"));
                    }
                    let (etype, ntags) = (f[1], f[2] as usize);
                    let nodes = &f[(3 + ntags).min(f.len())..];
                    match etype {
                        // Points and line segments only carry optional boundary tags.
                        15 | 1 => {}
                        2 => {
                            if nodes.len() != 3 {
                                return Err(parse_err(path, ln, "triangle needs three nodes"));
                            }
                            raw_triangles.push(([nodes[0], nodes[1], nodes[2]], ln));
                        }
                        other => {
                            return Err(MeshError::Unsupported {
                                path: path.to_string(),
                                message: format!("line {ln}: element type {other} (triangles only)"),
                            })
                        }
                    }
                }
            }
            _ => {}
        }
    }
    let triangles = raw_triangles
        .into_iter()
        .map(|(nodes, ln)| {
            let mut out = [0usize; 3];
            for (o, id) in out.iter_mut().zip(nodes) {
                *o = *node_index.get(&id).ok_or_else(|| parse_err(path, ln, format!("unknown node {id}")))?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, MeshError>>()?;
    TriMesh::new(positions, triangles)
}

pub fn obj_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for p in mesh.positions() {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    std::fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;

    #[test]
    fn obj_round_trip() {
        let m = generate::icosphere(1);
        let back = parse_obj(&obj_string(&m), "mem.obj").unwrap();
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.positions(), m.positions());
        assert_eq!(back.euler_characteristic(), 2);
        assert!(back.boundary_loops().is_empty());
    }

    #[test]
    fn obj_with_slashes_and_quads() {
        let ok = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\nf 1//1 3//3 4//4\n";
        let m = parse_obj(ok, "a.obj").unwrap();
        assert_eq!(m.num_triangles(), 2);
        let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(parse_obj(quad, "q.obj"), Err(MeshError::Unsupported { .. })));
    }

    #[test]
    fn obj_non_manifold_edge() {
        let s = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n";
        assert!(matches!(parse_obj(s, "n.obj"), Err(MeshError::NonManifoldEdge { .. })));
    }

    #[test]
    fn msh_v2_square() {
        let s = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n\
                 $Elements\n4\n1 1 2 1 1 1 2\n2 15 2 0 1 1\n3 2 2 0 1 1 2 3\n4 2 2 0 1 1 3 4\n$EndElements\n";
        let m = parse_msh(s, "sq.msh").unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_triangles()), (4, 5, 2));
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn msh_rejects_quads() {
        let s = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n\
                 $Elements\n1\n1 3 2 0 1 1 2 3 4\n$EndElements\n";
        assert!(matches!(parse_msh(s, "q.msh"), Err(MeshError::Unsupported { .. })));
    }

    #[test]
    fn empty_obj_is_an_error() {
        assert_eq!(parse_obj("# nothing\n", "e.obj").unwrap_err(), MeshError::Empty);
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.obj");
        let g = generate::square(2, 1.0);
        save_obj(&g, &p).unwrap();
        let m = load_mesh(&p).unwrap();
        assert_eq!(m.num_triangles(), 8);
        assert!(matches!(load_mesh(dir.path().join("missing.obj")), Err(Error::Io { .. })));
    }
}
