//! Legacy ASCII VTK (version 4.2) unstructured grids: writer and a reader
//! for the subset the writer produces.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, MeshError};
use crate::mesh::{TriMesh, Vec3};

pub const VTK_LINE: u8 = 3;
pub const VTK_POLY_LINE: u8 = 4;
pub const VTK_TRIANGLE: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum DataArray {
    Scalars(Vec<f64>),
    Vectors(Vec<[f64; 3]>),
}

impl DataArray {
    pub fn len(&self) -> usize {
        match self {
            DataArray::Scalars(v) => v.len(),
            DataArray::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<(u8, Vec<usize>)>,
    pub point_data: Vec<(String, DataArray)>,
    pub cell_data: Vec<(String, DataArray)>,
}

fn v3(p: &Vec3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

impl VtkGrid {
    /// Triangles of `mesh` with no attached data.
    pub fn from_mesh(mesh: &TriMesh, title: &str) -> Self {
        VtkGrid {
            title: title.to_string(),
            points: mesh.positions().iter().map(v3).collect(),
            cells: mesh.triangles().iter().map(|t| (VTK_TRIANGLE, t.to_vec())).collect(),
            ..Default::default()
        }
    }

    /// Polylines with their own points.
    pub fn from_polylines(lines: &[Vec<Vec3>], title: &str) -> Self {
        let mut g = VtkGrid { title: title.to_string(), ..Default::default() };
        for l in lines {
            let start = g.points.len();
            g.points.extend(l.iter().map(v3));
            g.cells.push((VTK_POLY_LINE, (start..start + l.len()).collect()));
        }
        g
    }

    /// Line cells for mesh edges, sharing the mesh's points.
    pub fn from_edges(mesh: &TriMesh, edges: &[usize], title: &str) -> Self {
        VtkGrid {
            title: title.to_string(),
            points: mesh.positions().iter().map(v3).collect(),
            cells: edges.iter().map(|&e| (VTK_LINE, mesh.edge_vertices(e).to_vec())).collect(),
            ..Default::default()
        }
    }

    pub fn add_point_scalars(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        assert_eq!(values.len(), self.points.len(), "point array {name} has the wrong length");
        self.point_data.push((name.to_string(), DataArray::Scalars(values)));
        self
    }

    pub fn add_cell_scalars(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        assert_eq!(values.len(), self.cells.len(), "cell array {name} has the wrong length");
        self.cell_data.push((name.to_string(), DataArray::Scalars(values)));
        self
    }

    pub fn add_cell_vectors(&mut self, name: &str, values: Vec<[f64; 3]>) -> &mut Self {
        assert_eq!(values.len(), self.cells.len(), "cell array {name} has the wrong length");
        self.cell_data.push((name.to_string(), DataArray::Vectors(values)));
        self
    }

    /// Deterministic text; floats use the shortest round-trip form.
    pub fn to_vtk_string(&self) -> String {
        let mut s = String::new();
        let title = if self.title.is_empty() { "crossforge" } else { self.title.lines().next().unwrap_or("") };
        let _ = writeln!(s, "# vtk DataFile Version 4.2\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(s, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
        }
        let size: usize = self.cells.iter().map(|(_, c)| c.len() + 1).sum();
        let _ = writeln!(s, "CELLS {} {size}", self.cells.len());
        for (_, c) in &self.cells {
            let _ = write!(s, "{}", c.len());
            for i in c {
                let _ = write!(s, " {i}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "CELL_TYPES {}", self.cells.len());
        for (t, _) in &self.cells {
            let _ = writeln!(s, "{t}");
        }
        write_data(&mut s, "POINT_DATA", self.points.len(), &self.point_data);
        write_data(&mut s, "CELL_DATA", self.cells.len(), &self.cell_data);
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        let path = path.as_ref();
        std::fs::write(path, self.to_vtk_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(parse_vtk(&text, &path.display().to_string())?)
    }
}

fn write_data(s: &mut String, header: &str, n: usize, arrays: &[(String, DataArray)]) {
    if arrays.is_empty() {
        return;
    }
    let _ = writeln!(s, "{header} {n}");
    for (name, a) in arrays {
        match a {
            DataArray::Scalars(v) => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(s, "{x}");
                }
            }
            DataArray::Vectors(v) => {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
                }
            }
        }
    }
}

struct Tokens<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    path: &'a str,
}

impl<'a> Tokens<'a> {
    fn err(&self, message: impl Into<String>) -> MeshError {
        let line = self.lines.get(self.pos).map(|l| l.0).unwrap_or(0);
        MeshError::Parse { path: self.path.to_string(), line, message: message.into() }
    }

    fn next_line(&mut self) -> Result<&'a str, MeshError> {
        let l = self.lines.get(self.pos).ok_or_else(|| self.err("unexpected end of file"))?.1;
        self.pos += 1;
        Ok(l)
    }

    fn numbers<T: std::str::FromStr>(&mut self, count: usize) -> Result<Vec<T>, MeshError> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let line = self.next_line()?;
            for tok in line.split_whitespace() {
                out.push(tok.parse().map_err(|_| {
                    self.pos -= 1;
                    self.err(format!("bad number {tok:?}"))
                })?);
            }
        }
        if out.len() != count {
            return Err(self.err("too many values on line"));
        }
        Ok(out)
    }
}

fn keyword<'a>(line: &'a str, expected: &str, tokens: &Tokens) -> Result<Vec<&'a str>, MeshError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.first() != Some(&expected) {
        return Err(tokens.err(format!("expected {expected}, found {line:?}")));
    }
    Ok(parts)
}

fn count(parts: &[&str], i: usize, tokens: &Tokens) -> Result<usize, MeshError> {
    parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(|| tokens.err("missing count"))
}

pub fn parse_vtk(text: &str, path: &str) -> Result<VtkGrid, MeshError> {
    let all: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())).collect();
    let mut t = Tokens { lines: all, pos: 0, path };
    if !t.next_line()?.starts_with("# vtk DataFile Version") {
        return Err(t.err("missing VTK header"));
    }
    let title = t.next_line()?.to_string();
    if t.next_line()?.trim() != "ASCII" {
        return Err(MeshError::Unsupported { path: path.into(), message: "only ASCII files are supported".into() });
    }
    if t.next_line()?.trim() != "DATASET UNSTRUCTURED_GRID" {
        return Err(MeshError::Unsupported {
            path: path.into(),
            message: "only unstructured grids are supported".into(),
        });
    }
    // Blank lines carry no data.
    t.lines.retain(|l| !l.1.trim().is_empty());
    t.pos = t.lines.iter().position(|l| l.0 > 4).unwrap_or(t.lines.len());
    let line = t.next_line()?;
    let parts = keyword(line, "POINTS", &t)?;
    let np = count(&parts, 1, &t)?;
    let flat: Vec<f64> = t.numbers(3 * np)?;
    let points = flat.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    let line = t.next_line()?;
    let parts = keyword(line, "CELLS", &t)?;
    let nc = count(&parts, 1, &t)?;
    let size = count(&parts, 2, &t)?;
    let flat: Vec<usize> = t.numbers(size)?;
    let mut conn = Vec::with_capacity(nc);
    let mut k = 0;
    for _ in 0..nc {
        let n = *flat.get(k).ok_or_else(|| t.err("truncated cell list"))?;
        let ids = flat.get(k + 1..k + 1 + n).ok_or_else(|| t.err("truncated cell list"))?.to_vec();
        if ids.iter().any(|&i| i >= np) {
            return Err(t.err("cell references a missing point"));
        }
        conn.push(ids);
        k += n + 1;
    }
    if k != size {
        return Err(t.err("cell list size mismatch"));
    }
    let line = t.next_line()?;
    let parts = keyword(line, "CELL_TYPES", &t)?;
    if count(&parts, 1, &t)? != nc {
        return Err(t.err("cell type count mismatch"));
    }
    let types: Vec<u8> = t.numbers(nc)?;
    let cells = types.into_iter().zip(conn).collect();
    let mut grid = VtkGrid { title, points, cells, ..Default::default() };
    let mut target: Option<(bool, usize)> = None;
    while t.pos < t.lines.len() {
        let line = t.next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "POINT_DATA" => target = Some((true, count(&parts, 1, &t)?)),
            "CELL_DATA" => target = Some((false, count(&parts, 1, &t)?)),
            "SCALARS" | "VECTORS" => {
                let (is_point, n) = target.ok_or_else(|| t.err("data array outside a data section"))?;
                let name = parts.get(1).ok_or_else(|| t.err("unnamed array"))?.to_string();
                let array = if parts[0] == "SCALARS" {
                    let comps: usize =
                        parts.get(3).map_or(Ok(1), |c| c.parse().map_err(|_| t.err("bad component count")))?;
                    if comps != 1 {
                        return Err(t.err("only single-component scalars are supported"));
                    }
                    keyword(t.next_line()?, "LOOKUP_TABLE", &t)?;
                    DataArray::Scalars(t.numbers(n)?)
                } else {
                    let flat: Vec<f64> = t.numbers(3 * n)?;
                    DataArray::Vectors(flat.chunks(3).map(|c| [c[0], c[1], c[2]]).collect())
                };
                if is_point {
                    grid.point_data.push((name, array));
                } else {
                    grid.cell_data.push((name, array));
                }
            }
            other => return Err(t.err(format!("unexpected section {other:?}"))),
        }
    }
    Ok(grid)
}
