//! Singularity configurations and branch cuts.
//!
//! A branch cut is a set of interior edges along which the cross-field angle
//! may jump. Cutting the mesh open along it must leave a topological disk per
//! component with every singular vertex on the new boundary.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;

use crate::error::{ConfigError, CutError};
use crate::mesh::{prev_he, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Singularity {
    pub vertex: usize,
    /// Index `k = 4 - valence`; the cross turns by `2 pi k / 4` around it.
    pub index: i32,
}

impl Singularity {
    pub fn valence(&self) -> i32 {
        4 - self.index
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SingularityConfig {
    entries: Vec<Singularity>,
    pub note: String,
}

impl SingularityConfig {
    /// Validates anchors against the mesh: distinct, in range, interior, and
    /// with an index in `[-4, 4] \ {0}`.
    pub fn new(mesh: &TriMesh, entries: Vec<Singularity>) -> Result<Self, ConfigError> {
        let mut seen = vec![false; mesh.num_vertices()];
        for (i, s) in entries.iter().enumerate() {
            if s.vertex >= mesh.num_vertices() {
                return Err(ConfigError::AnchorOutOfRange { vertex: s.vertex });
            }
            if seen[s.vertex] {
                return Err(ConfigError::DuplicateAnchor { vertex: s.vertex });
            }
            seen[s.vertex] = true;
            if s.index == 0 || s.index.abs() > 4 {
                return Err(ConfigError::InvalidIndex { entry: i, index: s.index as i64 });
            }
            if mesh.is_boundary_vertex(s.vertex) {
                return Err(ConfigError::BoundaryAnchor { vertex: s.vertex });
            }
        }
        Ok(SingularityConfig { entries, note: String::new() })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn entries(&self) -> &[Singularity] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn index_sum(&self) -> i64 {
        self.entries.iter().map(|s| s.index as i64).sum()
    }

    /// Per-vertex index, zero away from singularities.
    pub fn index_map(&self, num_vertices: usize) -> Vec<i32> {
        let mut out = vec![0; num_vertices];
        for s in &self.entries {
            out[s.vertex] = s.index;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutRoot {
    /// All vertices of a boundary loop act as the root.
    BoundaryLoop(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutTarget {
    Singularity(usize),
    BoundaryLoop(usize),
    Handle(usize),
}

/// A path added to the cut, listed from its target towards the tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutPath {
    pub target: CutTarget,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchCut {
    edges: Vec<usize>,
    root: Option<CutRoot>,
    paths: Vec<CutPath>,
}

impl BranchCut {
    pub fn empty() -> Self {
        BranchCut { edges: Vec::new(), root: None, paths: Vec::new() }
    }

    /// A cut from an explicit edge list. Edges must be interior.
    pub fn from_edges(mesh: &TriMesh, edges: impl IntoIterator<Item = usize>) -> Result<Self, CutError> {
        let mut edges: Vec<usize> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        for &e in &edges {
            if e >= mesh.num_edges() || mesh.is_boundary_edge(e) {
                return Err(CutError::NotInterior(e));
            }
        }
        Ok(BranchCut { edges, root: None, paths: Vec::new() })
    }

    /// Sorted edge ids.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn root(&self) -> Option<CutRoot> {
        self.root
    }

    pub fn paths(&self) -> &[CutPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_mask(&self, num_edges: usize) -> Vec<bool> {
        let mut mask = vec![false; num_edges];
        for &e in &self.edges {
            mask[e] = true;
        }
        mask
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then on vertex id.
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct ShortestPaths {
    dist: Vec<f64>,
    parent_edge: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Edges from `v` back to the source set.
    fn path_to_source(&self, mesh: &TriMesh, mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(e) = self.parent_edge[v] {
            out.push(e);
            let [a, b] = mesh.edge_vertices(e);
            v = if a == v { b } else { a };
        }
        out
    }
}

/// Multi-source Dijkstra over interior edges. Boundary vertices outside the
/// source set can be reached but are never expanded.
fn dijkstra(mesh: &TriMesh, adjacency: &[Vec<(usize, usize)>], sources: &[bool]) -> ShortestPaths {
    let nv = mesh.num_vertices();
    let mut dist = vec![f64::INFINITY; nv];
    let mut parent_edge = vec![None; nv];
    let mut heap = BinaryHeap::new();
    for v in 0..nv {
        if sources[v] {
            dist[v] = 0.0;
            heap.push(HeapItem { dist: 0.0, vertex: v });
        }
    }
    let mut done = vec![false; nv];
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if !sources[v] && mesh.is_boundary_vertex(v) {
            continue;
        }
        for &(n, e) in &adjacency[v] {
            let nd = d + mesh.edge_length(e);
            if nd < dist[n] {
                dist[n] = nd;
                parent_edge[n] = Some(e);
                heap.push(HeapItem { dist: nd, vertex: n });
            }
        }
    }
    ShortestPaths { dist, parent_edge }
}

fn interior_adjacency(mesh: &TriMesh) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); mesh.num_vertices()];
    for e in 0..mesh.num_edges() {
        if mesh.is_boundary_edge(e) {
            continue;
        }
        let [a, b] = mesh.edge_vertices(e);
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

struct CutBuilder<'a> {
    mesh: &'a TriMesh,
    adjacency: Vec<Vec<(usize, usize)>>,
    in_tree: Vec<bool>,
    is_cut: Vec<bool>,
    paths: Vec<CutPath>,
}

impl CutBuilder<'_> {
    fn add_path(&mut self, target: CutTarget, edges: Vec<usize>) {
        for &e in &edges {
            self.is_cut[e] = true;
            for v in self.mesh.edge_vertices(e) {
                self.in_tree[v] = true;
            }
        }
        self.paths.push(CutPath { target, edges });
    }

    fn connect_boundary_loops(&mut self) {
        let loops = self.mesh.boundary_loops();
        let mut connected = vec![false; loops.len()];
        connected[0] = true;
        while connected.iter().any(|c| !c) {
            let sp = dijkstra(self.mesh, &self.adjacency, &self.in_tree);
            let mut best: Option<(f64, usize, usize)> = None;
            for (l, lp) in loops.iter().enumerate() {
                if connected[l] {
                    continue;
                }
                for &v in lp {
                    let cand = (sp.dist[v], l, v);
                    if best.is_none_or(|b| cand.0 < b.0) {
                        best = Some(cand);
                    }
                }
            }
            let (_, l, v) = best.expect("an unconnected loop remains");
            let edges = sp.path_to_source(self.mesh, v);
            connected[l] = true;
            for &w in &loops[l] {
                self.in_tree[w] = true;
            }
            self.add_path(CutTarget::BoundaryLoop(l), edges);
        }
    }

    /// Tree-cotree generators with the current tree collapsed to a point.
    fn cut_handles(&mut self) {
        let mesh = self.mesh;
        let sp = dijkstra(mesh, &self.adjacency, &self.in_tree);
        let mut primal = vec![false; mesh.num_edges()];
        for e in sp.parent_edge.iter().flatten() {
            primal[*e] = true;
        }
        let nt = mesh.num_triangles();
        let mut dual_visited = vec![false; nt];
        let mut cotree = vec![false; mesh.num_edges()];
        let mut queue = VecDeque::from([0usize]);
        dual_visited[0] = true;
        while let Some(t) = queue.pop_front() {
            for i in 0..3 {
                let he = 3 * t + i;
                let e = mesh.he_edge(he);
                let Some(tw) = mesh.he_twin(he) else { continue };
                if primal[e] || self.is_cut[e] || dual_visited[tw / 3] {
                    continue;
                }
                dual_visited[tw / 3] = true;
                cotree[e] = true;
                queue.push_back(tw / 3);
            }
        }
        let mut handle = 0;
        for e in 0..mesh.num_edges() {
            if mesh.is_boundary_edge(e) || primal[e] || cotree[e] || self.is_cut[e] {
                continue;
            }
            let [a, b] = mesh.edge_vertices(e);
            let mut edges = vec![e];
            edges.extend(sp.path_to_source(mesh, a));
            edges.extend(sp.path_to_source(mesh, b));
            edges.retain(|&x| !self.is_cut[x]);
            self.add_path(CutTarget::Handle(handle), edges);
            handle += 1;
        }
    }

    fn connect_singularities(&mut self, sing: &SingularityConfig) {
        let mut pending: Vec<usize> = sing.entries().iter().map(|s| s.vertex).filter(|&v| !self.in_tree[v]).collect();
        pending.sort_unstable();
        while !pending.is_empty() {
            let sp = dijkstra(self.mesh, &self.adjacency, &self.in_tree);
            let (pos, &v) = pending
                .iter()
                .enumerate()
                .min_by(|a, b| sp.dist[*a.1].total_cmp(&sp.dist[*b.1]).then(a.1.cmp(b.1)))
                .expect("non-empty");
            let edges = sp.path_to_source(self.mesh, v);
            self.add_path(CutTarget::Singularity(v), edges);
            pending.remove(pos);
            pending.retain(|&w| !self.in_tree[w]);
        }
    }
}

/// Shortest-path branch cut rooted at the first boundary loop (or vertex 0
/// on closed meshes), joining internal boundary loops, handle generators and
/// singular vertices.
pub fn build_branch_cut(mesh: &TriMesh, sing: &SingularityConfig) -> Result<BranchCut, CutError> {
    let components = mesh.num_components();
    if components != 1 {
        return Err(CutError::Disconnected(components));
    }
    let nv = mesh.num_vertices();
    let mut builder = CutBuilder {
        mesh,
        adjacency: interior_adjacency(mesh),
        in_tree: vec![false; nv],
        is_cut: vec![false; mesh.num_edges()],
        paths: Vec::new(),
    };
    let root = if mesh.boundary_loops().is_empty() {
        builder.in_tree[0] = true;
        CutRoot::Vertex(0)
    } else {
        for &v in &mesh.boundary_loops()[0] {
            builder.in_tree[v] = true;
        }
        CutRoot::BoundaryLoop(0)
    };
    if mesh.boundary_loops().len() > 1 {
        builder.connect_boundary_loops();
    }
    if mesh.genus() > 0 {
        builder.cut_handles();
    }
    builder.connect_singularities(sing);

    let edges: Vec<usize> = (0..mesh.num_edges()).filter(|&e| builder.is_cut[e]).collect();
    log::debug!("branch cut: {} edges in {} paths", edges.len(), builder.paths.len());
    Ok(BranchCut { edges, root: Some(root), paths: builder.paths })
}

/// Topology of the mesh cut open along a branch cut.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutOpenTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Euler characteristic of each connected component.
    pub component_euler: Vec<i64>,
    /// Whether each component has boundary after cutting.
    pub component_has_boundary: Vec<bool>,
    /// Component id of each triangle.
    pub triangle_component: Vec<usize>,
}

pub fn cut_open_topology(mesh: &TriMesh, cut: &BranchCut) -> CutOpenTopology {
    let is_cut = cut.edge_mask(mesh.num_edges());
    let nt = mesh.num_triangles();
    let mut comp = vec![usize::MAX; nt];
    let mut ncomp = 0;
    for seed in 0..nt {
        if comp[seed] != usize::MAX {
            continue;
        }
        comp[seed] = ncomp;
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let he = 3 * t + i;
                if let Some(tw) = mesh.he_twin(he) {
                    if !is_cut[mesh.he_edge(he)] && comp[tw / 3] == usize::MAX {
                        comp[tw / 3] = ncomp;
                        stack.push(tw / 3);
                    }
                }
            }
        }
        ncomp += 1;
    }
    let mut v_count = vec![0i64; ncomp];
    let mut e_count = vec![0i64; ncomp];
    let mut f_count = vec![0i64; ncomp];
    let mut has_boundary = vec![false; ncomp];
    for t in 0..nt {
        f_count[comp[t]] += 1;
    }
    for e in 0..mesh.num_edges() {
        let (t0, t1) = mesh.edge_triangles(e);
        match t1 {
            None => {
                e_count[comp[t0]] += 1;
                has_boundary[comp[t0]] = true;
            }
            Some(t1) if is_cut[e] => {
                e_count[comp[t0]] += 1;
                e_count[comp[t1]] += 1;
                has_boundary[comp[t0]] = true;
                has_boundary[comp[t1]] = true;
            }
            Some(_) => e_count[comp[t0]] += 1,
        }
    }
    for v in 0..mesh.num_vertices() {
        let fan = mesh.vertex_fan(v);
        let boundary = mesh.is_boundary_vertex(v);
        let crossings = if boundary { fan.len() - 1 } else { fan.len() };
        // Wedge i starts after a cut crossing; record the component of each.
        let mut cuts_at = Vec::new();
        for i in 0..crossings {
            let e = mesh.he_edge(prev_he(fan[i]));
            if is_cut[e] {
                cuts_at.push(i);
            }
        }
        if boundary || cuts_at.is_empty() {
            let mut current = comp[fan[0] / 3];
            v_count[current] += 1;
            for &i in &cuts_at {
                current = comp[fan[i + 1] / 3];
                v_count[current] += 1;
            }
        } else {
            for &i in &cuts_at {
                v_count[comp[fan[(i + 1) % fan.len()] / 3]] += 1;
            }
        }
    }
    let component_euler = (0..ncomp).map(|c| v_count[c] - e_count[c] + f_count[c]).collect();
    CutOpenTopology {
        vertices: v_count.iter().sum::<i64>() as usize,
        edges: e_count.iter().sum::<i64>() as usize,
        faces: nt,
        component_euler,
        component_has_boundary: has_boundary,
        triangle_component: comp,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReport {
    /// The cut edges contain no cycle.
    pub is_forest: bool,
    /// Independent cycles in the cut graph.
    pub cycle_rank: i64,
    /// Cycles expected from handles, `2 g`.
    pub handle_cycles: i64,
    pub preserves_components: bool,
    pub cut_open_simply_connected: bool,
    pub singularities_on_cut_boundary: bool,
    pub cut_open_euler: Vec<i64>,
    pub valid: bool,
}

pub fn validate_branch_cut(mesh: &TriMesh, cut: &BranchCut, sing: &SingularityConfig) -> CutReport {
    let is_cut = cut.edge_mask(mesh.num_edges());
    // Cycle rank of the cut graph: E - V + components.
    let mut parent: Vec<usize> = (0..mesh.num_vertices()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut cycles = 0i64;
    for &e in cut.edges() {
        let [a, b] = mesh.edge_vertices(e);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            cycles += 1;
        } else {
            parent[ra] = rb;
        }
    }
    let handle_cycles = 2 * mesh.genus();
    let topo = cut_open_topology(mesh, cut);
    let preserves_components = topo.component_euler.len() == mesh.num_components();
    let cut_open_simply_connected = topo
        .component_euler
        .iter()
        .zip(&topo.component_has_boundary)
        .all(|(&chi, &bnd)| if bnd { chi == 1 } else { chi == 2 });
    let singularities_on_cut_boundary =
        sing.entries().iter().all(|s| mesh.vertex_fan(s.vertex).iter().any(|&he| is_cut[mesh.he_edge(he)]));
    let valid =
        cycles == handle_cycles && preserves_components && cut_open_simply_connected && singularities_on_cut_boundary;
    CutReport {
        is_forest: cycles == 0,
        cycle_rank: cycles,
        handle_cycles,
        preserves_components,
        cut_open_simply_connected,
        singularities_on_cut_boundary,
        cut_open_euler: topo.component_euler,
        valid,
    }
}
