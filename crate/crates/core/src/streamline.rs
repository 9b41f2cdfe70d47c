//! Separatrix preview: streamlines traced along cross branches.
//!
//! The cross direction is constant per triangle, so each step is an exact
//! straight segment from the entry point to the exit edge. Across an edge
//! the incoming direction is transported into the next frame and matched to
//! the closest branch that points into the new triangle.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::branch_cut::SingularityConfig;
use crate::config::SeedRule;
use crate::fem::barycentric_gradients_2d;
use crate::isotropic::CrossField;
use crate::mesh::{wrap_angle, FrameAtlas, TriMesh, Vec2, Vec3, VertexKind};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "vertex")]
pub enum Termination {
    Boundary,
    /// Entered the vicinity of the given singular vertex.
    Singularity(usize),
    LengthCap,
    Cycle,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Boundary => "boundary",
            Termination::Singularity(_) => "singularity",
            Termination::LengthCap => "length_cap",
            Termination::Cycle => "cycle",
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Termination::Boundary => 0,
            Termination::Singularity(_) => 1,
            Termination::LengthCap => 2,
            Termination::Cycle => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Streamline {
    pub seed_vertex: usize,
    /// Initial direction in 3-space.
    pub direction: Vec3,
    pub points: Vec<Vec3>,
    /// Triangle containing each segment `points[i]..points[i + 1]`.
    pub triangles: Vec<usize>,
    pub length: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StreamlineSet {
    pub lines: Vec<Streamline>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TerminationCounts {
    pub boundary: usize,
    pub singularity: usize,
    pub length_cap: usize,
    pub cycle: usize,
}

impl StreamlineSet {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn counts(&self) -> TerminationCounts {
        let mut c = TerminationCounts::default();
        for l in &self.lines {
            match l.termination {
                Termination::Boundary => c.boundary += 1,
                Termination::Singularity(_) => c.singularity += 1,
                Termination::LengthCap => c.length_cap += 1,
                Termination::Cycle => c.cycle += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub seeds: SeedRule,
    /// Length cap as a multiple of the bounding-box diagonal.
    pub cap_factor: f64,
    /// A line stops once it enters a triangle on the same branch more often.
    pub max_visits: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { seeds: SeedRule::Singularities, cap_factor: 50.0, max_visits: 4 }
    }
}

struct Tracer<'a> {
    mesh: &'a TriMesh,
    atlas: &'a FrameAtlas,
    cross: &'a CrossField,
    grads: Vec<[Vec2; 3]>,
    /// `(vertex, radius)` of every singularity.
    targets: Vec<(usize, f64)>,
    cap: f64,
    max_visits: usize,
    max_steps: usize,
}

fn branch_index(angle: f64, base: f64) -> usize {
    ((angle - base) / FRAC_PI_2).round().rem_euclid(4.0) as usize
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * s - p).norm()
}

impl Tracer<'_> {
    fn rates(&self, t: usize, angle: f64) -> [f64; 3] {
        let d = Vec2::new(angle.cos(), angle.sin());
        self.grads[t].map(|g| g.dot(&d))
    }

    fn point(&self, t: usize, bary: &[f64; 3]) -> Vec3 {
        let tri = self.mesh.triangles()[t];
        (0..3).map(|i| self.mesh.position(tri[i]) * bary[i]).sum()
    }

    /// Radial directions at an interior vertex along which the cross is
    /// aligned with the ray. The cross angle is interpolated linearly
    /// between wedge centres of the unfolded fan, so a singularity of index
    /// `k` yields `4 - k` rays whenever that interpolation is monotone.
    fn interior_seed_directions(&self, v: usize) -> Vec<(usize, f64)> {
        let fan = self.mesh.vertex_fan(v);
        let m = fan.len();
        // Wedge start `phi[j]`, opening `alpha[j]` and frame angle of its first edge.
        let mut phi = Vec::with_capacity(m + 1);
        let mut alpha = Vec::with_capacity(m);
        let mut edge_angle = Vec::with_capacity(m);
        let mut acc = 0.0;
        for &he in &fan {
            let t = he / 3;
            let i = he % 3;
            let p = self.atlas.local_coords(t);
            let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
            let e1 = b - a;
            let e2 = c - a;
            phi.push(acc);
            let open = e1.perp(&e2).atan2(e1.dot(&e2));
            alpha.push(open);
            edge_angle.push(e1.y.atan2(e1.x));
            acc += open;
        }
        let total = acc;
        // Cross angle in unfolded coordinates, unwrapped to be continuous.
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let raw = self.cross.angles[fan[j] / 3] - edge_angle[j] + phi[j];
            let b = match beta.last() {
                None => raw,
                Some(&prev) => raw + FRAC_PI_2 * ((prev - raw) / FRAC_PI_2).round(),
            };
            beta.push(b);
        }
        let centre = |j: usize| phi[j] + 0.5 * alpha[j];
        let wedge_of = |x: f64| (0..m).rev().find(|&j| x >= phi[j]).unwrap_or(0);
        let mut roots: Vec<f64> = Vec::new();
        for j in 0..m {
            let (x0, g0) = (centre(j), beta[j] - centre(j));
            let (x1, b1) = if j + 1 < m {
                (centre(j + 1), beta[j + 1])
            } else {
                let wrapped = beta[0] + FRAC_PI_2 * ((beta[m - 1] - beta[0]) / FRAC_PI_2).round();
                (centre(0) + total, wrapped)
            };
            let g1 = b1 - x1;
            // Half-open in the parameter so shared endpoints count once.
            let (lo, hi) = (g0.min(g1), g0.max(g1));
            let n_lo = (lo / FRAC_PI_2).ceil() as i64;
            let n_hi = (hi / FRAC_PI_2).floor() as i64;
            for n in n_lo..=n_hi {
                let target = n as f64 * FRAC_PI_2;
                if g1 == g0 {
                    continue;
                }
                let s = (target - g0) / (g1 - g0);
                if !(0.0..1.0).contains(&s) {
                    continue;
                }
                roots.push((x0 + s * (x1 - x0)).rem_euclid(total));
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
            .into_iter()
            .map(|x| {
                let j = wedge_of(x);
                (fan[j] / 3, edge_angle[j] + (x - phi[j]).clamp(1e-9 * alpha[j], alpha[j] * (1.0 - 1e-9)))
            })
            .collect()
    }

    /// Branch angles leaving vertex `v` into the interior of its fan, with
    /// the triangle each one starts in.
    fn seed_directions(&self, v: usize) -> Vec<(usize, f64)> {
        if !self.mesh.is_boundary_vertex(v) {
            return self.interior_seed_directions(v);
        }
        let mut out: Vec<(usize, f64, Vec3)> = Vec::new();
        for he in self.mesh.vertex_fan(v) {
            let t = he / 3;
            let i = he % 3;
            for k in 0..4 {
                let angle = self.cross.angles[t] + k as f64 * FRAC_PI_2;
                let mu = self.rates(t, angle);
                let scale = self.grads[t].iter().map(|g| g.norm()).fold(0.0, f64::max);
                let inside = (0..3).filter(|&j| j != i).all(|j| mu[j] >= -1e-9 * scale) && mu[i] < 0.0;
                if !inside {
                    continue;
                }
                let dir = self.atlas.frame(t).direction(angle);
                if out.iter().all(|(_, _, d)| d.dot(&dir) < 1.0 - 1e-9) {
                    out.push((t, angle, dir));
                }
            }
        }
        out.into_iter().map(|(t, a, _)| (t, a)).collect()
    }

    fn trace(&self, seed: usize, t0: usize, angle0: f64) -> Streamline {
        let tri = self.mesh.triangles()[t0];
        let mut bary = [0.0; 3];
        bary[tri.iter().position(|&x| x == seed).expect("seed in triangle")] = 1.0;
        let mut t = t0;
        let mut angle = angle0;
        let start = self.mesh.position(seed);
        let mut line = Streamline {
            seed_vertex: seed,
            direction: self.atlas.frame(t0).direction(angle0),
            points: vec![start],
            triangles: Vec::new(),
            length: 0.0,
            termination: Termination::LengthCap,
        };
        let mut visits: HashMap<(usize, usize), usize> = HashMap::new();
        for _ in 0..self.max_steps {
            let k = branch_index(angle, self.cross.angles[t]);
            let count = visits.entry((t, k)).or_insert(0);
            *count += 1;
            if *count > self.max_visits {
                line.termination = Termination::Cycle;
                return line;
            }
            let mu = self.rates(t, angle);
            // Exit through the side whose barycentric coordinate reaches zero first.
            let mut exit = None;
            for i in 0..3 {
                if mu[i] < -EPS {
                    let s = (bary[i] / -mu[i]).max(0.0);
                    if exit.is_none_or(|(_, best)| s < best) {
                        exit = Some((i, s));
                    }
                }
            }
            let Some((i, s)) = exit else {
                // Direction degenerate for this triangle; cannot advance.
                line.termination = Termination::LengthCap;
                return line;
            };
            let mut next = [0.0; 3];
            for j in 0..3 {
                next[j] = (bary[j] + s * mu[j]).max(0.0);
            }
            next[i] = 0.0;
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= total);
            let a = *line.points.last().unwrap();
            let b = self.point(t, &next);
            if s > 0.0 {
                line.points.push(b);
                line.triangles.push(t);
                line.length += (b - a).norm();
            }
            for &(v, radius) in &self.targets {
                if v == seed && line.length < 2.0 * radius {
                    continue;
                }
                if point_segment_distance(&self.mesh.position(v), &a, &b) < radius {
                    line.termination = Termination::Singularity(v);
                    return line;
                }
            }
            if line.length > self.cap {
                line.termination = Termination::LengthCap;
                return line;
            }
            let he = 3 * t + (i + 1) % 3;
            let Some(twin) = self.mesh.he_twin(he) else {
                line.termination = Termination::Boundary;
                return line;
            };
            let e = self.mesh.he_edge(he);
            let nt = twin / 3;
            let incoming = angle + self.atlas.transport(self.mesh, e, t);
            // Carry barycentric weights of the shared edge's endpoints.
            let tri = self.mesh.triangles()[t];
            let ntri = self.mesh.triangles()[nt];
            let mut nb = [0.0; 3];
            for j in 0..3 {
                if let Some(p) = ntri.iter().position(|&x| x == tri[j]) {
                    nb[p] = next[j];
                }
            }
            let entry = twin % 3;
            // Entry side is opposite the local vertex not on the shared edge.
            let opposite = (entry + 2) % 3;
            let base = self.cross.angles[nt];
            let mut best: Option<(f64, f64)> = None;
            for k in 0..4 {
                let cand = base + k as f64 * FRAC_PI_2;
                if self.rates(nt, cand)[opposite] < -EPS {
                    continue;
                }
                let d = wrap_angle(cand - incoming).abs();
                if best.is_none_or(|(bd, _)| d < bd - 1e-12) {
                    best = Some((d, cand));
                }
            }
            t = nt;
            bary = nb;
            angle = best.expect("a quarter-turn family always has an inward branch").1.rem_euclid(TAU);
        }
        line.termination = Termination::LengthCap;
        line
    }
}

/// Traces every branch leaving the seed vertices selected by `opts.seeds`.
pub fn trace_streamlines(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    cross: &CrossField,
    sing: &SingularityConfig,
    opts: &TraceOptions,
) -> StreamlineSet {
    let local_radius = |v: usize| {
        let n = mesh.vertex_neighbors(v);
        n.iter().map(|&w| (mesh.position(w) - mesh.position(v)).norm()).sum::<f64>() / n.len().max(1) as f64
    };
    let tracer = Tracer {
        mesh,
        atlas,
        cross,
        grads: (0..mesh.num_triangles()).map(|t| barycentric_gradients_2d(atlas.local_coords(t))).collect(),
        targets: sing.entries().iter().map(|s| (s.vertex, local_radius(s.vertex))).collect(),
        cap: opts.cap_factor * mesh.bounding_box_diagonal(),
        max_visits: opts.max_visits,
        max_steps: 64 * mesh.num_triangles().max(16) * opts.max_visits.max(1),
    };
    let mut seeds: Vec<usize> = Vec::new();
    if matches!(opts.seeds, SeedRule::Singularities | SeedRule::All) {
        seeds.extend(sing.entries().iter().map(|s| s.vertex));
    }
    if matches!(opts.seeds, SeedRule::Corners | SeedRule::All) {
        seeds.extend((0..mesh.num_vertices()).filter(|&v| matches!(mesh.vertex_kind(v), VertexKind::Corner(_))));
    }
    let mut lines = Vec::new();
    for v in seeds {
        for (t, angle) in tracer.seed_directions(v) {
            lines.push(tracer.trace(v, t, angle));
        }
    }
    StreamlineSet { lines }
}
