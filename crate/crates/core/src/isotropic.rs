//! Isotropic cross-fields: scale `H` from a Poisson problem with curvature
//! and singularity sources, rotation `theta` from a gradient fit to
//! `n x grad H`, and diagnostics for boundary alignment and cut holonomy.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::branch_cut::{build_branch_cut, BranchCut, Singularity, SingularityConfig};
use crate::error::{CompatibilityError, CutError, Error};
use crate::fem::{
    assemble_cotan_laplacian, corner_load, curvature_neumann_load, default_compat_tol, dirac_load,
    l2_norm_per_triangle, p1_gradient_local, solve_pinned, CgOptions, CrSpace, ScalarFieldP1, ThetaFieldCR,
};
use crate::mesh::{
    build_frame_atlas, compute_curvature, prev_he, quarter_turn_distance, wrap_angle, CurvatureData, FrameAtlas,
    TriMesh, Vec2, Vec3,
};

/// `sum k_j + sum corner quarter turns - 4 chi`; zero exactly when the
/// pure-Neumann problem for `H` is solvable.
pub fn check_compatibility(mesh: &TriMesh, sing: &SingularityConfig) -> i64 {
    sing.index_sum() + mesh.corner_quarter_turns() - 4 * mesh.euler_characteristic()
}

/// Total nodal load `b` of the scale problem `K H = -b`.
pub fn scale_load(mesh: &TriMesh, sing: &SingularityConfig, curv: &CurvatureData) -> Result<Vec<f64>, Error> {
    Ok(scale_load_parts(mesh, sing, curv)?.0)
}

/// The load together with the l1 norm of its separate contributions, which
/// sets the compatibility tolerance even when the contributions cancel.
fn scale_load_parts(mesh: &TriMesh, sing: &SingularityConfig, curv: &CurvatureData) -> Result<(Vec<f64>, f64), Error> {
    let dirac = dirac_load(mesh, sing)?;
    let neumann = curvature_neumann_load(curv);
    let corners = corner_load(mesh);
    let load = (0..mesh.num_vertices()).map(|v| dirac[v] + neumann[v] + corners[v]).collect();
    let scale = default_compat_tol(&dirac) + default_compat_tol(&neumann) + default_compat_tol(&corners);
    Ok((load, scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScaleOptions {
    pub pin: usize,
    pub cg: CgOptions,
    /// Overrides the default compatibility tolerance, `1e-8` times the l1
    /// norms of the singularity, curvature and corner loads.
    pub compat_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScaleSolution {
    pub h: ScalarFieldP1,
    pub load: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves for the log-scale `H` with `H = 0` at the pin vertex.
pub fn solve_h(mesh: &TriMesh, sing: &SingularityConfig, opts: &ScaleOptions) -> Result<ScaleSolution, Error> {
    let curv = compute_curvature(mesh)?;
    solve_h_with_curvature(mesh, sing, &curv, opts)
}

pub fn solve_h_with_curvature(
    mesh: &TriMesh,
    sing: &SingularityConfig,
    curv: &CurvatureData,
    opts: &ScaleOptions,
) -> Result<ScaleSolution, Error> {
    let (load, default_tol) = scale_load_parts(mesh, sing, curv)?;
    let tolerance = opts.compat_tol.unwrap_or(default_tol);
    if check_compatibility(mesh, sing) != 0 {
        return Err(CompatibilityError { sum: load.iter().sum(), tolerance }.into());
    }
    let system = assemble_cotan_laplacian(mesh)?;
    let rhs: Vec<f64> = load.iter().map(|b| -b).collect();
    let sol = solve_pinned(&system, &rhs, opts.pin, Some(tolerance), &opts.cg)?;
    log::debug!("H solve: {} iterations, residual {:e}", sol.iterations, sol.residual);
    Ok(ScaleSolution { h: sol.field, load, iterations: sol.iterations, residual: sol.residual })
}

/// In-plane counter-clockwise quarter turn.
pub fn rot90(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Per-triangle target of the rotation fit: `n x grad H` in each frame.
pub fn theta_target(mesh: &TriMesh, atlas: &FrameAtlas, h: &ScalarFieldP1) -> Vec<Vec2> {
    p1_gradient_local(mesh, atlas, h).iter().map(rot90).collect()
}

/// The edge pinned by the isotropic rotation fit and its owning-side value.
///
/// With a boundary, this is the boundary edge leaving the first vertex of the
/// first loop, with the cross branch nearest its direction. On closed
/// meshes, the first non-cut edge of the seed triangle with `theta = 0` on
/// the seed side, so the cross contains the seed frame's `u`.
pub fn theta_pin(mesh: &TriMesh, atlas: &FrameAtlas) -> Result<(usize, f64), CutError> {
    if let Some(lp) = mesh.boundary_loops().first() {
        let v = lp[0];
        let he = mesh.vertex_fan(v)[0];
        let e = mesh.he_edge(he);
        let a = atlas.edge_angle(mesh, he / 3, e);
        return Ok((e, a - FRAC_PI_2 * (a / FRAC_PI_2).round()));
    }
    let seed = atlas.seed_triangles()[0];
    for i in 0..3 {
        let he = 3 * seed + i;
        let e = mesh.he_edge(he);
        if atlas.is_cut(e) {
            continue;
        }
        let owner = mesh.edge_triangles(e).0;
        let value = if owner == seed { 0.0 } else { -atlas.connection(e) };
        return Ok((e, value));
    }
    Err(CutError::PinOnCut(mesh.he_edge(3 * seed)))
}

#[derive(Debug, Clone)]
pub struct ThetaSolution {
    pub theta: ThetaFieldCR,
    pub pin: (usize, f64),
    pub iterations: usize,
    /// Area-weighted L2 norm of `grad theta - target`.
    pub fit_residual: f64,
}

pub fn solve_theta(
    mesh: &TriMesh,
    h: &ScalarFieldP1,
    atlas: &FrameAtlas,
    opts: &CgOptions,
) -> Result<ThetaSolution, Error> {
    let target = theta_target(mesh, atlas, h);
    let pin = theta_pin(mesh, atlas)?;
    let space = CrSpace::free_jumps(mesh, atlas, pin)?;
    let (theta, iterations) = space.solve_fit(mesh, atlas, &target, None, opts)?;
    let fit_residual = fit_residual(mesh, atlas, &theta, &target);
    log::debug!("theta fit: {iterations} iterations, residual {fit_residual:e}");
    Ok(ThetaSolution { theta, pin, iterations, fit_residual })
}

/// Area-weighted L2 norm of `grad theta - target` over all triangles.
pub fn fit_residual(mesh: &TriMesh, atlas: &FrameAtlas, theta: &ThetaFieldCR, target: &[Vec2]) -> f64 {
    let diff: Vec<Vec2> = theta.gradients(atlas).iter().zip(target).map(|(g, t)| g - t).collect();
    l2_norm_per_triangle(mesh, &diff)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurlCheck {
    /// Circulation of `n x grad H` around each interior vertex plus the
    /// holonomy of the frames; zero on the boundary.
    pub circulation: Vec<f64>,
    /// `circulation - 2 pi k / 4`.
    pub residual: Vec<f64>,
}

/// Discrete curl identity: around every interior vertex, the circulation of
/// the rotation target along the path joining incident edge midpoints plus
/// the frame holonomy equals the designed turn `2 pi k / 4`.
pub fn curl_consistency_check(
    mesh: &TriMesh,
    h: &ScalarFieldP1,
    atlas: &FrameAtlas,
    curv: &CurvatureData,
    sing: &SingularityConfig,
) -> CurlCheck {
    let target = theta_target(mesh, atlas, h);
    let index = sing.index_map(mesh.num_vertices());
    let mut circulation = vec![0.0; mesh.num_vertices()];
    let mut residual = vec![0.0; mesh.num_vertices()];
    for v in 0..mesh.num_vertices() {
        if mesh.is_boundary_vertex(v) {
            continue;
        }
        let mut c = 0.0;
        for he in mesh.vertex_fan(v) {
            let t = he / 3;
            let local = atlas.local_coords(t);
            let mid = |h: usize| (local[h % 3] + local[(h + 1) % 3]) * 0.5;
            c += target[t].dot(&(mid(prev_he(he)) - mid(he)));
        }
        let k = curv.vertex_gaussian[v];
        let holonomy = k + wrap_angle(atlas.vertex_holonomy(mesh, v) - k);
        circulation[v] = c + holonomy;
        residual[v] = circulation[v] - 2.0 * PI * index[v] as f64 / 4.0;
    }
    CurlCheck { circulation, residual }
}

/// Cross per triangle with an isotropic size per vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossField {
    /// Representative angle in `[0, pi / 2)`, measured from the frame's `u`.
    pub angles: Vec<f64>,
    /// `e^H` per vertex.
    pub sizes: Vec<f64>,
    pub singularities: Vec<Singularity>,
}

impl CrossField {
    /// Branch `k` (0..4) of triangle `t` as a unit vector in 3-space.
    pub fn branch(&self, atlas: &FrameAtlas, t: usize, k: usize) -> Vec3 {
        atlas.frame(t).direction(self.angles[t] + k as f64 * FRAC_PI_2)
    }

    pub fn branches(&self, atlas: &FrameAtlas, t: usize) -> [Vec3; 4] {
        [0, 1, 2, 3].map(|k| self.branch(atlas, t, k))
    }
}

fn reduce_quarter(a: f64) -> f64 {
    let r = a.rem_euclid(FRAC_PI_2);
    // rem_euclid can return exactly pi/2 for tiny negative inputs.
    if r >= FRAC_PI_2 {
        0.0
    } else {
        r
    }
}

pub fn reconstruct_crossfield(theta: &ThetaFieldCR, h: &ScalarFieldP1, sing: &SingularityConfig) -> CrossField {
    CrossField {
        angles: theta.triangle_means().into_iter().map(reduce_quarter).collect(),
        sizes: h.exp(),
        singularities: sing.entries().to_vec(),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LoopAlignment {
    pub loop_index: usize,
    /// Largest angular distance between a cross branch and a boundary edge.
    pub max_deviation: f64,
    pub worst_edge: usize,
    /// Whether the rotation fit is pinned on this loop.
    pub pinned: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CutEdgeHolonomy {
    pub edge: usize,
    pub jump: f64,
    /// Distance of the jump to the nearest multiple of `pi / 2`.
    pub defect: f64,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct SolverStats {
    pub h_iterations: usize,
    pub h_residual: f64,
    pub theta_iterations: usize,
    pub theta_fit_residual: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DiagnosticsReport {
    pub compatibility_residual: i64,
    pub loops: Vec<LoopAlignment>,
    pub max_alignment_deviation: f64,
    pub cut_edges: Vec<CutEdgeHolonomy>,
    pub max_holonomy_defect: f64,
    pub solver: SolverStats,
}

/// Boundary alignment per loop and holonomy quantization per cut edge.
pub fn alignment_report(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    cut: &BranchCut,
    theta: &ThetaFieldCR,
    sing: &SingularityConfig,
) -> DiagnosticsReport {
    let pinned_loop = if mesh.boundary_loops().is_empty() { None } else { Some(0) };
    let loops: Vec<LoopAlignment> = mesh
        .boundary_loops()
        .iter()
        .enumerate()
        .map(|(l, lp)| {
            let mut worst = (0.0, usize::MAX);
            for &v in lp {
                let he = mesh.vertex_fan(v)[0];
                let e = mesh.he_edge(he);
                let a = atlas.edge_angle(mesh, he / 3, e);
                let d = quarter_turn_distance(theta.slot(he) - a);
                if worst.1 == usize::MAX || d > worst.0 {
                    worst = (d, e);
                }
            }
            LoopAlignment { loop_index: l, max_deviation: worst.0, worst_edge: worst.1, pinned: pinned_loop == Some(l) }
        })
        .collect();
    let cut_edges: Vec<CutEdgeHolonomy> = cut
        .edges()
        .iter()
        .map(|&e| {
            let jump = theta.jump(mesh, atlas, e).expect("cut edges are interior");
            CutEdgeHolonomy { edge: e, jump, defect: quarter_turn_distance(jump) }
        })
        .collect();
    DiagnosticsReport {
        compatibility_residual: check_compatibility(mesh, sing),
        max_alignment_deviation: loops.iter().map(|l| l.max_deviation).fold(0.0, f64::max),
        loops,
        max_holonomy_defect: cut_edges.iter().map(|c| c.defect).fold(0.0, f64::max),
        cut_edges,
        solver: SolverStats::default(),
    }
}

/// Everything produced by one isotropic solve.
#[derive(Debug, Clone)]
pub struct IsotropicSolution {
    pub curvature: CurvatureData,
    pub cut: BranchCut,
    pub atlas: FrameAtlas,
    pub scale: ScaleSolution,
    pub theta: ThetaSolution,
    pub cross: CrossField,
    pub report: DiagnosticsReport,
}

/// Cut, frames, `H`, `theta`, cross and diagnostics in one call.
pub fn solve_isotropic(
    mesh: &TriMesh,
    sing: &SingularityConfig,
    scale_opts: &ScaleOptions,
    theta_opts: &CgOptions,
) -> Result<IsotropicSolution, Error> {
    let curvature = compute_curvature(mesh)?;
    let scale = solve_h_with_curvature(mesh, sing, &curvature, scale_opts)?;
    let cut = build_branch_cut(mesh, sing)?;
    let atlas = build_frame_atlas(mesh, &cut)?;
    let theta = solve_theta(mesh, &scale.h, &atlas, theta_opts)?;
    let cross = reconstruct_crossfield(&theta.theta, &scale.h, sing);
    let mut report = alignment_report(mesh, &atlas, &cut, &theta.theta, sing);
    report.solver = SolverStats {
        h_iterations: scale.iterations,
        h_residual: scale.residual,
        theta_iterations: theta.iterations,
        theta_fit_residual: theta.fit_residual,
    };
    Ok(IsotropicSolution { curvature, cut, atlas, scale, theta, cross, report })
}

/// Gradient of the exact log-scale on the unit disk for interior point
/// singularities `(position, k)`: a Neumann Green's function with images.
pub fn unit_disk_scale_gradient(singularities: &[(Vec3, i32)], x: &Vec3) -> Vec3 {
    let mut g = Vec3::zeros();
    let grad_log = |d: Vec3| d / d.norm_squared();
    for (y, k) in singularities {
        let w = *k as f64 / 4.0;
        g += grad_log(x - y) * w;
        let r = y.norm();
        if r > 0.0 {
            // log| |y| x - y/|y| | has gradient |y| (|y| x - y/|y|) / |.|^2.
            let d = x * r - y / r;
            g += d * (r / d.norm_squared()) * w;
        } else {
            // Image at infinity: log| y/|y| | is constant.
        }
    }
    g
}

/// Area-weighted L2 norm of `grad theta - n x exact_grad(centroid)` over the
/// triangles for which `keep(centroid)` holds.
pub fn rotation_residual(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    theta: &ThetaFieldCR,
    exact_grad: impl Fn(&Vec3) -> Vec3,
    keep: impl Fn(&Vec3) -> bool,
) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        let c = mesh.triangle_centroid(t);
        if !keep(&c) {
            continue;
        }
        let target = rot90(&atlas.frame(t).to_local(&exact_grad(&c)));
        sum += mesh.triangle_area(t) * (theta.gradient(atlas, t) - target).norm_squared();
    }
    sum.sqrt()
}
