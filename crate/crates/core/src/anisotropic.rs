//! Anisotropic integrability: the error functional `E(theta, H1, H2)` and
//! its alternating minimisation.
//!
//! With `u = (cos theta, sin theta)`, `v = (-sin theta, cos theta)` and
//! `g = grad theta` on a triangle, the two residuals are
//!
//! ```text
//! R1 = u . grad H2 - v . g
//! R2 = v . grad H1 + u . g
//! ```
//!
//! and `E = sum_T area(T) (R1^2 + R2^2)`. Both vanish for an isotropic
//! solution embedded as `(theta, H, H)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::Serialize;

use crate::branch_cut::SingularityConfig;
use crate::error::{CutError, Error};
use crate::fem::{
    conjugate_gradient, p1_gradient_local, CgOptions, CrEdgeRule, CrSpace, CsrMatrix, ScalarFieldP1, ThetaFieldCR,
};
use crate::isotropic::theta_pin;
use crate::mesh::{prev_he, wrap_angle, FrameAtlas, TriMesh, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisoOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Relative improvement below which a loop is considered stagnant.
    pub stagnation: f64,
    /// Weight of the proximal smoothness term in the `(H1, H2)` step.
    pub regularization: f64,
    /// Vertex where `H1` and `H2` are pinned to zero.
    pub pin_vertex: usize,
    pub cg: CgOptions,
}

impl Default for AnisoOptions {
    fn default() -> Self {
        AnisoOptions {
            max_outer: 100,
            max_inner: 50,
            stagnation: 1e-12,
            regularization: 1.0,
            pin_vertex: 0,
            cg: CgOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisoState {
    pub theta: ThetaFieldCR,
    pub h1: ScalarFieldP1,
    pub h2: ScalarFieldP1,
    pub energy: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

/// Per-triangle residuals `(R1, R2)`.
pub fn integrability_residuals(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    theta: &ThetaFieldCR,
    h1: &ScalarFieldP1,
    h2: &ScalarFieldP1,
) -> Vec<(f64, f64)> {
    let g1 = p1_gradient_local(mesh, atlas, h1);
    let g2 = p1_gradient_local(mesh, atlas, h2);
    (0..mesh.num_triangles())
        .map(|t| {
            let (u, v) = frame_of(theta.triangle_mean(t));
            let g = theta.gradient(atlas, t);
            (u.dot(&g2[t]) - v.dot(&g), v.dot(&g1[t]) + u.dot(&g))
        })
        .collect()
}

/// `R1^2 + R2^2` per triangle.
pub fn integrability_density(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    theta: &ThetaFieldCR,
    h1: &ScalarFieldP1,
    h2: &ScalarFieldP1,
) -> Vec<f64> {
    integrability_residuals(mesh, atlas, theta, h1, h2).into_iter().map(|(a, b)| a * a + b * b).collect()
}

pub fn integrability_error_of(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    theta: &ThetaFieldCR,
    h1: &ScalarFieldP1,
    h2: &ScalarFieldP1,
) -> f64 {
    integrability_density(mesh, atlas, theta, h1, h2).iter().enumerate().map(|(t, d)| mesh.triangle_area(t) * d).sum()
}

pub fn integrability_error(mesh: &TriMesh, atlas: &FrameAtlas, state: &AnisoState) -> f64 {
    integrability_error_of(mesh, atlas, &state.theta, &state.h1, &state.h2)
}

fn frame_of(theta: f64) -> (Vec2, Vec2) {
    let (s, c) = theta.sin_cos();
    (Vec2::new(c, s), Vec2::new(-s, c))
}

/// Boundary values and cut jumps that the anisotropic angle field keeps fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaConstraints {
    rules: Vec<CrEdgeRule>,
}

impl ThetaConstraints {
    /// Explicit data: `boundary` gives owning-side values on boundary edges,
    /// `jumps` the jump on every cut edge, `pin` an optional extra fixed
    /// edge (needed on closed meshes).
    pub fn new(
        mesh: &TriMesh,
        atlas: &FrameAtlas,
        boundary: &[(usize, f64)],
        jumps: &[(usize, f64)],
        pin: Option<(usize, f64)>,
    ) -> Result<Self, CutError> {
        let mut rules: Vec<CrEdgeRule> = (0..mesh.num_edges()).map(|_| CrEdgeRule::Shared).collect();
        for &(e, v) in boundary {
            if !mesh.is_boundary_edge(e) {
                return Err(CutError::NotInterior(e));
            }
            rules[e] = CrEdgeRule::Fixed(v);
        }
        for &(e, j) in jumps {
            if !atlas.is_cut(e) {
                return Err(CutError::NotInterior(e));
            }
            rules[e] = CrEdgeRule::FixedJump(j);
        }
        for e in 0..mesh.num_edges() {
            if atlas.is_cut(e) && !matches!(rules[e], CrEdgeRule::FixedJump(_)) {
                rules[e] = CrEdgeRule::FixedJump(0.0);
            }
        }
        if let Some((e, v)) = pin {
            if atlas.is_cut(e) {
                return Err(CutError::PinOnCut(e));
            }
            rules[e] = CrEdgeRule::Fixed(v);
        }
        Ok(ThetaConstraints { rules })
    }

    /// Tangency on every boundary edge using the cross branch nearest to
    /// `theta_ref`, and cut jumps rounded to multiples of `pi / 2`.
    pub fn from_reference(mesh: &TriMesh, atlas: &FrameAtlas, theta_ref: &ThetaFieldCR) -> Result<Self, CutError> {
        let mut boundary = Vec::new();
        let mut jumps = Vec::new();
        for e in 0..mesh.num_edges() {
            let [h0, _] = mesh.edge_halfedges(e);
            let h0 = h0.expect("owning halfedge");
            if mesh.is_boundary_edge(e) {
                let a = atlas.edge_angle(mesh, h0 / 3, e);
                let q = ((theta_ref.slot(h0) - a) / FRAC_PI_2).round();
                boundary.push((e, a + FRAC_PI_2 * q));
            } else if atlas.is_cut(e) {
                let j = theta_ref.jump(mesh, atlas, e).expect("interior edge");
                jumps.push((e, FRAC_PI_2 * (j / FRAC_PI_2).round()));
            }
        }
        let pin = if mesh.boundary_loops().is_empty() {
            let (e, _) = theta_pin(mesh, atlas)?;
            let h0 = mesh.edge_halfedges(e)[0].expect("owning halfedge");
            Some((e, theta_ref.slot(h0)))
        } else {
            None
        };
        ThetaConstraints::new(mesh, atlas, &boundary, &jumps, pin)
    }

    pub fn rules(&self) -> &[CrEdgeRule] {
        &self.rules
    }

    pub fn space(&self, mesh: &TriMesh, atlas: &FrameAtlas) -> CrSpace {
        CrSpace::new(mesh, atlas, &self.rules)
    }

    /// Checks that the jumps met counter-clockwise around each interior
    /// vertex add up to `-2 pi k / 4` modulo `2 pi`.
    pub fn check_jumps(&self, mesh: &TriMesh, sing: &SingularityConfig) -> Result<(), CutError> {
        let index = sing.index_map(mesh.num_vertices());
        for v in 0..mesh.num_vertices() {
            if mesh.is_boundary_vertex(v) {
                continue;
            }
            let mut sum = 0.0;
            for he in mesh.vertex_fan(v) {
                let e = mesh.he_edge(prev_he(he));
                if let CrEdgeRule::FixedJump(j) = self.rules[e] {
                    let from_owner = mesh.edge_triangles(e).0 == he / 3;
                    sum += if from_owner { j } else { -j };
                }
            }
            let defect = wrap_angle(sum + 2.0 * PI * index[v] as f64 / 4.0);
            if defect.abs() > 1e-6 {
                return Err(CutError::InconsistentJumps { vertex: v, defect });
            }
        }
        Ok(())
    }
}

/// Harmonic extension of the boundary values with fixed cut jumps.
pub fn theta_init(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    constraints: &ThetaConstraints,
    sing: &SingularityConfig,
    opts: &CgOptions,
) -> Result<ThetaFieldCR, Error> {
    constraints.check_jumps(mesh, sing)?;
    let space = constraints.space(mesh, atlas);
    let zero = vec![Vec2::zeros(); mesh.num_triangles()];
    let (theta, _) = space.solve_fit(mesh, atlas, &zero, None, opts)?;
    Ok(theta)
}

/// Outcome of an inner loop: the best iterate and its energy history,
/// starting with the energy of the initial state.
#[derive(Debug, Clone)]
pub struct InnerResult<T> {
    pub value: T,
    pub energy: f64,
    pub history: Vec<f64>,
}

fn pinned_solve(matrix: &CsrMatrix, rhs: &[f64], x0: &[f64], pin: usize, opts: &CgOptions) -> Result<Vec<f64>, Error> {
    let mut fixed = vec![false; matrix.dim()];
    fixed[pin] = true;
    let mut start = x0.to_vec();
    start[pin] = 0.0;
    Ok(conjugate_gradient(matrix, rhs, &start, &fixed, opts)?.x)
}

fn improved(new: f64, old: f64, stagnation: f64) -> bool {
    new < old && (old - new) > stagnation * old.abs()
}

/// Regularised `(H1, H2)` step with `theta` frozen: each iterate minimises
/// `E + w (||grad f1 - grad H1_prev||^2 + ||grad f2 - grad H2_prev||^2)`.
pub fn solve_h1h2(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    theta: &ThetaFieldCR,
    h1_0: &ScalarFieldP1,
    h2_0: &ScalarFieldP1,
    opts: &AnisoOptions,
) -> Result<InnerResult<(ScalarFieldP1, ScalarFieldP1)>, Error> {
    let nv = mesh.num_vertices();
    let w = opts.regularization;
    let mut t1 = Vec::with_capacity(9 * mesh.num_triangles());
    let mut t2 = Vec::with_capacity(9 * mesh.num_triangles());
    // Per-triangle data reused by every iteration.
    let mut data = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let b = crate::fem::barycentric_gradients_2d(atlas.local_coords(t));
        let area = mesh.triangle_area(t);
        let (u, v) = frame_of(theta.triangle_mean(t));
        let g = theta.gradient(atlas, t);
        for i in 0..3 {
            for j in 0..3 {
                let reg = w * b[i].dot(&b[j]);
                t1.push((tri[i], tri[j], area * (v.dot(&b[i]) * v.dot(&b[j]) + reg)));
                t2.push((tri[i], tri[j], area * (u.dot(&b[i]) * u.dot(&b[j]) + reg)));
            }
        }
        data.push((tri, b, area, u, v, g));
    }
    let m1 = CsrMatrix::from_triplets(nv, &t1);
    let m2 = CsrMatrix::from_triplets(nv, &t2);

    let energy = |a: &ScalarFieldP1, b: &ScalarFieldP1| integrability_error_of(mesh, atlas, theta, a, b);
    let mut best = (h1_0.clone(), h2_0.clone());
    let mut best_e = energy(h1_0, h2_0);
    let mut history = vec![best_e];
    let mut prev = best.clone();
    for _ in 0..opts.max_inner {
        let mut r1 = vec![0.0; nv];
        let mut r2 = vec![0.0; nv];
        for (tri, b, area, u, v, g) in &data {
            let grad = |f: &ScalarFieldP1| -> Vec2 { (0..3).map(|k| b[k] * f.values[tri[k]]).sum() };
            let p1 = grad(&prev.0) * w;
            let p2 = grad(&prev.1) * w;
            // f1 drives v . grad f1 towards -u . g; f2 drives u . grad f2 towards v . g.
            let target1 = v * (-u.dot(g)) + p1;
            let target2 = u * v.dot(g) + p2;
            for k in 0..3 {
                r1[tri[k]] += area * b[k].dot(&target1);
                r2[tri[k]] += area * b[k].dot(&target2);
            }
        }
        let f1 = pinned_solve(&m1, &r1, &prev.0.values, opts.pin_vertex, &opts.cg)?;
        let f2 = pinned_solve(&m2, &r2, &prev.1.values, opts.pin_vertex, &opts.cg)?;
        let next = (ScalarFieldP1 { values: f1 }, ScalarFieldP1 { values: f2 });
        let e = energy(&next.0, &next.1);
        history.push(e);
        if !(e < best_e) {
            break;
        }
        let stagnant = !improved(e, best_e, opts.stagnation);
        best = next.clone();
        best_e = e;
        prev = next;
        if stagnant || e == 0.0 {
            break;
        }
    }
    Ok(InnerResult { value: best, energy: best_e, history })
}

/// `theta` step with `(H1, H2)` frozen: each iteration fits `grad f` to
/// `-(v . grad H1) u + (u . grad H2) v` with `(u, v)` taken from the
/// previous iterate, keeping boundary values and cut jumps.
pub fn solve_theta_fixed(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    space: &CrSpace,
    h1: &ScalarFieldP1,
    h2: &ScalarFieldP1,
    theta0: &ThetaFieldCR,
    opts: &AnisoOptions,
) -> Result<InnerResult<ThetaFieldCR>, Error> {
    let g1 = p1_gradient_local(mesh, atlas, h1);
    let g2 = p1_gradient_local(mesh, atlas, h2);
    let energy = |th: &ThetaFieldCR| integrability_error_of(mesh, atlas, th, h1, h2);
    let mut best = theta0.clone();
    let mut best_e = energy(theta0);
    let mut history = vec![best_e];
    let mut prev = theta0.clone();
    for _ in 0..opts.max_inner {
        let target: Vec<Vec2> = (0..mesh.num_triangles())
            .map(|t| {
                let (u, v) = frame_of(prev.triangle_mean(t));
                u * -v.dot(&g1[t]) + v * u.dot(&g2[t])
            })
            .collect();
        let x0 = space.restrict(&prev);
        let (next, _) = space.solve_fit(mesh, atlas, &target, Some(&x0), &opts.cg)?;
        let e = energy(&next);
        history.push(e);
        if !(e < best_e) {
            break;
        }
        let stagnant = !improved(e, best_e, opts.stagnation);
        best = next.clone();
        best_e = e;
        prev = next;
        if stagnant || e == 0.0 {
            break;
        }
    }
    Ok(InnerResult { value: best, energy: best_e, history })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Init,
    H1H2,
    Theta,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Init => "init",
            Stage::H1H2 => "h1h2",
            Stage::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub iteration: usize,
    pub stage: Stage,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnisoResult {
    /// Best state found.
    pub state: AnisoState,
    /// Energy of `theta_init` with `H1 = H2 = 0`.
    pub start_energy: f64,
    /// Outer energies `eps^0, eps^1, ...`, including the final rejected one.
    pub outer: Vec<f64>,
    /// Every stage's energy in order.
    pub history: Vec<EnergyRecord>,
}

impl AnisoResult {
    pub fn initial_energy(&self) -> f64 {
        self.outer[0]
    }
}

/// Alternating minimisation: `(H1, H2)` from `theta^0`, then repeatedly
/// `theta` from `(H1, H2)` and `(H1, H2)` from `theta` while the outer
/// energy decreases.
pub fn alternate_minimize(
    mesh: &TriMesh,
    atlas: &FrameAtlas,
    constraints: &ThetaConstraints,
    sing: &SingularityConfig,
    opts: &AnisoOptions,
) -> Result<AnisoResult, Error> {
    let theta0 = theta_init(mesh, atlas, constraints, sing, &opts.cg)?;
    let space = constraints.space(mesh, atlas);
    let nv = mesh.num_vertices();
    let zero = ScalarFieldP1::zeros(nv);
    let start_energy = integrability_error_of(mesh, atlas, &theta0, &zero, &zero);
    let mut history = vec![EnergyRecord { iteration: 0, stage: Stage::Init, energy: start_energy }];

    let hs = solve_h1h2(mesh, atlas, &theta0, &zero, &zero, opts)?;
    let mut inner_iterations = hs.history.len() - 1;
    history.push(EnergyRecord { iteration: 0, stage: Stage::H1H2, energy: hs.energy });
    let mut best = AnisoState {
        theta: theta0,
        h1: hs.value.0,
        h2: hs.value.1,
        energy: hs.energy,
        outer_iterations: 0,
        inner_iterations,
    };
    let mut outer = vec![best.energy];
    for k in 1..=opts.max_outer {
        if best.energy == 0.0 {
            break;
        }
        let th = solve_theta_fixed(mesh, atlas, &space, &best.h1, &best.h2, &best.theta, opts)?;
        inner_iterations += th.history.len() - 1;
        history.push(EnergyRecord { iteration: k, stage: Stage::Theta, energy: th.energy });
        let hs = solve_h1h2(mesh, atlas, &th.value, &best.h1, &best.h2, opts)?;
        inner_iterations += hs.history.len() - 1;
        history.push(EnergyRecord { iteration: k, stage: Stage::H1H2, energy: hs.energy });
        let e = hs.energy;
        outer.push(e);
        log::debug!("outer iteration {k}: E = {e:e}");
        if !(e < best.energy) {
            break;
        }
        let stagnant = !improved(e, best.energy, opts.stagnation);
        best = AnisoState {
            theta: th.value,
            h1: hs.value.0,
            h2: hs.value.1,
            energy: e,
            outer_iterations: k,
            inner_iterations,
        };
        if stagnant {
            break;
        }
    }
    best.inner_iterations = inner_iterations;
    Ok(AnisoResult { state: best, start_energy, outer, history })
}

/// `iteration,stage,E` rows.
pub fn history_csv(history: &[EnergyRecord]) -> String {
    let mut s = String::from("iteration,stage,E\n");
    for r in history {
        let _ = writeln!(s, "{},{},{:e}", r.iteration, r.stage.name(), r.energy);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch_cut::{build_branch_cut, BranchCut, Singularity};
    use crate::isotropic::{solve_isotropic, ScaleOptions};
    use crate::mesh::{build_frame_atlas, generate, Vec3};

    fn square_setup(n: usize) -> (TriMesh, FrameAtlas, ThetaConstraints) {
        let m = generate::square(n, 1.0);
        let atlas = build_frame_atlas(&m, &BranchCut::empty()).unwrap();
        let zero = ThetaFieldCR { values: vec![0.0; m.num_halfedges()] };
        let c = ThetaConstraints::from_reference(&m, &atlas, &zero).unwrap();
        (m, atlas, c)
    }

    #[test]
    fn square_init_is_zero_and_energy_vanishes() {
        let (m, atlas, c) = square_setup(6);
        let s = SingularityConfig::default();
        let theta = theta_init(&m, &atlas, &c, &s, &CgOptions::default()).unwrap();
        assert!(theta.values.iter().all(|v| v.abs() < 1e-12));
        let z = ScalarFieldP1::zeros(m.num_vertices());
        assert!(integrability_error_of(&m, &atlas, &theta, &z, &z) < 1e-20);
    }

    #[test]
    fn isotropic_solution_has_small_energy() {
        let m = generate::disk(10);
        let j = 5;
        let s = SingularityConfig::new(
            &m,
            [0, 2, 4, 6].iter().map(|q| Singularity { vertex: generate::disk_vertex(j, q * j), index: 1 }).collect(),
        )
        .unwrap();
        let iso = solve_isotropic(&m, &s, &ScaleOptions::default(), &CgOptions::default()).unwrap();
        let e = integrability_error_of(&m, &iso.atlas, &iso.theta.theta, &iso.scale.h, &iso.scale.h);
        assert!(e < 1e-8, "{e}");
    }

    #[test]
    fn energy_symmetries() {
        let m = generate::disk(5);
        let cut = BranchCut::empty();
        let atlas = build_frame_atlas(&m, &cut).unwrap();
        let theta = ThetaFieldCR { values: (0..m.num_halfedges()).map(|h| (h as f64 * 0.37).sin() * 0.3).collect() };
        let h1 = ScalarFieldP1 { values: m.positions().iter().map(|p| p.x * p.y).collect() };
        let h2 = ScalarFieldP1 { values: m.positions().iter().map(|p| (2.0 * p.x).sin()).collect() };
        let e = integrability_error_of(&m, &atlas, &theta, &h1, &h2);
        assert!(e > 0.0);
        let turned = theta.map(|v| v + FRAC_PI_2);
        let swapped = integrability_error_of(&m, &atlas, &turned, &h2, &h1);
        assert!((e - swapped).abs() < 1e-12 * e.max(1.0));
        let shifted = ScalarFieldP1 { values: h1.values.iter().map(|v| v + 3.0).collect() };
        assert!((integrability_error_of(&m, &atlas, &theta, &shifted, &h2) - e).abs() < 1e-12);
    }

    #[test]
    fn h1h2_on_square_selects_constants() {
        let (m, atlas, _) = square_setup(8);
        let theta = ThetaFieldCR { values: vec![0.0; m.num_halfedges()] };
        let z = ScalarFieldP1::zeros(m.num_vertices());
        let r = solve_h1h2(&m, &atlas, &theta, &z, &z, &AnisoOptions::default()).unwrap();
        assert!(r.value.0.values.iter().all(|v| v.abs() < 1e-12));
        assert!(r.value.1.values.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn theta_step_recovers_zero_from_perturbation() {
        let (m, atlas, c) = square_setup(10);
        let space = c.space(&m, &atlas);
        let noisy = ThetaFieldCR {
            values: (0..m.num_halfedges())
                .map(|h| {
                    let mid = (m.position(m.he_tail(h)) + m.position(m.he_head(h))) * 0.5;
                    let bubble = 16.0 * mid.x * (1.0 - mid.x) * mid.y * (1.0 - mid.y);
                    0.1 * bubble * (3.0 * mid.x + 2.0 * mid.y).sin()
                })
                .collect(),
        };
        let z = ScalarFieldP1::zeros(m.num_vertices());
        let r = solve_theta_fixed(&m, &atlas, &space, &z, &z, &noisy, &AnisoOptions::default()).unwrap();
        assert!(r.value.values.iter().all(|v| v.abs() < 1e-3));
        for w in r.history.windows(2).take(r.history.len().saturating_sub(2)) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn inconsistent_jumps_are_reported() {
        let m = generate::disk(4);
        let s = SingularityConfig::new(&m, vec![Singularity { vertex: 0, index: 1 }]).unwrap();
        let cut = build_branch_cut(&m, &s).unwrap();
        let atlas = build_frame_atlas(&m, &cut).unwrap();
        let jumps: Vec<(usize, f64)> = cut.edges().iter().map(|&e| (e, 0.0)).collect();
        let c = ThetaConstraints::new(&m, &atlas, &[], &jumps, None).unwrap();
        match c.check_jumps(&m, &s) {
            Err(CutError::InconsistentJumps { vertex, .. }) => assert_eq!(vertex, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_format() {
        let h = [
            EnergyRecord { iteration: 0, stage: Stage::Init, energy: 0.5 },
            EnergyRecord { iteration: 1, stage: Stage::Theta, energy: 0.25 },
        ];
        assert_eq!(history_csv(&h), "iteration,stage,E\n0,init,5e-1\n1,theta,2.5e-1\n");
    }

    #[test]
    fn disk_descends() {
        let m = generate::disk(8);
        let s = SingularityConfig::new(
            &m,
            [0, 2, 4, 6].iter().map(|q| Singularity { vertex: generate::disk_vertex(4, q * 4), index: 1 }).collect(),
        )
        .unwrap();
        let iso = solve_isotropic(&m, &s, &ScaleOptions::default(), &CgOptions::default()).unwrap();
        let c = ThetaConstraints::from_reference(&m, &iso.atlas, &iso.theta.theta).unwrap();
        let r = alternate_minimize(&m, &iso.atlas, &c, &s, &AnisoOptions::default()).unwrap();
        let accepted = &r.outer[..r.outer.len() - 1];
        for w in accepted.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(r.state.energy <= r.initial_energy());
        let _ = Vec3::zeros();
    }
}
