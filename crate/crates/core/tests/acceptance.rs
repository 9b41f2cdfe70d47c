//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the measured
//! quantities; run with `--nocapture` to see them all.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use crossforge::anisotropic::{
    alternate_minimize, integrability_error_of, solve_h1h2, AnisoOptions, AnisoResult, ThetaConstraints,
};
use crossforge::branch_cut::{BranchCut, Singularity, SingularityConfig};
use crossforge::fem::{CgOptions, ScalarFieldP1, ThetaFieldCR};
use crossforge::isotropic::{
    check_compatibility, curl_consistency_check, reconstruct_crossfield, rotation_residual, solve_h, solve_isotropic,
    unit_disk_scale_gradient, IsotropicSolution, ScaleOptions,
};
use crossforge::mesh::{
    build_frame_atlas, compute_curvature, generate, project_boundary_to_circle, quarter_turn_distance, refine_uniform,
    TriMesh, Vec3,
};
use crossforge::streamline::{trace_streamlines, TraceOptions};
use crossforge::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: usize, title: &str, passed: bool, detail: String, elapsed: Duration) {
    println!(
        "criterion {n:>2} {:<4} {title}: {detail} [{:.2}s]",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(passed, "criterion {n} failed: {detail}");
}

fn config(mesh: &TriMesh, list: &[(usize, i32)]) -> SingularityConfig {
    SingularityConfig::new(mesh, list.iter().map(|&(vertex, index)| Singularity { vertex, index }).collect()).unwrap()
}

fn isotropic(mesh: &TriMesh, sing: &SingularityConfig) -> IsotropicSolution {
    solve_isotropic(mesh, sing, &ScaleOptions::default(), &CgOptions::default()).unwrap()
}

/// Unit disk with four index-1 points at radius 1/2 on the axes.
fn four_pole_disk(rings: usize) -> (TriMesh, SingularityConfig, Vec<Vec3>) {
    let mesh = generate::disk(rings);
    let poles: Vec<Vec3> = (0..4)
        .map(|q| {
            let a = q as f64 * PI / 2.0;
            Vec3::new(0.5 * a.cos(), 0.5 * a.sin(), 0.0)
        })
        .collect();
    let sing = config(&mesh, &poles.iter().map(|p| (mesh.nearest_vertex(p).0, 1)).collect::<Vec<_>>());
    (mesh, sing, poles)
}

/// The same configuration refined `levels` times, boundary kept on the circle.
fn refined_disk(rings: usize, levels: usize) -> (TriMesh, SingularityConfig, Vec<Vec3>) {
    let (mut mesh, _, poles) = four_pole_disk(rings);
    for _ in 0..levels {
        mesh = project_boundary_to_circle(&refine_uniform(&mesh), 1.0);
    }
    let sing = config(&mesh, &poles.iter().map(|p| (mesh.nearest_vertex(p).0, 1)).collect::<Vec<_>>());
    (mesh, sing, poles)
}

/// Octahedrally symmetric sphere with index-1 points at the cube vertices.
fn cube_sphere(n: usize) -> (TriMesh, SingularityConfig) {
    let mesh = generate::octasphere(n);
    let list: Vec<(usize, i32)> = (0..8)
        .map(|i| {
            let s = |b: usize| if i & b == 0 { 1.0 } else { -1.0 };
            let (v, d) = mesh.nearest_vertex(&Vec3::new(s(1), s(2), s(4)).normalize());
            assert!(d < 1e-12, "cube vertex is not a mesh vertex");
            (v, 1)
        })
        .collect();
    let sing = config(&mesh, &list);
    (mesh, sing)
}

fn interior_vertices(mesh: &TriMesh) -> Vec<usize> {
    (0..mesh.num_vertices()).filter(|&v| !mesh.is_boundary_vertex(v)).collect()
}

#[test]
fn criterion_01_compatibility_law() {
    let t0 = Instant::now();
    let meshes = [
        ("icosphere", generate::icosphere(2)),
        ("octasphere", generate::octasphere(4)),
        ("disk", generate::disk(6)),
        ("torus", generate::torus(18, 8, 1.0, 0.35)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut valid, mut mismatches) = (0, Vec::new());
    for case in 0..50 {
        let (name, mesh) = &meshes[case % meshes.len()];
        let target = 4 * mesh.euler_characteristic();
        let mut pool = interior_vertices(mesh);
        let mut list = Vec::new();
        for _ in 0..rng.random_range(1..=5) {
            let v = pool.swap_remove(rng.random_range(0..pool.len()));
            let k = [-2, -1, 1, 2, 3][rng.random_range(0..5)];
            list.push((v, k));
        }
        if case % 2 == 0 {
            // Close the sum with unit entries.
            let mut sum: i64 = list.iter().map(|&(_, k)| k as i64).sum();
            while sum != target {
                let k = if sum < target { 1 } else { -1 };
                list.push((pool.swap_remove(rng.random_range(0..pool.len())), k));
                sum += k as i64;
            }
        }
        let sing = config(mesh, &list);
        let sum = sing.index_sum();
        let residual = check_compatibility(mesh, &sing);
        valid += usize::from(sum == target);
        let law = (residual == 0) == (sum == target) && residual == sum - target;
        let solved = solve_h(mesh, &sing, &ScaleOptions::default());
        let raises = matches!(solved, Err(Error::Compatibility(_)));
        let solver_ok = if residual != 0 { raises } else { solved.is_ok() };
        if !(law && solver_ok) {
            mismatches.push(format!("case {case} on {name}: sum {sum}, residual {residual}, raised {raises}"));
        }
    }
    let elapsed = t0.elapsed();
    let passed = mismatches.is_empty() && elapsed < Duration::from_secs(10);
    verdict(
        1,
        "compatibility law",
        passed,
        format!("50 configs ({valid} valid), mismatches {:?}", mismatches),
        elapsed,
    );
}

#[test]
fn criterion_02_gauss_bonnet() {
    let t0 = Instant::now();
    let meshes = vec![
        generate::square(5, 1.0),
        generate::square(9, 2.5),
        generate::disk(7),
        project_boundary_to_circle(&refine_uniform(&generate::disk(6)), 1.0),
        generate::annulus(36, 6, 0.4, 1.0),
        generate::torus(24, 12, 1.0, 0.35),
        generate::icosphere(0),
        generate::icosphere(3),
        generate::octasphere(5),
        generate::octasphere(9),
        generate::cube_surface(),
        refine_uniform(&generate::torus(12, 6, 2.0, 0.7)),
    ];
    let mut worst: f64 = 0.0;
    for m in &meshes {
        let c = compute_curvature(m).unwrap();
        let total: f64 = c.vertex_gaussian.iter().sum::<f64>() + c.boundary_turning.iter().sum::<f64>();
        worst = worst.max((total - 2.0 * PI * m.euler_characteristic() as f64).abs());
    }
    let elapsed = t0.elapsed();
    verdict(
        2,
        "Gauss-Bonnet",
        worst < 1e-9 && elapsed < Duration::from_secs(1),
        format!("{} meshes, max |total curvature - 2 pi chi| = {worst:.2e} (tol 1e-9)", meshes.len()),
        elapsed,
    );
}

#[test]
fn criterion_03_flat_square() {
    let t0 = Instant::now();
    let m = generate::square(12, 1.0);
    let s = SingularityConfig::default();
    let sol = isotropic(&m, &s);
    let spread = sol.scale.h.spread();
    let pin = sol.theta.pin.1;
    let theta_dev = sol.theta.theta.values.iter().map(|v| (v - pin).abs()).fold(0.0, f64::max);
    let z = ScalarFieldP1::zeros(m.num_vertices());
    let e = integrability_error_of(&m, &sol.atlas, &sol.theta.theta, &z, &z);
    verdict(
        3,
        "flat square",
        spread < 1e-9 && theta_dev < 1e-9 && e < 1e-10,
        format!("H spread {spread:.2e}, max |theta - pin| {theta_dev:.2e}, E(theta, 0, 0) {e:.2e}"),
        t0.elapsed(),
    );
}

#[test]
fn criterion_04_disk_four_poles() {
    let t0 = Instant::now();
    // 648 -> 2592 -> 10368 triangles.
    let mut residuals = Vec::new();
    let mut finest = None;
    for level in 0..3 {
        let (m, s, poles) = refined_disk(9, level);
        let sol = isotropic(&m, &s);
        let exact = |x: &Vec3| unit_disk_scale_gradient(&poles.iter().map(|p| (*p, 1)).collect::<Vec<_>>(), x);
        let away = |c: &Vec3| poles.iter().all(|p| (c - p).norm() > 0.2);
        residuals.push(rotation_residual(&m, &sol.atlas, &sol.theta.theta, exact, away));
        finest = Some((m.num_triangles(), sol.report));
    }
    let (triangles, report) = finest.unwrap();
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let elapsed = t0.elapsed();
    let passed = report.max_alignment_deviation < 1e-2
        && report.max_holonomy_defect < 1e-2
        && order >= 0.8
        && elapsed < Duration::from_secs(60);
    verdict(
        4,
        "disk with four index-1 singularities",
        passed,
        format!(
            "{triangles} triangles: alignment {:.2e}, holonomy {:.2e}; rotation residuals {:.3e} {:.3e} {:.3e}, orders {:.2} {:.2}",
            report.max_alignment_deviation,
            report.max_holonomy_defect,
            residuals[0],
            residuals[1],
            residuals[2],
            orders[0],
            orders[1]
        ),
        elapsed,
    );
}

type Symmetry = Box<dyn Fn(&Vec3) -> Vec3>;

/// The 48 signed permutations of the coordinate axes.
fn octahedral_group() -> Vec<Symmetry> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut g: Vec<Symmetry> = Vec::new();
    for p in perms {
        for signs in 0..8 {
            g.push(Box::new(move |x: &Vec3| {
                let s = |b: usize| if signs & (1 << b) == 0 { 1.0 } else { -1.0 };
                Vec3::new(s(0) * x[p[0]], s(1) * x[p[1]], s(2) * x[p[2]])
            }));
        }
    }
    g
}

#[test]
fn criterion_05_sphere_cube_configuration() {
    let t0 = Instant::now();
    let (m, s) = cube_sphere(12);
    let sol = isotropic(&m, &s);
    let h = &sol.scale.h.values;
    let mut orbit_spread: f64 = 0.0;
    let mut snap: f64 = 0.0;
    for g in octahedral_group() {
        for v in 0..m.num_vertices() {
            let (w, d) = m.nearest_vertex(&g(&m.position(v)));
            snap = snap.max(d);
            orbit_spread = orbit_spread.max((h[v] - h[w]).abs());
        }
    }
    let holonomy = sol.report.max_holonomy_defect;
    let elapsed = t0.elapsed();
    verdict(
        5,
        "sphere cube configuration",
        snap < 1e-12 && orbit_spread < 1e-6 && holonomy < 1e-2 && elapsed < Duration::from_secs(60),
        format!(
            "{} triangles, {} cut edges: max H difference across orbits {orbit_spread:.2e}, max holonomy defect {holonomy:.2e}",
            m.num_triangles(),
            sol.report.cut_edges.len()
        ),
        elapsed,
    );
}

#[test]
fn criterion_06_curl_identity() {
    let t0 = Instant::now();
    let instances = [("disk", refined_disk(9, 2).0, refined_disk(9, 2).1), {
        let (m, s) = cube_sphere(12);
        ("sphere", m, s)
    }];
    let mut parts = Vec::new();
    let mut passed = true;
    for (name, m, s) in &instances {
        let sol = isotropic(m, s);
        let check = curl_consistency_check(m, &sol.scale.h, &sol.atlas, &sol.curvature, s);
        let index = s.index_map(m.num_vertices());
        let regular = (0..m.num_vertices())
            .filter(|&v| index[v] == 0 && !m.is_boundary_vertex(v))
            .map(|v| check.residual[v].abs())
            .fold(0.0, f64::max);
        let singular = s
            .entries()
            .iter()
            .map(|e| {
                let expected = 2.0 * PI * e.index as f64 / 4.0;
                ((check.circulation[e.vertex] - expected) / expected).abs()
            })
            .fold(0.0, f64::max);
        passed &= regular < 1e-6 && singular < 0.05;
        parts.push(format!("{name}: regular {regular:.2e}, singular relative {singular:.2e}"));
    }
    verdict(6, "curl identity", passed, parts.join("; "), t0.elapsed());
}

#[test]
fn criterion_07_h1h2_square() {
    let t0 = Instant::now();
    let m = generate::square(16, 1.0);
    let atlas = build_frame_atlas(&m, &BranchCut::empty()).unwrap();
    let theta = ThetaFieldCR { values: vec![0.0; m.num_halfedges()] };
    let z = ScalarFieldP1::zeros(m.num_vertices());
    let r = solve_h1h2(&m, &atlas, &theta, &z, &z, &AnisoOptions::default()).unwrap();
    let grad_norm = |f: &ScalarFieldP1| {
        crossforge::fem::l2_norm_per_triangle(&m, &crossforge::fem::p1_gradient_local(&m, &atlas, f))
    };
    let (g1, g2) = (grad_norm(&r.value.0), grad_norm(&r.value.1));
    verdict(
        7,
        "H1/H2 step on the square",
        g1 < 1e-8 && g2 < 1e-8,
        format!("|grad H1| {g1:.2e}, |grad H2| {g2:.2e}, E {:.2e}", r.energy),
        t0.elapsed(),
    );
}

fn anisotropic(mesh: &TriMesh, sing: &SingularityConfig) -> AnisoResult {
    let iso = isotropic(mesh, sing);
    let c = ThetaConstraints::from_reference(mesh, &iso.atlas, &iso.theta.theta).unwrap();
    alternate_minimize(mesh, &iso.atlas, &c, sing, &AnisoOptions::default()).unwrap()
}

/// Outer energies strictly decrease up to the accepted iterate; a trailing
/// entry that did not improve is the rejected trial that ended the loop.
fn strictly_descends(r: &AnisoResult) -> bool {
    let mut accepted = &r.outer[..];
    if let [.., a, b] = accepted {
        if b >= a {
            accepted = &accepted[..accepted.len() - 1];
        }
    }
    accepted.windows(2).all(|w| w[1] < w[0]) && accepted.last() == Some(&r.state.energy)
}

#[test]
fn criterion_08_alternating_descent() {
    let t0 = Instant::now();
    let disk = generate::disk(12);
    let valid = config(&disk, &[0, 2, 4, 6].map(|q| (generate::disk_vertex(6, q * 6), 1)));
    let a = anisotropic(&disk, &valid);

    let ring = generate::annulus(48, 8, 0.4, 1.0);
    let dipole = config(&ring, &[(generate::annulus_vertex(8, 0, 4), 1), (generate::annulus_vertex(8, 12, 4), -1)]);
    let b = anisotropic(&ring, &dipole);

    let elapsed = t0.elapsed();
    let a_ok = strictly_descends(&a) && a.state.energy <= 1e-4 * a.initial_energy();
    let b_ok = strictly_descends(&b) && b.state.energy * 10.0 <= b.initial_energy() && b.state.energy > 1e-4;
    verdict(
        8,
        "alternating minimisation descent",
        a_ok && b_ok && elapsed < Duration::from_secs(600),
        format!(
            "valid disk E {:.3e} -> {:.3e} in {} outer; annulus dipole E {:.3e} -> {:.3e} in {} outer",
            a.initial_energy(),
            a.state.energy,
            a.state.outer_iterations,
            b.initial_energy(),
            b.state.energy,
            b.state.outer_iterations
        ),
        elapsed,
    );
}

#[test]
fn criterion_09_pin_invariance() {
    let t0 = Instant::now();
    let (m, s, _) = four_pole_disk(12);
    let solve = |pin: usize| {
        solve_isotropic(&m, &s, &ScaleOptions { pin, ..ScaleOptions::default() }, &CgOptions::default()).unwrap()
    };
    let base = solve(0);
    let mut h_spread: f64 = 0.0;
    let mut angle_diff: f64 = 0.0;
    for pin in [m.num_vertices() / 3, m.num_vertices() / 2, m.num_vertices() - 1] {
        let other = solve(pin);
        let diff = ScalarFieldP1 {
            values: other.scale.h.values.iter().zip(&base.scale.h.values).map(|(a, b)| a - b).collect(),
        };
        h_spread = h_spread.max(diff.spread());
        let cross = reconstruct_crossfield(&other.theta.theta, &other.scale.h, &s);
        for (x, y) in cross.angles.iter().zip(&base.cross.angles) {
            angle_diff = angle_diff.max(quarter_turn_distance(x - y));
        }
    }
    verdict(
        9,
        "pin invariance",
        h_spread < 1e-8 && angle_diff < 1e-10,
        format!("spread of H differences {h_spread:.2e}, max cross angle difference {angle_diff:.2e}"),
        t0.elapsed(),
    );
}

/// Torus with a hole and an index `+1`/`-1` pair on one meridian, outer and
/// inner equator; the hole's boundary cannot be aligned.
fn holed_torus_pair(scale: usize) -> (TriMesh, SingularityConfig) {
    let (n_major, n_minor) = (48 * scale, 16 * scale);
    let m = generate::holed_torus(n_major, n_minor, 1.0, 0.35);
    let phi = 2.0 * PI * 20.0 / 48.0;
    let at = |psi: f64| m.nearest_vertex(&generate::torus_point(1.0, 0.35, phi, psi)).0;
    let s = config(&m, &[(at(0.0), 1), (at(PI), -1)]);
    (m, s)
}

#[test]
fn criterion_10_streamline_oracle() {
    let t0 = Instant::now();
    let (m, s, _) = refined_disk(9, 2);
    let sol = isotropic(&m, &s);
    let valid = trace_streamlines(&m, &sol.atlas, &sol.cross, &s, &TraceOptions::default()).counts();

    let (torus, pair) = holed_torus_pair(1);
    let bad = isotropic(&torus, &pair);
    let misaligned = bad.report.max_alignment_deviation;
    let failing = trace_streamlines(&torus, &bad.atlas, &bad.cross, &pair, &TraceOptions::default()).counts();
    verdict(
        10,
        "streamline oracle",
        valid.cycle == 0 && misaligned > 1e-2 && failing.cycle + failing.length_cap >= 1,
        format!(
            "valid disk: {} cycle of {} lines; misaligned holed torus (alignment {misaligned:.2e}): {} cycle, {} cap, {} boundary, {} singularity",
            valid.cycle,
            valid.boundary + valid.singularity + valid.length_cap + valid.cycle,
            failing.cycle,
            failing.length_cap,
            failing.boundary,
            failing.singularity
        ),
        t0.elapsed(),
    );
}
