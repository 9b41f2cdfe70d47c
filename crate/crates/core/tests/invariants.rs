//! Property tests over generated meshes and random configurations.

use std::f64::consts::{FRAC_PI_2, PI};

use crossforge::anisotropic::integrability_error_of;
use crossforge::branch_cut::{build_branch_cut, validate_branch_cut, Singularity, SingularityConfig};
use crossforge::config::{parse_singularity_json, singularity_config_json};
use crossforge::fem::{CgOptions, ScalarFieldP1, ThetaFieldCR};
use crossforge::isotropic::{check_compatibility, reconstruct_crossfield, solve_isotropic, ScaleOptions};
use crossforge::mesh::{build_frame_atlas, compute_curvature, generate, quarter_turn_distance, TriMesh, Vec3};
use crossforge::vtk::{parse_vtk, VtkGrid};
use proptest::prelude::*;

fn disk_interior(m: &TriMesh) -> Vec<usize> {
    (0..m.num_vertices()).filter(|&v| !m.is_boundary_vertex(v)).collect()
}

/// Picks distinct interior vertices of `m` with the given indices.
fn place(m: &TriMesh, picks: &[(usize, i32)]) -> SingularityConfig {
    let mut pool = disk_interior(m);
    let entries =
        picks.iter().map(|&(r, index)| Singularity { vertex: pool.swap_remove(r % pool.len()), index }).collect();
    SingularityConfig::new(m, entries).unwrap()
}

fn index_strategy() -> impl Strategy<Value = i32> {
    prop_oneof![Just(-2), Just(-1), Just(1), Just(2), Just(3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn compatibility_residual_is_the_index_defect(picks in prop::collection::vec((0usize..10_000, index_strategy()), 0..8)) {
        let m = generate::icosphere(2);
        let s = place(&m, &picks);
        let sum: i64 = picks.iter().map(|p| p.1 as i64).sum();
        prop_assert_eq!(check_compatibility(&m, &s), sum - 8);
    }

    #[test]
    fn gauss_bonnet_survives_interior_jitter(seed in prop::collection::vec(-0.3f64..0.3, 2 * 91)) {
        // disk(5) has 91 vertices; moving interior ones leaves the sum fixed.
        let base = generate::disk(5);
        let h = 1.0 / 5.0;
        let m = base
            .map_positions(|v, p| {
                if base.is_boundary_vertex(v) {
                    *p
                } else {
                    *p + Vec3::new(seed[2 * v], seed[2 * v + 1], 0.0) * h
                }
            })
            .unwrap();
        let c = compute_curvature(&m).unwrap();
        let total: f64 = c.vertex_gaussian.iter().sum::<f64>() + c.boundary_turning.iter().sum::<f64>();
        prop_assert!((total - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn branch_cuts_are_valid(picks in prop::collection::vec((0usize..10_000, index_strategy()), 1..6)) {
        for m in [generate::disk(6), generate::icosphere(2), generate::torus(16, 8, 1.0, 0.35)] {
            let s = place(&m, &picks);
            let cut = build_branch_cut(&m, &s).unwrap();
            let report = validate_branch_cut(&m, &cut, &s);
            prop_assert!(report.valid, "{:?}", report);
        }
    }

    #[test]
    fn singularity_json_round_trips(picks in prop::collection::vec((0usize..10_000, index_strategy()), 0..6)) {
        let m = generate::disk(6);
        let s = place(&m, &picks);
        let back = parse_singularity_json(&singularity_config_json(&s), &m).unwrap();
        prop_assert_eq!(back.config, s);
    }

    #[test]
    fn vtk_round_trips(values in prop::collection::vec(-1e6f64..1e6, 25)) {
        let m = generate::square(4, 1.0);
        let mut g = VtkGrid::from_mesh(&m, "prop");
        g.add_point_scalars("f", values.clone());
        let back = parse_vtk(&g.to_vtk_string(), "mem").unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn energy_ignores_constant_shifts(a in -5.0f64..5.0, b in -5.0f64..5.0, turn in 0usize..4) {
        let m = generate::disk(4);
        let atlas = build_frame_atlas(&m, &build_branch_cut(&m, &SingularityConfig::default()).unwrap()).unwrap();
        let theta = ThetaFieldCR { values: (0..m.num_halfedges()).map(|h| (h as f64 * 0.1).sin()).collect() };
        let h1 = ScalarFieldP1 { values: m.positions().iter().map(|p| p.x * p.x).collect() };
        let h2 = ScalarFieldP1 { values: m.positions().iter().map(|p| p.y).collect() };
        let e = integrability_error_of(&m, &atlas, &theta, &h1, &h2);
        let shift = |f: &ScalarFieldP1, c: f64| ScalarFieldP1 { values: f.values.iter().map(|v| v + c).collect() };
        let e2 = integrability_error_of(&m, &atlas, &theta, &shift(&h1, a), &shift(&h2, b));
        prop_assert!((e - e2).abs() <= 1e-12 * e.max(1.0));
        // Half turns map (theta, H1, H2) to itself.
        if turn % 2 == 0 {
            let rotated = theta.map(|v| v + PI * (turn / 2) as f64);
            let e3 = integrability_error_of(&m, &atlas, &rotated, &h1, &h2);
            prop_assert!((e - e3).abs() <= 1e-12 * e.max(1.0));
        }
    }
}

#[test]
fn cross_is_invariant_under_quarter_turns() {
    let m = generate::disk(6);
    let s = place(&m, &[(3, 1), (17, 1), (40, 1), (77, 1)]);
    let sol = solve_isotropic(&m, &s, &ScaleOptions::default(), &CgOptions::default()).unwrap();
    for q in 1..4 {
        let turned = sol.theta.theta.map(|v| v + q as f64 * FRAC_PI_2);
        let c = reconstruct_crossfield(&turned, &sol.scale.h, &s);
        for (x, y) in c.angles.iter().zip(&sol.cross.angles) {
            assert!(quarter_turn_distance(x - y) < 1e-12);
        }
    }
}
