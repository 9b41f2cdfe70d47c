//! End-to-end runs of the pipeline on generated inputs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crossforge::branch_cut::{Singularity, SingularityConfig};
use crossforge::config::{singularity_config_json, Mode, RunConfig};
use crossforge::mesh::io::save_obj;
use crossforge::mesh::{generate, TriMesh};
use crossforge::pipeline::{run_pipeline, ExitStatus};
use crossforge::vtk::{DataArray, VtkGrid};

fn write_inputs(dir: &Path, mesh: &TriMesh, sing: Vec<Singularity>) -> RunConfig {
    let m = dir.join("mesh.obj");
    save_obj(mesh, &m).unwrap();
    let s = dir.join("sing.json");
    std::fs::write(&s, singularity_config_json(&SingularityConfig::new(mesh, sing).unwrap())).unwrap();
    let mut c = RunConfig::new(m, Mode::Isotropic);
    c.singularities = Some(s);
    c.out = Some(dir.join("out"));
    c
}

fn disk_poles(count: usize) -> (TriMesh, Vec<Singularity>) {
    let m = generate::disk(10);
    let s = (0..count).map(|q| Singularity { vertex: generate::disk_vertex(5, 2 * q * 5), index: 1 }).collect();
    (m, s)
}

fn out(c: &RunConfig, name: &str) -> PathBuf {
    c.out.as_ref().unwrap().join(name)
}

#[test]
fn four_poles_on_the_disk_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = disk_poles(4);
    let c = write_inputs(dir.path(), &m, s);
    let o = run_pipeline(&c);
    assert_eq!(o.status, ExitStatus::Pass);
    assert_eq!(o.status.code(), 0);
    let fields = VtkGrid::read(out(&c, "fields.vtk")).unwrap();
    let names: Vec<&str> = fields.point_data.iter().chain(&fields.cell_data).map(|(n, _)| n.as_str()).collect();
    for n in ["H", "eH", "curl_residual", "theta", "branch0", "branch1", "branch2", "branch3"] {
        assert!(names.contains(&n), "{n} missing from {names:?}");
    }
    // Exported sizes are e^H.
    let get = |name: &str| match &fields.point_data.iter().find(|(n, _)| n == name).unwrap().1 {
        DataArray::Scalars(v) => v.clone(),
        DataArray::Vectors(_) => panic!("{name} is not scalar"),
    };
    for (h, eh) in get("H").iter().zip(get("eH")) {
        assert!((h.exp() - eh).abs() <= 1e-12 * eh);
    }
    let cut = VtkGrid::read(out(&c, "cut.vtk")).unwrap();
    assert_eq!(cut.cells.len(), o.report.diagnostics.as_ref().unwrap().cut_edges.len());
    let lines = VtkGrid::read(out(&c, "streamlines.vtk")).unwrap();
    assert_eq!(lines.cells.len(), 12);
}

#[test]
fn three_poles_fail_the_compatibility_check() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = disk_poles(3);
    let mut c = write_inputs(dir.path(), &m, s);
    c.mode = Mode::Check;
    let o = run_pipeline(&c);
    assert_eq!(o.status.code(), 2);
    assert_eq!(o.report.compatibility_residual, Some(-1));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out(&c, "report.json")).unwrap()).unwrap();
    assert_eq!(json["compatibility_residual"], -1);
    assert_eq!(json["exit_code"], 2);
    // The isotropic solve refuses the same input.
    c.mode = Mode::Isotropic;
    assert_eq!(run_pipeline(&c).status, ExitStatus::Compatibility);
}

#[test]
fn holed_torus_pair_fails_alignment_but_exports() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate::holed_torus(48, 16, 1.0, 0.35);
    let phi = 2.0 * PI * 20.0 / 48.0;
    let at = |psi: f64| m.nearest_vertex(&generate::torus_point(1.0, 0.35, phi, psi)).0;
    let c = write_inputs(
        dir.path(),
        &m,
        vec![Singularity { vertex: at(0.0), index: 1 }, Singularity { vertex: at(PI), index: -1 }],
    );
    let o = run_pipeline(&c);
    assert_eq!(o.status, ExitStatus::Alignment);
    assert_eq!(o.status.code(), 3);
    assert!(o.report.checks.iter().any(|k| k.name == "alignment" && !k.passed));
    let fields = VtkGrid::read(out(&c, "fields.vtk")).unwrap();
    assert_eq!(fields.cells.len(), m.num_triangles());
    assert!(std::fs::read_to_string(out(&c, "report.txt")).unwrap().contains("FAIL"));
}

#[test]
fn anisotropic_run_logs_energy_history() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = disk_poles(4);
    let mut c = write_inputs(dir.path(), &m, s);
    c.mode = Mode::Anisotropic;
    let o = run_pipeline(&c);
    assert_eq!(o.status, ExitStatus::Pass);
    let a = o.report.anisotropic.as_ref().unwrap();
    assert!(a.final_energy <= 1e-4 * a.initial_energy);
    let csv = std::fs::read_to_string(out(&c, "history.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("iteration,stage,E"));
    assert!(rows.all(|r| r.split(',').count() == 3));
    let fields = VtkGrid::read(out(&c, "fields.vtk")).unwrap();
    for n in ["H1", "H2"] {
        assert!(fields.point_data.iter().any(|(k, _)| k == n));
    }
    assert!(fields.cell_data.iter().any(|(k, _)| k == "E_density"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = disk_poles(4);
    let mut c = write_inputs(dir.path(), &m, s);
    run_pipeline(&c);
    let first: Vec<Vec<u8>> =
        ["report.json", "report.txt", "fields.vtk"].iter().map(|f| std::fs::read(out(&c, f)).unwrap()).collect();
    c.out = Some(dir.path().join("again"));
    run_pipeline(&c);
    for (f, bytes) in ["report.json", "report.txt", "fields.vtk"].iter().zip(first) {
        assert_eq!(std::fs::read(out(&c, f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn refinement_keeps_the_configuration_valid() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = disk_poles(4);
    let mut c = write_inputs(dir.path(), &m, s);
    c.refine_ratio = 0.5;
    let o = run_pipeline(&c);
    assert_eq!(o.status, ExitStatus::Pass, "{:?}", o.report.error);
    assert!(o.report.mesh.as_ref().unwrap().triangles > m.num_triangles());
}
