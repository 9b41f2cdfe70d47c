//! End-to-end driver: load, check, solve, trace, report, export.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::anisotropic::{
    alternate_minimize, history_csv, integrability_density, AnisoOptions, AnisoResult, ThetaConstraints,
};
use crate::branch_cut::{build_branch_cut, SingularityConfig};
use crate::config::{parse_singularity_config, Mode, RunConfig, SeedRule};
use crate::error::{ConfigError, Error, MeshError};
use crate::fem::{CgOptions, ThetaFieldCR};
use crate::isotropic::{
    alignment_report, check_compatibility, curl_consistency_check, reconstruct_crossfield, solve_h_with_curvature,
    solve_theta, CrossField, CurlCheck, ScaleOptions, SolverStats,
};
use crate::mesh::io::load_mesh;
use crate::mesh::{adapt_mesh, build_frame_atlas, compute_curvature, FrameAtlas, TriMesh};
use crate::report::{AnisoSummary, Check, CurlSummary, MeshSummary, RunReport, StageError};
use crate::streamline::{trace_streamlines, StreamlineSet, TraceOptions};
use crate::vtk::VtkGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Compatibility = 2,
    Alignment = 3,
    Solver = 4,
    Io = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Classifies a stage error.
    pub fn of(err: &Error) -> Self {
        match err {
            Error::Io { .. } | Error::Config(_) => ExitStatus::Io,
            Error::Mesh(MeshError::Parse { .. } | MeshError::Unsupported { .. }) => ExitStatus::Io,
            Error::Compatibility(_) => ExitStatus::Compatibility,
            _ => ExitStatus::Solver,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub status: ExitStatus,
    pub report: RunReport,
    /// Files written, in order.
    pub artifacts: Vec<PathBuf>,
    /// Stage timings; kept out of the report so that stays reproducible.
    pub log: Vec<String>,
}

/// Fields computed by a solve, available to exporters.
struct Solved {
    mesh: TriMesh,
    atlas: FrameAtlas,
    cut_edges: Vec<usize>,
    h: Vec<f64>,
    curl: CurlCheck,
    theta: ThetaFieldCR,
    cross: CrossField,
    aniso: Option<AnisoResult>,
    streamlines: Option<StreamlineSet>,
}

struct Run<'a> {
    config: &'a RunConfig,
    report: RunReport,
    log: Vec<String>,
    clock: Instant,
}

impl Run<'_> {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, Error>) -> Result<T, (ExitStatus, StageError)> {
        let t0 = Instant::now();
        let out = f();
        self.log.push(format!(
            "[{:>9.3}s] {name}: {:.3}s{}",
            self.clock.elapsed().as_secs_f64(),
            t0.elapsed().as_secs_f64(),
            if out.is_err() { " (failed)" } else { "" }
        ));
        log::info!("stage {name} finished in {:.3}s", t0.elapsed().as_secs_f64());
        out.map_err(|e| (ExitStatus::of(&e), StageError { stage: name.to_string(), message: e.to_string() }))
    }
}

pub fn run_pipeline(config: &RunConfig) -> PipelineOutcome {
    let mut run = Run { config, report: RunReport::new(config.mode), log: Vec::new(), clock: Instant::now() };
    let mut solved = None;
    let status = match drive(&mut run, &mut solved) {
        Ok(status) => status,
        Err((status, err)) => {
            log::error!("stage {} failed: {}", err.stage, err.message);
            run.report.error = Some(err);
            status
        }
    };
    let mut artifacts = Vec::new();
    if let Some(out) = &config.out {
        if let Some(s) = &solved {
            if config.export_vtk {
                match run.stage("export", || export_fields(out, s)) {
                    Ok(files) => artifacts.extend(files),
                    Err((st, err)) => {
                        run.report.error.get_or_insert(err);
                        return finish(run, st, out, artifacts);
                    }
                }
            }
        }
        return finish(run, status, out, artifacts);
    }
    finalize_report(&mut run.report, status);
    PipelineOutcome { status, report: run.report, artifacts, log: run.log }
}

fn finalize_report(report: &mut RunReport, status: ExitStatus) {
    report.exit_code = status.code();
    report.status = match status {
        ExitStatus::Pass => "pass",
        _ if report.error.is_some() => "error",
        _ => "fail",
    }
    .to_string();
}

fn finish(mut run: Run, mut status: ExitStatus, out: &Path, mut artifacts: Vec<PathBuf>) -> PipelineOutcome {
    let names: Vec<String> = artifacts
        .iter()
        .chain([out.join("report.json"), out.join("report.txt")].iter())
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    run.report.artifacts = names;
    finalize_report(&mut run.report, status);
    let json = run.report.to_json();
    let text = run.report.to_text();
    let log = run.log.join("\n") + "\n";
    let written = (|| -> Result<(), Error> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        for (name, body) in [("report.json", &json), ("report.txt", &text), ("run.log", &log)] {
            let p = out.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    })();
    match written {
        Ok(()) => artifacts.extend([out.join("report.json"), out.join("report.txt"), out.join("run.log")]),
        Err(e) => {
            log::error!("could not write report: {e}");
            status = ExitStatus::Io;
            run.report.error.get_or_insert(StageError { stage: "report".into(), message: e.to_string() });
            finalize_report(&mut run.report, status);
        }
    }
    PipelineOutcome { status, report: run.report, artifacts, log: run.log }
}

type StageResult<T> = Result<T, (ExitStatus, StageError)>;

fn drive(run: &mut Run, solved: &mut Option<Solved>) -> StageResult<ExitStatus> {
    let config = run.config;
    run.stage("config", || Ok(config.validate()?))?;
    let mesh = run.stage("mesh", || load_mesh(&config.mesh))?;
    run.report.mesh = Some(MeshSummary::of(&mesh));
    if let Some(p) = config.pin_vertex {
        if p >= mesh.num_vertices() {
            let err = Error::Config(ConfigError::Invalid(format!("pin vertex {p} out of range")));
            return Err((ExitStatus::Io, StageError { stage: "config".into(), message: err.to_string() }));
        }
    }
    let sing = match &config.singularities {
        Some(p) => {
            let parsed = run.stage("singularities", || parse_singularity_config(p, &mesh))?;
            run.report.snaps = parsed.snaps;
            parsed.config
        }
        None => SingularityConfig::default(),
    };
    run.report.singularities = sing.entries().to_vec();
    run.report.note = sing.note.clone();
    let residual = check_compatibility(&mesh, &sing);
    run.report.compatibility_residual = Some(residual);
    run.report.checks.push(Check::at_most("compatibility", residual.abs() as f64, 0.0));
    if residual != 0 {
        return Ok(ExitStatus::Compatibility);
    }
    if config.mode == Mode::Check {
        return Ok(ExitStatus::Pass);
    }
    let (mesh, sing) = run.stage("adapt", || Ok(adapt_mesh(&mesh, &sing, config.refine_ratio)?))?;
    if config.refine_ratio < 1.0 {
        run.report.mesh = Some(MeshSummary::of(&mesh));
    }
    let cg = CgOptions { tol: config.tolerances.solver, ..CgOptions::default() };
    let curvature = run.stage("curvature", || Ok(compute_curvature(&mesh)?))?;
    let scale_opts = ScaleOptions { pin: config.pin_vertex.unwrap_or(0), cg, compat_tol: None };
    let scale = run.stage("scale", || solve_h_with_curvature(&mesh, &sing, &curvature, &scale_opts))?;
    let cut = run.stage("cut", || Ok(build_branch_cut(&mesh, &sing)?))?;
    let atlas = run.stage("frames", || Ok(build_frame_atlas(&mesh, &cut)?))?;
    let iso = run.stage("theta", || solve_theta(&mesh, &scale.h, &atlas, &cg))?;
    let curl = curl_consistency_check(&mesh, &scale.h, &atlas, &curvature, &sing);
    let index = sing.index_map(mesh.num_vertices());
    run.report.curl = Some(CurlSummary {
        max_regular_residual: (0..mesh.num_vertices())
            .filter(|&v| index[v] == 0 && !mesh.is_boundary_vertex(v))
            .map(|v| curl.residual[v].abs())
            .fold(0.0, f64::max),
        singular: sing
            .entries()
            .iter()
            .map(|s| (s.vertex, curl.circulation[s.vertex], std::f64::consts::TAU * s.index as f64 / 4.0))
            .collect(),
    });

    let (theta, aniso) = if config.mode == Mode::Anisotropic {
        let opts = AnisoOptions {
            max_outer: config.max_outer,
            pin_vertex: config.pin_vertex.unwrap_or(0),
            cg,
            ..AnisoOptions::default()
        };
        let result = run.stage("anisotropic", || {
            let constraints = ThetaConstraints::from_reference(&mesh, &atlas, &iso.theta)?;
            alternate_minimize(&mesh, &atlas, &constraints, &sing, &opts)
        })?;
        run.report.anisotropic = Some(AnisoSummary {
            start_energy: result.start_energy,
            outer: result.outer.clone(),
            initial_energy: result.initial_energy(),
            final_energy: result.state.energy,
            outer_iterations: result.state.outer_iterations,
            inner_iterations: result.state.inner_iterations,
        });
        (result.state.theta.clone(), Some(result))
    } else {
        (iso.theta.clone(), None)
    };
    let cross = reconstruct_crossfield(&theta, &scale.h, &sing);
    let mut diag = alignment_report(&mesh, &atlas, &cut, &theta, &sing);
    diag.solver = SolverStats {
        h_iterations: scale.iterations,
        h_residual: scale.residual,
        theta_iterations: iso.iterations,
        theta_fit_residual: iso.fit_residual,
    };
    let align = Check::at_most("alignment", diag.max_alignment_deviation, config.tolerances.alignment);
    let holo = Check::at_most("holonomy", diag.max_holonomy_defect, config.tolerances.holonomy);
    let aligned = align.passed && holo.passed;
    run.report.checks.extend([align, holo]);
    run.report.diagnostics = Some(diag);

    let streamlines = if config.seed_rule != SeedRule::None {
        let opts = TraceOptions { seeds: config.seed_rule, ..TraceOptions::default() };
        let set = run.stage("trace", || Ok(trace_streamlines(&mesh, &atlas, &cross, &sing, &opts)))?;
        run.report.streamlines = Some(set.counts());
        Some(set)
    } else {
        None
    };
    *solved = Some(Solved {
        cut_edges: cut.edges().to_vec(),
        h: scale.h.values.clone(),
        mesh,
        atlas,
        curl,
        theta,
        cross,
        aniso,
        streamlines,
    });
    Ok(if aligned { ExitStatus::Pass } else { ExitStatus::Alignment })
}

fn export_fields(out: &Path, s: &Solved) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mesh = &s.mesh;
    let mut written = Vec::new();

    let mut g = VtkGrid::from_mesh(mesh, "crossforge fields");
    g.add_point_scalars("H", s.h.clone());
    g.add_point_scalars("eH", s.cross.sizes.clone());
    g.add_point_scalars("curl_residual", s.curl.residual.clone());
    if let Some(a) = &s.aniso {
        g.add_point_scalars("H1", a.state.h1.values.clone());
        g.add_point_scalars("H2", a.state.h2.values.clone());
    }
    g.add_cell_scalars("theta", s.theta.triangle_means());
    for k in 0..4 {
        let b = (0..mesh.num_triangles())
            .map(|t| {
                let v = s.cross.branch(&s.atlas, t, k);
                [v.x, v.y, v.z]
            })
            .collect();
        g.add_cell_vectors(&format!("branch{k}"), b);
    }
    if let Some(a) = &s.aniso {
        let density = integrability_density(mesh, &s.atlas, &a.state.theta, &a.state.h1, &a.state.h2);
        g.add_cell_scalars("E_density", density);
    }
    let p = out.join("fields.vtk");
    g.write(&p)?;
    written.push(p);

    let p = out.join("cut.vtk");
    VtkGrid::from_edges(mesh, &s.cut_edges, "crossforge branch cut").write(&p)?;
    written.push(p);

    if let Some(set) = &s.streamlines {
        let lines: Vec<_> = set.lines.iter().map(|l| l.points.clone()).collect();
        let mut g = VtkGrid::from_polylines(&lines, "crossforge streamlines");
        g.add_cell_scalars("termination", set.lines.iter().map(|l| l.termination.code() as f64).collect());
        g.add_cell_scalars("seed_vertex", set.lines.iter().map(|l| l.seed_vertex as f64).collect());
        let p = out.join("streamlines.vtk");
        g.write(&p)?;
        written.push(p);
    }
    if let Some(a) = &s.aniso {
        let p = out.join("history.csv");
        std::fs::write(&p, history_csv(&a.history)).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}
