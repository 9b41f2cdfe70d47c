//! Run reports: one serialisable structure rendered as JSON or plain text.
//! Reports carry no timestamps, so identical runs give identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::branch_cut::Singularity;
use crate::config::{Mode, Snap};
use crate::isotropic::DiagnosticsReport;
use crate::mesh::{TriMesh, VertexKind};
use crate::streamline::TerminationCounts;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub triangles: usize,
    pub edges: usize,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub boundary_loops: usize,
    pub corners: usize,
}

impl MeshSummary {
    pub fn of(mesh: &TriMesh) -> Self {
        MeshSummary {
            vertices: mesh.num_vertices(),
            triangles: mesh.num_triangles(),
            edges: mesh.num_edges(),
            euler_characteristic: mesh.euler_characteristic(),
            genus: mesh.genus(),
            boundary_loops: mesh.boundary_loops().len(),
            corners: (0..mesh.num_vertices()).filter(|&v| matches!(mesh.vertex_kind(v), VertexKind::Corner(_))).count(),
        }
    }
}

/// A thresholded diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.to_string(), value, threshold, passed: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurlSummary {
    /// Largest `|residual|` over interior non-singular vertices.
    pub max_regular_residual: f64,
    /// `(vertex, circulation, 2 pi k / 4)` per interior singularity.
    pub singular: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisoSummary {
    /// `E` of the initial angle field with zero scales.
    pub start_energy: f64,
    /// Outer energies, the last one being the rejected or final iterate.
    pub outer: Vec<f64>,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub status: String,
    pub exit_code: i32,
    pub mesh: Option<MeshSummary>,
    pub singularities: Vec<Singularity>,
    pub snaps: Vec<Snap>,
    pub note: String,
    pub compatibility_residual: Option<i64>,
    pub checks: Vec<Check>,
    pub diagnostics: Option<DiagnosticsReport>,
    pub curl: Option<CurlSummary>,
    pub anisotropic: Option<AnisoSummary>,
    pub streamlines: Option<TerminationCounts>,
    pub artifacts: Vec<String>,
    pub error: Option<StageError>,
}

impl RunReport {
    pub fn new(mode: Mode) -> Self {
        RunReport {
            mode,
            status: String::new(),
            exit_code: 0,
            mesh: None,
            singularities: Vec::new(),
            snaps: Vec::new(),
            note: String::new(),
            compatibility_residual: None,
            checks: Vec::new(),
            diagnostics: None,
            curl: None,
            anisotropic: None,
            streamlines: None,
            artifacts: Vec::new(),
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "crossforge report");
        let _ = writeln!(
            s,
            "mode: {}",
            serde_json::to_value(self.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        );
        let _ = writeln!(s, "status: {} (exit {})", self.status, self.exit_code);
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error in stage {}: {}", e.stage, e.message);
        }
        if let Some(m) = &self.mesh {
            let _ = writeln!(
                s,
                "mesh: {} vertices, {} triangles, chi = {}, genus {}, {} boundary loop(s), {} corner(s)",
                m.vertices, m.triangles, m.euler_characteristic, m.genus, m.boundary_loops, m.corners
            );
        }
        if !self.singularities.is_empty() {
            let list: Vec<String> = self.singularities.iter().map(|x| format!("v{}:k={}", x.vertex, x.index)).collect();
            let _ = writeln!(s, "singularities: {}", list.join(" "));
        }
        for snap in &self.snaps {
            let _ = writeln!(
                s,
                "  entry {} snapped to vertex {} (distance {:.3e})",
                snap.entry, snap.vertex, snap.distance
            );
        }
        if !self.note.is_empty() {
            let _ = writeln!(s, "note: {}", self.note);
        }
        if let Some(r) = self.compatibility_residual {
            let _ = writeln!(s, "compatibility residual: {r}");
        }
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(s, "check {}: {:.3e} (threshold {:.1e}) {verdict}", c.name, c.value, c.threshold);
        }
        if let Some(d) = &self.diagnostics {
            for l in &d.loops {
                let _ = writeln!(
                    s,
                    "  boundary loop {}: max deviation {:.3e} at edge {}{}",
                    l.loop_index,
                    l.max_deviation,
                    l.worst_edge,
                    if l.pinned { " (pinned)" } else { "" }
                );
            }
            let _ =
                writeln!(s, "  cut edges: {}, max holonomy defect {:.3e}", d.cut_edges.len(), d.max_holonomy_defect);
            let _ = writeln!(
                s,
                "  solver: H {} iterations (residual {:.1e}), theta {} iterations (fit residual {:.3e})",
                d.solver.h_iterations, d.solver.h_residual, d.solver.theta_iterations, d.solver.theta_fit_residual
            );
        }
        if let Some(c) = &self.curl {
            let _ = writeln!(s, "curl: max regular residual {:.3e}", c.max_regular_residual);
        }
        if let Some(a) = &self.anisotropic {
            let _ = writeln!(
                s,
                "anisotropic: E {:.6e} -> {:.6e} after {} outer / {} inner iterations",
                a.initial_energy, a.final_energy, a.outer_iterations, a.inner_iterations
            );
        }
        if let Some(c) = &self.streamlines {
            let _ = writeln!(
                s,
                "streamlines: {} boundary, {} singularity, {} length cap, {} cycle",
                c.boundary, c.singularity, c.length_cap, c.cycle
            );
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "wrote {a}");
        }
        s
    }
}
