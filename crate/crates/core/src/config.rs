//! Run configuration and the singularity JSON format.
//!
//! ```json
//! {
//!   "note": "disk with four valence-3 points",
//!   "entries": [
//!     { "vertex": 12, "valence": 3 },
//!     { "position": [0.5, 0.0, 0.0], "index": 1 }
//!   ]
//! }
//! ```
//!
//! Each entry names exactly one anchor (`vertex` id or `position`, snapped
//! to the nearest vertex) and exactly one of `valence` or `index`, related
//! by `index = 4 - valence`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::branch_cut::{Singularity, SingularityConfig};
use crate::error::{ConfigError, Error};
use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    vertex: Option<usize>,
    position: Option<[f64; 3]>,
    valence: Option<i64>,
    index: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    note: Option<String>,
    entries: Vec<RawEntry>,
}

/// A position anchor moved onto a mesh vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snap {
    pub entry: usize,
    pub requested: [f64; 3],
    pub vertex: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSingularities {
    pub config: SingularityConfig,
    pub snaps: Vec<Snap>,
}

/// Parses the JSON singularity format against `mesh`.
pub fn parse_singularity_json(text: &str, mesh: &TriMesh) -> Result<ParsedSingularities, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let mut entries = Vec::with_capacity(raw.entries.len());
    let mut snaps = Vec::new();
    for (i, e) in raw.entries.iter().enumerate() {
        let index = match (e.valence, e.index) {
            (Some(v), None) => 4 - v,
            (None, Some(k)) => k,
            _ => return Err(ConfigError::ValenceOrIndex { entry: i }),
        };
        if index == 0 || index.abs() > 4 {
            return Err(ConfigError::InvalidIndex { entry: i, index });
        }
        let vertex = match (e.vertex, e.position) {
            (Some(v), None) => v,
            (None, Some(p)) => {
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(ConfigError::Invalid(format!("entry {i}: non-finite position")));
                }
                let (v, distance) = mesh.nearest_vertex(&Vec3::new(p[0], p[1], p[2]));
                snaps.push(Snap { entry: i, requested: p, vertex: v, distance });
                v
            }
            _ => return Err(ConfigError::VertexOrPosition { entry: i }),
        };
        entries.push(Singularity { vertex, index: index as i32 });
    }
    let mut config = SingularityConfig::new(mesh, entries)?;
    if let Some(note) = raw.note {
        config = config.with_note(note);
    }
    Ok(ParsedSingularities { config, snaps })
}

pub fn parse_singularity_config(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<ParsedSingularities, Error> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_singularity_json(&text, mesh)?)
}

/// Serialises a configuration with vertex anchors and indices.
pub fn singularity_config_json(config: &SingularityConfig) -> String {
    #[derive(Serialize)]
    struct Entry {
        vertex: usize,
        index: i32,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(skip_serializing_if = "Option::is_none")]
        note: Option<&'a str>,
        entries: Vec<Entry>,
    }
    let out = Out {
        note: Some(config.note.as_str()).filter(|n| !n.is_empty()),
        entries: config.entries().iter().map(|s| Entry { vertex: s.vertex, index: s.index }).collect(),
    };
    serde_json::to_string_pretty(&out).expect("plain data serialises") + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Check,
    Isotropic,
    Anisotropic,
}

/// Where streamlines start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedRule {
    /// Interior singular vertices only.
    Singularities,
    /// Boundary corners only.
    Corners,
    /// Both.
    All,
    /// No tracing.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Largest allowed boundary misalignment (radians).
    pub alignment: f64,
    /// Largest allowed distance of a cut jump to a multiple of `pi / 2`.
    pub holonomy: f64,
    /// Relative residual for the linear solves.
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { alignment: 1e-2, holonomy: 1e-2, solver: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mesh: PathBuf,
    /// Missing means no singularities.
    pub singularities: Option<PathBuf>,
    pub mode: Mode,
    pub tolerances: Tolerances,
    /// Artifacts are only written when set.
    pub out: Option<PathBuf>,
    pub pin_vertex: Option<usize>,
    /// Target edge ratio around singularities; 1 disables refinement.
    pub refine_ratio: f64,
    pub max_outer: usize,
    pub seed_rule: SeedRule,
    /// Write VTK files in addition to the reports.
    pub export_vtk: bool,
}

impl RunConfig {
    pub fn new(mesh: impl Into<PathBuf>, mode: Mode) -> Self {
        RunConfig {
            mesh: mesh.into(),
            singularities: None,
            mode,
            tolerances: Tolerances::default(),
            out: None,
            pin_vertex: None,
            refine_ratio: 1.0,
            max_outer: 100,
            seed_rule: SeedRule::Singularities,
            export_vtk: true,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        for (name, v) in [("alignment", t.alignment), ("holonomy", t.holonomy), ("solver", t.solver)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} tolerance must be positive, got {v}")));
            }
        }
        if !(self.refine_ratio > 0.0 && self.refine_ratio.is_finite()) {
            return Err(ConfigError::Invalid(format!("refinement ratio must be positive, got {}", self.refine_ratio)));
        }
        if self.mode == Mode::Anisotropic && self.max_outer == 0 {
            return Err(ConfigError::Invalid("anisotropic mode needs at least one outer iteration".into()));
        }
        Ok(())
    }
}
