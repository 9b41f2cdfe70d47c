use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {triangle} references missing vertex {vertex}")]
    VertexOutOfRange { triangle: usize, vertex: usize },
    #[error("triangle {triangle} repeats a vertex")]
    RepeatedVertex { triangle: usize },
    #[error("vertex {vertex} is not used by any triangle")]
    IsolatedVertex { vertex: usize },
    #[error("edge ({a}, {b}) is shared by more than two triangles")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("vertex {vertex} has a non-manifold neighbourhood")]
    NonManifoldVertex { vertex: usize },
    #[error("triangle {triangle} traverses edge ({a}, {b}) in the same direction as its neighbour")]
    InconsistentOrientation { triangle: usize, a: usize, b: usize },
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("unsupported element in {path}: {message}")]
    Unsupported { path: String, message: String },
    #[error("invalid refinement ratio {0}")]
    InvalidRatio(f64),
}

/// The pure-Neumann system has no solution for the given loads.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("incompatible right-hand side: loads sum to {sum:e} (tolerance {tolerance:e})")]
pub struct CompatibilityError {
    pub sum: f64,
    pub tolerance: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {:e})", .history.last().copied().unwrap_or(f64::NAN))]
    NotConverged { iterations: usize, history: Vec<f64> },
    #[error("conjugate gradient broke down at iteration {iteration}: non-positive curvature {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("pin index {pin} out of range for system of size {size}")]
    InvalidPin { pin: usize, size: usize },
    #[error("non-finite value in system input")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("singularity anchor {vertex} is out of range")]
    AnchorOutOfRange { vertex: usize },
    #[error("singularity anchor {vertex} appears more than once")]
    DuplicateAnchor { vertex: usize },
    #[error("singularity anchor {vertex} lies on the boundary")]
    BoundaryAnchor { vertex: usize },
    #[error("entry {entry}: index {index} outside [-4, 4] \\ {{0}}")]
    InvalidIndex { entry: usize, index: i64 },
    #[error("entry {entry}: exactly one of `valence` and `index` is required")]
    ValenceOrIndex { entry: usize },
    #[error("entry {entry}: exactly one of `vertex` and `position` is required")]
    VertexOrPosition { entry: usize },
    #[error("{0}")]
    Json(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("mesh has {0} connected components; a connected mesh is required")]
    Disconnected(usize),
    #[error("branch cut disconnects the dual graph ({components} pieces)")]
    DisconnectsDual { components: usize },
    #[error("edge {0} is not an interior edge")]
    NotInterior(usize),
    #[error("pin on cut edge {0} is ambiguous")]
    PinOnCut(usize),
    #[error("jump data inconsistent around vertex {vertex}: defect {defect:e}")]
    InconsistentJumps { vertex: usize, defect: f64 },
    #[error("mesh has no boundary to pin against")]
    NoBoundary,
}

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Compatibility(#[from] CompatibilityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
