use thiserror::Error;

use crate::geom::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("object {object}: invalid contour: {reason}")]
    InvalidContour { object: usize, reason: String },
    #[error("object {object}: contour is self-intersecting near ({}, {})", .witness.x, .witness.y)]
    SelfIntersecting { object: usize, witness: Point },
    #[error("objects overlap: {a} and {b} near ({}, {})", .witness.x, .witness.y)]
    Overlap { a: usize, b: usize, witness: Point },
    #[error("configuration has no objects")]
    Empty,
    #[error("bounding region: {0}")]
    Bounding(String),
    #[error("bounding region does not leave an exterior collar around object {0}")]
    NoCollar(usize),
    #[error("object {0}: contour too thin for the sampling resolution")]
    TooThin(usize),
    #[error("partial Blum condition violated on integration domain (max deviation {max_deviation:.4} rad)")]
    PartialBlum { max_deviation: f64 },
    #[error("flow time {0} outside [0, 1]")]
    FlowTime(f64),
    #[error("focal point reached: chi * kappa_r = 1")]
    FocalPoint,
    #[error("proximity matrix is reducible; components {}", crate::proximity_graph::format_components(.0))]
    Reducible(Vec<Vec<usize>>),
    #[error("nonsingularity condition fails on {0} sample sides")]
    Nonsingular(usize),
    #[error("invalid weight vector: {0}")]
    Weights(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("region: {0}")]
    Region(String),
    #[error("internal: {0}")]
    Internal(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: 2 input, 3 hypothesis failure, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Reducible(_) | Error::Nonsingular(_) | Error::FocalPoint | Error::PartialBlum { .. } => 3,
            Error::Internal(_) => 4,
            _ => 2,
        }
    }

    /// Module the error originates from, for diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Malformed(_)
            | Error::InvalidContour { .. }
            | Error::SelfIntersecting { .. }
            | Error::Overlap { .. }
            | Error::Empty
            | Error::Bounding(_) => "config_model",
            Error::TooThin(_) => "skeleton",
            Error::NoCollar(_) => "linking",
            Error::FlowTime(_) | Error::FocalPoint | Error::Nonsingular(_) => "flow",
            Error::PartialBlum { .. } | Error::Region(_) => "integrate",
            Error::Reducible(_) | Error::Weights(_) => "proximity_graph",
            Error::Argument(_) | Error::Io { .. } => "cli",
            Error::Internal(_) => "internal",
        }
    }
}
