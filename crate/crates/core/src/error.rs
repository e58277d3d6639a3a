use thiserror::Error;

use crate::geometry::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({}, {}) lies outside the domain", .0.x1, .0.x2)]
    Outside(Point),

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("no admissible split found at scan resolution {t_grid} on [{a}, {b}]")]
    ResolutionInsufficient { a: f64, b: f64, t_grid: usize },

    #[error("non-constant subinterval [{a}, {b}] left at depth cap {depth}")]
    DepthExceeded { a: f64, b: f64, depth: usize },

    #[error("solver did not converge after {iterations} sweeps (last delta {delta:e})")]
    NotConverged {
        iterations: usize,
        delta: f64,
        field: Box<crate::solver::BellmanField>,
    },

    #[error("no sampled anchor sees the point ({}, {})", .0.x1, .0.x2)]
    NoVisibleAnchor(Point),

    #[error("simulation left mass {residual:e} unresolved after {steps} steps")]
    MaxStepsExceeded { steps: usize, residual: f64 },

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
