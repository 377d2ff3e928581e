use std::path::PathBuf;

use thiserror::Error;

use crate::sim::ZenoReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// The graph has no directed spanning tree: more than one SCC receives
    /// nothing from outside itself.
    #[error("graph has no directed spanning tree; closed SCCs (0-based agents): {closed:?}")]
    NoSpanningTree { closed: Vec<Vec<usize>> },

    #[error("block is reducible: {0}")]
    Reducible(String),

    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("root bracketing failed for agent {agent} on [{lo}, {hi}]")]
    RootBracketing { agent: usize, lo: f64, hi: f64 },

    #[error("invalid output function: {0}")]
    InvalidOutput(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "Zeno behaviour suspected: agent {} logged {} events by t = {:.6}",
        .0.agent, .0.event_count, .0.time
    )]
    ZenoSuspected(Box<ZenoReport>),

    #[error("Lyapunov construction supports at most two SCC blocks, got {0}")]
    UnsupportedDepth(usize),

    #[error("random generation exhausted its retry budget after {0} attempts")]
    RetryBudget(usize),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
