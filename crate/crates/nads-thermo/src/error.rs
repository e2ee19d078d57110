use thiserror::Error;

/// Errors surfaced by space construction, catalog lookup and the experiment runner.
#[derive(Debug, Error)]
pub enum NadsError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("point budget exceeded: requested {requested} points, budget {budget} (set NADS_THERMO_POINT_BUDGET to raise)")]
    PointBudget { requested: usize, budget: usize },

    #[error("unknown catalog key: {0}")]
    UnknownCatalogKey(String),

    #[error("invalid potential spec: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unknown potential label: {0}")]
    UnknownLabel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NadsError>;
