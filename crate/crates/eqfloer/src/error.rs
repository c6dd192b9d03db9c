use thiserror::Error;

/// Errors produced across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("validation failed: {0:?}")]
    Validation(Vec<String>),

    #[error("move rejected: {0}")]
    IllegalMove(String),

    #[error("no branched double cover: {0}")]
    CoverInfeasible(String),

    #[error("branch class ambiguous beyond coboundaries (kernel dimension {kernel_dim} exceeds gauge dimension {gauge_dim})")]
    CoverAmbiguous { kernel_dim: usize, gauge_dim: usize },

    #[error("involution check failed: {0}")]
    BadInvolution(String),

    #[error("diagram is not weakly admissible")]
    NotAdmissible,

    #[error("diagram is not nice: bad faces {0:?}")]
    NotNice(Vec<u32>),

    #[error("nicify iteration cap exceeded; residual bad faces {residual:?}")]
    NicifyCap { residual: Vec<u32> },

    #[error("malformed generator: {0}")]
    BadGenerator(String),

    #[error("module has torsion not supported by the theta-power classification: invariant factor {0}")]
    NonThetaTorsion(String),

    #[error("open book rejected: {0}")]
    BadOpenBook(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
