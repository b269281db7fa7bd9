use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("overfull level: N = {keep} exceeds M^d = {cells} at level {level}")]
    OverfullLevel { level: usize, keep: u32, cells: u64 },

    #[error("degenerate branching: M = {branching} < 2 at level {level}")]
    DegenerateBranching { level: usize, branching: u32 },

    #[error("branching bound violated: M = {branching} > declared bound {bound} at level {level}")]
    BranchingBound {
        level: usize,
        branching: u32,
        bound: u32,
    },

    #[error("rule/shape mismatch: rule '{rule}' does not apply to (d, M, N) = ({dim}, {branching}, {keep})")]
    RuleShapeMismatch {
        rule: String,
        dim: usize,
        branching: u32,
        keep: u32,
    },

    #[error("unknown selection rule '{0}'")]
    UnknownRule(String),

    #[error("ambient dimension must be >= 2, got {0}")]
    BadDimension(usize),

    #[error("construction must have at least one level")]
    EmptyLevels,

    #[error("undefined at this depth: level {requested} exceeds realization depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },

    #[error("insufficient resolution: radius {radius} below finest cube side {resolution}")]
    InsufficientResolution { radius: f64, resolution: f64 },

    #[error("invalid flat: {0}")]
    InvalidFlat(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("exact projection only for d=2 (got d={0})")]
    ProjectionUnsupported(usize),

    #[error("unsupported (d, m) = ({dim}, {m}) for {what}")]
    UnsupportedFlatShape { dim: usize, m: usize, what: String },

    #[error(
        "invalid lambda/lambda0 pair: lambda X_max = {lhs} must be <= lambda0 = {lambda0} <= 1"
    )]
    InvalidMgfParams { lhs: f64, lambda0: f64 },

    #[error("insufficient scales: need at least 3 depths, got {0}")]
    InsufficientScales(usize),

    #[error("empty radii list")]
    EmptyRadii,

    #[error("net level mismatch: net built for level {net}, requested {requested}")]
    NetLevelMismatch { net: usize, requested: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
