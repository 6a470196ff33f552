use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside path range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("no admissible block length up to {max_block}: window [{start}, {end}] has mean {mean} <= {gamma}")]
    NoAdmissibleBlock {
        max_block: f64,
        start: f64,
        end: f64,
        mean: f64,
        gamma: f64,
    },

    #[error("insufficient noise history: need samples from {needed}, path starts at {available}")]
    InsufficientHistory { needed: f64, available: f64 },

    #[error(
        "monotonicity bound violated at t={t}: dt={dt}, a={rate}, max u={u_max} (dt*a*max(1,2u-1) = {value} > 0.5)"
    )]
    Monotonicity {
        t: f64,
        dt: f64,
        rate: f64,
        u_max: f64,
        value: f64,
    },

    #[error("front at x={x} entered the safety margin of the boundary at t={t} (domain [{x_lo}, {x_hi}], margin {margin})")]
    MarginBreach {
        t: f64,
        x: f64,
        x_lo: f64,
        x_hi: f64,
        margin: f64,
    },

    #[error("non-finite value at node {node}, t={t}")]
    NonFinite { t: f64, node: usize },

    #[error("no level-{level} crossing at t={t}")]
    NoFront { t: f64, level: f64 },

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("initial ordering inconsistent with the bound: violation {violation} at x={x}")]
    InconsistentInitial { violation: f64, x: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
