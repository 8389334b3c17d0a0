use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("observable `{observable}` cannot be evaluated on a {system} system")]
    Incompatible {
        observable: &'static str,
        system: &'static str,
    },

    #[error("orbit index overflow: {0}")]
    IndexOverflow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("work budget exceeded: {needed} units requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("resolution too coarse: mass of A_{index} is {mass:e}, below one cell 1/{cells}")]
    ResolutionTooCoarse { index: usize, mass: f64, cells: u64 },

    #[error("64-bit overflow generating pair {index} of the {family} scheme")]
    SchemeOverflow { family: String, index: u64 },

    #[error("target ratio {target} unreachable: best achieved ratio is {best}")]
    TargetUnreachable { target: f64, best: f64 },

    #[error("a_n too small for quantization: (a_n * delta)^(p-1) = {value} < 1")]
    QuantizationTooSmall { value: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
