use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {name} = {value} outside {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("cannot parse {0:?} as a rational number")]
    BadRational(String),
    #[error("strategy index {0} outside 0..=4095")]
    IndexOutOfRange(u32),
    #[error("cannot parse strategy {0:?}: expected six comma-separated actions or an index")]
    BadStrategy(String),
    #[error("cannot parse action {0:?}")]
    BadAction(String),
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("denominator vanishes at ε = 0; no series expansion")]
    PoleAtZero,
    #[error("matrix dimensions do not match")]
    Dimension,
    #[error("rows of the transition matrix do not sum to 1")]
    NotStochastic,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("stationary residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("point ({d}, {q}) is outside region (A)")]
    OutsideRegionA { d: String, q: String },
    #[error("strategy {0} is not an ESS at this point")]
    NotEss(u16),
    #[error("pair is not bistable: {0}")]
    NotBistable(String),
    #[error("{0}")]
    Precondition(&'static str),
    #[error("internal error: {0}")]
    Internal(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
