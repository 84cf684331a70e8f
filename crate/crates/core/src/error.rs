use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("quadrature error estimate {estimate:e} exceeds target {target:e} after {panels} panels")]
    ToleranceNotMet {
        estimate: f64,
        target: f64,
        panels: usize,
    },

    #[error("series truncation needs more than the {cap} active modes (tail bound {tail:e} >= {tol:e})")]
    TruncationOverflow { cap: usize, tail: f64, tol: f64 },

    #[error("observation series diverges over the active modes (term ratio {ratio})")]
    DivergentSum { ratio: f64 },

    #[error("orbit lower bound violated at n = {n}, t = {t:e} (slack {slack:e})")]
    BoundViolated { n: usize, t: f64, slack: f64 },

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
