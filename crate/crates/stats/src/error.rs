use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("singular fixed-effect design: column `{column}` is collinear with {others:?}")]
    SingularDesign { column: String, others: Vec<String> },

    #[error(
        "optimizer did not converge after {iterations} iterations (last deviances: {trace:?})"
    )]
    NoConvergence { iterations: usize, trace: Vec<f64> },

    #[error("degenerate mixture: {0}")]
    DegenerateMixture(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
