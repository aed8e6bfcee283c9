use thiserror::Error;

use crate::model::ModelSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("singular design for model {model}: columns {columns:?} are linearly dependent")]
    SingularDesign {
        model: ModelSpec,
        /// 1-based design column positions (1 = intercept).
        columns: Vec<usize>,
    },

    #[error("insufficient data: n = {n} but {required} required")]
    InsufficientData { n: usize, required: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("quadrature underflow: every node evaluated to -inf")]
    QuadratureUnderflow,

    #[error("model space too large: p = {p} exceeds the enumeration cap of {cap}; pass max_dim")]
    Capacity { p: usize, cap: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("empty score list")]
    EmptyScores,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
