use thiserror::Error;

/// Every failure the library can report.
///
/// Variant names double as the structured error names surfaced by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("singular matrix {context}: pivot {pivot} below tolerance{detail}")]
    SingularMatrix {
        context: &'static str,
        pivot: usize,
        detail: String,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("quadrature order {0} outside [1, 200]")]
    OrderOutOfRange(usize),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("design matrix is rank deficient ({0})")]
    RankDeficientDesign(&'static str),
    #[error("complete or quasi-complete separation: coefficient {index} reached {value}")]
    Separation { index: usize, value: f64 },
    #[error(
        "{what} did not converge in {iterations} iterations (gradient norm {gradient_norm:e})"
    )]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("fitted conditional variance collapsed below 1e-12 at row {row}")]
    DegenerateVariance {
        row: usize,
        mean_coefficients: Vec<f64>,
    },
    #[error("fit does not match dataset: {0}")]
    FitMismatch(String),
    #[error("non-positive {variant} variance estimate {sigma_sq:e}; components: {components}")]
    NegativeVariance {
        variant: &'static str,
        sigma_sq: f64,
        components: String,
    },
    #[error("alpha {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error("non-numeric value {value:?} at row {row}, column {column:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("covariate missing at row {row}, column {column:?}")]
    MissingCovariate { row: usize, column: String },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("invalid column specification: {0}")]
    InvalidSpec(String),
    #[error("nothing to report")]
    EmptyReport,
    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl Error {
    /// Variant name, used as the machine-readable error tag.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::OrderOutOfRange(_) => "OrderOutOfRange",
            Error::InvalidData(_) => "InvalidData",
            Error::RankDeficientDesign(_) => "RankDeficientDesign",
            Error::Separation { .. } => "Separation",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::FitMismatch(_) => "FitMismatch",
            Error::NegativeVariance { .. } => "NegativeVariance",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::MissingColumn(_) => "MissingColumn",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::MissingCovariate { .. } => "MissingCovariate",
            Error::EmptyDataset => "EmptyDataset",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::EmptyReport => "EmptyReport",
            Error::IoFailure(_) => "IoFailure",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
