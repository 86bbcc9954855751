use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("non-positive mean derivative {value} at pair ({i}, {j})")]
    NonPositiveDerivative { i: usize, j: usize, value: f64 },
    #[error("singular jacobian: {0}")]
    SingularJacobian(String),
    /// Node degree at the boundary of the attainable range; the estimator does not exist.
    #[error("degenerate degree {degree} at node {node} (0-based)")]
    DegenerateDegree { node: usize, degree: f64 },
    #[error("degenerate covariate design: {0}")]
    DegenerateDesign(String),
    #[error("{stage} did not converge within {iters} iterations (residual {residual:e})")]
    MaxIterations {
        stage: &'static str,
        iters: usize,
        residual: f64,
    },
    #[error("fit did not converge")]
    NotConverged,
    #[error("index out of range: {0}")]
    Index(String),
    #[error("too many failed replications: {failures} of {reps}")]
    TooManyFailures { failures: usize, reps: usize },
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("duplicate pair ({i}, {j}) at line {line}")]
    DuplicatePair { i: usize, j: usize, line: usize },
    #[error("negative weight {weight} for pair ({i}, {j}) at line {line}")]
    NegativeWeight {
        i: usize,
        j: usize,
        weight: f64,
        line: usize,
    },
    #[error("unknown covariate map: {0}")]
    UnknownMap(String),
    #[error("missing covariate for pair ({i}, {j})")]
    MissingPair { i: usize, j: usize },
    #[error("{family} family requires weights in {{0,1}}, found {weight} for pair ({i}, {j})")]
    BinaryFamilyNonbinaryWeights {
        family: &'static str,
        i: usize,
        j: usize,
        weight: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Machine-readable identifier used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain_error",
            Error::Shape(_) => "shape_error",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::NonPositiveDerivative { .. } => "non_positive_derivative",
            Error::SingularJacobian(_) => "singular_jacobian",
            Error::DegenerateDegree { .. } => "degenerate_degree",
            Error::DegenerateDesign(_) => "degenerate_design",
            Error::MaxIterations { .. } => "max_iterations",
            Error::NotConverged => "not_converged",
            Error::Index(_) => "index_error",
            Error::TooManyFailures { .. } => "too_many_failures",
            Error::Parse { .. } => "parse_error",
            Error::DuplicatePair { .. } => "duplicate_pair",
            Error::NegativeWeight { .. } => "negative_weight",
            Error::UnknownMap(_) => "unknown_map",
            Error::MissingPair { .. } => "missing_pair",
            Error::BinaryFamilyNonbinaryWeights { .. } => "binary_family_nonbinary_weights",
            Error::Config(_) => "config_error",
            Error::Io(_) => "io_error",
        }
    }

    /// Process exit code: 1 for input/I-O problems, 2 for estimation
    /// failures, 3 when a simulation exhausts its failure budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::DuplicatePair { .. }
            | Error::NegativeWeight { .. }
            | Error::UnknownMap(_)
            | Error::MissingPair { .. }
            | Error::Config(_) => 1,
            Error::TooManyFailures { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
