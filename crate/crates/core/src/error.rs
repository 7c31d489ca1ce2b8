use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("theta = {theta} is not in the outlier regime |theta| > sigma = {sigma}")]
    OutsideOutlierRegime { theta: f64, sigma: f64 },

    #[error("deformation rank {rank} exceeds matrix size {n}")]
    RankExceedsDimension { rank: usize, n: usize },

    #[error("interval [{a}, {b}] intersects the limiting support")]
    IntervalInsideSupport { a: f64, b: f64 },

    #[error("split interval [{a_prime}, {b_prime}] contains the deformation eigenvalue {theta}")]
    InvalidSplit {
        a_prime: f64,
        b_prime: f64,
        theta: f64,
    },

    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    #[error("invalid entry law: {0}")]
    InvalidLaw(String),

    #[error("eigenvalue iteration did not converge at index {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },

    #[error("z = {re}+{im}i coincides with an eigenvalue")]
    Singular { re: f64, im: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
