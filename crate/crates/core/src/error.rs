use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient a_{index} = {value} is not positive")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("derivative formula requires |x| < 2, got x = {0}")]
    DerivativeDomain(f64),

    #[error("ratio limit r_{residue} = {value} is not positive")]
    NonPositiveRatioLimit { residue: usize, value: f64 },

    #[error("initial data is proportional to the orthonormal polynomials (beta = {beta})")]
    DegenerateDirection { beta: f64 },

    #[error("gap quadratic has negative discriminant {discriminant}")]
    NegativeQuadraticDiscriminant { discriminant: f64 },

    #[error("Turán trace vanishes on the tail at n = {index}")]
    ZeroTrace { index: usize },

    #[error("residue {residue} has tail oscillation {oscillation} above tolerance {tolerance}")]
    NotSettled {
        residue: usize,
        oscillation: f64,
        tolerance: f64,
    },

    #[error("regime is not critical: {0}")]
    NotCritical(String),
}
