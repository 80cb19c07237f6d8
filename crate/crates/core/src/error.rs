use thiserror::Error;

/// Errors shared across the spectral, kernel, finite-difference and Monte
/// Carlo layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("Det(lambda) has a pole at lambda = 0; use the regularized form")]
    PoleAtZero,

    #[error("lambda = {lambda} is not a simple root (|Det| = {det_abs:.3e}, |Det'| = {det_prime_abs:.3e})")]
    NotASimpleRoot {
        lambda: f64,
        det_abs: f64,
        det_prime_abs: f64,
    },

    #[error("no sign change located in bracket ({lo}, {hi})")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("lambda = {lambda} is within guard distance {guard:.3e} of the series pole at {pole}")]
    NearSeriesPole { lambda: f64, pole: f64, guard: f64 },

    #[error("the 2x2 coefficient system is singular at lambda = {lambda} (root of Det)")]
    SingularSystem { lambda: f64 },

    #[error("discrete boundary-value system is numerically singular (lambda is an eigenvalue)")]
    SingularDiscreteSystem,

    #[error("t = {t} is below the validity floor {min_time} of this evaluation path")]
    TimeTooSmall { t: f64, min_time: f64 },

    #[error("Bromwich quadrature node at Im lambda = {im} falls within the pole guard")]
    ContourThroughPole { im: f64 },

    #[error("Re lambda = {re} is not in the absolute-convergence half plane Re lambda < {bound}")]
    WrongHalfPlane { re: f64, bound: f64 },

    #[error("index {index} is out of range for the {family} family (len {len})")]
    IndexOutOfRange {
        family: &'static str,
        index: usize,
        len: usize,
    },

    #[error("start position {y0} must lie strictly inside (0, 1)")]
    InvalidStart { y0: f64 },

    #[error("histogram has {bins} bins but the reference field has {grid} samples")]
    GridMismatch { bins: usize, grid: usize },

    #[error("calibration factor {measured} for the {family} family is not within 5% of any candidate")]
    CalibrationAmbiguous { family: &'static str, measured: f64 },

    #[error("linear solver became singular at step {step}")]
    SolverSingular { step: usize },

    #[error("evolution produced a non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
