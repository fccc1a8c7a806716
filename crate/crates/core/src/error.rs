use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid setup: `{key}` {reason}")]
    InvalidSetup { key: &'static str, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Fock cutoff n_cut = {n_cut} too small for |alpha| = {alpha_abs}; need n_cut >= {required}")]
    CutoffTooSmall { n_cut: usize, alpha_abs: f64, required: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("singular detuning: delta = 0")]
    SingularDetuning,

    #[error("inverted-oscillator regime: omega_c * delta = {product:e} <= g^2 = {g_sq:e}")]
    Unstable { product: f64, g_sq: f64 },

    #[error("operator is not Hermitian (relative deviation {0:e})")]
    NotHermitian(f64),

    #[error("spin amplitudes not normalized: |c0|^2 + |c1|^2 = {0}")]
    Unnormalized(f64),

    #[error("revival period is infinite for g = 0")]
    InfinitePeriod,

    #[error("no unique fixed point for kappa = 0")]
    NoFixedPoint,

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for configuration and argument problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSetup { .. }
            | Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::CutoffTooSmall { .. }
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
