use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("invalid exponent {name} = {value} (must be >= 1 or infinite)")]
    InvalidExponent { name: &'static str, value: f64 },

    #[error("multiplier breaks Hermitian symmetry at xi = {0}")]
    NonHermitian(f64),

    #[error(
        "frequency {frequency} for n = {n} does not fit the dealiased band (cutoff {cutoff}); \
         max admissible n for this grid is {max_n}"
    )]
    BandViolation {
        n: u32,
        frequency: f64,
        cutoff: f64,
        max_n: i64,
    },

    #[error("grid too coarse in frequency: {samples} samples inside |xi| < 1/2, need at least {required}")]
    CoarseFrequency { samples: usize, required: usize },

    #[error("field is not resolved: top-band energy fraction {0:e}")]
    Unresolved(f64),

    #[error("CFL violation: dt = {dt} exceeds the stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("blow-up guard tripped at t = {t}: max|u_x| = {slope} exceeds {threshold}")]
    BlowUp { t: f64, slope: f64, threshold: f64 },

    #[error("non-finite state encountered at t = {0}")]
    NotFinite(f64),

    #[error("time range mismatch: requested [0, {requested}], available [{start}, {end}]")]
    TimeRange {
        requested: f64,
        start: f64,
        end: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
