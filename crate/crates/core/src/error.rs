use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid B-spline order {0}; order must be at least 1")]
    InvalidOrder(i64),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate Zak kernel: min |K_a| = {modulus:e} at x = {witness}")]
    DegenerateKernel { witness: f64, modulus: f64 },

    #[error("grid size {grid} too small for truncation radius {radius}; need at least {required}")]
    InsufficientGrid {
        grid: usize,
        radius: usize,
        required: usize,
    },

    #[error("singular scheme matrix (det = {det:e}); channels do not form a Riesz basis")]
    SingularScheme { det: f64 },

    #[error("scheme matrix has rank {rank} < {period}; channels do not form a frame")]
    NotAFrame { rank: usize, period: usize },

    #[error("underdetermined scheme: {channels} channels for period {period}")]
    Underdetermined { channels: usize, period: usize },

    #[error("operator `{spec}` reaches offsets {lo}..={hi}, outside a period-{period} window starting at {start}")]
    WindowOverflow {
        spec: String,
        lo: i64,
        hi: i64,
        start: i64,
        period: usize,
    },

    #[error("invalid operator `{spec}`: {reason}")]
    InvalidOperator { spec: String, reason: String },

    #[error("sample window {have_lo}..={have_hi} does not cover required window {need_lo}..={need_hi}")]
    Coverage {
        have_lo: i64,
        have_hi: i64,
        need_lo: i64,
        need_hi: i64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
