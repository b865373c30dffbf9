use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),

    #[error(
        "{samples} samples per period cannot resolve order {max_order} (need at least {required})"
    )]
    Undersampled {
        max_order: usize,
        samples: usize,
        required: usize,
    },

    #[error("coefficient array of length {0} is not of the form 2S+1")]
    CoefficientLength(usize),

    #[error("summation range [{beta}, {alpha}] is empty")]
    EmptyRange { alpha: i64, beta: i64 },

    #[error("index {index} lies outside [-{max_order}, {max_order}]")]
    IndexOutOfRange { index: i64, max_order: usize },

    #[error("Fejér parameter {half_width} needs order {}, coefficients stop at {max_order}", 2 * half_width)]
    OrderTooLarge { half_width: usize, max_order: usize },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error(
        "time grid of {len} points is too coarse for order {order} (need at least {required})"
    )]
    CoarseGrid {
        len: usize,
        order: usize,
        required: usize,
    },

    #[error("time grid must be strictly increasing and finite")]
    NonIncreasingTimes,

    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("quantum number {n} is below the minimum {min}")]
    QuantumNumber { n: i64, min: i64 },

    #[error("operation requires the harmonic oscillator")]
    NotOscillator,

    #[error("packet needs n - N > 0, got n = {n}, N = {half_width}")]
    PacketWidth { n: i64, half_width: usize },

    #[error("expected {expected} packet coefficients, got {got}")]
    PacketLength { expected: usize, got: usize },

    #[error("packet coefficients have zero norm")]
    ZeroNorm,

    #[error("imaginary residue {residue:e} exceeds tolerance relative to scale {scale:e}")]
    ImaginaryResidue { residue: f64, scale: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("rate fit needs at least 3 scan points, got {0}")]
    TooFewPoints(usize),
}
