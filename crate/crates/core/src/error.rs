use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("invalid comb: {0}")]
    InvalidComb(String),

    #[error("angle out of range: {0}")]
    AngleOutOfRange(String),

    #[error("tone index {index} outside 1..={count}")]
    ToneIndex { index: usize, count: usize },

    #[error("element/tone count mismatch: {elements} elements, {tones} tones")]
    CountMismatch { elements: usize, tones: usize },

    #[error("unsupported for this geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("far-field source cannot be evaluated with the spherical model")]
    FarFieldSourceInExactModel,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("undersampled: sample rate {sample_rate} Hz must exceed {required} Hz")]
    Undersampled { sample_rate: f64, required: f64 },

    #[error("axis calibration is undefined: {0}")]
    DegenerateCalibration(String),

    #[error("no isolated peak in a flat envelope")]
    NoIsolatedPeak,

    #[error("phase unwrapping failed: step of {step_deg:.3} deg at element ({m}, {n})")]
    UnwrapFailed { m: usize, n: usize, step_deg: f64 },
}
