use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Trainer block in which a failure was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Codes,
    RowWeights,
    Projection,
    Classifier,
    Dictionary,
    Objective,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Codes => "codes",
            Block::RowWeights => "row-weights",
            Block::Projection => "projection",
            Block::Classifier => "classifier",
            Block::Dictionary => "dictionary",
            Block::Objective => "objective",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("empty class {0}")]
    EmptyClass(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("zero column {0} cannot be normalized")]
    ZeroColumn(usize),
    #[error("degenerate covariance: all samples are equal")]
    DegenerateCovariance,
    #[error("invalid energy fraction {0}, expected 0 < energy <= 1")]
    InvalidEnergy(f64),
    #[error("negative noise variance {0}")]
    NegativeVariance(f64),
    #[error("class {class} has {available} samples, needs more than {requested} for a train/test split")]
    ClassTooSmall { class: usize, available: usize, requested: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparams(String),
    #[error("projection update undefined: tau and lambda are both zero")]
    ProjectionUndefined,
    #[error("singular system in {0} update")]
    Singular(Block),
    #[error("diverged at iteration {iteration}: non-finite value in {block} update")]
    Diverged { iteration: usize, block: Block },
    #[error("dimension mismatch: model expects {expected}, data has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("ROC needs both positive and negative samples")]
    SingleClassTruth,
    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },
    #[error("every atom is zero")]
    AllAtomsZero,
}
