//! Analysis discriminative dictionary learning (ADDL).
//!
//! Jointly learns, per class `l`, a synthesis sub-dictionary `D_l`, an
//! analysis projection `P_l` that extracts codes directly from signals, and a
//! linear sub-classifier `W_l` acting on those codes. Training alternates
//! closed-form block updates; inference is a single matrix product `W P x`.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, the parallel
//! class executor, and the command line live in the `addl` companion crate.

#![no_std]
// NaN must fail range checks, so `!(x >= 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classifier;
pub mod dataset;
pub mod diagnostics;
mod error;
mod linalg;
pub mod model;
pub mod pca;
pub mod rng;
pub mod trainer;

pub use classifier::{accuracy, predict, predict_residual, roc_one_vs_rest, soft_labels, RocCurve, SoftLabels};
pub use dataset::{ClassPartition, LabelMatrix, LabeledDataset, Latent, SynthSpec};
pub use diagnostics::{atom_norms, block_energy, block_energy_wpx, mutual_coherence, BlockEnergyReport, CoherenceReport, DiagnosticsSummary};
pub use error::{Block, Error, Result};
pub use model::{init_model, objective, AddlModel, Codes, Hyperparams, ObjectiveBreakdown};
pub use pca::{pca_fit_transform, PcaTransform};
pub use trainer::{train, train_with, ClassExecutor, Clock, NoClock, Serial, StopReason, TrainOptions, TrainOutcome, TrainTrace, TrainingSet};

/// Dense column-major matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type Vector = nalgebra::DVector<f64>;
