//! Std companion to `addl-core`: dataset and model file formats, a parallel
//! class executor, experiment pipelines, and the `addl` command line.

pub mod bundle;
mod error;
pub mod export;
pub mod formats;
pub mod pipeline;
pub mod runtime;

pub use bundle::{load_model, save_model, Bundle};
pub use error::{Error, Result};
pub use formats::{load_dataset, save_dataset, DatasetFormat};
pub use pipeline::{Preprocess, TrainConfig};
pub use runtime::{train, RayonExecutor, StdClock};
