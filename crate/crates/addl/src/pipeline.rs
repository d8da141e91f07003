//! Preprocess → train → evaluate chains shared by the CLI commands.

use addl_core::dataset::{add_gaussian_noise, normalize_unit_l2};
use addl_core::{
    accuracy, pca_fit_transform, predict_residual, soft_labels, Hyperparams, LabeledDataset, PcaTransform, SoftLabels,
    TrainOptions, TrainTrace,
};
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::{Error, Result};

/// Preprocessing fitted on training data and replayed on anything evaluated
/// against the resulting model: PCA projection first, then unit-ℓ2 scaling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub unit_norm: bool,
    pub pca: Option<PcaTransform>,
}

impl Preprocess {
    pub fn fit(train: &LabeledDataset, unit_norm: bool, pca_energy: Option<f64>) -> Result<(LabeledDataset, Self)> {
        let (projected, pca) = match pca_energy {
            Some(energy) => {
                let (ds, t) = pca_fit_transform(train, energy)?;
                (ds, Some(t))
            }
            None => (train.clone(), None),
        };
        let out = if unit_norm { normalize_unit_l2(&projected)? } else { projected };
        Ok((out, Self { unit_norm, pca }))
    }

    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        let projected = match &self.pca {
            Some(t) => t.apply(ds)?,
            None => ds.clone(),
        };
        Ok(if self.unit_norm { normalize_unit_l2(&projected)? } else { projected })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hyper: Hyperparams,
    pub unit_norm: bool,
    pub pca_energy: Option<f64>,
    pub parallel: bool,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if let Some(e) = self.pca_energy {
            if !(e > 0.0 && e <= 1.0) {
                return Err(addl_core::Error::InvalidEnergy(e).into());
            }
        }
        Ok(())
    }
}

pub struct Fitted {
    pub bundle: Bundle,
    pub trace: TrainTrace,
}

pub fn fit(train: &LabeledDataset, cfg: &TrainConfig) -> Result<Fitted> {
    cfg.validate()?;
    let (prepared, preprocess) = Preprocess::fit(train, cfg.unit_norm, cfg.pca_energy)?;
    let opts = TrainOptions { record_trace: true, parallel_classes: cfg.parallel };
    let out = crate::runtime::train(&prepared, cfg.hyper, opts)?;
    Ok(Fitted {
        bundle: Bundle {
            model: out.model,
            preprocess,
            iterations: out.trace.iterations,
            stop_reason: out.trace.stop_reason,
        },
        trace: out.trace,
    })
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub scores: SoftLabels,
    pub predictions: Vec<usize>,
    pub accuracy: f64,
    pub per_class: Vec<f64>,
}

/// Replays preprocessing, then predicts by soft-label argmax, or by smallest
/// class reconstruction residual when `residual` is set.
pub fn evaluate(bundle: &Bundle, test: &LabeledDataset, residual: bool) -> Result<Evaluation> {
    if test.dim() != bundle.input_dim() {
        return Err(addl_core::Error::DimensionMismatch { expected: bundle.input_dim(), found: test.dim() }.into());
    }
    let c = bundle.model.class_count;
    if test.class_count() > c {
        return Err(Error::Invalid(format!("test data has {} classes, model has {c}", test.class_count())));
    }
    let prepared = bundle.preprocess.apply(test)?;
    let scores = soft_labels(&bundle.model, prepared.features())?;
    let predictions =
        if residual { predict_residual(&bundle.model, prepared.features())? } else { scores.predict() };
    let accuracy = accuracy(&predictions, test.labels())?;
    let per_class = addl_core::classifier::per_class_accuracy(&predictions, test.labels(), c)?;
    Ok(Evaluation { scores, predictions, accuracy, per_class })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub variant: &'static str,
    pub alpha: f64,
    pub tau: f64,
    pub lambda: f64,
    pub accuracy: f64,
}

/// Full model plus the `α = 0`, `τ = 0` and `λ = 0` variants on identical
/// data and seed. The `λ = 0` model has no trained classifier and is scored
/// with the residual rule.
pub fn ablate(train: &LabeledDataset, test: &LabeledDataset, cfg: &TrainConfig) -> Result<Vec<AblationRow>> {
    let h = cfg.hyper;
    let variants = [
        ("full", h),
        ("alpha0", Hyperparams { alpha: 0.0, ..h }),
        ("tau0", Hyperparams { tau: 0.0, ..h }),
        ("lambda0", Hyperparams { lambda: 0.0, ..h }),
    ];
    variants
        .into_iter()
        .map(|(variant, hyper)| {
            let fitted = fit(train, &TrainConfig { hyper, ..*cfg })?;
            let eval = evaluate(&fitted.bundle, test, variant == "lambda0")?;
            Ok(AblationRow { variant, alpha: hyper.alpha, tau: hyper.tau, lambda: hyper.lambda, accuracy: eval.accuracy })
        })
        .collect()
}

/// Corrupts both splits with `Data + √variance · randn` (train with `seed`,
/// test with `seed + 1`), then trains and evaluates once per variance.
pub fn noise_sweep(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &TrainConfig,
    variances: &[f64],
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    for &v in variances {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(addl_core::Error::NegativeVariance(v).into());
        }
    }
    variances
        .iter()
        .map(|&v| {
            let noisy_train = add_gaussian_noise(train, v, seed)?;
            let noisy_test = add_gaussian_noise(test, v, seed.wrapping_add(1))?;
            let fitted = fit(&noisy_train, cfg)?;
            Ok((v, evaluate(&fitted.bundle, &noisy_test, false)?.accuracy))
        })
        .collect()
}
