//! Labeled feature data: validation, synthetic generation, preprocessing,
//! splitting, and per-class views.
//!
//! Features are stored `n × N`, one sample per column. Labels are 0-based.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::linalg::QR;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{gaussian_matrix, purpose, stream};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledDataset {
    /// Validates and wraps a feature matrix with its labels.
    ///
    /// Every label must be below `class_count`, every class must own at least
    /// one sample, and all features must be finite.
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if labels.len() != features.ncols() {
            return Err(Error::LengthMismatch(labels.len(), features.ncols()));
        }
        if class_count == 0 {
            return Err(Error::InvalidDimensions("class count must be at least 1".into()));
        }
        let mut counts = alloc::vec![0usize; class_count];
        for &label in &labels {
            if label >= class_count {
                return Err(Error::LabelOutOfRange { label, classes: class_count });
            }
            counts[label] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyClass(empty));
        }
        for (col, column) in features.column_iter().enumerate() {
            if let Some(row) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
        }
        Ok(Self { features, labels, class_count })
    }

    /// Same as [`LabeledDataset::new`] with `class_count = max(label) + 1`.
    pub fn from_labels(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let c = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(features, labels, c)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Feature dimension `n`.
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Keeps labels and class count, swaps in new features with the same
    /// column count.
    pub fn with_features(&self, features: Matrix) -> Result<Self> {
        Self::new(features, self.labels.clone(), self.class_count)
    }

    /// Sub-dataset made of the given columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        let features = self.features.select_columns(columns.iter());
        let labels = columns.iter().map(|&j| self.labels[j]).collect();
        Self::new(features, labels, self.class_count)
    }
}

/// Column indices of each class, in label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    per_class: Vec<Vec<usize>>,
}

impl ClassPartition {
    pub fn indices(&self, class: usize) -> &[usize] {
        &self.per_class[class]
    }

    pub fn class_count(&self) -> usize {
        self.per_class.len()
    }

    /// `X_l`: the samples of class `l`, in dataset order.
    pub fn class_block(&self, ds: &LabeledDataset, class: usize) -> Matrix {
        ds.features.select_columns(self.per_class[class].iter())
    }

    /// `X̄_l`: every sample not in class `l`, concatenated in class order.
    pub fn complement_block(&self, ds: &LabeledDataset, class: usize) -> Matrix {
        let cols: Vec<usize> = self
            .per_class
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != class)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        ds.features.select_columns(cols.iter())
    }
}

/// One-hot label matrix `H` (`c × N`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    h: Matrix,
}

impl LabelMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    /// `H_l`: the columns of `H` belonging to class `l`.
    pub fn class_block(&self, part: &ClassPartition, class: usize) -> Matrix {
        self.h.select_columns(part.indices(class).iter())
    }
}

pub fn partition(ds: &LabeledDataset) -> ClassPartition {
    let mut per_class = alloc::vec![Vec::new(); ds.class_count];
    for (j, &l) in ds.labels.iter().enumerate() {
        per_class[l].push(j);
    }
    ClassPartition { per_class }
}

pub fn one_hot(ds: &LabeledDataset) -> LabelMatrix {
    let mut h = Matrix::zeros(ds.class_count, ds.len());
    for (j, &l) in ds.labels.iter().enumerate() {
        h[(l, j)] = 1.0;
    }
    LabelMatrix { h }
}

/// Distribution of the subspace coordinates `z` in [`synth_generate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Latent {
    /// `|g|` with `g ~ N(0, I)`: nonnegative coordinates, so each class sits in
    /// a cone of its subspace and is separable by a bias-free linear map.
    #[default]
    HalfNormal,
    /// `g ~ N(0, I)`: each class is symmetric about the origin.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthSpec {
    pub classes: usize,
    pub subspace: usize,
    pub dim: usize,
    pub per_class: usize,
    pub noise_sigma: f64,
    pub latent: Latent,
    pub seed: u64,
}

/// Draws `per_class` samples for each of `c` classes from independent random
/// `k_true`-dimensional subspaces of `R^n`, with half-normal coordinates.
pub fn synth_generate(
    c: usize,
    k_true: usize,
    n: usize,
    per_class: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    synth_generate_with(&SynthSpec {
        classes: c,
        subspace: k_true,
        dim: n,
        per_class,
        noise_sigma,
        latent: Latent::HalfNormal,
        seed,
    })
}

/// Class `l` samples are `B_l z + ε` with `B_l` an orthonormal
/// `n × k_true` basis, `z` drawn from `spec.latent` and
/// `ε ~ N(0, noise_sigma² I)`. Samples are ordered class by class.
pub fn synth_generate_with(spec: &SynthSpec) -> Result<LabeledDataset> {
    let &SynthSpec { classes: c, subspace: k_true, dim: n, per_class, noise_sigma, latent, seed } = spec;
    if c == 0 || k_true == 0 || n == 0 || per_class == 0 {
        return Err(Error::InvalidDimensions("classes, subspace, dim and per-class must be positive".into()));
    }
    if k_true > n {
        return Err(Error::InvalidDimensions(format!("subspace dim {k_true} exceeds ambient dim {n}")));
    }
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::InvalidDimensions(format!("noise sigma {noise_sigma} must be finite and >= 0")));
    }
    let mut features = Matrix::zeros(n, c * per_class);
    let mut labels = Vec::with_capacity(c * per_class);
    for l in 0..c {
        let basis = orthonormal_basis(n, k_true, seed, l as u32);
        let mut z = gaussian_matrix(k_true, per_class, &mut stream(seed, purpose::SYNTH_LATENT, l as u32));
        if latent == Latent::HalfNormal {
            z.apply(|v| *v = v.abs());
        }
        let mut block = &basis * z;
        if noise_sigma > 0.0 {
            let mut rng = stream(seed, purpose::SYNTH_NOISE, l as u32);
            for v in block.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v += noise_sigma * g;
            }
        }
        features.columns_mut(l * per_class, per_class).copy_from(&block);
        labels.extend(core::iter::repeat_n(l, per_class));
    }
    LabeledDataset::new(features, labels, c)
}

/// The orthonormal basis used by [`synth_generate`] for class `class`.
pub fn orthonormal_basis(n: usize, k: usize, seed: u64, class: u32) -> Matrix {
    let g = gaussian_matrix(n, k, &mut stream(seed, purpose::SYNTH_BASIS, class));
    QR::new(g).q()
}

/// Scales every sample to unit Euclidean norm.
pub fn normalize_unit_l2(ds: &LabeledDataset) -> Result<LabeledDataset> {
    let mut features = ds.features.clone();
    for (j, mut col) in features.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        col /= norm;
    }
    ds.with_features(features)
}

/// Adds `√variance · G` with `G` i.i.d. standard normal, drawn column-major
/// from the additive-noise stream of `seed`.
pub fn add_gaussian_noise(ds: &LabeledDataset, variance: f64, seed: u64) -> Result<LabeledDataset> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::NegativeVariance(variance));
    }
    if variance == 0.0 {
        return Ok(ds.clone());
    }
    let scale = libm::sqrt(variance);
    let mut rng = stream(seed, purpose::ADDITIVE_NOISE, 0);
    let mut features = ds.features.clone();
    for v in features.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += scale * g;
    }
    ds.with_features(features)
}

/// Random per-class split with exactly `per_class_train` training samples per
/// class. Both halves keep the original sample order.
pub fn split_train_test(
    ds: &LabeledDataset,
    per_class_train: usize,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let part = partition(ds);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for l in 0..ds.class_count {
        let mut idx = part.indices(l).to_vec();
        if idx.len() <= per_class_train {
            return Err(Error::ClassTooSmall { class: l, available: idx.len(), requested: per_class_train });
        }
        idx.shuffle(&mut stream(seed, purpose::SPLIT, l as u32));
        train.extend_from_slice(&idx[..per_class_train]);
        test.extend_from_slice(&idx[per_class_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.select(&train)?, ds.select(&test)?))
}
