//! Energy-preserving principal component projection.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::{Error, LabeledDataset, Matrix, Result, Vector};

/// Centering mean plus an `r × n` orthonormal row basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub mean: Vec<f64>,
    /// Row-major `r × n` basis.
    pub basis: Vec<f64>,
    pub components: usize,
    pub retained_energy: f64,
}

impl PcaTransform {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn basis_matrix(&self) -> Matrix {
        Matrix::from_row_slice(self.components, self.dim(), &self.basis)
    }

    /// `basis · (x − mean)` for every column.
    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        if ds.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: ds.dim() });
        }
        let mean = Vector::from_column_slice(&self.mean);
        let mut centered = ds.features().clone();
        for mut col in centered.column_iter_mut() {
            col -= &mean;
        }
        ds.with_features(self.basis_matrix() * centered)
    }
}

/// Fits PCA on `ds` and projects it.
///
/// Keeps the smallest number of leading components whose eigenvalue sum
/// reaches `energy` of the total scatter of the mean-centered data.
/// Eigenvalues are sorted descending with ties kept in index order, and each
/// eigenvector's sign is fixed so its largest-magnitude entry is positive.
pub fn pca_fit_transform(ds: &LabeledDataset, energy: f64) -> Result<(LabeledDataset, PcaTransform)> {
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(Error::InvalidEnergy(energy));
    }
    if ds.len() < 2 {
        return Err(Error::InvalidDimensions("PCA needs at least two samples".into()));
    }
    let n = ds.dim();
    let mean: Vector = ds.features().column_mean();
    let mut centered = ds.features().clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let scatter = &centered * centered.transpose();
    let eig = SymmetricEigen::new(scatter);

    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(*v));
    if !(top > 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    // Eigenvalues at rounding level belong to the null space of the data.
    let floor = top * 1e-12;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let values: Vec<f64> = order
        .iter()
        .map(|&i| {
            let v = eig.eigenvalues[i];
            if v > floor {
                v
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = values.iter().sum();
    let target = energy * total;
    let mut cumulative = 0.0;
    let mut r = 0;
    for v in &values {
        if cumulative >= target * (1.0 - 1e-12) && r > 0 {
            break;
        }
        cumulative += v;
        r += 1;
    }

    let mut basis = Vec::with_capacity(r * n);
    for &i in order.iter().take(r) {
        let v = eig.eigenvectors.column(i);
        let pivot = v.iter().fold(0.0_f64, |best, &x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        basis.extend(v.iter().map(|x| sign * x));
    }
    let transform = PcaTransform {
        mean: mean.iter().copied().collect(),
        basis,
        components: r,
        retained_energy: cumulative / total,
    };
    let projected = ds.with_features(transform.basis_matrix() * centered)?;
    Ok((projected, transform))
}
