//! Mutual coherence, atom norms and block-structure energies.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::partition;
use crate::model::AddlModel;
use crate::{Error, LabeledDataset, Matrix, Result};

/// Largest absolute cosine between atoms of different classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub mu: f64,
    /// `(class a, atom i, class b, atom j)` attaining `mu`.
    pub argmax_pair: (usize, usize, usize, usize),
    /// Zero atoms excluded from the scan.
    pub skipped_atoms: usize,
}

pub fn mutual_coherence(model: &AddlModel) -> Result<CoherenceReport> {
    let mut atoms: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    let mut skipped = 0;
    for (l, d) in model.d.iter().enumerate() {
        for (i, col) in d.column_iter().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                skipped += 1;
                continue;
            }
            atoms.push((l, i, col.iter().map(|v| v / norm).collect()));
        }
    }
    if atoms.is_empty() {
        return Err(Error::AllAtomsZero);
    }
    let mut best = CoherenceReport { mu: 0.0, argmax_pair: (0, 0, 0, 0), skipped_atoms: skipped };
    let mut found = false;
    for (a, (la, ia, ua)) in atoms.iter().enumerate() {
        for (lb, ib, ub) in &atoms[a + 1..] {
            if la == lb {
                continue;
            }
            let cos = ua.iter().zip(ub).map(|(x, y)| x * y).sum::<f64>().abs().min(1.0);
            if !found || cos > best.mu {
                best.mu = cos;
                best.argmax_pair = (*la, *ia, *lb, *ib);
                found = true;
            }
        }
    }
    Ok(best)
}

/// Euclidean norm of every dictionary atom, class by class.
pub fn atom_norms(model: &AddlModel) -> Vec<f64> {
    model.d.iter().flat_map(|d| d.column_iter().map(|c| c.norm()).collect::<Vec<_>>()).collect()
}

/// On-class and off-class energies of a per-class linear map applied to
/// labeled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEnergyReport {
    /// `‖M_l X_l‖²_F` per class.
    pub on_block: Vec<f64>,
    /// `‖M_l X̄_l‖²_F` per class.
    pub off_block: Vec<f64>,
    /// `Σ off / Σ on`, or 0 when the on-block energy vanishes.
    pub ratio: f64,
    /// Set when the on-block energy is zero.
    pub degenerate: bool,
}

fn energies(maps: &[Matrix], ds: &LabeledDataset, dim: usize) -> Result<BlockEnergyReport> {
    if ds.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: ds.dim() });
    }
    if ds.class_count() != maps.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "model has {} classes, data has {}",
            maps.len(),
            ds.class_count()
        )));
    }
    let part = partition(ds);
    let mut on_block = Vec::with_capacity(maps.len());
    let mut off_block = Vec::with_capacity(maps.len());
    for (l, m) in maps.iter().enumerate() {
        on_block.push((m * part.class_block(ds, l)).norm_squared());
        off_block.push((m * part.complement_block(ds, l)).norm_squared());
    }
    let on: f64 = on_block.iter().sum();
    let off: f64 = off_block.iter().sum();
    let degenerate = on == 0.0;
    let ratio = if degenerate { 0.0 } else { off / on };
    Ok(BlockEnergyReport { on_block, off_block, ratio, degenerate })
}

/// Block energies of the codes `P_l X`.
pub fn block_energy(model: &AddlModel, ds: &LabeledDataset) -> Result<BlockEnergyReport> {
    energies(&model.p, ds, model.dim)
}

/// Block energies of the soft labels `W_l P_l X`.
pub fn block_energy_wpx(model: &AddlModel, ds: &LabeledDataset) -> Result<BlockEnergyReport> {
    let maps: Vec<Matrix> = model.w.iter().zip(&model.p).map(|(w, p)| w * p).collect();
    energies(&maps, ds, model.dim)
}

/// Flat summary of the diagnostics above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub mu: f64,
    pub argmax_pair: (usize, usize, usize, usize),
    pub skipped_atoms: usize,
    pub atom_norm_min: f64,
    pub atom_norm_max: f64,
    pub atom_norm_mean: f64,
    #[serde(rename = "block_ratio_PX")]
    pub block_ratio_px: f64,
    #[serde(rename = "block_ratio_WPX")]
    pub block_ratio_wpx: f64,
}

impl DiagnosticsSummary {
    pub fn compute(model: &AddlModel, ds: &LabeledDataset) -> Result<Self> {
        let coherence = mutual_coherence(model)?;
        let norms = atom_norms(model);
        Ok(Self {
            mu: coherence.mu,
            argmax_pair: coherence.argmax_pair,
            skipped_atoms: coherence.skipped_atoms,
            atom_norm_min: norms.iter().copied().fold(f64::INFINITY, f64::min),
            atom_norm_max: norms.iter().copied().fold(0.0, f64::max),
            atom_norm_mean: norms.iter().sum::<f64>() / norms.len() as f64,
            block_ratio_px: block_energy(model, ds)?.ratio,
            block_ratio_wpx: block_energy_wpx(model, ds)?.ratio,
        })
    }
}
