//! Model state, hyperparameters, initialization and the training objective.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{frob_sq, hcat, l21_norm, vcat};
use crate::rng::{gaussian_matrix, purpose, stream};
use crate::trainer::TrainingSet;
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Weight of the incoherence term `‖D_l S̄_l‖²`.
    pub alpha: f64,
    /// Weight of the code-extraction and ℓ2,1 sparsity terms.
    pub tau: f64,
    /// Weight of the classifier terms.
    pub lambda: f64,
    /// Ridge added to the projection, classifier and dictionary solves.
    pub gamma: f64,
    /// Atoms per class.
    pub k: usize,
    pub max_iter: usize,
    pub tol_obj: f64,
    pub tol_p: f64,
    /// Floor on code row norms when reweighting.
    pub eps_row: f64,
    /// Rescale atoms with norm above one after every dictionary update.
    pub project_atoms: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            tau: 0.05,
            lambda: 0.001,
            gamma: 1e-4,
            k: 5,
            max_iter: 50,
            tol_obj: 1e-3,
            tol_p: 1e-3,
            eps_row: 1e-8,
            project_atoms: false,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidHyperparams(msg));
        for (name, v) in [("alpha", self.alpha), ("tau", self.tau), ("lambda", self.lambda)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("tol_obj", self.tol_obj), ("tol_p", self.tol_p), ("eps_row", self.eps_row)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be finite and > 0"));
            }
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        Ok(())
    }
}

/// Per-class blocks `D_l` (`n × k`), `P_l` (`k × n`) and `W_l` (`c × k`).
#[derive(Debug, Clone, PartialEq)]
pub struct AddlModel {
    pub class_count: usize,
    pub dim: usize,
    pub hyper: Hyperparams,
    pub d: Vec<Matrix>,
    pub p: Vec<Matrix>,
    pub w: Vec<Matrix>,
}

impl AddlModel {
    pub fn atoms_per_class(&self) -> usize {
        self.hyper.k
    }

    /// `K = c · k`.
    pub fn total_atoms(&self) -> usize {
        self.class_count * self.hyper.k
    }

    /// `D = [D_1, …, D_c]`, `n × K`.
    pub fn dictionary(&self) -> Matrix {
        hcat(self.dim, &self.d)
    }

    /// `P = [P_1; …; P_c]`, `K × n`.
    pub fn projection(&self) -> Matrix {
        vcat(self.dim, &self.p)
    }

    /// `W = [W_1, …, W_c]`, `c × K`.
    pub fn classifier(&self) -> Matrix {
        hcat(self.class_count, &self.w)
    }

    /// Checks block counts, block shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        let (c, n, k) = (self.class_count, self.dim, self.hyper.k);
        if self.d.len() != c || self.p.len() != c || self.w.len() != c {
            return Err(Error::ShapeMismatch(format!("expected {c} blocks of each kind")));
        }
        for l in 0..c {
            let shapes = [(&self.d[l], (n, k), "D"), (&self.p[l], (k, n), "P"), (&self.w[l], (c, k), "W")];
            for (m, want, name) in shapes {
                if m.shape() != want {
                    return Err(Error::ShapeMismatch(format!("{name}_{l} is {:?}, expected {want:?}", m.shape())));
                }
                if !crate::linalg::all_finite(m) {
                    return Err(Error::ShapeMismatch(format!("{name}_{l} has non-finite entries")));
                }
            }
        }
        Ok(())
    }
}

/// Codes `S_l` (`k × N_l`) and the diagonal reweighting `Λ_l` of each class.
#[derive(Debug, Clone, PartialEq)]
pub struct Codes {
    pub s: Vec<Matrix>,
    /// Diagonal of `Λ_l`.
    pub lambda: Vec<Vector>,
}

impl Codes {
    pub fn zeros(k: usize, class_sizes: &[usize]) -> Self {
        Self {
            s: class_sizes.iter().map(|&nl| Matrix::zeros(k, nl)).collect(),
            lambda: class_sizes.iter().map(|_| Vector::from_element(k, 1.0)).collect(),
        }
    }

    /// `S̄_l`: all code blocks except class `l`, concatenated in class order.
    pub fn complement(&self, class: usize) -> Matrix {
        let k = self.s.first().map_or(0, |s| s.nrows());
        hcat(k, self.s.iter().enumerate().filter(|(j, _)| *j != class).map(|(_, s)| s))
    }
}

fn unit_frobenius(rows: usize, cols: usize, seed: u64, tag: u32, class: usize) -> Matrix {
    let mut m = gaussian_matrix(rows, cols, &mut stream(seed, tag, class as u32));
    let norm = m.norm();
    m /= norm;
    m
}

/// Random unit-Frobenius-norm blocks, `Λ_l = I`, `S_l = 0`.
///
/// Each block is drawn from its own stream keyed by block kind and class, so
/// the blocks of class `l` do not depend on how many classes precede it.
pub fn init_model(class_sizes: &[usize], dim: usize, hyper: Hyperparams) -> Result<(AddlModel, Codes)> {
    hyper.validate()?;
    let c = class_sizes.len();
    if c == 0 || dim == 0 {
        return Err(Error::InvalidDimensions("need at least one class and one feature".into()));
    }
    let k = hyper.k;
    let seed = hyper.seed;
    let model = AddlModel {
        class_count: c,
        dim,
        hyper,
        d: (0..c).map(|l| unit_frobenius(dim, k, seed, purpose::INIT_DICTIONARY, l)).collect(),
        p: (0..c).map(|l| unit_frobenius(k, dim, seed, purpose::INIT_PROJECTION, l)).collect(),
        w: (0..c).map(|l| unit_frobenius(c, k, seed, purpose::INIT_CLASSIFIER, l)).collect(),
    };
    Ok((model, Codes::zeros(k, class_sizes)))
}

/// Unweighted components of the training objective and their weighted total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// `Σ ‖X_l − D_l S_l‖²`
    pub recon: f64,
    /// `Σ ‖D_l S̄_l‖²`
    pub incoh: f64,
    /// `Σ ‖P_l X_l − S_l‖²`
    pub code_fit: f64,
    /// `Σ ‖P_l X̄_l‖²`
    pub code_null: f64,
    /// `Σ ‖S_l‖_{2,1}`
    pub sparsity: f64,
    /// `Σ ‖H_l − W_l P_l X_l‖²`
    pub label_fit: f64,
    /// `Σ ‖W_l P_l X̄_l‖²`
    pub label_null: f64,
    pub total: f64,
}

impl ObjectiveBreakdown {
    pub fn weighted_total(&self, h: &Hyperparams) -> f64 {
        self.recon
            + h.alpha * self.incoh
            + h.tau * (self.code_fit + self.code_null + self.sparsity)
            + h.lambda * (self.label_fit + self.label_null)
    }

    fn add(&mut self, o: &ObjectiveBreakdown) {
        self.recon += o.recon;
        self.incoh += o.incoh;
        self.code_fit += o.code_fit;
        self.code_null += o.code_null;
        self.sparsity += o.sparsity;
        self.label_fit += o.label_fit;
        self.label_null += o.label_null;
    }
}

/// Per-class contribution to the objective (total left at zero).
pub(crate) fn class_objective(model: &AddlModel, codes: &Codes, set: &TrainingSet, l: usize) -> ObjectiveBreakdown {
    let x = &set.x[l];
    let xbar = &set.xbar[l];
    let s = &codes.s[l];
    let d = &model.d[l];
    let p = &model.p[l];
    let w = &model.w[l];
    let px = p * x;
    let pxbar = p * xbar;
    ObjectiveBreakdown {
        recon: frob_sq(&(x - d * s)),
        incoh: frob_sq(&(d * codes.complement(l))),
        code_fit: frob_sq(&(&px - s)),
        code_null: frob_sq(&pxbar),
        sparsity: l21_norm(s),
        label_fit: frob_sq(&(&set.h[l] - w * &px)),
        label_null: frob_sq(&(w * &pxbar)),
        total: 0.0,
    }
}

/// Evaluates the full objective. Sparsity uses the true ℓ2,1 norm, not the
/// `Λ` surrogate.
pub fn objective(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> Result<ObjectiveBreakdown> {
    check_shapes(model, codes, set)?;
    let mut out = ObjectiveBreakdown::default();
    for l in 0..model.class_count {
        out.add(&class_objective(model, codes, set, l));
    }
    out.total = out.weighted_total(&model.hyper);
    Ok(out)
}

pub(crate) fn check_shapes(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> Result<()> {
    model.validate()?;
    if set.class_count() != model.class_count {
        return Err(Error::ShapeMismatch(format!(
            "model has {} classes, data has {}",
            model.class_count,
            set.class_count()
        )));
    }
    if set.dim() != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, found: set.dim() });
    }
    if codes.s.len() != model.class_count || codes.lambda.len() != model.class_count {
        return Err(Error::ShapeMismatch("code block count differs from class count".into()));
    }
    for l in 0..model.class_count {
        if codes.s[l].shape() != (model.hyper.k, set.x[l].ncols()) || codes.lambda[l].len() != model.hyper.k {
            return Err(Error::ShapeMismatch(format!("code block {l} has shape {:?}", codes.s[l].shape())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_generate;
    use crate::LabeledDataset;
    use alloc::vec;

    fn small_problem(seed: u64) -> (AddlModel, Codes, TrainingSet) {
        let ds = synth_generate(3, 2, 6, 4, 0.1, seed).unwrap();
        let hyper = Hyperparams { k: 3, seed, alpha: 0.3, tau: 0.2, lambda: 0.7, ..Hyperparams::default() };
        let set = TrainingSet::new(&ds, hyper.gamma).unwrap();
        let (model, mut codes) = init_model(&set.class_sizes(), 6, hyper).unwrap();
        for (l, s) in codes.s.iter_mut().enumerate() {
            *s = gaussian_matrix(3, 4, &mut stream(seed, 50, l as u32));
        }
        (model, codes, set)
    }

    #[test]
    fn init_blocks_have_unit_frobenius_norm() {
        let (model, codes) = init_model(&[3, 4], 5, Hyperparams { k: 2, ..Default::default() }).unwrap();
        for b in model.d.iter().chain(&model.p).chain(&model.w) {
            assert!((b.norm() - 1.0).abs() <= 1e-12);
        }
        for lam in &codes.lambda {
            assert_eq!(lam, &Vector::from_element(2, 1.0));
        }
        assert!(codes.s.iter().all(|s| s.iter().all(|&v| v == 0.0)));
        let again = init_model(&[3, 4], 5, Hyperparams { k: 2, ..Default::default() }).unwrap();
        assert_eq!(again.0, model);
    }

    #[test]
    fn concatenations_have_expected_shapes() {
        let (model, _) = init_model(&[1, 1, 1], 4, Hyperparams { k: 2, ..Default::default() }).unwrap();
        assert_eq!(model.dictionary().shape(), (4, 6));
        assert_eq!(model.projection().shape(), (6, 4));
        assert_eq!(model.classifier().shape(), (3, 6));
    }

    #[test]
    fn zero_problem_has_zero_objective() {
        let ds = LabeledDataset::new(Matrix::zeros(3, 4), vec![0, 0, 1, 1], 2).unwrap();
        let set = TrainingSet::new(&ds, 1e-4).unwrap();
        let hyper = Hyperparams { k: 2, ..Default::default() };
        let (mut model, codes) = init_model(&set.class_sizes(), 3, hyper).unwrap();
        // H is one-hot, so zero the classifier to make every residual vanish
        for w in &mut model.w {
            w.fill(0.0);
        }
        let mut set0 = set.clone();
        for h in &mut set0.h {
            h.fill(0.0);
        }
        let obj = objective(&model, &codes, &set0).unwrap();
        assert_eq!(obj, ObjectiveBreakdown::default());
    }

    #[test]
    fn zero_weights_leave_reconstruction_only() {
        let (mut model, codes, set) = small_problem(3);
        model.hyper.alpha = 0.0;
        model.hyper.tau = 0.0;
        model.hyper.lambda = 0.0;
        let obj = objective(&model, &codes, &set).unwrap();
        assert_eq!(obj.total, obj.recon);
    }

    #[test]
    fn objective_matches_elementwise_loops() {
        for seed in 0..5 {
            let (model, codes, set) = small_problem(seed);
            let obj = objective(&model, &codes, &set).unwrap();
            let naive = naive_objective(&model, &codes, &set);
            assert!((obj.total - naive).abs() <= 1e-10 * naive.abs(), "{} vs {naive}", obj.total);
            assert!((obj.weighted_total(&model.hyper) - obj.total).abs() <= 1e-10 * obj.total);
        }
    }

    // Scalar triple loops over the raw per-class blocks.
    fn naive_objective(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> f64 {
        let h = model.hyper;
        let (c, n, k) = (model.class_count, model.dim, h.k);
        let mut total = 0.0;
        for l in 0..c {
            let x = &set.x[l];
            let s = &codes.s[l];
            let (d, p, w) = (&model.d[l], &model.p[l], &model.w[l]);
            let sq = |v: f64| v * v;
            for j in 0..x.ncols() {
                for r in 0..n {
                    let ds: f64 = (0..k).map(|a| d[(r, a)] * s[(a, j)]).sum();
                    total += sq(x[(r, j)] - ds);
                }
                for a in 0..k {
                    let px: f64 = (0..n).map(|r| p[(a, r)] * x[(r, j)]).sum();
                    total += h.tau * sq(px - s[(a, j)]);
                }
                for q in 0..c {
                    let wpx: f64 = (0..k).map(|a| w[(q, a)] * (0..n).map(|r| p[(a, r)] * x[(r, j)]).sum::<f64>()).sum();
                    total += h.lambda * sq(set.h[l][(q, j)] - wpx);
                }
            }
            for a in 0..k {
                total += h.tau * (0..x.ncols()).map(|j| sq(s[(a, j)])).sum::<f64>().sqrt();
            }
            for m in 0..c {
                if m == l {
                    continue;
                }
                let (xo, so) = (&set.x[m], &codes.s[m]);
                for j in 0..xo.ncols() {
                    for r in 0..n {
                        let v: f64 = (0..k).map(|a| d[(r, a)] * so[(a, j)]).sum();
                        total += h.alpha * sq(v);
                    }
                    for a in 0..k {
                        let v: f64 = (0..n).map(|r| p[(a, r)] * xo[(r, j)]).sum();
                        total += h.tau * sq(v);
                    }
                    for q in 0..c {
                        let v: f64 = (0..k).map(|a| w[(q, a)] * (0..n).map(|r| p[(a, r)] * xo[(r, j)]).sum::<f64>()).sum();
                        total += h.lambda * sq(v);
                    }
                }
            }
        }
        total
    }

    #[test]
    fn l21_identity_with_reciprocal_weights() {
        let s = gaussian_matrix(4, 6, &mut stream(9, 1, 0));
        let lam: Vec<f64> = s.row_iter().map(|r| 1.0 / (2.0 * r.norm())).collect();
        let quad: f64 = (0..4).map(|i| lam[i] * s.row(i).norm_squared()).sum();
        assert!((2.0 * quad - l21_norm(&s)).abs() <= 1e-10);
    }

    #[test]
    fn hyperparams_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        assert!(Hyperparams { gamma: 0.0, ..Default::default() }.validate().is_err());
        assert!(Hyperparams { k: 0, ..Default::default() }.validate().is_err());
        assert!(Hyperparams { alpha: -1.0, ..Default::default() }.validate().is_err());
        assert!(Hyperparams { tol_p: 0.0, ..Default::default() }.validate().is_err());
    }
}
