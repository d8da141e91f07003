//! Alternating closed-form optimization.
//!
//! One iteration updates, in order: codes `S`, row weights `Λ`, projection
//! `P`, classifier `W`, dictionary `D`. Every update is a set of independent
//! per-class solves, dispatched through a [`ClassExecutor`] so a std runtime
//! can run them in parallel; results do not depend on the executor.

use alloc::vec::Vec;

use nalgebra::{Cholesky, Dyn};
use serde::{Deserialize, Serialize};

use crate::dataset::{one_hot, partition};
use crate::linalg::{all_finite, right_solve, solve_psd_min_norm, solve_spd, spd_factor};
use crate::model::{check_shapes, init_model, objective, AddlModel, Codes, Hyperparams, ObjectiveBreakdown};
use crate::{Block, Error, LabeledDataset, Matrix, Result, Vector};

/// Runs one closure per class and collects the results in class order.
pub trait ClassExecutor: Sync {
    fn map_classes<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// In-order, single-threaded execution.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl ClassExecutor for Serial {
    fn map_classes<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Millisecond wall clock for trace timings.
pub trait Clock {
    fn now_millis(&self) -> f64;
}

/// Always reads zero; traces record no timing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_millis(&self) -> f64 {
        0.0
    }
}

/// Per-class views of the training data plus the shared factor of
/// `X Xᵀ + γ I` (`X_l X_lᵀ + X̄_l X̄_lᵀ = X Xᵀ` for every class).
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub x: Vec<Matrix>,
    pub xbar: Vec<Matrix>,
    pub h: Vec<Matrix>,
    gram: Matrix,
    gram_factor: Cholesky<f64, Dyn>,
}

impl TrainingSet {
    pub fn new(ds: &LabeledDataset, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidHyperparams(alloc::format!("gamma = {gamma} must be > 0")));
        }
        let part = partition(ds);
        let labels = one_hot(ds);
        let c = ds.class_count();
        let x: Vec<Matrix> = (0..c).map(|l| part.class_block(ds, l)).collect();
        let xbar = (0..c).map(|l| part.complement_block(ds, l)).collect();
        let h = (0..c).map(|l| labels.class_block(&part, l)).collect();
        let mut gram = Matrix::zeros(ds.dim(), ds.dim());
        for xl in &x {
            gram += xl * xl.transpose();
        }
        let n = ds.dim();
        let gram_factor =
            spd_factor(&gram + Matrix::identity(n, n) * gamma).ok_or(Error::Singular(Block::Projection))?;
        Ok(Self { x, xbar, h, gram, gram_factor })
    }

    pub fn class_count(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.x.iter().map(|x| x.ncols()).collect()
    }

    /// `X Xᵀ`.
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainOptions {
    pub record_trace: bool,
    /// Honored by executors that support it; [`train`] is always serial.
    pub parallel_classes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ObjTol,
    PTol,
    MaxIter,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ObjTol => "obj_tol",
            StopReason::PTol => "p_tol",
            StopReason::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: ObjectiveBreakdown,
    /// `‖P^(t) − P^(t−1)‖_F`.
    pub dp_fro: f64,
    /// Wall time of the codes, row-weights, projection, classifier and
    /// dictionary updates.
    pub block_millis: [f64; 5],
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Objective of the initialized model.
    pub initial: ObjectiveBreakdown,
    pub records: Vec<IterationRecord>,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AddlModel,
    pub codes: Codes,
    pub trace: TrainTrace,
}

fn finite_blocks(blocks: &[Matrix]) -> bool {
    blocks.iter().all(all_finite)
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// `S_l ← (D_lᵀD_l + α Σ_{j≠l} D_jᵀD_j + τI + τΛ_l)⁻¹ (τ P_l X_l + D_lᵀ X_l)`;
/// `Λ` is kept.
///
/// This is the exact minimizer over `S` of the objective with the `ℓ2,1` term
/// replaced by its `Λ` majorizer. The incoherence term `‖D_j S̄_j‖²` depends on
/// `S_l` for every `j ≠ l`, which is where the `α` sum comes from; without it
/// the update is not a descent step.
pub fn update_codes(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> Result<Codes> {
    update_codes_with(&Serial, model, codes, set)
}

pub fn update_codes_with<E: ClassExecutor>(
    exec: &E,
    model: &AddlModel,
    codes: &Codes,
    set: &TrainingSet,
) -> Result<Codes> {
    check_shapes(model, codes, set)?;
    let Hyperparams { tau, alpha, .. } = model.hyper;
    let grams: Vec<Matrix> = model.d.iter().map(|d| d.transpose() * d).collect();
    let s = exec.map_classes(model.class_count, |l| {
        let d = &model.d[l];
        let x = &set.x[l];
        let mut lhs = grams[l].clone();
        for (j, g) in grams.iter().enumerate() {
            if j != l {
                lhs += g * alpha;
            }
        }
        for i in 0..lhs.nrows() {
            lhs[(i, i)] += tau * (1.0 + codes.lambda[l][i]);
        }
        let rhs = (&model.p[l] * x) * tau + d.transpose() * x;
        solve_spd(lhs, &rhs).ok_or(Error::Singular(Block::Codes))
    });
    Ok(Codes { s: collect(s)?, lambda: codes.lambda.clone() })
}

/// `Λ_l,ii ← 1 / (2 max(‖row i of S_l‖, eps_row))`; `S` is kept.
pub fn update_row_weights(codes: &Codes, eps_row: f64) -> Codes {
    let lambda = codes
        .s
        .iter()
        .map(|s| Vector::from_iterator(s.nrows(), s.row_iter().map(|r| 1.0 / (2.0 * r.norm().max(eps_row)))))
        .collect();
    Codes { s: codes.s.clone(), lambda }
}

/// `P_l ← (τI + λW_lᵀW_l)⁻¹ (τ S_l X_lᵀ + λ W_lᵀ H_l X_lᵀ)(X Xᵀ + γI)⁻¹`.
///
/// When the left factor is singular (`τ = 0` with `k > c`) the minimum-norm
/// stationary point is returned.
pub fn update_projection(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> Result<Vec<Matrix>> {
    update_projection_with(&Serial, model, codes, set)
}

pub fn update_projection_with<E: ClassExecutor>(
    exec: &E,
    model: &AddlModel,
    codes: &Codes,
    set: &TrainingSet,
) -> Result<Vec<Matrix>> {
    check_shapes(model, codes, set)?;
    let Hyperparams { tau, lambda, k, .. } = model.hyper;
    if tau == 0.0 && lambda == 0.0 {
        return Err(Error::ProjectionUndefined);
    }
    Ok(exec.map_classes(model.class_count, |l| {
        let w = &model.w[l];
        let xt = set.x[l].transpose();
        let target = (&codes.s[l] * &xt) * tau + (w.transpose() * (&set.h[l] * &xt)) * lambda;
        let right = right_solve(&set.gram_factor, &target);
        let left = Matrix::identity(k, k) * tau + (w.transpose() * w) * lambda;
        match spd_factor(left.clone()) {
            Some(chol) => chol.solve(&right),
            None => solve_psd_min_norm(left, &right),
        }
    }))
}

/// `W_l ← H_l A_lᵀ (A_l A_lᵀ + B_l B_lᵀ + γI)⁻¹` with `A_l = P_l X_l`,
/// `B_l = P_l X̄_l`.
pub fn update_classifier(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> Result<Vec<Matrix>> {
    update_classifier_with(&Serial, model, codes, set)
}

pub fn update_classifier_with<E: ClassExecutor>(
    exec: &E,
    model: &AddlModel,
    codes: &Codes,
    set: &TrainingSet,
) -> Result<Vec<Matrix>> {
    check_shapes(model, codes, set)?;
    let Hyperparams { gamma, k, .. } = model.hyper;
    let w = exec.map_classes(model.class_count, |l| {
        let p = &model.p[l];
        let a = p * &set.x[l];
        let b = p * &set.xbar[l];
        let lhs = &a * a.transpose() + &b * b.transpose() + Matrix::identity(k, k) * gamma;
        let rhs = &a * set.h[l].transpose();
        solve_spd(lhs, &rhs).map(|z| z.transpose()).ok_or(Error::Singular(Block::Classifier))
    });
    collect(w)
}

/// `D_l ← X_l S_lᵀ (S_l S_lᵀ + α S̄_l S̄_lᵀ + γI)⁻¹`, then optional atom
/// projection onto the unit ball.
pub fn update_dictionary(model: &AddlModel, codes: &Codes, set: &TrainingSet) -> Result<Vec<Matrix>> {
    update_dictionary_with(&Serial, model, codes, set)
}

pub fn update_dictionary_with<E: ClassExecutor>(
    exec: &E,
    model: &AddlModel,
    codes: &Codes,
    set: &TrainingSet,
) -> Result<Vec<Matrix>> {
    check_shapes(model, codes, set)?;
    let Hyperparams { alpha, gamma, k, project_atoms, .. } = model.hyper;
    let grams: Vec<Matrix> = codes.s.iter().map(|s| s * s.transpose()).collect();
    let d = exec.map_classes(model.class_count, |l| {
        let mut lhs = grams[l].clone() + Matrix::identity(k, k) * gamma;
        for (j, g) in grams.iter().enumerate() {
            if j != l {
                lhs += g * alpha;
            }
        }
        let rhs = &codes.s[l] * set.x[l].transpose();
        let mut d = solve_spd(lhs, &rhs).map(|z| z.transpose()).ok_or(Error::Singular(Block::Dictionary))?;
        if project_atoms {
            for mut atom in d.column_iter_mut() {
                let norm = atom.norm();
                if norm > 1.0 {
                    atom /= norm;
                }
            }
        }
        Ok(d)
    });
    collect(d)
}

/// Trains from a fresh seeded initialization, serially.
pub fn train(ds: &LabeledDataset, hyper: Hyperparams, opts: TrainOptions) -> Result<TrainOutcome> {
    train_with(ds, hyper, opts, &Serial, &NoClock)
}

pub fn train_with<E: ClassExecutor, C: Clock>(
    ds: &LabeledDataset,
    hyper: Hyperparams,
    opts: TrainOptions,
    exec: &E,
    clock: &C,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    let set = TrainingSet::new(ds, hyper.gamma)?;
    let (model, codes) = init_model(&set.class_sizes(), ds.dim(), hyper)?;
    train_from(&set, model, codes, opts, exec, clock)
}

/// Runs the alternating loop from a given state. Stops when the relative
/// objective change drops below `tol_obj`, when `‖ΔP‖_F` drops below
/// `tol_p`, or after `max_iter` iterations.
pub fn train_from<E: ClassExecutor, C: Clock>(
    set: &TrainingSet,
    mut model: AddlModel,
    mut codes: Codes,
    opts: TrainOptions,
    exec: &E,
    clock: &C,
) -> Result<TrainOutcome> {
    let hyper = model.hyper;
    hyper.validate()?;
    let initial = objective(&model, &codes, set)?;
    let mut previous = initial.total;
    let mut records = Vec::new();
    let mut stop_reason = StopReason::MaxIter;
    let mut iterations = 0;

    for iter in 1..=hyper.max_iter {
        let diverged = |block| Error::Diverged { iteration: iter, block };
        let mut marks = [0.0; 6];
        marks[0] = clock.now_millis();

        codes = update_codes_with(exec, &model, &codes, set)?;
        if !finite_blocks(&codes.s) {
            return Err(diverged(Block::Codes));
        }
        marks[1] = clock.now_millis();

        codes = update_row_weights(&codes, hyper.eps_row);
        marks[2] = clock.now_millis();

        let new_p = update_projection_with(exec, &model, &codes, set)?;
        if !finite_blocks(&new_p) {
            return Err(diverged(Block::Projection));
        }
        let dp_fro = libm::sqrt(new_p.iter().zip(&model.p).map(|(a, b)| (a - b).norm_squared()).sum::<f64>());
        model.p = new_p;
        marks[3] = clock.now_millis();

        model.w = update_classifier_with(exec, &model, &codes, set)?;
        if !finite_blocks(&model.w) {
            return Err(diverged(Block::Classifier));
        }
        marks[4] = clock.now_millis();

        model.d = update_dictionary_with(exec, &model, &codes, set)?;
        if !finite_blocks(&model.d) {
            return Err(diverged(Block::Dictionary));
        }
        marks[5] = clock.now_millis();

        let obj = objective(&model, &codes, set)?;
        if !obj.total.is_finite() {
            return Err(diverged(Block::Objective));
        }
        iterations = iter;
        if opts.record_trace {
            let mut block_millis = [0.0; 5];
            for (b, w) in block_millis.iter_mut().zip(marks.windows(2)) {
                *b = w[1] - w[0];
            }
            records.push(IterationRecord { iter, objective: obj, dp_fro, block_millis, millis: marks[5] - marks[0] });
        }

        let rel_change = relative_change(previous, obj.total);
        previous = obj.total;
        if rel_change < hyper.tol_obj {
            stop_reason = StopReason::ObjTol;
            break;
        }
        if dp_fro < hyper.tol_p {
            stop_reason = StopReason::PTol;
            break;
        }
    }

    Ok(TrainOutcome { model, codes, trace: TrainTrace { initial, records, iterations, stop_reason } })
}

fn relative_change(previous: f64, current: f64) -> f64 {
    let diff = (previous - current).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / previous.abs().max(f64::MIN_POSITIVE)
    }
}
