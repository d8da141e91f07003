//! Reference implementations used as test oracles. Everything here works on
//! raw samples and labels with explicit loops, so it shares no code path with
//! the library's block partitioning or solvers.

#![allow(dead_code)]

use addl_core::{AddlModel, Codes, Hyperparams, LabeledDataset, Matrix, TrainingSet, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Instance {
    pub ds: LabeledDataset,
    pub set: TrainingSet,
    pub model: AddlModel,
    pub codes: Codes,
}

pub fn gauss(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random small problem: `c ∈ {2, 3}`, `n ≤ 8`, `k ≤ 4`, `N ≤ 20`, with
/// random blocks, codes and positive row weights.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0xadd1_0000 + seed);
    let c = rng.random_range(2..=3);
    let n = rng.random_range(3..=8);
    let k = rng.random_range(1..=4);
    let sizes: Vec<usize> = (0..c).map(|_| rng.random_range(2..=20 / c)).collect();
    let mut labels = Vec::new();
    // interleave classes so class blocks are not contiguous in the input
    let total: usize = sizes.iter().sum();
    let mut left = sizes.clone();
    while labels.len() < total {
        let l = rng.random_range(0..c);
        if left[l] > 0 {
            left[l] -= 1;
            labels.push(l);
        }
    }
    let features = gauss(n, total, &mut rng);
    let ds = LabeledDataset::new(features, labels, c).unwrap();
    let hyper = Hyperparams {
        alpha: rng.random_range(0.01..1.0),
        tau: rng.random_range(0.02..1.0),
        lambda: rng.random_range(0.001..1.0),
        gamma: rng.random_range(1e-4..1e-2),
        k,
        ..Hyperparams::default()
    };
    let set = TrainingSet::new(&ds, hyper.gamma).unwrap();
    let model = AddlModel {
        class_count: c,
        dim: n,
        hyper,
        d: (0..c).map(|_| gauss(n, k, &mut rng)).collect(),
        p: (0..c).map(|_| gauss(k, n, &mut rng)).collect(),
        w: (0..c).map(|_| gauss(c, k, &mut rng)).collect(),
    };
    let codes = Codes {
        s: sizes.iter().map(|&m| gauss(k, m, &mut rng)).collect(),
        lambda: (0..c).map(|_| Vector::from_fn(k, |_, _| rng.random_range(0.1..2.0))).collect(),
    };
    Instance { ds, set, model, codes }
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = 0.0;
            for t in 0..a.ncols() {
                acc += a[(i, t)] * b[(t, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn sq_dist(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sq(a: &Matrix) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub fn l21(s: &Matrix) -> f64 {
    (0..s.nrows()).map(|i| (0..s.ncols()).map(|j| s[(i, j)] * s[(i, j)]).sum::<f64>().sqrt()).sum()
}

/// Samples of class `l` (in input order) and of every other class.
pub fn class_columns(ds: &LabeledDataset, l: usize) -> (Matrix, Matrix) {
    let pick = |keep: &dyn Fn(usize) -> bool| {
        let cols: Vec<_> = (0..ds.len()).filter(|&j| keep(ds.labels()[j])).map(|j| ds.features().column(j)).collect();
        if cols.is_empty() {
            Matrix::zeros(ds.dim(), 0)
        } else {
            Matrix::from_columns(&cols)
        }
    };
    (pick(&|y| y == l), pick(&|y| y != l))
}

/// `c × m` matrix with ones in row `l`.
pub fn target(c: usize, l: usize, m: usize) -> Matrix {
    Matrix::from_fn(c, m, |i, _| if i == l { 1.0 } else { 0.0 })
}

/// Codes of every class except `l`, side by side.
pub fn other_codes(codes: &Codes, l: usize) -> Matrix {
    let k = codes.s[0].nrows();
    let cols: Vec<_> = codes.s.iter().enumerate().filter(|(j, _)| *j != l).flat_map(|(_, s)| s.column_iter()).collect();
    if cols.is_empty() {
        Matrix::zeros(k, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Terms {
    pub recon: f64,
    pub incoh: f64,
    pub code_fit: f64,
    pub code_null: f64,
    pub l21: f64,
    /// `Σ_l tr(S_lᵀ Λ_l S_l)`
    pub weighted: f64,
    pub label_fit: f64,
    pub label_null: f64,
}

pub fn terms(ds: &LabeledDataset, model: &AddlModel, codes: &Codes) -> Terms {
    let c = model.class_count;
    let mut t = Terms::default();
    for l in 0..c {
        let (x, xbar) = class_columns(ds, l);
        let (d, p, w, s) = (&model.d[l], &model.p[l], &model.w[l], &codes.s[l]);
        let px = mul(p, &x);
        let pxbar = mul(p, &xbar);
        t.recon += sq_dist(&x, &mul(d, s));
        t.incoh += sq(&mul(d, &other_codes(codes, l)));
        t.code_fit += sq_dist(&px, s);
        t.code_null += sq(&pxbar);
        t.l21 += l21(s);
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                t.weighted += codes.lambda[l][i] * s[(i, j)] * s[(i, j)];
            }
        }
        t.label_fit += sq_dist(&target(c, l, x.ncols()), &mul(w, &px));
        t.label_null += sq(&mul(w, &pxbar));
    }
    t
}

/// Full objective with the true ℓ2,1 norm.
pub fn total(ds: &LabeledDataset, model: &AddlModel, codes: &Codes) -> f64 {
    let h = model.hyper;
    let t = terms(ds, model, codes);
    t.recon + h.alpha * t.incoh + h.tau * (t.code_fit + t.code_null + t.l21) + h.lambda * (t.label_fit + t.label_null)
}

/// Objective with the sparsity term replaced by its `Λ` quadratic surrogate.
pub fn surrogate(ds: &LabeledDataset, model: &AddlModel, codes: &Codes) -> f64 {
    let h = model.hyper;
    let t = terms(ds, model, codes);
    t.recon
        + h.alpha * t.incoh
        + h.tau * (t.code_fit + t.code_null + t.weighted)
        + h.lambda * (t.label_fit + t.label_null)
}

/// `P_l` block objective plus `γ (τ ‖P_l‖² + λ ‖W_l P_l‖²)`.
pub fn projection_objective(ds: &LabeledDataset, model: &AddlModel, codes: &Codes, l: usize, p: &Matrix) -> f64 {
    let h = model.hyper;
    let c = model.class_count;
    let (x, xbar) = class_columns(ds, l);
    let w = &model.w[l];
    let px = mul(p, &x);
    let pxbar = mul(p, &xbar);
    h.tau * (sq_dist(&px, &codes.s[l]) + sq(&pxbar))
        + h.lambda * (sq_dist(&target(c, l, x.ncols()), &mul(w, &px)) + sq(&mul(w, &pxbar)))
        + h.gamma * (h.tau * sq(p) + h.lambda * sq(&mul(w, p)))
}

/// `W_l` block objective plus `γ ‖W_l‖²`.
pub fn classifier_objective(ds: &LabeledDataset, model: &AddlModel, l: usize, w: &Matrix) -> f64 {
    let c = model.class_count;
    let (x, xbar) = class_columns(ds, l);
    let p = &model.p[l];
    sq_dist(&target(c, l, x.ncols()), &mul(w, &mul(p, &x))) + sq(&mul(w, &mul(p, &xbar))) + model.hyper.gamma * sq(w)
}

/// `D_l` block objective plus `γ ‖D_l‖²`.
pub fn dictionary_objective(ds: &LabeledDataset, model: &AddlModel, codes: &Codes, l: usize, d: &Matrix) -> f64 {
    let h = model.hyper;
    let (x, _) = class_columns(ds, l);
    sq_dist(&x, &mul(d, &codes.s[l])) + h.alpha * sq(&mul(d, &other_codes(codes, l))) + h.gamma * sq(d)
}

/// Central finite-difference gradient.
pub fn fd_gradient(at: &Matrix, h: f64, f: impl Fn(&Matrix) -> f64) -> Matrix {
    let mut g = Matrix::zeros(at.nrows(), at.ncols());
    let mut probe = at.clone();
    for i in 0..at.nrows() {
        for j in 0..at.ncols() {
            let v = at[(i, j)];
            probe[(i, j)] = v + h;
            let up = f(&probe);
            probe[(i, j)] = v - h;
            let down = f(&probe);
            probe[(i, j)] = v;
            g[(i, j)] = (up - down) / (2.0 * h);
        }
    }
    g
}

/// Minimizer of the `Λ` surrogate over `S_l`, everything else fixed. The
/// surrogate is quadratic in `S_l`, so its gradient and Hessian are recovered
/// exactly from unit perturbations and the normal equations are solved by LU.
pub fn codes_normal_equations(ds: &LabeledDataset, model: &AddlModel, codes: &Codes, l: usize) -> Matrix {
    let (k, m) = codes.s[l].shape();
    let dim = k * m;
    let mut probe = codes.clone();
    let mut eval = |v: &[(usize, f64)]| {
        probe.s[l].fill(0.0);
        for &(i, a) in v {
            probe.s[l][i] += a;
        }
        surrogate(ds, model, &probe)
    };
    let f0 = eval(&[]);
    let plus: Vec<f64> = (0..dim).map(|i| eval(&[(i, 1.0)])).collect();
    let minus: Vec<f64> = (0..dim).map(|i| eval(&[(i, -1.0)])).collect();
    let grad = Vector::from_fn(dim, |i, _| (plus[i] - minus[i]) / 2.0);
    let mut hess = Matrix::zeros(dim, dim);
    for i in 0..dim {
        hess[(i, i)] = plus[i] + minus[i] - 2.0 * f0;
        for j in 0..i {
            let v = eval(&[(i, 1.0), (j, 1.0)]) - plus[i] - plus[j] + f0;
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let sol = hess.lu().solve(&(-grad)).expect("surrogate Hessian is nonsingular");
    Matrix::from_column_slice(k, m, sol.as_slice())
}

pub fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    sq_dist(a, b).sqrt() / b.norm().max(1e-300)
}
