//! Small dense helpers shared by the trainer, classifier and diagnostics.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};

use crate::Matrix;

/// Pivot floor, relative to the largest diagonal entry, below which a
/// symmetric system is treated as numerically singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// Cholesky factor of a symmetric positive-definite matrix, or `None` when the
/// matrix is not numerically positive definite.
pub(crate) fn spd_factor(a: Matrix) -> Option<Cholesky<f64, Dyn>> {
    let max_diag = a.diagonal().iter().fold(0.0_f64, |m, v| m.max(*v));
    if !(max_diag > 0.0) {
        return None;
    }
    let chol = Cholesky::new(a)?;
    let l = chol.l_dirty();
    let min_pivot = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    (min_pivot >= PIVOT_FLOOR * max_diag).then_some(chol)
}

/// Solves `a x = b` for symmetric positive-definite `a`.
pub(crate) fn solve_spd(a: Matrix, b: &Matrix) -> Option<Matrix> {
    spd_factor(a).map(|c| c.solve(b))
}

/// Minimum-norm solution of `a x = b` for symmetric positive semi-definite
/// `a`, through the eigen pseudo-inverse.
pub(crate) fn solve_psd_min_norm(a: Matrix, b: &Matrix) -> Matrix {
    let eig = SymmetricEigen::new(a);
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = top * 1e-12;
    let v = &eig.eigenvectors;
    let mut coeffs = v.transpose() * b;
    for (i, mut row) in coeffs.row_iter_mut().enumerate() {
        let e = eig.eigenvalues[i];
        let scale = if e > cutoff { 1.0 / e } else { 0.0 };
        row *= scale;
    }
    v * coeffs
}

/// `x a⁻¹` for symmetric `a`, computed as `(a⁻¹ xᵀ)ᵀ`.
pub(crate) fn right_solve(chol: &Cholesky<f64, Dyn>, x: &Matrix) -> Matrix {
    chol.solve(&x.transpose()).transpose()
}

pub(crate) fn frob_sq(m: &Matrix) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Sum of the Euclidean norms of the rows (the ℓ2,1 norm).
pub(crate) fn l21_norm(m: &Matrix) -> f64 {
    m.row_iter().map(|r| libm::sqrt(r.iter().map(|v| v * v).sum::<f64>())).sum()
}

pub(crate) fn all_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Horizontal concatenation of equally tall blocks.
pub(crate) fn hcat<'a>(rows: usize, blocks: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    let blocks: alloc::vec::Vec<&Matrix> = blocks.into_iter().collect();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Vertical concatenation of equally wide blocks.
pub(crate) fn vcat<'a>(cols: usize, blocks: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    let blocks: alloc::vec::Vec<&Matrix> = blocks.into_iter().collect();
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    out
}
