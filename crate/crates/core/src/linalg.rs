//! Dense complex matrix helpers shared by the signal-processing modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Draws a `rows x cols` matrix with i.i.d. CN(0, variance) entries.
pub fn complex_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let scale = (variance / 2.0).sqrt();
    // column-major fill keeps the draw order tied to (col, row)
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Squared Frobenius norm.
pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    frobenius_sq(m).sqrt()
}

/// Real part of the trace of a square matrix.
pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// Selects the given columns (in order) into a new matrix.
pub fn select_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

/// Selects the given rows (in order) into a new matrix.
pub fn select_rows(m: &CMatrix, rows: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

/// Inverts a Hermitian positive-definite matrix through its Cholesky factor.
///
/// Returns `None` when the factorization fails or the pivots indicate a
/// condition number beyond what double precision can resolve.
pub fn hpd_inverse(gram: &CMatrix) -> Option<CMatrix> {
    const PIVOT_RATIO_FLOOR: f64 = 1e-13;
    if gram.nrows() == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    let chol = gram.clone().cholesky()?;
    let diag: Vec<f64> = (0..gram.nrows())
        .map(|i| chol.l_dirty()[(i, i)].re)
        .collect();
    let max = diag.iter().cloned().fold(0.0_f64, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !min.is_finite() || (min * min) / (max * max) < PIVOT_RATIO_FLOOR {
        return None;
    }
    Some(chol.inverse())
}
