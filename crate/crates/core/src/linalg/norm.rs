use num_complex::Complex;

use super::{singular_values, sym_eig, DenseMatrix, LinalgError, LuFactorization};
use crate::Real;

/// Spectral norm `σ_max(M)` from the largest eigenvalue of `MᵀM`.
pub fn operator_norm_2<T: Real>(m: &DenseMatrix<T>) -> Result<T, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(T::zero());
    }
    // Pre-scaling keeps MᵀM representable for badly scaled inputs.
    let s = m.max_abs();
    if s == T::zero() {
        return Ok(T::zero());
    }
    let scaled = m.scale(T::one() / s);
    let eig = sym_eig(&scaled.gram())?;
    Ok(s * eig.max().max(T::zero()).sqrt())
}

/// Solves the complex system `V c = b`, where the columns of `V` are given,
/// through the real embedding `[[Re, −Im], [Im, Re]]`.
pub fn complex_solve<T: Real>(
    columns: &[Vec<Complex<T>>],
    b: &[Complex<T>],
) -> Result<Vec<Complex<T>>, LinalgError> {
    let n = b.len();
    let (re, im) = split_columns(columns, n);
    let emb = DenseMatrix::complex_embedding(&re, &im);
    let rhs: Vec<T> = b.iter().map(|z| z.re).chain(b.iter().map(|z| z.im)).collect();
    let x = LuFactorization::new(&emb)?.solve(&rhs);
    let k = columns.len();
    Ok((0..k).map(|i| Complex::new(x[i], x[k + i])).collect())
}

/// 2-norm condition number `σ_max/σ_min` of the complex matrix with the given
/// columns; `+∞` when numerically singular.
pub fn complex_condition_number<T: Real>(columns: &[Vec<Complex<T>>]) -> T {
    let n = columns.first().map_or(0, Vec::len);
    if n == 0 {
        return T::one();
    }
    let (re, im) = split_columns(columns, n);
    let sv = singular_values(&DenseMatrix::complex_embedding(&re, &im));
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min == T::zero() {
        T::infinity()
    } else {
        max / min
    }
}

fn split_columns<T: Real>(columns: &[Vec<Complex<T>>], n: usize) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let k = columns.len();
    let re = DenseMatrix::from_fn(n, k, |i, j| columns[j][i].re);
    let im = DenseMatrix::from_fn(n, k, |i, j| columns[j][i].im);
    (re, im)
}
