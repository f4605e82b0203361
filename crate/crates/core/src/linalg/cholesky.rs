use super::{require_symmetric, DenseMatrix, LinalgError};
use crate::Real;

/// Lower-triangular `L` with `L·Lᵀ = M`.
///
/// Fails with [`LinalgError::NotPositiveDefinite`] at the first pivot that is
/// not strictly positive.
pub fn cholesky<T: Real>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>, LinalgError> {
    let n = require_symmetric(m)?;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite { pivot_index: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}
