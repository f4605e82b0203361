//! Dense real linear-algebra kernels.
//!
//! Everything here is written against [`Real`](crate::Real) and has no
//! numerical dependencies beyond `num-complex` for eigenvalue output.

mod cholesky;
mod lu;
mod matrix;
mod nonsymmetric;
mod norm;
mod svd;
mod symmetric;

use thiserror::Error;

pub use cholesky::cholesky;
pub use lu::{inverse, solve, LuFactorization};
pub use matrix::{cdot, cnorm2, dot, norm2, DenseMatrix};
pub use nonsymmetric::{
    cluster_eigenvalues, nonsym_eig, normalize_phase, orthonormal_span, EigenCluster,
    EigenDecomposition,
};
pub use norm::{complex_condition_number, complex_solve, operator_norm_2};
pub use svd::singular_values;
pub use symmetric::{sym_eig, sym_function, SymmetricEigen};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot_index} is not positive)")]
    NotPositiveDefinite { pivot_index: usize },
    #[error("symmetric eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("QR iteration failed to deflate the block ending at row {stuck_block}")]
    BlockNoConvergence { stuck_block: usize },
    #[error("matrix is numerically singular (rank estimate {rank_estimate})")]
    Singular { rank_estimate: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
}

/// Relative symmetry tolerance for symmetric-tagged inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn require_square<T: crate::Real>(m: &DenseMatrix<T>) -> Result<usize, LinalgError> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        })
    }
}

fn require_symmetric<T: crate::Real>(m: &DenseMatrix<T>) -> Result<usize, LinalgError> {
    let n = require_square(m)?;
    if !m.is_symmetric(T::lit(SYMMETRY_TOL)) {
        return Err(LinalgError::NotSymmetric {
            asymmetry: m.asymmetry().to_f64_lossy(),
        });
    }
    Ok(n)
}
