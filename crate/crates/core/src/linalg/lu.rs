use super::{require_square, DenseMatrix, LinalgError};
use crate::Real;

/// Partial-pivot LU factorization `P·M = L·U` stored compactly.
#[derive(Clone, Debug)]
pub struct LuFactorization<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> LuFactorization<T> {
    /// Factorizes `m`; a pivot at or below `n·ε·‖M‖_max` is treated as zero.
    pub fn new(m: &DenseMatrix<T>) -> Result<Self, LinalgError> {
        Self::factor(m, false)
    }

    /// Like [`LuFactorization::new`], but a negligible pivot is replaced by
    /// the threshold instead of failing. Meant for inverse iteration, where
    /// the shifted matrix is singular by design.
    pub fn new_regularized(m: &DenseMatrix<T>) -> Result<Self, LinalgError> {
        Self::factor(m, true)
    }

    fn factor(m: &DenseMatrix<T>, regularize: bool) -> Result<Self, LinalgError> {
        let n = require_square(m)?;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let thresh = T::from_count(n.max(1)) * T::epsilon() * m.max_abs();
        let mut rank = n;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= thresh {
                if !regularize || thresh == T::zero() {
                    rank -= 1;
                    continue;
                }
                let sign = if lu[(k, k)] < T::zero() { -T::one() } else { T::one() };
                lu[(k, k)] = sign * thresh;
                p = k;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        if rank < n || m.max_abs() == T::zero() {
            return Err(LinalgError::Singular {
                rank_estimate: if m.max_abs() == T::zero() { 0 } else { rank },
            });
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Solves `M x = b` by partial-pivot LU.
pub fn solve<T: Real>(m: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: (m.rows(), 1),
            found: (b.len(), 1),
        });
    }
    Ok(LuFactorization::new(m)?.solve(b))
}

pub fn inverse<T: Real>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>, LinalgError> {
    Ok(LuFactorization::new(m)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    #[test]
    fn identity_returns_rhs() {
        let b = [1.5, -2.0, 3.25];
        assert_eq!(solve(&DenseMatrix::identity(3), &b).unwrap(), b.to_vec());
    }

    #[test]
    fn regularized_solve_finds_null_direction() {
        let m = DenseMatrix::from_rows(&[[1.0f64, 2.0], [2.0, 4.0]]).unwrap();
        assert!(LuFactorization::new(&m).is_err());
        let x = LuFactorization::new_regularized(&m).unwrap().solve(&[1.0, 1.0]);
        let n = norm2(&x);
        assert!(n.is_finite() && n > 1e10);
        let r = m.mul_vec(&x);
        assert!(norm2(&r) / n < 1e-14);
    }

    #[test]
    fn diagonal() {
        let m = DenseMatrix::from_diag(&[2.0, 4.0]);
        assert_eq!(solve(&m, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn rank_one_is_singular() {
        let m = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(
            solve(&m, &[1.0, 2.0]),
            Err(LinalgError::Singular { rank_estimate: 1 })
        );
    }

    #[test]
    fn residual_bound() {
        let m = DenseMatrix::from_rows(&[
            [0.0, 2.0, 1.0, -1.0],
            [3.0, 0.5, -2.0, 0.0],
            [1.0, 1.0, 1.0, 1.0],
            [-4.0, 0.0, 2.5, 3.0],
        ])
        .unwrap();
        let b = [1.0, -1.0, 2.0, 0.5];
        let x = solve(&m, &b).unwrap();
        let r: Vec<f64> = m.mul_vec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-10 * (m.frobenius_norm() * norm2(&x) + norm2(&b)));
        let inv = inverse(&m).unwrap();
        assert!((&(&m * &inv) - &DenseMatrix::identity(4)).max_abs() < 1e-13);
    }
}
