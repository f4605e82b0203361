use super::{require_symmetric, DenseMatrix, LinalgError};
use crate::Real;

/// Spectral decomposition `M = V Λ Vᵀ` of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DenseMatrix<T>,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::nan)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::nan)
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    /// `V f(Λ) Vᵀ`.
    pub fn apply_function(&self, f: impl Fn(T) -> T) -> DenseMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = T::zero();
                for k in 0..n {
                    s += v[(i, k)] * fv[k] * v[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

/// Eigen-decomposition of a symmetric matrix by Householder tridiagonalization
/// followed by the implicit-shift QL iteration.
pub fn sym_eig<T: Real>(m: &DenseMatrix<T>) -> Result<SymmetricEigen<T>, LinalgError> {
    let n = require_symmetric(m)?;
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    let mut v = m.symmetrized();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;
    Ok(SymmetricEigen { values: d, vectors: v })
}

/// Convenience for `V f(Λ) Vᵀ` of a symmetric matrix.
pub fn sym_function<T: Real>(
    m: &DenseMatrix<T>,
    f: impl Fn(T) -> T,
) -> Result<DenseMatrix<T>, LinalgError> {
    Ok(sym_eig(m)?.apply_function(f))
}

// Householder reduction to tridiagonal form (Bowdler, Martin, Reinsch and
// Wilkinson's tred2). On exit `v` holds the accumulated orthogonal transform,
// `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize<T: Real>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
                v[(j, i)] = zero;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[(k, j)] -= upd;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = zero;
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = zero;
}

// Implicit-shift QL on the tridiagonal matrix (tql2), sorting ascending.
fn tridiagonal_ql<T: Real>(
    v: &mut DenseMatrix<T>,
    d: &mut [T],
    e: &mut [T],
) -> Result<(), LinalgError> {
    let n = d.len();
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    let max_iterations = 40 * n.max(1);
    let mut total = 0usize;

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;

    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            loop {
                total += 1;
                if total > max_iterations {
                    return Err(LinalgError::NoConvergence {
                        iterations: max_iterations,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[(k, i + 1)];
                        let vk = v[(k, i)];
                        v[(k, i + 1)] = s * vk + c * vk1;
                        v[(k, i)] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }

    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                let tmp = v[(j, i)];
                v[(j, i)] = v[(j, k)];
                v[(j, k)] = tmp;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(m: &DenseMatrix<f64>, tol: f64) {
        let eig = sym_eig(m).unwrap();
        let n = m.rows();
        let vtv = eig.vectors.gram();
        assert!((&vtv - &DenseMatrix::identity(n)).max_abs() < 1e-10);
        let rebuilt = eig.apply_function(|x| x);
        assert!((&rebuilt - m).frobenius_norm() <= tol * m.frobenius_norm().max(1e-300));
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn diagonal() {
        let eig = sym_eig(&DenseMatrix::from_diag(&[3.0, 2.0])).unwrap();
        assert_eq!(eig.values, vec![2.0, 3.0]);
    }

    #[test]
    fn two_by_two() {
        let m = DenseMatrix::<f64>::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let eig = sym_eig(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
        check_decomposition(&m, 1e-10);
    }

    #[test]
    fn scalar() {
        let eig = sym_eig(&DenseMatrix::from_rows(&[[5.0]]).unwrap()).unwrap();
        assert_eq!(eig.values, vec![5.0]);
        assert_eq!(eig.vectors[(0, 0)], 1.0);
    }

    #[test]
    fn wider_dense() {
        let m = DenseMatrix::from_fn(7, 7, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        check_decomposition(&m, 1e-12);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn inverse_square_root() {
        let m = DenseMatrix::<f64>::from_rows(&[[4.0, 1.0], [1.0, 3.0]]).unwrap();
        let r = sym_function(&m, |x| 1.0 / x.sqrt()).unwrap();
        let prod = &(&r * &m) * &r;
        assert!((&prod - &DenseMatrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn single_precision() {
        let m = DenseMatrix::<f32>::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let eig = sym_eig(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-6);
        assert!((eig.values[1] - 3.0).abs() < 1e-6);
    }
}
