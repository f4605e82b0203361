use super::DenseMatrix;
use crate::Real;

/// Singular values in descending order by one-sided Jacobi rotations.
///
/// Small singular values are computed to high relative accuracy, which the
/// `MᵀM` route cannot offer; used for condition numbers.
pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Vec<T> {
    // Work on columns of the taller orientation.
    let a = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = (a.rows(), a.cols());
    let mut colv: Vec<Vec<T>> = (0..cols).map(|j| a.column(j)).collect();
    let eps = T::epsilon();
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..rows {
                    let (x, y) = (colv[p][i], colv[q][i]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = colv.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for i in 0..rows {
                    let (x, y) = (cp[i], cq[i]);
                    cp[i] = c * x - s * y;
                    cq[i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = colv.iter().map(|c| super::norm2(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let sv = singular_values(&DenseMatrix::<f64>::from_diag(&[1.0, -3.0, 2.0]));
        assert_eq!(sv, vec![3.0, 2.0, 1.0]);
        let sv = singular_values(&DenseMatrix::<f64>::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap());
        assert!((sv[0] - 2.0).abs() < 1e-15);
        assert!(sv[1].abs() < 1e-15);
    }

    #[test]
    fn graded_matrix_keeps_small_values() {
        let m = DenseMatrix::<f64>::from_rows(&[[1.0, 0.0], [0.0, 1e-12]]).unwrap();
        let sv = singular_values(&m);
        assert!((sv[1] - 1e-12).abs() < 1e-26);
    }

    #[test]
    fn wide_input() {
        let sv = singular_values(&DenseMatrix::<f64>::from_rows(&[[3.0, 4.0]]).unwrap());
        assert_eq!(sv.len(), 1);
        assert!((sv[0] - 5.0).abs() < 1e-15);
    }
}
