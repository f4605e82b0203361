use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::SystemModel;
use crate::error::{Error, Result};
use crate::linalg::{cnorm2, norm2, DenseMatrix, SymmetricEigen};
use crate::Real;

/// Element `(x, y)` of the phase space: a position and a velocity.
///
/// The entries are real for states and complex for eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector<S> {
    pub position: Vec<S>,
    pub velocity: Vec<S>,
}

impl<S: Clone> PhaseVector<S> {
    pub fn new(position: Vec<S>, velocity: Vec<S>) -> Result<Self> {
        if position.len() != velocity.len() {
            return Err(Error::invalid_input(format!(
                "position has {} entries but velocity has {}",
                position.len(),
                velocity.len()
            )));
        }
        Ok(Self { position, velocity })
    }

    /// Splits a stacked `(x, y)` vector of even length.
    pub fn from_stacked(v: &[S]) -> Self {
        let n = v.len() / 2;
        Self {
            position: v[..n].to_vec(),
            velocity: v[n..2 * n].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn stacked(&self) -> Vec<S> {
        let mut v = self.position.clone();
        v.extend_from_slice(&self.velocity);
        v
    }
}

impl<T: Real> PhaseVector<T> {
    /// `xᵀKx + yᵀy`.
    pub fn energy_norm_sqr(&self, stiffness: &DenseMatrix<T>) -> T {
        stiffness.quadratic_form(&self.position) + self.velocity.iter().map(|&v| v * v).sum::<T>()
    }

    pub fn energy_norm(&self, stiffness: &DenseMatrix<T>) -> T {
        self.energy_norm_sqr(stiffness).max(T::zero()).sqrt()
    }

    pub fn euclidean_norm(&self) -> T {
        norm2(&self.position).hypot(norm2(&self.velocity))
    }
}

impl<T: Real> PhaseVector<Complex<T>> {
    /// `x*Kx + y*y`.
    pub fn energy_norm_sqr(&self, stiffness: &DenseMatrix<T>) -> T {
        let kx = stiffness.mul_cvec(&self.position);
        let xkx: T = self
            .position
            .iter()
            .zip(&kx)
            .map(|(x, k)| (x.conj() * k).re)
            .sum();
        xkx + self.velocity.iter().map(|v| v.norm_sqr()).sum::<T>()
    }

    pub fn energy_norm(&self, stiffness: &DenseMatrix<T>) -> T {
        self.energy_norm_sqr(stiffness).max(T::zero()).sqrt()
    }

    pub fn euclidean_norm(&self) -> T {
        cnorm2(&self.position).hypot(cnorm2(&self.velocity))
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self {
            position: self.position.iter().map(|&x| x * s).collect(),
            velocity: self.velocity.iter().map(|&y| y * s).collect(),
        }
    }
}

/// Coordinates `(K^{1/2}x, y)` in which the energy norm is Euclidean.
///
/// In these coordinates the phase operator becomes
/// `[[0, K^{1/2}], [−K^{1/2}, −C]]`, whose symmetric part is `diag(0, −C)`.
#[derive(Clone, Debug)]
pub struct EnergyFrame<T> {
    pub stiffness_eigen: SymmetricEigen<T>,
    pub sqrt_stiffness: DenseMatrix<T>,
    pub inv_sqrt_stiffness: DenseMatrix<T>,
    pub operator: DenseMatrix<T>,
}

impl<T: Real> EnergyFrame<T> {
    pub fn new(model: &SystemModel<T>) -> Result<Self> {
        let n = model.dim();
        let eig = model.stiffness_eigen()?;
        let sqrt = eig.apply_function(|x| x.sqrt());
        let inv_sqrt = eig.apply_function(|x| x.sqrt().recip());
        let operator = DenseMatrix::from_blocks(
            &DenseMatrix::zeros(n, n),
            &sqrt,
            &(-&sqrt),
            &(-model.damping()),
        )?;
        Ok(Self {
            stiffness_eigen: eig,
            sqrt_stiffness: sqrt,
            inv_sqrt_stiffness: inv_sqrt,
            operator,
        })
    }

    pub fn dim(&self) -> usize {
        self.sqrt_stiffness.rows()
    }

    /// Stacked energy coordinates of a real state.
    pub fn to_energy(&self, v: &PhaseVector<T>) -> Vec<T> {
        let mut out = self.sqrt_stiffness.mul_vec(&v.position);
        out.extend_from_slice(&v.velocity);
        out
    }

    pub fn from_energy(&self, w: &[T]) -> PhaseVector<T> {
        let n = self.dim();
        PhaseVector {
            position: self.inv_sqrt_stiffness.mul_vec(&w[..n]),
            velocity: w[n..].to_vec(),
        }
    }

    pub fn to_energy_complex(&self, v: &PhaseVector<Complex<T>>) -> Vec<Complex<T>> {
        let mut out = self.sqrt_stiffness.mul_cvec(&v.position);
        out.extend_from_slice(&v.velocity);
        out
    }

    pub fn from_energy_complex(&self, w: &[Complex<T>]) -> PhaseVector<Complex<T>> {
        let n = self.dim();
        PhaseVector {
            position: self.inv_sqrt_stiffness.mul_cvec(&w[..n]),
            velocity: w[n..].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_norm() {
        let k = DenseMatrix::from_diag(&[4.0, 1.0]);
        let v = PhaseVector::new(vec![1.0, 0.0], vec![0.0, 3.0]).unwrap();
        assert_eq!(v.energy_norm_sqr(&k), 13.0);
        let zero = PhaseVector::new(vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(zero.energy_norm(&k), 0.0);
        assert!(PhaseVector::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let k = DenseMatrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let c = DenseMatrix::from_diag(&[0.3, 0.1]);
        let m = SystemModel::new(k.clone(), c).unwrap();
        let f = m.energy_frame().unwrap();
        let v = PhaseVector::<f64>::new(vec![0.7, -1.2], vec![0.4, 2.0]).unwrap();
        let w = f.to_energy(&v);
        assert!((norm2(&w).powi(2) - v.energy_norm_sqr(&k)).abs() < 1e-13);
        let back = f.from_energy(&w);
        for (a, b) in back.stacked().iter().zip(v.stacked()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
