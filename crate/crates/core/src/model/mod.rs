//! Finite-dimensional damped second-order systems `z̈ + K z + C ż = 0`.
//!
//! `K` represents the stiffness operator and `C` the damping operator in an
//! orthonormal basis of the state Hilbert space, so the mass matrix is the
//! identity. Positions live in the energy space with inner product
//! `⟨x, y⟩ = xᵀ K y`; velocities carry the plain Euclidean product.

mod beam;
mod phase;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, inverse, sym_eig, DenseMatrix, LinalgError, SymmetricEigen};
use crate::Real;

pub use beam::{beam_assemble, mode_wavenumber, patch_integral, BeamSpec, DampingPatch, MAX_TRUNCATION_ORDER};
pub use phase::{EnergyFrame, PhaseVector};

/// Relative slack admitted on the damping's smallest eigenvalue.
pub const PSD_TOL: f64 = 1e-10;

/// Where a model came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSource<T> {
    Generic,
    Beam(BeamSpec<T>),
    /// `C = αK + B`.
    Perturbed {
        alpha: T,
        perturbation: DenseMatrix<T>,
        /// `‖K^{-1/2} B K^{-1/2}‖₂`.
        compactness_proxy: T,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemModel<T> {
    stiffness: DenseMatrix<T>,
    damping: DenseMatrix<T>,
    source: ModelSource<T>,
}

/// Outcome of checking the structural assumptions on `(K, C)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<T> {
    pub stiffness_positive_definite: bool,
    pub stiffness_min_eigenvalue: T,
    pub damping_min_eigenvalue: T,
    /// `λ_min(K^{-1/2} C K^{-1/2})`: `γ·xᵀKx ≤ xᵀCx`.
    pub gamma: T,
    /// `λ_max(K^{-1/2} C K^{-1/2})`: `xᵀCx ≤ α·xᵀKx`.
    pub alpha: T,
}

impl<T: Real> SystemModel<T> {
    /// Validated generic model.
    pub fn new(stiffness: DenseMatrix<T>, damping: DenseMatrix<T>) -> Result<Self> {
        Self::with_source(stiffness, damping, ModelSource::Generic)
    }

    pub(crate) fn with_source(
        stiffness: DenseMatrix<T>,
        damping: DenseMatrix<T>,
        source: ModelSource<T>,
    ) -> Result<Self> {
        let model = Self {
            stiffness,
            damping,
            source,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.stiffness.rows()
    }

    pub fn stiffness(&self) -> &DenseMatrix<T> {
        &self.stiffness
    }

    pub fn damping(&self) -> &DenseMatrix<T> {
        &self.damping
    }

    pub fn source(&self) -> &ModelSource<T> {
        &self.source
    }

    pub fn beam_spec(&self) -> Option<&BeamSpec<T>> {
        match &self.source {
            ModelSource::Beam(spec) => Some(spec),
            _ => None,
        }
    }

    /// Checks (A1) and (A2) in their finite-dimensional form and reports the
    /// equivalence constants of the damping relative to the stiffness.
    pub fn validate(&self) -> Result<ValidationReport<T>> {
        let (k, c) = (&self.stiffness, &self.damping);
        let n = k.rows();
        if !k.is_square() || !c.is_square() || c.rows() != n {
            return Err(Error::invalid_model(format!(
                "stiffness is {}×{} but damping is {}×{}",
                k.rows(),
                k.cols(),
                c.rows(),
                c.cols()
            )));
        }
        if n == 0 {
            return Err(Error::invalid_model("empty model"));
        }
        if k.as_slice().iter().chain(c.as_slice()).any(|x| !x.is_finite()) {
            return Err(Error::invalid_model("non-finite matrix entry"));
        }
        let sym = T::lit(crate::linalg::SYMMETRY_TOL);
        if !k.is_symmetric(sym) {
            return Err(Error::invalid_model("(A1) stiffness K is not symmetric"));
        }
        if !c.is_symmetric(sym) {
            return Err(Error::invalid_model("(A2) damping C is not symmetric"));
        }
        match cholesky(k) {
            Ok(_) => {}
            Err(LinalgError::NotPositiveDefinite { pivot_index }) => {
                return Err(Error::invalid_model(format!(
                    "(A1) stiffness K is not positive definite (Cholesky pivot {pivot_index})"
                )))
            }
            Err(e) => return Err(e.into()),
        }
        let c_eig = sym_eig(c)?;
        let c_min = c_eig.min();
        if c_min < -T::lit(PSD_TOL) * c.frobenius_norm() {
            return Err(Error::invalid_model(format!(
                "(A2) damping C is not positive semidefinite (λ_min = {:e})",
                c_min.to_f64_lossy()
            )));
        }
        let k_eig = sym_eig(k)?;
        let w = self.whitened_damping_from(&k_eig)?;
        let w_eig = sym_eig(&w)?;
        Ok(ValidationReport {
            stiffness_positive_definite: true,
            stiffness_min_eigenvalue: k_eig.min(),
            damping_min_eigenvalue: c_min,
            gamma: w_eig.min(),
            alpha: w_eig.max(),
        })
    }

    pub fn stiffness_eigen(&self) -> Result<SymmetricEigen<T>> {
        Ok(sym_eig(&self.stiffness)?)
    }

    /// `K^{-1/2}`.
    pub fn stiffness_inv_sqrt(&self) -> Result<DenseMatrix<T>> {
        Ok(self.stiffness_eigen()?.apply_function(|x| x.sqrt().recip()))
    }

    /// `W̃ = K^{-1/2} C K^{-1/2}`, the damping seen in energy coordinates. Its
    /// spectrum is that of `K⁻¹C` acting on the energy space.
    pub fn whitened_damping(&self) -> Result<DenseMatrix<T>> {
        self.whitened_damping_from(&self.stiffness_eigen()?)
    }

    fn whitened_damping_from(&self, k_eig: &SymmetricEigen<T>) -> Result<DenseMatrix<T>> {
        let r = k_eig.apply_function(|x| x.sqrt().recip());
        Ok((&(&r * &self.damping) * &r).symmetrized())
    }

    /// `K⁻¹`.
    pub fn stiffness_inverse(&self) -> Result<DenseMatrix<T>> {
        Ok(inverse(&self.stiffness)?.symmetrized())
    }

    pub fn energy_frame(&self) -> Result<EnergyFrame<T>> {
        EnergyFrame::new(self)
    }
}

/// Matrix of the phase-space operator `[[0, I], [−K, −C]]` acting on
/// `(position, velocity)`.
pub fn phase_operator<T: Real>(model: &SystemModel<T>) -> DenseMatrix<T> {
    let n = model.dim();
    let zero = DenseMatrix::zeros(n, n);
    DenseMatrix::from_blocks(
        &zero,
        &DenseMatrix::identity(n),
        &(-model.stiffness()),
        &(-model.damping()),
    )
    .expect("square blocks of equal size")
}

/// `[[−K⁻¹C, −K⁻¹], [I, 0]]`, the bounded inverse of [`phase_operator`].
pub fn phase_operator_inverse<T: Real>(model: &SystemModel<T>) -> Result<DenseMatrix<T>> {
    let n = model.dim();
    let kinv = model.stiffness_inverse()?;
    let kinv_c = &kinv * model.damping();
    Ok(DenseMatrix::from_blocks(
        &(-&kinv_c),
        &(-&kinv),
        &DenseMatrix::identity(n),
        &DenseMatrix::zeros(n, n),
    )?)
}

/// `C = αK + B` with a symmetric perturbation `B`.
pub fn perturbed_kelvin_voigt<T: Real>(
    stiffness: DenseMatrix<T>,
    alpha: T,
    perturbation: DenseMatrix<T>,
) -> Result<SystemModel<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::invalid_model("α must be positive"));
    }
    if perturbation.rows() != stiffness.rows() || perturbation.cols() != stiffness.cols() {
        return Err(Error::invalid_model("perturbation B has the wrong shape"));
    }
    if !perturbation.is_symmetric(T::lit(crate::linalg::SYMMETRY_TOL)) {
        return Err(Error::invalid_model("perturbation B is not symmetric"));
    }
    let damping = (&stiffness.scale(alpha) + &perturbation).symmetrized();
    // Validate K first so the proxy below is well defined.
    let base = SystemModel::new(stiffness.clone(), stiffness.scale(alpha))?;
    let r = base.stiffness_inv_sqrt()?;
    let whitened = (&(&r * &perturbation) * &r).symmetrized();
    let eig = sym_eig(&whitened)?;
    let compactness_proxy = eig.min().abs().max(eig.max().abs());
    SystemModel::with_source(
        stiffness,
        damping,
        ModelSource::Perturbed {
            alpha,
            perturbation,
            compactness_proxy,
        },
    )
}
