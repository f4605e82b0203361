//! The indefinite inner product `[u, v] = x_uᵀK x̄_v − y_uᵀȳ_v` on the phase
//! space and the sign structure of the spectrum with respect to it.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DenseMatrix};
use crate::model::{PhaseVector, SystemModel};
use crate::spectrum::SpectrumReport;
use crate::{Real, ToleranceProfile};

pub fn indefinite_product<T: Real>(
    model: &SystemModel<T>,
    u: &PhaseVector<Complex<T>>,
    v: &PhaseVector<Complex<T>>,
) -> Complex<T> {
    let kv = model.stiffness().mul_cvec(&v.position);
    product_with(&kv, u, v)
}

// `[u, v]` given `K x_v`.
fn product_with<T: Real>(kxv: &[Complex<T>], u: &PhaseVector<Complex<T>>, v: &PhaseVector<Complex<T>>) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let pos = u.position.iter().zip(kxv).fold(zero, |s, (a, b)| s + a * b.conj());
    let vel = u.velocity.iter().zip(&v.velocity).fold(zero, |s, (a, b)| s + a * b.conj());
    pos - vel
}

pub fn indefinite_product_real<T: Real>(model: &SystemModel<T>, u: &PhaseVector<T>, v: &PhaseVector<T>) -> T {
    model.stiffness().mul_vec(&v.position)
        .iter()
        .zip(&u.position)
        .map(|(a, b)| *a * *b)
        .sum::<T>()
        - u.velocity.iter().zip(&v.velocity).map(|(a, b)| *a * *b).sum::<T>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignType {
    Positive,
    Negative,
    Neutral,
    Mixed,
}

impl SignType {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Neutral => "neutral",
            Self::Mixed => "mixed",
        }
    }
}

/// Hermitian Gram matrix of `[·,·]` on a set of vectors, with its spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gram<T> {
    pub re: DenseMatrix<T>,
    pub im: DenseMatrix<T>,
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// `max ‖v‖²_E` over the vectors; bounds every entry of the Gram matrix.
    pub scale: T,
}

impl<T: Real> Gram<T> {
    pub fn new(model: &SystemModel<T>, vectors: &[PhaseVector<Complex<T>>]) -> Result<Self> {
        let k = vectors.len();
        let kx: Vec<Vec<Complex<T>>> = vectors.iter().map(|v| model.stiffness().mul_cvec(&v.position)).collect();
        let mut re = DenseMatrix::zeros(k, k);
        let mut im = DenseMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let g = product_with(&kx[j], &vectors[i], &vectors[j]);
                re[(i, j)] = g.re;
                re[(j, i)] = g.re;
                im[(i, j)] = g.im;
                im[(j, i)] = -g.im;
            }
            im[(i, i)] = T::zero();
        }
        let scale = vectors
            .iter()
            .map(|v| v.energy_norm_sqr(model.stiffness()))
            .fold(T::zero(), T::max);
        let (eigenvalues, _) = hermitian_eig(&re, &im)?;
        Ok(Self {
            re,
            im,
            eigenvalues,
            scale,
        })
    }

    pub fn min_abs_eigenvalue(&self) -> T {
        self.eigenvalues.iter().fold(T::infinity(), |m, e| m.min(e.abs()))
    }

    pub fn classify(&self, neutral_tol: T) -> SignType {
        let tau = neutral_tol * self.scale;
        if self.eigenvalues.iter().all(|&e| e > tau) {
            SignType::Positive
        } else if self.eigenvalues.iter().all(|&e| e < -tau) {
            SignType::Negative
        } else if self.eigenvalues.iter().all(|&e| e.abs() <= tau) {
            SignType::Neutral
        } else {
            SignType::Mixed
        }
    }
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian matrix `re + i·im`
/// through its real symmetric embedding, whose eigenvalues come in pairs.
fn hermitian_eig<T: Real>(re: &DenseMatrix<T>, im: &DenseMatrix<T>) -> Result<(Vec<T>, Vec<Vec<Complex<T>>>)> {
    let k = re.rows();
    let emb = DenseMatrix::complex_embedding(re, im).symmetrized();
    let eig = sym_eig(&emb)?;
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for p in 0..k {
        let col = eig.vector(2 * p);
        values.push(eig.values[2 * p]);
        vectors.push((0..k).map(|i| Complex::new(col[i], col[k + i])).collect());
    }
    Ok((values, vectors))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSign<T> {
    pub cluster: usize,
    pub mean: Complex<T>,
    pub real: bool,
    pub sign_type: SignType,
    pub gram_eigenvalues: Vec<T>,
    pub gram_scale: T,
    /// Distance of the Gram spectrum from the neutral band, signed so that a
    /// positive value means the verdict is strict.
    pub margin: T,
    /// Gram eigenvalues not above the neutral threshold.
    pub non_positive_directions: usize,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub jordan_defect: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignClassification<T> {
    pub clusters: Vec<ClusterSign<T>>,
    /// Cluster index of every eigenpair of the report.
    pub cluster_of: Vec<usize>,
    pub neutral_tol: T,
}

impl<T: Real> SignClassification<T> {
    pub fn sign_of(&self, eigenpair: usize) -> SignType {
        self.clusters[self.cluster_of[eigenpair]].sign_type
    }

    pub fn cluster_for(&self, eigenpair: usize) -> &ClusterSign<T> {
        &self.clusters[self.cluster_of[eigenpair]]
    }

    /// Non-positive Gram directions summed over real clusters.
    pub fn non_positive_real_directions(&self) -> usize {
        self.clusters
            .iter()
            .filter(|c| c.real)
            .map(|c| c.non_positive_directions)
            .sum()
    }
}

/// Sign type of every eigenvalue cluster from the Gram matrix of `[·,·]` on
/// the cluster's eigenspace basis.
pub fn classify_eigenpairs<T: Real>(
    model: &SystemModel<T>,
    report: &SpectrumReport<T>,
    tol: &ToleranceProfile,
) -> Result<SignClassification<T>> {
    let neutral_tol = T::lit(tol.neutral_tol);
    let clusters = report
        .clusters
        .iter()
        .enumerate()
        .map(|(c, cl)| {
            if cl.basis.is_empty() {
                return Err(Error::IllConditionedCluster {
                    re: cl.mean.re.to_f64_lossy(),
                    im: cl.mean.im.to_f64_lossy(),
                });
            }
            let gram = Gram::new(model, &cl.basis)?;
            let sign_type = gram.classify(neutral_tol);
            let tau = neutral_tol * gram.scale;
            let margin = match sign_type {
                SignType::Positive => gram.eigenvalues[0] - tau,
                SignType::Negative => -tau - gram.eigenvalues[gram.eigenvalues.len() - 1],
                SignType::Neutral => tau - gram.eigenvalues.iter().fold(T::zero(), |m, e| m.max(e.abs())),
                SignType::Mixed => -gram.eigenvalues.iter().fold(T::zero(), |m, e| m.max(e.abs())),
            };
            Ok(ClusterSign {
                cluster: c,
                mean: cl.mean,
                real: cl.real,
                sign_type,
                non_positive_directions: gram.eigenvalues.iter().filter(|&&e| e <= tau).count(),
                gram_eigenvalues: gram.eigenvalues,
                gram_scale: gram.scale,
                margin,
                algebraic_multiplicity: cl.algebraic_multiplicity(),
                geometric_multiplicity: cl.geometric_multiplicity,
                jordan_defect: cl.jordan_defect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignClassification {
        clusters,
        cluster_of: report.eigenpairs.iter().map(|p| p.cluster).collect(),
        neutral_tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GramVerdict<T> {
    Nondegenerate {
        min_abs_eigenvalue: T,
        scale: T,
    },
    /// `witness` spans a direction of the kernel on which `[·,·]` vanishes;
    /// its position block is the `y` with `μ²⟨y, w⟩_K = ⟨y, w⟩` for all `w`.
    Degenerate {
        min_abs_eigenvalue: T,
        scale: T,
        witness: PhaseVector<Complex<T>>,
    },
}

impl<T> GramVerdict<T> {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Self::Degenerate { .. })
    }
}

/// Whether `[·,·]` is degenerate on the eigenspace at the real eigenvalue
/// `lambda` spanned by `basis`.
///
/// The threshold is `neutral_tol` times the energy scale of the basis rather
/// than the norm of the Gram matrix, which would make every 1×1 Gram matrix
/// nondegenerate.
pub fn kernel_gram_nondegeneracy<T: Real>(
    model: &SystemModel<T>,
    lambda: T,
    basis: &[PhaseVector<Complex<T>>],
    tol: &ToleranceProfile,
) -> Result<GramVerdict<T>> {
    if basis.is_empty() {
        return Err(Error::invalid_input("kernel basis is empty"));
    }
    if !lambda.is_finite() {
        return Err(Error::invalid_input("eigenvalue must be real and finite"));
    }
    let gram = Gram::new(model, basis)?;
    let (values, vectors) = hermitian_eig(&gram.re, &gram.im)?;
    let (idx, min_abs) = values
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.abs()))
        .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
    if min_abs > T::lit(tol.neutral_tol) * gram.scale {
        return Ok(GramVerdict::Nondegenerate {
            min_abs_eigenvalue: min_abs,
            scale: gram.scale,
        });
    }
    let n = model.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut witness = PhaseVector {
        position: vec![zero; n],
        velocity: vec![zero; n],
    };
    for (c, b) in vectors[idx].iter().zip(basis) {
        for i in 0..n {
            witness.position[i] += c * b.position[i];
            witness.velocity[i] += c * b.velocity[i];
        }
    }
    let mut stacked = witness.stacked();
    crate::linalg::normalize_phase(&mut stacked);
    Ok(GramVerdict::Degenerate {
        min_abs_eigenvalue: min_abs,
        scale: gram.scale,
        witness: PhaseVector::from_stacked(&stacked),
    })
}

/// Split of the phase space into the span of the negative-type real
/// eigenvectors far out on the negative axis and the remainder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition<T> {
    /// Eigenpair indices spanning the negative-definite part.
    pub h_prime: Vec<usize>,
    pub h_doubleprime: Vec<usize>,
    /// Every real eigenvalue below `−m_cut` is of negative type; `None` when
    /// no real eigenvalue is of another type.
    pub m_cut: Option<T>,
    /// `max |[u, v]| / (‖u‖_E ‖v‖_E)` over `u ∈ H′`, `v ∈ H″`.
    pub cross_gram_norm: T,
    /// Largest eigenvalue of the Gram matrix of `[·,·]` on the
    /// energy-normalized eigenvectors of `H′`; `None` when `H′` is empty.
    pub hprime_definiteness: Option<T>,
    pub cross_orthogonal: bool,
}

pub fn decompose<T: Real>(
    model: &SystemModel<T>,
    report: &SpectrumReport<T>,
    classification: &SignClassification<T>,
    tol: &ToleranceProfile,
) -> Result<Decomposition<T>> {
    if let Some(c) = classification.clusters.iter().find(|c| c.sign_type == SignType::Mixed) {
        return Err(Error::MixedClusterObstruction {
            re: c.mean.re.to_f64_lossy(),
            im: c.mean.im.to_f64_lossy(),
        });
    }
    let lowest_other = classification
        .clusters
        .iter()
        .filter(|c| c.real && c.sign_type != SignType::Negative)
        .map(|c| c.mean.re)
        .fold(None, |m: Option<T>, x| Some(m.map_or(x, |m| m.min(x))));
    let m_cut = lowest_other.map(|x| -x);

    let mut h_prime = Vec::new();
    let mut h_doubleprime = Vec::new();
    for (i, p) in report.eigenpairs.iter().enumerate() {
        let c = classification.cluster_for(i);
        let below = lowest_other.is_none_or(|x| c.mean.re < x);
        if c.real && c.sign_type == SignType::Negative && below {
            h_prime.push(i);
        } else {
            h_doubleprime.push(i);
        }
        debug_assert_eq!(p.cluster, c.cluster);
    }

    let normalized = |i: usize| {
        let v = &report.eigenpairs[i].vector;
        let e = v.energy_norm(model.stiffness());
        v.scaled(Complex::new(e.recip(), T::zero()))
    };
    let prime: Vec<PhaseVector<Complex<T>>> = h_prime.iter().map(|&i| normalized(i)).collect();
    let kx_prime: Vec<Vec<Complex<T>>> = prime.iter().map(|v| model.stiffness().mul_cvec(&v.position)).collect();
    let mut cross = T::zero();
    for &j in &h_doubleprime {
        let v = normalized(j);
        for (u, ku) in prime.iter().zip(&kx_prime) {
            cross = cross.max(product_with(ku, &v, u).norm());
        }
    }
    let hprime_definiteness = if prime.is_empty() {
        None
    } else {
        Some(*Gram::new(model, &prime)?.eigenvalues.last().unwrap())
    };
    Ok(Decomposition {
        h_prime,
        h_doubleprime,
        m_cut,
        cross_orthogonal: cross <= T::lit(tol.orth_tol),
        cross_gram_norm: cross,
        hprime_definiteness,
    })
}

/// `‖G − Gᵀ‖_F / ‖G‖_F` for the matrix `G` of `[𝒜u, v]` in energy
/// coordinates; zero up to rounding since `𝒜` is `[·,·]`-self-adjoint.
pub fn self_adjointness_defect<T: Real>(model: &SystemModel<T>) -> Result<T> {
    let frame = model.energy_frame()?;
    let n = model.dim();
    let j = DenseMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r != c {
            T::zero()
        } else if r < n {
            T::one()
        } else {
            -T::one()
        }
    });
    let g = &frame.operator.transpose() * &j;
    let nrm = g.frobenius_norm();
    Ok(if nrm == T::zero() {
        T::zero()
    } else {
        (&g - &g.transpose()).frobenius_norm() / nrm
    })
}

/// `max |[v_i, v_j]| / (‖v_i‖_E ‖v_j‖_E)` over eigenpairs in different
/// clusters with `λ_i ≠ λ̄_j`.
pub fn max_cross_cluster_product<T: Real>(model: &SystemModel<T>, report: &SpectrumReport<T>, tol: &ToleranceProfile) -> T {
    let k = model.stiffness();
    let vs: Vec<(PhaseVector<Complex<T>>, Vec<Complex<T>>)> = report
        .eigenpairs
        .iter()
        .map(|p| {
            let e = p.vector.energy_norm(k);
            let v = p.vector.scaled(Complex::new(e.recip(), T::zero()));
            let kx = k.mul_cvec(&v.position);
            (v, kx)
        })
        .collect();
    let ctol = T::lit(tol.cluster_tol);
    let mut worst = T::zero();
    for (i, pi) in report.eigenpairs.iter().enumerate() {
        for (j, pj) in report.eigenpairs.iter().enumerate().skip(i + 1) {
            if pi.cluster == pj.cluster {
                continue;
            }
            let mirror = pi.value - pj.value.conj();
            if mirror.norm() <= ctol * (T::one() + pi.value.norm()) {
                continue;
            }
            worst = worst.max(product_with(&vs[j].1, &vs[i].0, &vs[j].0).norm());
        }
    }
    worst
}
