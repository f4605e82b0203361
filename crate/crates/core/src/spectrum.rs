//! Spectrum of the quadratic pencil `λ² + λC + K` through its phase-space
//! linearization.

use std::cmp::Ordering;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cluster_eigenvalues, complex_condition_number, complex_solve, nonsym_eig, normalize_phase,
    orthonormal_span, sym_eig, DenseMatrix, LuFactorization,
};
use crate::model::{
    beam_assemble, phase_operator, phase_operator_inverse, BeamSpec, PhaseVector, SystemModel,
};
use crate::{Real, ToleranceProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair<T> {
    pub value: Complex<T>,
    /// Unit Euclidean norm, `velocity = value · position`.
    pub vector: PhaseVector<Complex<T>>,
    /// `‖𝒜v − λv‖₂ / ‖𝒜‖_F`.
    pub residual: T,
    /// Index into [`SpectrumReport::clusters`].
    pub cluster: usize,
    /// The imaginary part was set to zero.
    pub snapped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCluster<T> {
    /// Indices into [`SpectrumReport::eigenpairs`].
    pub members: Vec<usize>,
    pub mean: Complex<T>,
    pub real: bool,
    /// Orthonormal basis of the computed eigenspace.
    pub basis: Vec<PhaseVector<Complex<T>>>,
    pub geometric_multiplicity: usize,
}

impl<T> SpectralCluster<T> {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.members.len()
    }

    pub fn jordan_defect(&self) -> usize {
        self.members.len().saturating_sub(self.geometric_multiplicity)
    }
}

/// Lower bound on `|λ|` over the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueBound<T> {
    /// `‖K^{-1/2} C K^{-1/2}‖₂`.
    pub norm_ainv_d: T,
    /// `1/λ_min(K)`.
    pub norm_ainv: T,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport<T> {
    pub eigenpairs: Vec<Eigenpair<T>>,
    pub clusters: Vec<SpectralCluster<T>>,
    pub bound: EigenvalueBound<T>,
    pub disk_radius: T,
    /// `‖𝒜‖_F`.
    pub operator_norm: T,
    pub residual_tol: T,
    pub accumulation: Option<AccumulationReport<T>>,
}

impl<T: Real> SpectrumReport<T> {
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        self.eigenpairs.iter().map(|p| p.value).collect()
    }

    pub fn max_residual(&self) -> T {
        self.eigenpairs.iter().fold(T::zero(), |m, p| m.max(p.residual))
    }

    pub fn residuals_within_tolerance(&self) -> bool {
        self.max_residual() <= self.residual_tol
    }

    pub fn max_real_part(&self) -> T {
        self.eigenpairs
            .iter()
            .fold(T::neg_infinity(), |m, p| m.max(p.value.re))
    }

    pub fn min_modulus(&self) -> T {
        self.eigenpairs
            .iter()
            .fold(T::infinity(), |m, p| m.min(p.value.norm()))
    }

    pub fn all_real(&self) -> bool {
        self.eigenpairs.iter().all(|p| p.value.im == T::zero())
    }

    pub fn max_jordan_defect(&self) -> usize {
        self.clusters.iter().map(|c| c.jordan_defect()).max().unwrap_or(0)
    }

    /// `max |Im λ| / |Re λ|`; `None` when an eigenvalue lies on the imaginary
    /// axis off the origin.
    pub fn sector_ratio(&self) -> Option<T> {
        let mut worst = T::zero();
        for p in &self.eigenpairs {
            if p.value.im == T::zero() {
                continue;
            }
            if p.value.re == T::zero() {
                return None;
            }
            worst = worst.max((p.value.im / p.value.re).abs());
        }
        Some(worst)
    }
}

/// `r` solving `r·d + r²·v = 1`.
fn bound_radius<T: Real>(d: T, v: T) -> T {
    let two = T::lit(2.0);
    // Equivalent to (√(d² + 4v) − d)/(2v), without cancellation for large d.
    two / (d + (d * d + T::lit(4.0) * v).sqrt())
}

pub fn eigenvalue_lower_bound<T: Real>(model: &SystemModel<T>) -> Result<EigenvalueBound<T>> {
    let k_min = model.stiffness_eigen()?.min();
    let w = sym_eig(&model.whitened_damping()?)?;
    let norm_ainv_d = w.max().abs().max(w.min().abs());
    let norm_ainv = k_min.recip();
    Ok(EigenvalueBound {
        norm_ainv_d,
        norm_ainv,
        value: bound_radius(norm_ainv_d, norm_ainv),
    })
}

/// Radius of the disk around the origin certified to lie in the resolvent
/// set by `r‖K⁻¹C‖ + r²‖K⁻¹‖ ≤ 1`. Coincides with the eigenvalue bound.
pub fn resolvent_disk_radius<T: Real>(model: &SystemModel<T>) -> Result<T> {
    Ok(eigenvalue_lower_bound(model)?.value)
}

/// Root of `x*x·λ² + x*Cx·λ + x*Kx` nearest to `guess`.
fn rayleigh_root<T: Real>(model: &SystemModel<T>, x: &[Complex<T>], guess: Complex<T>) -> Option<Complex<T>> {
    let form = |m: &DenseMatrix<T>| -> T {
        let mx = m.mul_cvec(x);
        x.iter().zip(&mx).map(|(a, b)| (a.conj() * b).re).sum()
    };
    let m: T = x.iter().map(|z| z.norm_sqr()).sum();
    let c = form(model.damping());
    let k = form(model.stiffness());
    if m == T::zero() {
        return None;
    }
    let two = T::lit(2.0);
    let disc = c * c - T::lit(4.0) * m * k;
    let roots = if disc >= T::zero() {
        let q = -(c + disc.sqrt().copysign(c)) / two;
        if q == T::zero() {
            [Complex::new(T::zero(), T::zero()); 2]
        } else {
            [Complex::new(q / m, T::zero()), Complex::new(k / q, T::zero())]
        }
    } else {
        let re = -c / (two * m);
        let im = (-disc).sqrt() / (two * m);
        [Complex::new(re, im), Complex::new(re, -im)]
    };
    roots
        .into_iter()
        .filter(|r| r.re.is_finite() && r.im.is_finite())
        .min_by(|a, b| (a - guess).norm().partial_cmp(&(b - guess).norm()).unwrap_or(Ordering::Equal))
}

/// `‖𝒜v − λv‖ / (‖𝒜‖_F ‖v‖)` for the structured vector `v = (x, λx)`.
fn structured_residual<T: Real>(model: &SystemModel<T>, a_norm: T, lambda: Complex<T>, x: &[Complex<T>]) -> T {
    let kx = model.stiffness().mul_cvec(x);
    let cx = model.damping().mul_cvec(x);
    let l2 = lambda * lambda;
    let r: T = x
        .iter()
        .zip(kx.iter().zip(&cx))
        .map(|(xi, (k, c))| (k + c * lambda + xi * l2).norm_sqr())
        .sum::<T>()
        .sqrt();
    let xn = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt() * (T::one() + lambda.norm_sqr()).sqrt();
    if xn == T::zero() || a_norm == T::zero() {
        T::zero()
    } else {
        r / (a_norm * xn)
    }
}

/// One step of inverse iteration `x ← (λ² + λC + K)⁻¹ x`.
fn pencil_inverse_step<T: Real>(model: &SystemModel<T>, lambda: Complex<T>, x: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let n = x.len();
    let attempt = |mu: Complex<T>| -> Option<Vec<Complex<T>>> {
        let (k, c) = (model.stiffness(), model.damping());
        let mu2 = mu * mu;
        if mu.im == T::zero() {
            let q = DenseMatrix::from_fn(n, n, |i, j| {
                k[(i, j)] + mu.re * c[(i, j)] + if i == j { mu2.re } else { T::zero() }
            });
            let lu = LuFactorization::new_regularized(&q).ok()?;
            let re = lu.solve(&x.iter().map(|z| z.re).collect::<Vec<_>>());
            let im = lu.solve(&x.iter().map(|z| z.im).collect::<Vec<_>>());
            Some(re.into_iter().zip(im).map(|(a, b)| Complex::new(a, b)).collect())
        } else {
            let columns: Vec<Vec<Complex<T>>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|i| {
                            let d = if i == j { mu2 } else { Complex::new(T::zero(), T::zero()) };
                            d + Complex::new(k[(i, j)], T::zero()) + mu * c[(i, j)]
                        })
                        .collect()
                })
                .collect();
            complex_solve(&columns, x).ok()
        }
    };
    let scale = T::one() + lambda.norm();
    let w = attempt(lambda)
        .or_else(|| attempt(lambda + scale * T::lit(1e-12)))
        .or_else(|| attempt(lambda + scale * T::lit(1e-10)))?;
    let nrm = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if !(nrm > T::zero()) || !nrm.is_finite() {
        return None;
    }
    Some(w.into_iter().map(|z| z / nrm).collect())
}

/// Turns an eigenpair of the linearization into a pencil eigenpair `(λ, x)`.
///
/// Inside a cluster of close eigenvalues the computed vectors may mix
/// neighbouring eigenvectors, so the eigenvalue is kept and only the vector
/// is improved.
fn polish<T: Real>(
    model: &SystemModel<T>,
    a_norm: T,
    lam0: Complex<T>,
    v: &[Complex<T>],
    budget: T,
    crowded: bool,
    force_step: bool,
) -> (Complex<T>, Vec<Complex<T>>) {
    let n = model.dim();
    let (pos, vel) = v.split_at(n);
    let res = |l: Complex<T>, x: &[Complex<T>]| structured_residual(model, a_norm, l, x);
    let mut x = pos.to_vec();
    if lam0.norm() > T::zero() {
        let from_vel: Vec<Complex<T>> = vel.iter().map(|y| y / lam0).collect();
        if res(lam0, &from_vel) < res(lam0, &x) {
            x = from_vel;
        }
    }
    let mut lam = lam0;
    let mut best = res(lam, &x);
    if !crowded {
        if let Some(r) = rayleigh_root(model, &x, lam) {
            let rr = res(r, &x);
            if rr <= best {
                lam = r;
                best = rr;
            }
        }
    }
    if best > budget || force_step {
        if let Some(x2) = pencil_inverse_step(model, lam, &x) {
            let lam2 = if crowded {
                lam
            } else {
                rayleigh_root(model, &x2, lam)
                    .filter(|&r| res(r, &x2) <= res(lam, &x2))
                    .unwrap_or(lam)
            };
            if res(lam2, &x2) < best || force_step && res(lam2, &x2) <= budget {
                lam = lam2;
                x = x2;
            }
        }
    }
    (lam, x)
}

fn by_modulus<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.norm()
        .partial_cmp(&b.norm())
        .unwrap_or(Ordering::Equal)
        .then(a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Eigenpairs of `𝒜`, taking the small-modulus part of the spectrum from `𝒜⁻¹`.
///
/// Eigenvalues from `𝒜` carry absolute errors of order `ε‖𝒜‖`, which is poor
/// for the slow eigenvalues of stiff models; those from `𝒜⁻¹` carry errors of
/// order `ε‖𝒜⁻¹‖·|λ|²`. Both lists are sorted by modulus and spliced at a gap
/// in modulus near `√(‖𝒜‖/‖𝒜⁻¹‖)`, so no cluster or conjugate pair is cut.
fn spliced_eigenpairs<T: Real>(
    model: &SystemModel<T>,
    a: &DenseMatrix<T>,
    tol: &ToleranceProfile,
) -> Result<Vec<(Complex<T>, Vec<Complex<T>>)>> {
    let direct = nonsym_eig(a, tol)?;
    let mut d: Vec<(Complex<T>, Vec<Complex<T>>)> = direct.eigenvalues.into_iter().zip(direct.eigenvectors).collect();
    let inv = phase_operator_inverse(model)?;
    let inv_dec = nonsym_eig(&inv, tol)?;
    if inv_dec.eigenvalues.iter().any(|mu| mu.norm() == T::zero()) {
        return Ok(d);
    }
    let mut r: Vec<(Complex<T>, Vec<Complex<T>>)> = inv_dec
        .eigenvalues
        .into_iter()
        .map(|mu| mu.inv())
        .zip(inv_dec.eigenvectors)
        .collect();
    d.sort_by(|p, q| by_modulus(&p.0, &q.0));
    r.sort_by(|p, q| by_modulus(&p.0, &q.0));

    let len = d.len();
    let rho = (a.frobenius_norm() / inv.frobenius_norm()).sqrt();
    let sep = T::lit(2.0 * tol.cluster_tol);
    let gap = |list: &[(Complex<T>, Vec<Complex<T>>)], m: usize| {
        m == 0 || m == len || {
            let (lo, hi) = (list[m - 1].0.norm(), list[m].0.norm());
            hi - lo > sep * (T::one() + hi)
        }
    };
    // Split m takes r[..m] and d[m..]; score counts values on the wrong side of ρ.
    let below: Vec<usize> = r
        .iter()
        .scan(0, |acc, p| {
            *acc += usize::from(p.0.norm() < rho);
            Some(*acc)
        })
        .collect();
    let total_below = below.last().copied().unwrap_or(0);
    let mut best = (usize::MAX, 0);
    for m in 0..=len {
        if !(gap(&r, m) && gap(&d, m)) {
            continue;
        }
        let in_head = if m == 0 { 0 } else { below[m - 1] };
        let score = (m - in_head) + (total_below - in_head);
        if score < best.0 {
            best = (score, m);
        }
    }
    let m = best.1;
    let mut out: Vec<(Complex<T>, Vec<Complex<T>>)> = r.into_iter().take(m).collect();
    out.extend(d.into_iter().skip(m));
    Ok(out)
}

/// Eigenpairs of the phase operator, with each eigenvector put in the
/// structured form `(x, λx)` and each eigenvalue polished against the pencil.
pub fn solve_qep<T: Real>(model: &SystemModel<T>, tol: &ToleranceProfile) -> Result<SpectrumReport<T>> {
    if let Some(name) = tol.first_invalid() {
        return Err(Error::invalid_input(format!("tolerance {name} must be positive")));
    }
    let a = phase_operator(model);
    let a_norm = a.frobenius_norm();
    let raw = spliced_eigenpairs(model, &a, tol)?;
    let raw_values: Vec<Complex<T>> = raw.iter().map(|p| p.0).collect();
    let cluster_tol = T::lit(tol.cluster_tol);
    let groups = cluster_eigenvalues(&raw_values, cluster_tol);
    let mut group_of = vec![0; raw.len()];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            group_of[i] = g;
        }
    }
    let real_group: Vec<bool> = groups
        .iter()
        .map(|g| {
            let mean = g.iter().fold(Complex::new(T::zero(), T::zero()), |s, &i| s + raw_values[i])
                / T::from_count(g.len());
            g.len() > 1 && mean.im.abs() <= cluster_tol * (T::one() + mean.norm())
        })
        .collect();

    let budget = T::lit(tol.residual_tol) * T::lit(0.1);
    let snap = T::lit(tol.snap_real_tol);
    let mut polished: Vec<Option<(Complex<T>, Vec<Complex<T>>)>> = vec![None; raw.len()];
    let mut snapped = vec![false; raw.len()];
    // Upper-half-plane values first; exact conjugate partners are mirrored.
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by_key(|&i| raw_values[i].im < T::zero());
    for i in order {
        let lam0 = raw_values[i];
        if lam0.im < T::zero() {
            if let Some(j) = raw_values.iter().position(|&z| z == lam0.conj()) {
                if let Some((l, x)) = &polished[j] {
                    polished[i] = Some((l.conj(), x.iter().map(|z| z.conj()).collect()));
                    snapped[i] = snapped[j];
                    continue;
                }
            }
        }
        let g = group_of[i];
        let crowded = groups[g].len() > 1;
        // A real eigenvalue computed as a close conjugate pair (typically a
        // Jordan block) has an accurate real part but an inaccurate vector;
        // one inverse step at the real part recovers the vector.
        let to_snap = lam0.im != T::zero() && (lam0.im.abs() <= snap * (T::one() + lam0.norm()) || real_group[g]);
        let (start, force) = if to_snap {
            (Complex::new(lam0.re, T::zero()), true)
        } else {
            (lam0, false)
        };
        let (lam, x) = polish(model, a_norm, start, &raw[i].1, budget, crowded, force);
        polished[i] = Some((lam, x));
        snapped[i] = to_snap;
    }

    struct Pending<T> {
        value: Complex<T>,
        stacked: Vec<Complex<T>>,
        group: usize,
        snapped: bool,
    }
    let mut pending: Vec<Pending<T>> = polished
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let (mut lam, x) = p.expect("every eigenpair is polished");
            let g = group_of[i];
            // Polishing a singleton may still land within the snap band.
            let snapped = snapped[i] || lam.im != T::zero() && lam.im.abs() <= snap * (T::one() + lam.norm());
            if snapped {
                lam.im = T::zero();
            }
            let mut stacked: Vec<Complex<T>> = x.iter().copied().chain(x.iter().map(|z| z * lam)).collect();
            normalize_phase(&mut stacked);
            Pending {
                value: lam,
                stacked,
                group: g,
                snapped,
            }
        })
        .collect();
    pending.sort_by(|p, q| {
        p.value
            .re
            .partial_cmp(&q.value.re)
            .unwrap_or(Ordering::Equal)
            .then(p.value.im.partial_cmp(&q.value.im).unwrap_or(Ordering::Equal))
    });

    let eigenpairs: Vec<Eigenpair<T>> = pending
        .iter()
        .map(|p| {
            let av = a.mul_cvec(&p.stacked);
            let r: T = av
                .iter()
                .zip(&p.stacked)
                .map(|(u, w)| (u - w * p.value).norm_sqr())
                .sum::<T>()
                .sqrt();
            Eigenpair {
                value: p.value,
                vector: PhaseVector::from_stacked(&p.stacked),
                residual: if a_norm == T::zero() { T::zero() } else { r / a_norm },
                cluster: p.group,
                snapped: p.snapped,
            }
        })
        .collect();

    let rank_tol = T::lit(tol.rank_tol);
    let mut members_of: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (i, p) in eigenpairs.iter().enumerate() {
        members_of[p.cluster].push(i);
    }
    // Renumber clusters in order of their first member.
    let mut cluster_order: Vec<usize> = (0..groups.len()).collect();
    cluster_order.sort_by_key(|&g| members_of[g][0]);
    let mut renumber = vec![0; groups.len()];
    for (new, &g) in cluster_order.iter().enumerate() {
        renumber[g] = new;
    }
    let clusters: Vec<SpectralCluster<T>> = cluster_order
        .iter()
        .map(|&g| {
            let members = members_of[g].clone();
            let mean = members
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |s, &i| s + eigenpairs[i].value)
                / T::from_count(members.len());
            let real = members.iter().all(|&i| eigenpairs[i].value.im == T::zero());
            let vectors: Vec<&Vec<Complex<T>>> = members.iter().map(|&i| &pending[i].stacked).collect();
            let mut span = orthonormal_span(&vectors, rank_tol);
            if real && span.len() < members.len() {
                // A rounded Jordan block splits into nearby simple eigenvalues
                // whose vectors are only √ε-close to the true eigenvector; the
                // vector at the cluster mean is ε-close.
                let at_mean: Vec<Vec<Complex<T>>> = members
                    .iter()
                    .filter_map(|&i| {
                        let x = &pending[i].stacked[..model.dim()];
                        let w = pencil_inverse_step(model, mean, x)?;
                        let mut v: Vec<Complex<T>> = w.iter().copied().chain(w.iter().map(|z| z * mean)).collect();
                        normalize_phase(&mut v);
                        Some(v)
                    })
                    .collect();
                if at_mean.len() == members.len() {
                    let refs: Vec<&Vec<Complex<T>>> = at_mean.iter().collect();
                    let refined = orthonormal_span(&refs, rank_tol);
                    if refined.len() == span.len() {
                        span = refined;
                    }
                }
            }
            let basis: Vec<PhaseVector<Complex<T>>> = span.iter().map(|b| PhaseVector::from_stacked(b)).collect();
            SpectralCluster {
                members,
                mean,
                real,
                geometric_multiplicity: basis.len(),
                basis,
            }
        })
        .collect();
    let eigenpairs = eigenpairs
        .into_iter()
        .map(|p| Eigenpair {
            cluster: renumber[p.cluster],
            ..p
        })
        .collect();

    let bound = eigenvalue_lower_bound(model)?;
    Ok(SpectrumReport {
        eigenpairs,
        clusters,
        bound,
        disk_radius: bound.value,
        operator_norm: a_norm,
        residual_tol: T::lit(tol.residual_tol),
        accumulation: None,
    })
}

/// 2-norm condition number of the matrix whose columns are the eigenvectors
/// in energy coordinates, each scaled to unit energy norm.
pub fn eigenvector_condition_number<T: Real>(model: &SystemModel<T>, report: &SpectrumReport<T>) -> Result<T> {
    let frame = model.energy_frame()?;
    let columns: Vec<Vec<Complex<T>>> = report
        .eigenpairs
        .iter()
        .map(|p| {
            let w = frame.to_energy_complex(&p.vector);
            let nrm = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            w.into_iter().map(|z| z / nrm).collect()
        })
        .collect();
    Ok(complex_condition_number(&columns))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationRow<T> {
    pub order: usize,
    /// Per accumulation point: eigenvalues within the radius.
    pub counts: Vec<usize>,
    /// Per accumulation point: distance to the nearest eigenvalue.
    pub nearest: Vec<T>,
    /// Eigenvalues of modulus at most `2·max|point|` farther than the radius
    /// from every point.
    pub stray: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationReport<T> {
    /// The predicted points `−E/a_k`.
    pub points: Vec<T>,
    pub radius: T,
    pub rows: Vec<AccumulationRow<T>>,
    pub counts_nondecreasing: bool,
}

/// Counts eigenvalues of successive truncations near each `−E/a_k`. Orders
/// are evaluated in parallel.
pub fn accumulation_experiment<T: Real>(
    spec: &BeamSpec<T>,
    orders: &[usize],
    radius: T,
    tol: &ToleranceProfile,
) -> Result<AccumulationReport<T>> {
    if orders.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid_input("truncation orders must be ascending"));
    }
    if !(radius > T::zero()) {
        return Err(Error::invalid_input("accumulation radius must be positive"));
    }
    let points = spec.normalized()?.accumulation_points();
    let reach = points.iter().fold(T::zero(), |m, p| m.max(p.abs())) * T::lit(2.0);
    let rows = orders
        .par_iter()
        .map(|&order| -> Result<AccumulationRow<T>> {
            let model = beam_assemble(&spec.with_order(order))?;
            let values = solve_qep(&model, tol)?.eigenvalues();
            let dist = |z: &Complex<T>, p: T| (z - Complex::new(p, T::zero())).norm();
            let counts = points
                .iter()
                .map(|&p| values.iter().filter(|z| dist(z, p) <= radius).count())
                .collect();
            let nearest = points
                .iter()
                .map(|&p| values.iter().map(|z| dist(z, p)).fold(T::infinity(), T::min))
                .collect();
            let stray = values
                .iter()
                .filter(|z| z.norm() <= reach && points.iter().all(|&p| dist(z, p) > radius))
                .count();
            Ok(AccumulationRow {
                order,
                counts,
                nearest,
                stray,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let counts_nondecreasing = rows
        .windows(2)
        .all(|w| w[0].counts.iter().zip(&w[1].counts).all(|(a, b)| a <= b));
    Ok(AccumulationReport {
        points,
        radius,
        rows,
        counts_nondecreasing,
    })
}
