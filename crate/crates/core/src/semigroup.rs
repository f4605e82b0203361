//! Time evolution `ẋ = 𝒜x` and resolvent probes of the generated semigroup.
//!
//! Everything is measured in the energy norm `‖(x, y)‖² = xᵀKx + yᵀy`, the
//! norm in which the semigroup is a contraction.

use std::collections::HashMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm_2, DenseMatrix, LuFactorization};
use crate::model::{EnergyFrame, PhaseVector, SystemModel};
use crate::spectrum::{eigenvector_condition_number, solve_qep, SpectrumReport};
use crate::{Real, ToleranceProfile};

/// Largest eigenvector condition number for which the modal formula is used.
pub const MODAL_CONDITION_LIMIT: f64 = 1e8;

/// Cap on trapezoidal steps between two consecutive output times.
pub const MAX_STEPS_PER_INTERVAL: usize = 200_000;

/// Log-log slope of the resolvent products over the upper half of a scan
/// above which they are treated as growing.
pub const GROWTH_SLOPE: f64 = 0.25;

/// `xᵀKx + yᵀy`.
pub fn energy<T: Real>(model: &SystemModel<T>, x: &PhaseVector<T>) -> T {
    x.energy_norm_sqr(model.stiffness())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMethod {
    ExactModal,
    Trapezoidal,
}

impl EvolutionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExactModal => "exact_modal",
            Self::Trapezoidal => "trapezoidal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport<T> {
    pub times: Vec<T>,
    pub states: Vec<PhaseVector<T>>,
    pub energies: Vec<T>,
    pub method: EvolutionMethod,
    /// Condition number of the energy-normalised eigenvector matrix.
    pub eigenvector_condition: T,
    /// Largest trapezoidal step used.
    pub step: Option<T>,
    /// Richardson estimate of the trapezoidal error in the energy norm.
    pub error_estimate: Option<T>,
}

impl<T: Real> TrajectoryReport<T> {
    /// Largest increase of the energy between consecutive samples.
    pub fn max_energy_increase(&self) -> T {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::zero(), T::max)
    }
}

enum Scheme<T> {
    Modal {
        values: Vec<Complex<T>>,
        columns: Vec<Vec<Complex<T>>>,
        lu: LuFactorization<T>,
    },
    Trapezoidal {
        max_step: T,
    },
}

/// Propagator of one model, set up once and reused for many initial states.
pub struct Evolver<T> {
    frame: EnergyFrame<T>,
    scheme: Scheme<T>,
    condition: T,
}

impl<T: Real> Evolver<T> {
    pub fn new(model: &SystemModel<T>, tol: &ToleranceProfile) -> Result<Self> {
        let report = solve_qep(model, tol)?;
        Self::with_spectrum(model, &report)
    }

    pub fn with_spectrum(model: &SystemModel<T>, report: &SpectrumReport<T>) -> Result<Self> {
        let frame = model.energy_frame()?;
        let condition = eigenvector_condition_number(model, report)?;
        let modal = if condition <= T::lit(MODAL_CONDITION_LIMIT) {
            let columns: Vec<Vec<Complex<T>>> = report
                .eigenpairs
                .iter()
                .map(|p| frame.to_energy_complex(&p.vector))
                .collect();
            let m = columns.len();
            let re = DenseMatrix::from_fn(m, m, |i, j| columns[j][i].re);
            let im = DenseMatrix::from_fn(m, m, |i, j| columns[j][i].im);
            LuFactorization::new(&DenseMatrix::complex_embedding(&re, &im))
                .ok()
                .map(|lu| Scheme::Modal {
                    values: report.eigenvalues(),
                    columns,
                    lu,
                })
        } else {
            None
        };
        let scheme = match modal {
            Some(s) => s,
            None => {
                let norm = operator_norm_2(&frame.operator)?;
                let cap = T::lit(0.01);
                let max_step = if norm > T::zero() { cap.min(T::lit(0.1) / norm) } else { cap };
                Scheme::Trapezoidal { max_step }
            }
        };
        Ok(Self {
            frame,
            scheme,
            condition,
        })
    }

    pub fn method(&self) -> EvolutionMethod {
        match self.scheme {
            Scheme::Modal { .. } => EvolutionMethod::ExactModal,
            Scheme::Trapezoidal { .. } => EvolutionMethod::Trapezoidal,
        }
    }

    pub fn eigenvector_condition(&self) -> T {
        self.condition
    }

    pub fn frame(&self) -> &EnergyFrame<T> {
        &self.frame
    }

    pub fn evolve(&self, x0: &PhaseVector<T>, times: &[T]) -> Result<TrajectoryReport<T>> {
        let n = self.frame.dim();
        if x0.dim() != n {
            return Err(Error::invalid_input(format!(
                "initial state has dimension {} but the model has {n}",
                x0.dim()
            )));
        }
        if times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
            return Err(Error::invalid_input("times must be finite and nonnegative"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid_input("times must be ascending"));
        }
        let w0 = self.frame.to_energy(x0);
        let (energy_states, step, error_estimate) = match &self.scheme {
            Scheme::Modal { values, columns, lu } => {
                let coeffs = modal_coefficients(lu, &w0);
                let states = times
                    .iter()
                    .map(|&t| {
                        if t == T::zero() {
                            w0.clone()
                        } else {
                            modal_state(values, columns, &coeffs, t)
                        }
                    })
                    .collect();
                (states, None, None)
            }
            Scheme::Trapezoidal { max_step } => {
                let (coarse, h) = trapezoidal(&self.frame.operator, &w0, times, *max_step, 1)?;
                let (fine, _) = trapezoidal(&self.frame.operator, &w0, times, *max_step, 2)?;
                let est = coarse
                    .iter()
                    .zip(&fine)
                    .map(|(a, b)| {
                        let d: T = a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum();
                        d.sqrt() / T::lit(3.0)
                    })
                    .fold(T::zero(), T::max);
                (coarse, Some(h), Some(est))
            }
        };
        let states: Vec<PhaseVector<T>> = energy_states
            .iter()
            .zip(times)
            .map(|(w, &t)| if t == T::zero() { x0.clone() } else { self.frame.from_energy(w) })
            .collect();
        let energies = energy_states
            .iter()
            .map(|w| w.iter().map(|&v| v * v).sum())
            .collect();
        Ok(TrajectoryReport {
            times: times.to_vec(),
            states,
            energies,
            method: self.method(),
            eigenvector_condition: self.condition,
            step,
            error_estimate,
        })
    }

    /// Matrix of `T(t)` acting on `(position, velocity)`.
    pub fn propagator(&self, t: T) -> Result<DenseMatrix<T>> {
        let n = self.frame.dim();
        let mut out = DenseMatrix::zeros(2 * n, 2 * n);
        for j in 0..2 * n {
            let mut e = vec![T::zero(); 2 * n];
            e[j] = T::one();
            let x = PhaseVector::from_stacked(&e);
            let col = self.evolve(&x, &[t])?.states.remove(0).stacked();
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

fn modal_coefficients<T: Real>(lu: &LuFactorization<T>, w0: &[T]) -> Vec<Complex<T>> {
    let m = w0.len();
    let mut rhs = w0.to_vec();
    rhs.extend(std::iter::repeat(T::zero()).take(m));
    let c = lu.solve(&rhs);
    (0..m).map(|k| Complex::new(c[k], c[m + k])).collect()
}

fn modal_state<T: Real>(values: &[Complex<T>], columns: &[Vec<Complex<T>>], coeffs: &[Complex<T>], t: T) -> Vec<T> {
    let m = coeffs.len();
    let mut out = vec![T::zero(); m];
    for ((lam, col), c) in values.iter().zip(columns).zip(coeffs) {
        let f = (lam * t).exp() * c;
        for (o, v) in out.iter_mut().zip(col) {
            *o += (f * v).re;
        }
    }
    out
}

/// Crank–Nicolson stepping through the output times. `refine` multiplies the
/// number of steps per interval.
fn trapezoidal<T: Real>(
    a: &DenseMatrix<T>,
    w0: &[T],
    times: &[T],
    max_step: T,
    refine: usize,
) -> Result<(Vec<Vec<T>>, T)> {
    let m = w0.len();
    let mut cache: HashMap<u64, (LuFactorization<T>, DenseMatrix<T>)> = HashMap::new();
    let mut w = w0.to_vec();
    let mut t_prev = T::zero();
    let mut largest = T::zero();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - t_prev;
        if span > T::zero() {
            let steps = (span / max_step).ceil().to_usize().unwrap_or(usize::MAX);
            let steps = steps.clamp(1, MAX_STEPS_PER_INTERVAL) * refine;
            let h = span / T::from_count(steps);
            largest = largest.max(h);
            let key = h.to_f64_lossy().to_bits();
            if !cache.contains_key(&key) {
                let half = h * T::lit(0.5);
                let lhs = DenseMatrix::from_fn(m, m, |i, j| {
                    (if i == j { T::one() } else { T::zero() }) - half * a[(i, j)]
                });
                let rhs = DenseMatrix::from_fn(m, m, |i, j| {
                    (if i == j { T::one() } else { T::zero() }) + half * a[(i, j)]
                });
                cache.insert(key, (LuFactorization::new(&lhs)?, rhs));
            }
            let (lu, rhs) = &cache[&key];
            for _ in 0..steps {
                w = lu.solve(&rhs.mul_vec(&w));
            }
        }
        t_prev = t;
        out.push(w.clone());
    }
    Ok((out, largest))
}

/// Convenience wrapper around [`Evolver::evolve`].
pub fn evolve<T: Real>(
    model: &SystemModel<T>,
    x0: &PhaseVector<T>,
    times: &[T],
    tol: &ToleranceProfile,
) -> Result<TrajectoryReport<T>> {
    Evolver::new(model, tol)?.evolve(x0, times)
}

/// `T(t)` on `(position, velocity)` together with the method that produced it.
pub fn propagator<T: Real>(
    model: &SystemModel<T>,
    t: T,
    tol: &ToleranceProfile,
) -> Result<(DenseMatrix<T>, EvolutionMethod)> {
    let ev = Evolver::new(model, tol)?;
    Ok((ev.propagator(t)?, ev.method()))
}

fn check_resolvent_point<T: Real>(report: &SpectrumReport<T>, lambda: Complex<T>, tol: &ToleranceProfile) -> Result<()> {
    let distance = report
        .eigenpairs
        .iter()
        .map(|p| (p.value - lambda).norm())
        .fold(T::infinity(), T::min);
    if distance <= T::lit(tol.cluster_tol) * (T::one() + lambda.norm()) {
        return Err(Error::NearSpectrum {
            re: lambda.re.to_f64_lossy(),
            im: lambda.im.to_f64_lossy(),
            distance: distance.to_f64_lossy(),
        });
    }
    Ok(())
}

fn energy_resolvent_norm<T: Real>(frame: &EnergyFrame<T>, lambda: Complex<T>) -> Result<T> {
    let a = &frame.operator;
    let m = a.rows();
    let re = DenseMatrix::from_fn(m, m, |i, j| a[(i, j)] - if i == j { lambda.re } else { T::zero() });
    let im = DenseMatrix::from_fn(m, m, |i, j| if i == j { -lambda.im } else { T::zero() });
    let inv = LuFactorization::new(&DenseMatrix::complex_embedding(&re, &im))?.inverse();
    Ok(operator_norm_2(&inv)?)
}

/// `‖(𝒜 − λ)⁻¹‖` in the energy norm.
pub fn resolvent_norm_at<T: Real>(
    model: &SystemModel<T>,
    report: &SpectrumReport<T>,
    lambda: Complex<T>,
    tol: &ToleranceProfile,
) -> Result<T> {
    check_resolvent_point(report, lambda, tol)?;
    energy_resolvent_norm(&model.energy_frame()?, lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample<T> {
    pub lambda: Complex<T>,
    pub norm: T,
    /// `norm·|Im λ|`.
    pub product: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventScan<T> {
    pub re_offset: T,
    pub samples: Vec<ResolventSample<T>>,
    /// Largest product over the scan.
    pub fitted_m: T,
    /// Log-log slope of the products over the upper half of the grid.
    pub tail_slope: T,
    pub bounded: bool,
    /// `max |Im λ_k| / |Re λ_k|`; `None` when unbounded.
    pub sector_ratio: Option<T>,
    /// Bounded products together with a finite sector ratio.
    pub sectorial: bool,
    /// The exponent and strip width of the polynomial bound near the real
    /// axis are not estimated.
    pub near_axis_exponent: Option<T>,
    pub near_axis_width: Option<T>,
}

/// Samples `λ = re_offset + i·t` for each `t` in `im_grid`.
pub fn resolvent_scan<T: Real>(
    model: &SystemModel<T>,
    report: &SpectrumReport<T>,
    re_offset: T,
    im_grid: &[T],
    tol: &ToleranceProfile,
) -> Result<ResolventScan<T>> {
    let frame = model.energy_frame()?;
    let samples: Vec<ResolventSample<T>> = im_grid
        .par_iter()
        .map(|&t| {
            let lambda = Complex::new(re_offset, t);
            check_resolvent_point(report, lambda, tol)?;
            let norm = energy_resolvent_norm(&frame, lambda)?;
            Ok(ResolventSample {
                lambda,
                norm,
                product: norm * t.abs(),
            })
        })
        .collect::<Result<_>>()?;
    let fitted_m = samples.iter().map(|s| s.product).fold(T::zero(), T::max);
    let tail_slope = tail_slope(&samples);
    let bounded = fitted_m.is_finite() && tail_slope <= T::lit(GROWTH_SLOPE);
    let sector_ratio = report.sector_ratio();
    Ok(ResolventScan {
        re_offset,
        samples,
        fitted_m,
        tail_slope,
        bounded,
        sector_ratio,
        sectorial: bounded && sector_ratio.is_some(),
        near_axis_exponent: None,
        near_axis_width: None,
    })
}

/// Least-squares slope of `log product` against `log |Im λ|` over the
/// samples with the larger half of the `|Im λ|` values.
fn tail_slope<T: Real>(samples: &[ResolventSample<T>]) -> T {
    let mut pts: Vec<(T, T)> = samples
        .iter()
        .filter(|s| s.lambda.im != T::zero() && s.product > T::zero())
        .map(|s| (s.lambda.im.abs().ln(), s.product.ln()))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let tail = &pts[pts.len() / 2..];
    if tail.len() < 2 {
        return T::zero();
    }
    let k = T::from_count(tail.len());
    let mx = tail.iter().map(|p| p.0).sum::<T>() / k;
    let my = tail.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = tail.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == T::zero() {
        T::zero()
    } else {
        sxy / sxx
    }
}

/// `count` points from `lo` to `hi`, equally spaced in `log t`.
pub fn log_grid<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * T::from_count(i) / T::from_count(count - 1)).exp())
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProbe<T> {
    pub times: Vec<T>,
    /// `t·‖𝒜x(t)‖ / ‖x₀‖` at each time.
    pub values: Vec<T>,
    pub statistic: T,
    pub method: EvolutionMethod,
}

pub fn smoothing_probe<T: Real>(
    model: &SystemModel<T>,
    x0: &PhaseVector<T>,
    t_grid: &[T],
    tol: &ToleranceProfile,
) -> Result<SmoothingProbe<T>> {
    let ev = Evolver::new(model, tol)?;
    let traj = ev.evolve(x0, t_grid)?;
    let frame = ev.frame();
    let n0 = x0.energy_norm(model.stiffness());
    if n0 == T::zero() {
        return Err(Error::invalid_input("initial state must be nonzero"));
    }
    let values: Vec<T> = traj
        .states
        .iter()
        .zip(t_grid)
        .map(|(x, &t)| {
            let aw = frame.operator.mul_vec(&frame.to_energy(x));
            t * aw.iter().map(|&v| v * v).sum::<T>().sqrt() / n0
        })
        .collect();
    let statistic = values.iter().copied().fold(T::zero(), T::max);
    Ok(SmoothingProbe {
        times: t_grid.to_vec(),
        values,
        statistic,
        method: traj.method,
    })
}
