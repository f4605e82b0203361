//! Sufficient conditions for a Riesz basis of eigenvectors and the beam
//! threshold report.
//!
//! Condition (i) is stated on the energy space. With `g = K^{1/2} f` the unit
//! sphere of the energy space maps onto the Euclidean unit sphere and the
//! quantity to minimise becomes
//!
//! ```text
//! φ(g) = (gᵀ W̃ g)² − 4 gᵀ K⁻¹ g,    W̃ = K^{-1/2} C K^{-1/2}.
//! ```
//!
//! A positive minimum is equivalent to the existence of `s < 0` for which
//! `L(s) = s² I + s W̃ + K⁻¹` is negative definite, which gives a second,
//! convex detector.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::{kernel_gram_nondegeneracy, GramVerdict};
use crate::linalg::{dot, norm2, sym_eig, DenseMatrix};
use crate::model::{beam_assemble, BeamSpec, ModelSource, SystemModel};
use crate::spectrum::SpectrumReport;
use crate::{Real, ToleranceProfile};

/// Number of seeded random restarts of the projected-gradient minimiser.
pub const RESTARTS: u64 = 32;

/// Relative width of the band around zero in which the two overdamping
/// detectors may disagree.
pub const DISAGREEMENT_BAND: f64 = 1e-6;

const MAX_ITERATIONS: usize = 4000;
const GOLDEN_ITERATIONS: usize = 90;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverdampingReport<T> {
    /// Minimum of `φ` over the unit sphere.
    pub margin: T,
    /// Unit vector `g` attaining the margin.
    pub minimizer: Vec<T>,
    /// Some `s < 0` with `L(s)` negative definite.
    pub certificate: Option<T>,
    /// `min_s λ_max(L(s))` over `[−‖W̃‖, 0]`.
    pub line_search_min: T,
    pub line_search_argmin: T,
    /// Scale of `φ`, used for the disagreement band.
    pub scale: T,
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Real> OverdampingReport<T> {
    pub fn holds(&self) -> bool {
        self.margin > T::zero()
    }
}

struct Objective<T> {
    w: DenseMatrix<T>,
    m: DenseMatrix<T>,
}

struct Sample<T> {
    value: T,
    wq: T,
    wg: Vec<T>,
    mg: Vec<T>,
}

impl<T: Real> Objective<T> {
    fn eval(&self, g: &[T]) -> Sample<T> {
        let wg = self.w.mul_vec(g);
        let mg = self.m.mul_vec(g);
        let wq = dot(g, &wg);
        let value = wq * wq - T::lit(4.0) * dot(g, &mg);
        Sample { value, wq, wg, mg }
    }

    /// Tangential part of `∇φ = 4(gᵀW̃g) W̃g − 8 K⁻¹g`.
    fn projected_gradient(&self, g: &[T], s: &Sample<T>) -> Vec<T> {
        let four = T::lit(4.0);
        let eight = T::lit(8.0);
        let grad: Vec<T> = s.wg.iter().zip(&s.mg).map(|(&a, &b)| four * s.wq * a - eight * b).collect();
        let radial = dot(g, &grad);
        grad.iter().zip(g).map(|(&d, &x)| d - radial * x).collect()
    }

    fn descend(&self, start: Vec<T>, scale: T) -> (T, Vec<T>) {
        let mut g = normalized(start);
        let mut cur = self.eval(&g);
        let mut step = T::one() / scale;
        let stop = T::lit(1e-11) * scale;
        for _ in 0..MAX_ITERATIONS {
            let pg = self.projected_gradient(&g, &cur);
            let pnorm = norm2(&pg);
            if pnorm <= stop {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                if step * pnorm <= T::epsilon() {
                    break;
                }
                let trial = normalized(g.iter().zip(&pg).map(|(&x, &d)| x - step * d).collect());
                let s = self.eval(&trial);
                if s.value < cur.value && s.value <= cur.value - T::lit(1e-4) * step * pnorm * pnorm {
                    g = trial;
                    cur = s;
                    accepted = true;
                    break;
                }
                step *= T::lit(0.5);
            }
            if !accepted {
                break;
            }
            step *= T::lit(2.0);
        }
        (cur.value, g)
    }

    /// `λ_max(s² I + s W̃ + K⁻¹)`.
    fn pencil_max(&self, s: T) -> Result<T> {
        let n = self.w.rows();
        let l = DenseMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { s * s } else { T::zero() };
            d + s * self.w[(i, j)] + self.m[(i, j)]
        });
        Ok(sym_eig(&l)?.max())
    }
}

fn normalized<T: Real>(mut v: Vec<T>) -> Vec<T> {
    let n = norm2(&v);
    if n > T::zero() {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Minimum of `φ` with detector cross-check. Restarts use seeds
/// `seed, seed + 1, …, seed + 31` plus the extremal eigenvectors of `W̃` and
/// `K⁻¹`; the result does not depend on how the restarts are scheduled.
pub fn check_overdamping<T: Real>(model: &SystemModel<T>, seed: u64) -> Result<OverdampingReport<T>> {
    let n = model.dim();
    let w = model.whitened_damping()?;
    let m = model.stiffness_inverse()?;
    let w_eig = sym_eig(&w)?;
    let m_eig = sym_eig(&m)?;
    let w_norm = w_eig.max().max(T::zero());
    let scale = w_norm * w_norm + T::lit(4.0) * m_eig.max();
    let obj = Objective { w, m };

    let mut starts: Vec<Vec<T>> = (0..RESTARTS)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect()
        })
        .collect();
    starts.push(w_eig.vector(0));
    starts.push(m_eig.vector(n - 1));

    let runs: Vec<(T, Vec<T>)> = starts.into_par_iter().map(|g0| obj.descend(g0, scale)).collect();
    let (margin, minimizer) = runs
        .into_iter()
        .reduce(|best, cur| if cur.0 < best.0 { cur } else { best })
        .expect("at least one restart");

    let (line_search_argmin, line_search_min) = golden_minimum(|s| obj.pencil_max(s), -w_norm, T::zero())?;
    let rounding = T::lit(16.0) * T::epsilon() * scale.max(T::one());
    let certificate = (line_search_min < -rounding).then_some(line_search_argmin);

    let band = T::lit(DISAGREEMENT_BAND) * scale.max(T::one());
    let conflict = (margin > band && certificate.is_none()) || (margin < -band && certificate.is_some());
    if conflict {
        return Err(Error::OptimizerDisagreement {
            margin: margin.to_f64_lossy(),
            line_search_min: line_search_min.to_f64_lossy(),
        });
    }
    Ok(OverdampingReport {
        margin,
        minimizer,
        certificate,
        line_search_min,
        line_search_argmin,
        scale,
        restarts: RESTARTS as usize + 2,
        seed,
    })
}

/// Golden-section search for the minimum of a convex function on `[lo, hi]`.
fn golden_minimum<T: Real>(f: impl Fn(T) -> Result<T>, lo: T, hi: T) -> Result<(T, T)> {
    let r = T::lit(0.5 * (5f64.sqrt() - 1.0));
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a <= T::epsilon() * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    for s in [lo, hi] {
        let v = f(s)?;
        if v < best.1 {
            best = (s, v);
        }
    }
    Ok(best)
}

/// How the essential spectrum of `K⁻¹C` on the energy space was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialSpectrumSource {
    /// `{a_k / E}` from the damping coefficients of a beam.
    Beam,
    /// `{α}` for `C = αK + B` with compact `B`.
    Perturbed,
    /// Supplied by the caller.
    Declared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialSpectrum<T> {
    pub values: Vec<T>,
    pub source: EssentialSpectrumSource,
}

/// The essential spectrum the continuum model would have. A declared proxy
/// takes precedence; generic models have no other source.
pub fn essential_spectrum<T: Real>(model: &SystemModel<T>, declared: Option<&[T]>) -> Result<EssentialSpectrum<T>> {
    if let Some(values) = declared {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_input("essential spectrum proxy must be finite"));
        }
        let mut values = values.to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        return Ok(EssentialSpectrum {
            values,
            source: EssentialSpectrumSource::Declared,
        });
    }
    match model.source() {
        ModelSource::Beam(spec) => Ok(EssentialSpectrum {
            values: spec.distinct_coefficients().into_iter().map(|a| a / spec.e).collect(),
            source: EssentialSpectrumSource::Beam,
        }),
        ModelSource::Perturbed { alpha, .. } => Ok(EssentialSpectrum {
            values: vec![*alpha],
            source: EssentialSpectrumSource::Perturbed,
        }),
        ModelSource::Generic => Err(Error::MissingEssentialSpectrumProxy),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionIiVerdict<T> {
    pub mu: T,
    /// `1/μ`.
    pub target: T,
    /// Distance from `1/μ` to the nearest computed eigenvalue.
    pub nearest_distance: T,
    /// Cluster whose eigenspace was tested, if `1/μ` is an eigenvalue.
    pub cluster: Option<usize>,
    pub gram: Option<GramVerdict<T>>,
    pub holds: bool,
}

impl<T> ConditionIiVerdict<T> {
    pub fn vacuous(&self) -> bool {
        self.gram.is_none()
    }
}

/// Condition (ii) for each candidate `μ` in the essential spectrum of
/// `−K⁻¹C`.
pub fn check_condition_ii<T: Real>(
    model: &SystemModel<T>,
    report: &SpectrumReport<T>,
    candidates: &[T],
    tol: &ToleranceProfile,
) -> Result<Vec<ConditionIiVerdict<T>>> {
    candidates
        .iter()
        .map(|&mu| {
            let target = mu.recip();
            let nearest = report
                .eigenpairs
                .iter()
                .map(|p| (p.value - Complex::new(target, T::zero())).norm())
                .fold(T::infinity(), T::min);
            let radius = T::lit(tol.cluster_tol) * (T::one() + target.abs());
            let hit = report
                .clusters
                .iter()
                .enumerate()
                .filter(|(_, c)| c.real)
                .filter(|(_, c)| {
                    c.members
                        .iter()
                        .any(|&i| (report.eigenpairs[i].value.re - target).abs() <= radius)
                })
                .min_by(|a, b| {
                    let da = (a.1.mean.re - target).abs();
                    let db = (b.1.mean.re - target).abs();
                    da.partial_cmp(&db).unwrap()
                });
            let (cluster, gram) = match hit {
                Some((idx, c)) if target.is_finite() => {
                    let verdict = kernel_gram_nondegeneracy(model, c.mean.re, &c.basis, tol)?;
                    (Some(idx), Some(verdict))
                }
                _ => (None, None),
            };
            let holds = !gram.as_ref().is_some_and(GramVerdict::is_degenerate);
            Ok(ConditionIiVerdict {
                mu,
                target,
                nearest_distance: nearest,
                cluster,
                gram,
                holds,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionIii<T> {
    /// `‖K^{-1/2}‖₂ = λ_min(K)^{-1/2}`.
    pub lhs: T,
    /// Smallest positive point of the essential spectrum of `K⁻¹C`.
    pub rhs: T,
    pub holds: bool,
    pub source: EssentialSpectrumSource,
}

pub fn check_condition_iii<T: Real>(model: &SystemModel<T>, declared: Option<&[T]>) -> Result<ConditionIii<T>> {
    let ess = essential_spectrum(model, declared)?;
    condition_iii_from(model, &ess)
}

fn condition_iii_from<T: Real>(model: &SystemModel<T>, ess: &EssentialSpectrum<T>) -> Result<ConditionIii<T>> {
    let lhs = model.stiffness_eigen()?.min().sqrt().recip();
    let rhs = ess
        .values
        .iter()
        .copied()
        .filter(|&v| v > T::zero())
        .fold(T::infinity(), T::min);
    Ok(ConditionIii {
        lhs,
        rhs,
        holds: lhs < rhs,
        source: ess.source,
    })
}

/// Constants with `γ·xᵀKx ≤ xᵀCx ≤ α·xᵀKx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConstants<T> {
    pub gamma: T,
    pub alpha: T,
}

pub fn equivalence_constants<T: Real>(model: &SystemModel<T>) -> Result<EquivalenceConstants<T>> {
    let v = model.validate()?;
    Ok(EquivalenceConstants {
        gamma: v.gamma,
        alpha: v.alpha,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndeePatch<T> {
    pub a: T,
    pub from: T,
    pub to: T,
    /// `8/(π²√E)`.
    pub threshold_i_printed: T,
    /// `8√E/π²`.
    pub threshold_i_derived: T,
    /// `4√E/π²`.
    pub threshold_iii: T,
    pub above_i_printed: bool,
    pub above_i_derived: bool,
    pub above_iii: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndeeReport<T> {
    #[serde(rename = "E")]
    pub e: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub patches: Vec<EndeePatch<T>>,
    /// Measured minimum of `φ` for the assembled model.
    pub overdamping_margin: T,
}

/// Beam damping thresholds per patch, with the measured overdamping margin.
pub fn endee_report<T: Real>(spec: &BeamSpec<T>, seed: u64) -> Result<EndeeReport<T>> {
    let model = beam_assemble(spec)?;
    let margin = check_overdamping(&model, seed)?.margin;
    endee_from(spec, margin)
}

fn endee_from<T: Real>(spec: &BeamSpec<T>, margin: T) -> Result<EndeeReport<T>> {
    let spec = spec.normalized()?;
    let pi2 = T::PI() * T::PI();
    let root_e = spec.e.sqrt();
    let printed = T::lit(8.0) / (pi2 * root_e);
    let derived = T::lit(8.0) * root_e / pi2;
    let third = T::lit(4.0) * root_e / pi2;
    let patches = spec
        .patches
        .iter()
        .map(|p| EndeePatch {
            a: p.a,
            from: p.from,
            to: p.to,
            threshold_i_printed: printed,
            threshold_i_derived: derived,
            threshold_iii: third,
            above_i_printed: p.a > printed,
            above_i_derived: p.a > derived,
            above_iii: p.a > third,
        })
        .collect();
    Ok(EndeeReport {
        e: spec.e,
        n: spec.n,
        patches,
        overdamping_margin: margin,
    })
}

/// All three conditions with their numeric margins.
///
/// Conditions (ii) and (iii) are `None` when the model has no essential
/// spectrum to test against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport<T> {
    pub overdamping: OverdampingReport<T>,
    pub essential_spectrum: Option<EssentialSpectrum<T>>,
    pub condition_ii: Option<Vec<ConditionIiVerdict<T>>>,
    pub condition_iii: Option<ConditionIii<T>>,
    pub endee: Option<EndeeReport<T>>,
    pub equivalence_constants: EquivalenceConstants<T>,
}

impl<T: Real> ConditionReport<T> {
    pub fn overdamping_margin(&self) -> T {
        self.overdamping.margin
    }

    pub fn condition_i_holds(&self) -> bool {
        self.overdamping.holds()
    }

    pub fn condition_ii_holds(&self) -> Option<bool> {
        self.condition_ii.as_ref().map(|v| v.iter().all(|c| c.holds))
    }

    pub fn condition_iii_holds(&self) -> Option<bool> {
        self.condition_iii.as_ref().map(|c| c.holds)
    }

    /// True when every evaluated condition holds.
    pub fn all_hold(&self) -> bool {
        self.condition_i_holds()
            && self.condition_ii_holds().unwrap_or(true)
            && self.condition_iii_holds().unwrap_or(true)
    }

    /// True when at least one evaluated condition holds.
    pub fn any_holds(&self) -> bool {
        self.condition_i_holds() || self.condition_ii_holds() == Some(true) || self.condition_iii_holds() == Some(true)
    }
}

pub fn evaluate_conditions<T: Real>(
    model: &SystemModel<T>,
    report: &SpectrumReport<T>,
    declared: Option<&[T]>,
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<ConditionReport<T>> {
    let equivalence = equivalence_constants(model)?;
    let overdamping = check_overdamping(model, seed)?;
    let essential = match essential_spectrum(model, declared) {
        Ok(e) => Some(e),
        Err(Error::MissingEssentialSpectrumProxy) => None,
        Err(e) => return Err(e),
    };
    let (condition_ii, condition_iii) = match &essential {
        Some(ess) => {
            let candidates: Vec<T> = ess.values.iter().map(|&v| -v).collect();
            (
                Some(check_condition_ii(model, report, &candidates, tol)?),
                Some(condition_iii_from(model, ess)?),
            )
        }
        None => (None, None),
    };
    let endee = match model.beam_spec() {
        Some(spec) => Some(endee_from(spec, overdamping.margin)?),
        None => None,
    };
    Ok(ConditionReport {
        overdamping,
        essential_spectrum: essential,
        condition_ii,
        condition_iii,
        endee,
        equivalence_constants: equivalence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::solve_qep;

    fn scalar(k: f64, c: f64) -> SystemModel<f64> {
        SystemModel::new(DenseMatrix::from_diag(&[k]), DenseMatrix::from_diag(&[c])).unwrap()
    }

    #[test]
    fn scalar_margins() {
        let r = check_overdamping(&scalar(1.0, 3.0), 0).unwrap();
        assert!((r.margin - 5.0).abs() < 1e-12);
        assert!(r.certificate.is_some());
        let r = check_overdamping(&scalar(1.0, 2.0), 0).unwrap();
        assert!(r.margin.abs() < 1e-12);
        let r = check_overdamping(&scalar(1.0, 0.0), 0).unwrap();
        assert!((r.margin + 4.0).abs() < 1e-12);
        assert!(r.certificate.is_none());
    }

    #[test]
    fn certificate_is_negative_definite() {
        let k = DenseMatrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]).unwrap();
        let c = DenseMatrix::from_rows(&[[6.0, 1.0], [1.0, 5.0]]).unwrap();
        let m = SystemModel::new(k, c).unwrap();
        let r = check_overdamping(&m, 7).unwrap();
        assert!(r.margin > 0.0);
        let s = r.certificate.unwrap();
        let w = m.whitened_damping().unwrap();
        let kinv = m.stiffness_inverse().unwrap();
        let l = DenseMatrix::from_fn(2, 2, |i, j| {
            (if i == j { s * s } else { 0.0 }) + s * w[(i, j)] + kinv[(i, j)]
        });
        assert!(sym_eig(&l).unwrap().max() < 0.0);
    }

    #[test]
    fn beam_thresholds_at_unit_rigidity() {
        let above = endee_report(&BeamSpec::uniform(1.0, 0.85, 16).unwrap(), 0).unwrap();
        assert!(above.overdamping_margin > 0.0);
        let p = &above.patches[0];
        assert!((p.threshold_i_printed - 8.0 / std::f64::consts::PI.powi(2)).abs() < 1e-15);
        assert_eq!(p.threshold_i_printed, p.threshold_i_derived);
        assert!(p.above_i_printed && p.above_i_derived && p.above_iii);

        let below = endee_report(&BeamSpec::uniform(1.0, 0.5, 16).unwrap(), 0).unwrap();
        assert!(below.overdamping_margin < 0.0);
    }

    #[test]
    fn beam_thresholds_at_rigidity_four() {
        let r = endee_report(&BeamSpec::uniform(4.0, 1.0, 16).unwrap(), 0).unwrap();
        let p = &r.patches[0];
        assert!(p.above_i_printed && !p.above_i_derived);
        assert!((p.threshold_i_printed - 0.405_284_734_569_351_f64).abs() < 1e-12);
        assert!((p.threshold_i_derived - 1.621_138_938_277_404_f64).abs() < 1e-12);
        assert!(r.overdamping_margin < 0.0);
    }

    #[test]
    fn condition_iii_on_beams() {
        let lhs = 4.0 / std::f64::consts::PI.powi(2);
        let m = beam_assemble(&BeamSpec::uniform(1.0, 2.0, 16).unwrap()).unwrap();
        let c = check_condition_iii(&m, None).unwrap();
        assert!((c.lhs - lhs).abs() < 1e-12);
        assert_eq!(c.rhs, 2.0);
        assert!(c.holds);
        let m = beam_assemble(&BeamSpec::uniform(1.0, 0.3, 16).unwrap()).unwrap();
        assert!(!check_condition_iii(&m, None).unwrap().holds);
        assert_eq!(
            check_condition_iii(&scalar(1.0, 1.0), None),
            Err(Error::MissingEssentialSpectrumProxy)
        );
        assert!(check_condition_iii(&scalar(4.0, 1.0), Some(&[0.6])).unwrap().holds);
    }

    #[test]
    fn condition_ii_critical_damping_fails() {
        let tol = ToleranceProfile::default();
        let m = scalar(1.0, 2.0);
        let report = solve_qep(&m, &tol).unwrap();
        let v = check_condition_ii(&m, &report, &[-1.0], &tol).unwrap();
        assert!(!v[0].holds);
        assert!(v[0].gram.as_ref().unwrap().is_degenerate());
        assert!(check_condition_ii(&m, &report, &[], &tol).unwrap().is_empty());
    }

    #[test]
    fn condition_ii_beam_holds() {
        let tol = ToleranceProfile::default();
        let m = beam_assemble(&BeamSpec::uniform(1.0, 2.0, 16).unwrap()).unwrap();
        let report = solve_qep(&m, &tol).unwrap();
        let v = check_condition_ii(&m, &report, &[-2.0], &tol).unwrap();
        assert!(v[0].holds);
        assert!(v[0].nearest_distance > 0.0 && v[0].nearest_distance < 1e-6);
    }

    #[test]
    fn restarts_are_schedule_independent() {
        let k = DenseMatrix::from_rows(&[[3.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 1.0]]).unwrap();
        let c = DenseMatrix::from_rows(&[[1.0, 0.2, 0.0], [0.2, 0.5, 0.1], [0.0, 0.1, 2.0]]).unwrap();
        let m = SystemModel::new(k, c).unwrap();
        let a = check_overdamping(&m, 3).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| check_overdamping(&m, 3).unwrap());
        assert_eq!(a, b);
    }
}
