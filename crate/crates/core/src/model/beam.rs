//! Spectral Galerkin truncation of the Kelvin–Voigt damped Euler–Bernoulli
//! beam `E u'''' ` pinned at 0 and sliding at 1.

use serde::{Deserialize, Serialize};

use super::{ModelSource, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::Real;

/// Default cap on the number of retained modes.
pub const MAX_TRUNCATION_ORDER: usize = 256;

/// Total gap admitted when the patches tile `[0, 1]`.
const COVER_TOL: f64 = 1e-12;

/// Constant damping coefficient `a` on the interval `(from, to)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingPatch<T> {
    pub a: T,
    pub from: T,
    pub to: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec<T> {
    /// Flexural rigidity.
    #[serde(rename = "E")]
    pub e: T,
    pub patches: Vec<DampingPatch<T>>,
    /// Number of retained modes.
    #[serde(rename = "N")]
    pub n: usize,
}

impl<T: Real> BeamSpec<T> {
    pub fn new(e: T, patches: Vec<DampingPatch<T>>, n: usize) -> Result<Self> {
        Self { e, patches, n }.normalized()
    }

    /// Single patch `a` on the whole interval.
    pub fn uniform(e: T, a: T, n: usize) -> Result<Self> {
        Self::new(
            e,
            vec![DampingPatch {
                a,
                from: T::zero(),
                to: T::one(),
            }],
            n,
        )
    }

    /// Sorts the patches, merges neighbours with equal coefficient that share
    /// an endpoint and checks that they tile `[0, 1]` without overlap.
    pub fn normalized(&self) -> Result<Self> {
        let tol = T::lit(COVER_TOL);
        if !(self.e > T::zero()) || !self.e.is_finite() {
            return Err(Error::invalid_model("flexural rigidity E must be positive"));
        }
        if self.n == 0 {
            return Err(Error::invalid_model("truncation order N must be at least 1"));
        }
        if self.n > MAX_TRUNCATION_ORDER {
            return Err(Error::invalid_model(format!(
                "truncation order N = {} exceeds the cap {MAX_TRUNCATION_ORDER}",
                self.n
            )));
        }
        if self.patches.is_empty() {
            return Err(Error::invalid_model("beam needs at least one damping patch"));
        }
        for p in &self.patches {
            if !(p.a > T::zero()) || !p.a.is_finite() {
                return Err(Error::invalid_model(format!(
                    "damping coefficient a = {} must be positive",
                    p.a
                )));
            }
            if !(p.from < p.to) || p.from < -tol || p.to > T::one() + tol {
                return Err(Error::invalid_model(format!(
                    "patch ({}, {}) is not a subinterval of [0, 1]",
                    p.from, p.to
                )));
            }
        }
        let mut sorted = self.patches.clone();
        sorted.sort_by(|p, q| p.from.partial_cmp(&q.from).unwrap());

        let mut merged: Vec<DampingPatch<T>> = Vec::with_capacity(sorted.len());
        let mut gap = sorted[0].from.max(T::zero());
        for p in sorted {
            if let Some(last) = merged.last_mut() {
                if p.from < last.to - tol {
                    return Err(Error::invalid_model(format!(
                        "patches ({}, {}) and ({}, {}) overlap",
                        last.from, last.to, p.from, p.to
                    )));
                }
                gap += (p.from - last.to).max(T::zero());
                if p.a == last.a && (p.from - last.to).abs() <= tol {
                    last.to = p.to;
                    continue;
                }
            }
            merged.push(p);
        }
        gap += (T::one() - merged.last().unwrap().to).max(T::zero());
        if gap > tol {
            return Err(Error::invalid_model(format!(
                "patches leave a gap of total length {:e} in [0, 1]",
                gap.to_f64_lossy()
            )));
        }
        Ok(Self {
            e: self.e,
            patches: merged,
            n: self.n,
        })
    }

    /// `c = min a_k`, the lower bound of the damping coefficient.
    pub fn min_coefficient(&self) -> T {
        self.patches
            .iter()
            .map(|p| p.a)
            .fold(T::infinity(), T::min)
    }

    /// Distinct coefficients in ascending order.
    pub fn distinct_coefficients(&self) -> Vec<T> {
        let mut a: Vec<T> = self.patches.iter().map(|p| p.a).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        a.dedup();
        a
    }

    /// Points `−E/a_k` where the slow eigenvalues accumulate as `N → ∞`.
    pub fn accumulation_points(&self) -> Vec<T> {
        self.distinct_coefficients()
            .into_iter()
            .map(|a| -self.e / a)
            .collect()
    }

    pub fn with_order(&self, n: usize) -> Self {
        Self {
            n,
            ..self.clone()
        }
    }
}

/// `ω_k = (k − ½)π` for the 1-based mode index `k`.
pub fn mode_wavenumber<T: Real>(k: usize) -> T {
    (T::from_count(k) - T::lit(0.5)) * T::PI()
}

/// `sin(πx)` with exact zeros at integers and exact reduction of the period.
fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let mut y = x - two * (x / two).round();
    let mut sign = T::one();
    if y < T::zero() {
        y = -y;
        sign = -sign;
    }
    if y > T::lit(0.5) {
        y = T::one() - y;
    }
    if y == T::zero() {
        return T::zero();
    }
    sign * (T::PI() * y).sin()
}

// Antiderivative of 2 sin(ω_j r) sin(ω_k r) at r, with ω_j ± ω_k written as
// integer multiples of π.
fn product_antiderivative<T: Real>(j: usize, k: usize, r: T) -> T {
    let pi = T::PI();
    let sum = (j + k - 1) as f64;
    let plus = sin_pi(T::lit(sum) * r) / (T::lit(sum) * pi);
    if j == k {
        r - plus
    } else {
        let diff = T::lit(j as f64 - k as f64);
        sin_pi(diff * r) / (diff * pi) - plus
    }
}

/// `∫_from^to 2 sin(ω_j r) sin(ω_k r) dr` for 1-based mode indices.
pub fn patch_integral<T: Real>(j: usize, k: usize, from: T, to: T) -> T {
    product_antiderivative(j, k, to) - product_antiderivative(j, k, from)
}

/// Assembles `K = diag(E ω_k⁴)` and
/// `C_jk = Σ_m a_m ω_j² ω_k² ∫_{A_m} 2 sin(ω_j r) sin(ω_k r) dr`.
pub fn beam_assemble<T: Real>(spec: &BeamSpec<T>) -> Result<SystemModel<T>> {
    let spec = spec.normalized()?;
    let n = spec.n;
    let omega2: Vec<T> = (1..=n).map(|k| mode_wavenumber::<T>(k).powi(2)).collect();
    let stiffness = DenseMatrix::from_diag(&omega2.iter().map(|&w| spec.e * w * w).collect::<Vec<_>>());
    let mut damping = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let mut s = T::zero();
            for p in &spec.patches {
                s += p.a * patch_integral(j + 1, k + 1, p.from, p.to);
            }
            let v = s * omega2[j] * omega2[k];
            damping[(j, k)] = v;
            damping[(k, j)] = v;
        }
    }
    SystemModel::with_source(stiffness, damping, ModelSource::Beam(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Adaptive Simpson quadrature, used only as an independent oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    fn quad_entry(spec: &BeamSpec<f64>, j: usize, k: usize) -> f64 {
        let (wj, wk) = (mode_wavenumber::<f64>(j), mode_wavenumber::<f64>(k));
        spec.patches
            .iter()
            .map(|p| {
                let f = |r: f64| 2.0 * (wj * r).sin() * (wk * r).sin();
                p.a * simpson(&f, p.from, p.to, 1e-13)
            })
            .sum::<f64>()
            * wj.powi(2)
            * wk.powi(2)
    }

    #[test]
    fn uniform_patch_is_modal() {
        let spec = BeamSpec::uniform(1.0, 2.0, 3).unwrap();
        let m = beam_assemble(&spec).unwrap();
        assert!((m.stiffness()[(0, 0)] - PI.powi(4) / 16.0).abs() < 1e-13);
        assert!((m.stiffness()[(0, 0)] - 6.088068).abs() < 1e-6);
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k { 2.0 * m.stiffness()[(j, j)] } else { 0.0 };
                assert!((m.damping()[(j, k)] - want).abs() <= 1e-13 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn off_diagonal_vanishes_exactly() {
        for n in [1, 5, 17, 64] {
            let m = beam_assemble(&BeamSpec::uniform(1.0, 0.7, n).unwrap()).unwrap();
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        assert_eq!(m.damping()[(j, k)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn two_patch_entry() {
        let spec = BeamSpec::new(
            1.0,
            vec![
                DampingPatch { a: 2.0, from: 0.5, to: 1.0 },
                DampingPatch { a: 1.0, from: 0.0, to: 0.5 },
            ],
            1,
        )
        .unwrap();
        let m = beam_assemble(&spec).unwrap();
        let w4 = mode_wavenumber::<f64>(1).powi(4);
        let want = w4 * (1.0 * (0.5 - 1.0 / PI) + 2.0 * (0.5 + 1.0 / PI));
        assert!((m.damping()[(0, 0)] - want).abs() < 1e-12 * want);
        assert!((m.damping()[(0, 0)] - quad_entry(&spec, 1, 1)).abs() < 1e-10 * want);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let spec = BeamSpec::new(
            2.5,
            vec![
                DampingPatch { a: 0.3, from: 0.0, to: 0.2 },
                DampingPatch { a: 1.7, from: 0.2, to: 0.75 },
                DampingPatch { a: 0.9, from: 0.75, to: 1.0 },
            ],
            6,
        )
        .unwrap();
        let m = beam_assemble(&spec).unwrap();
        let scale = m.damping().max_abs();
        for j in 0..6 {
            for k in 0..6 {
                let q = quad_entry(&spec, j + 1, k + 1);
                assert!(
                    (m.damping()[(j, k)] - q).abs() < 1e-10 * scale,
                    "({j},{k}): {} vs {q}",
                    m.damping()[(j, k)]
                );
            }
        }
    }

    #[test]
    fn normalization() {
        let spec = BeamSpec::new(
            1.0,
            vec![
                DampingPatch { a: 1.0, from: 0.5, to: 1.0 },
                DampingPatch { a: 1.0, from: 0.0, to: 0.5 },
            ],
            2,
        )
        .unwrap();
        assert_eq!(spec.patches, vec![DampingPatch { a: 1.0, from: 0.0, to: 1.0 }]);

        let overlap = BeamSpec::new(
            1.0,
            vec![
                DampingPatch { a: 1.0, from: 0.0, to: 0.6 },
                DampingPatch { a: 2.0, from: 0.5, to: 1.0 },
            ],
            2,
        );
        assert!(matches!(overlap, Err(Error::InvalidModel { .. })));

        let gap = BeamSpec::new(
            1.0,
            vec![
                DampingPatch { a: 1.0, from: 0.0, to: 0.4 },
                DampingPatch { a: 2.0, from: 0.5, to: 1.0 },
            ],
            2,
        );
        assert!(matches!(gap, Err(Error::InvalidModel { .. })));

        assert!(BeamSpec::uniform(1.0, 0.0, 2).is_err());
        assert!(BeamSpec::uniform(-1.0, 1.0, 2).is_err());
        assert!(BeamSpec::uniform(1.0, 1.0, 0).is_err());
        assert!(BeamSpec::uniform(1.0, 1.0, MAX_TRUNCATION_ORDER + 1).is_err());
    }

    #[test]
    fn sin_pi_reduction() {
        for &(x, want) in &[(0.0, 0.0), (1.0, 0.0), (-3.0, 0.0), (0.5, 1.0), (1.5, -1.0), (-0.5, -1.0)] {
            assert_eq!(sin_pi::<f64>(x), want);
        }
        for i in 0..200 {
            let x = -7.3 + 0.0731 * i as f64;
            assert!((sin_pi(x) - (PI * x).sin()).abs() < 1e-13);
        }
    }
}
