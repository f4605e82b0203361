mod common;

use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use specdamp_core::conditions::{check_overdamping, equivalence_constants};
use specdamp_core::linalg::{cholesky, nonsym_eig, sym_eig, DenseMatrix};
use specdamp_core::model::{beam_assemble, patch_integral, BeamSpec, DampingPatch, PhaseVector, SystemModel};
use specdamp_core::semigroup::{evolve, Evolver};
use specdamp_core::spectrum::solve_qep;
use specdamp_core::{Matrix, Model, ToleranceProfile};

fn tol() -> ToleranceProfile {
    ToleranceProfile::default()
}

fn model_from(seed: u64, max_dim: usize) -> Model {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), max_dim)
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), n in 1usize..7) {
        let k = random_spd(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let l = cholesky(&k).unwrap();
        let back = product_t(&l, &l);
        prop_assert!(max_abs_diff(&back, &k) <= 1e-13 * k.max_abs());
        for i in 0..n {
            for j in (i + 1)..n {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn symmetric_eigen_reconstructs(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = uniform_matrix(&mut rng, n, n).symmetrized();
        let eig = sym_eig(&m).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let back = eig.apply_function(|x| x);
        prop_assert!(max_abs_diff(&back, &m) <= 1e-13);
        let vtv = DenseMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| eig.vectors[(k, i)] * eig.vectors[(k, j)]).sum()
        });
        prop_assert!(max_abs_diff(&vtv, &DenseMatrix::identity(n)) <= 1e-13);
    }

    #[test]
    fn cholesky_and_eigen_agree_on_definiteness(seed in any::<u64>(), n in 1usize..6, shift in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = uniform_matrix(&mut rng, n, n).symmetrized();
        for i in 0..n {
            m[(i, i)] += shift;
        }
        let min = sym_eig(&m).unwrap().min();
        if min.abs() > 1e-10 {
            prop_assert_eq!(cholesky(&m).is_ok(), min > 0.0);
        }
    }

    #[test]
    fn nonsymmetric_residuals_and_trace(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = uniform_matrix(&mut rng, n, n);
        let d = nonsym_eig(&m, &tol()).unwrap();
        prop_assert!(d.max_residual() <= 1e-12);
        let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
        let sum: Complex<f64> = d.eigenvalues.iter().sum();
        prop_assert!((sum.re - trace).abs() <= 1e-12 * (1.0 + trace.abs()) * n as f64);
        prop_assert!(sum.im.abs() <= 1e-12 * n as f64);
    }

    #[test]
    fn nonsymmetric_matches_characteristic_roots(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = uniform_matrix(&mut rng, n, n);
        let d = nonsym_eig(&m, &tol()).unwrap();
        let roots = poly_roots(&char_poly(&m));
        // Root conditioning near multiple roots is O(√ε); random matrices rarely get close.
        prop_assert!(multiset_distance(&d.eigenvalues, &roots) <= 1e-6);
    }

    #[test]
    fn spectrum_respects_bound_and_dissipativity(seed in any::<u64>()) {
        let model = model_from(seed, 6);
        let r = solve_qep(&model, &tol()).unwrap();
        prop_assert_eq!(r.eigenpairs.len(), 2 * model.dim());
        prop_assert!(r.residuals_within_tolerance());
        for z in r.eigenvalues() {
            prop_assert!(z.norm() >= r.bound.value - 1e-10);
            prop_assert!(z.re <= 1e-10);
        }
        let values = r.eigenvalues();
        for z in &values {
            prop_assert!(values.iter().any(|w| (w - z.conj()).norm() <= 1e-7 * (1.0 + z.norm())));
        }
    }

    #[test]
    fn structured_eigenvectors(seed in any::<u64>()) {
        let model = model_from(seed, 5);
        let r = solve_qep(&model, &tol()).unwrap();
        for p in &r.eigenpairs {
            for (x, y) in p.vector.position.iter().zip(&p.vector.velocity) {
                prop_assert!((x * p.value - y).norm() <= 1e-12 * (1.0 + p.value.norm()));
            }
            prop_assert!((p.vector.euclidean_norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn equivalence_constants_bracket_damping(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 5);
        let eq = equivalence_constants(&model).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..model.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let kx = model.stiffness().quadratic_form(&x);
            let cx = model.damping().quadratic_form(&x);
            let slack = 1e-12 * (1.0 + eq.alpha) * kx;
            prop_assert!(eq.gamma * kx <= cx + slack);
            prop_assert!(cx <= eq.alpha * kx + slack);
        }
    }

    #[test]
    fn positive_margin_gives_real_semisimple_spectrum(seed in any::<u64>(), boost in 0.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let k = random_spd(&mut rng, n);
        let c = random_psd(&mut rng, n).scale(boost.exp());
        let model = SystemModel::new(k, c).unwrap();
        let r = check_overdamping(&model, seed).unwrap();
        if r.margin > 1e-6 {
            prop_assert!(r.certificate.is_some());
            let s = solve_qep(&model, &tol()).unwrap();
            prop_assert!(s.all_real());
            prop_assert_eq!(s.max_jordan_defect(), 0);
        }
    }

    #[test]
    fn overdamping_is_seed_stable(seed in any::<u64>()) {
        let model = model_from(seed, 4);
        let a = check_overdamping(&model, 0).unwrap();
        let b = check_overdamping(&model, 1000).unwrap();
        prop_assert!((a.margin - b.margin).abs() <= 1e-9 * a.scale.max(1.0));
    }

    #[test]
    fn energy_never_increases(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 4);
        let n = model.dim();
        let x0 = PhaseVector::from_stacked(&(0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
        let times: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        let r = evolve(&model, &x0, &times, &tol()).unwrap();
        prop_assert_eq!(&r.states[0], &x0);
        prop_assert!(r.max_energy_increase() <= 1e-10);
    }

    #[test]
    fn semigroup_composition(seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 4);
        let n = model.dim();
        let x0 = PhaseVector::from_stacked(&(0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
        let ev = Evolver::new(&model, &tol()).unwrap();
        let mid = ev.evolve(&x0, &[s]).unwrap().states.remove(0);
        let a = ev.evolve(&mid, &[t]).unwrap().states.remove(0);
        let b = ev.evolve(&x0, &[s + t]).unwrap().states.remove(0);
        let k = model.stiffness();
        let diff = PhaseVector::new(
            a.position.iter().zip(&b.position).map(|(p, q)| p - q).collect(),
            a.velocity.iter().zip(&b.velocity).map(|(p, q)| p - q).collect(),
        ).unwrap();
        let scale = b.energy_norm(k).max(1e-3 * x0.energy_norm(k));
        let bound = if ev.method() == specdamp_core::semigroup::EvolutionMethod::ExactModal { 1e-8 } else { 1e-3 };
        prop_assert!(diff.energy_norm(k) <= bound * scale);
    }

    #[test]
    fn beam_damping_is_symmetric_psd(a1 in 0.05f64..3.0, a2 in 0.05f64..3.0, cut in 0.05f64..0.95, n in 1usize..24) {
        let spec = BeamSpec::new(1.0, vec![
            DampingPatch { a: a1, from: 0.0, to: cut },
            DampingPatch { a: a2, from: cut, to: 1.0 },
        ], n).unwrap();
        let model = beam_assemble(&spec).unwrap();
        let c = model.damping();
        prop_assert!(c.asymmetry() == 0.0);
        let w = sym_eig(&model.whitened_damping().unwrap()).unwrap();
        prop_assert!(w.min() >= a1.min(a2) - 1e-9);
        prop_assert!(w.max() <= a1.max(a2) + 1e-9);
        for j in 1..=n {
            for k in 1..=n {
                let full = patch_integral::<f64>(j, k, 0.0, 1.0);
                let split = patch_integral::<f64>(j, k, 0.0, cut) + patch_integral::<f64>(j, k, cut, 1.0);
                prop_assert!((full - split).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn single_precision_pipeline() {
    let k = DenseMatrix::<f32>::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
    let c = DenseMatrix::<f32>::from_rows(&[[0.4, 0.1], [0.1, 0.3]]).unwrap();
    let model = SystemModel::new(k, c).unwrap();
    let loose = ToleranceProfile {
        residual_tol: 1e-4,
        snap_real_tol: 1e-4,
        cluster_tol: 1e-3,
        neutral_tol: 1e-3,
        orth_tol: 1e-3,
        rank_tol: 1e-2,
    };
    let r = solve_qep(&model, &loose).unwrap();
    assert!(r.residuals_within_tolerance());
    let m64 = SystemModel::new(model.stiffness().cast::<f64>(), model.damping().cast::<f64>()).unwrap();
    let r64 = solve_qep(&m64, &tol()).unwrap();
    let a: Vec<Complex<f64>> = r.eigenvalues().iter().map(|z| Complex::new(z.re as f64, z.im as f64)).collect();
    assert!(multiset_distance(&a, &r64.eigenvalues()) < 1e-4);
}
