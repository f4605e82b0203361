#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use specdamp_core::{Matrix, Model};

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn product_t(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.rows(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(j, k)]).sum()
    })
}

/// `BBᵀ + sI` with `s ∈ [0.1, 1.1]`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let b = uniform_matrix(rng, n, n);
    let shift = 0.1 + rng.gen::<f64>();
    let mut k = product_t(&b, &b);
    for i in 0..n {
        k[(i, i)] += shift;
    }
    k.symmetrized()
}

/// `s·DDᵀ` with `D` of random rank and `s` spread over four decades.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let rank = rng.gen_range(0..=n);
    let d = uniform_matrix(rng, n, rank);
    let s = rng.gen_range(-2.0f64..2.0).exp();
    product_t(&d, &d).scale(s).symmetrized()
}

pub fn random_model(rng: &mut ChaCha8Rng, max_dim: usize) -> Model {
    let n = rng.gen_range(1..=max_dim);
    let k = random_spd(rng, n);
    let c = random_psd(rng, n);
    Model::new(k, c).unwrap()
}

/// Random orthogonal matrix from Gram–Schmidt on a uniform matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let a = uniform_matrix(rng, n, n);
        let mut q: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            let mut v = a.column(j);
            for u in &q {
                let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm < 1e-3 {
                break;
            }
            q.push(v.into_iter().map(|x| x / nrm).collect());
        }
        if q.len() == n {
            return Matrix::from_fn(n, n, |i, j| q[j][i]);
        }
    }
}

/// `K = Q diag(k) Qᵀ`, `C = Q diag(c) Qᵀ` with some modes critically damped,
/// which produces Jordan blocks at `−√k`.
pub fn modal_model(rng: &mut ChaCha8Rng, max_dim: usize) -> Model {
    let n = rng.gen_range(1..=max_dim);
    let q = random_orthogonal(rng, n);
    let k: Vec<f64> = (0..n).map(|i| 0.3 + i as f64 + rng.gen::<f64>() * 0.9).collect();
    let c: Vec<f64> = k
        .iter()
        .map(|&ki| match rng.gen_range(0..3) {
            0 => 2.0 * ki.sqrt(),
            1 => rng.gen::<f64>() * 2.0 * ki.sqrt(),
            _ => (2.0 + 3.0 * rng.gen::<f64>()) * ki.sqrt(),
        })
        .collect();
    let conj = |d: &[f64]| {
        let qd = Matrix::from_fn(n, n, |i, j| q[(i, j)] * d[j]);
        product_t(&qd, &q).symmetrized()
    };
    Model::new(conj(&k), conj(&c)).unwrap()
}

/// Pairs every element of `a` with a distinct element of `b` minimising the
/// largest distance; returns that distance. Exhaustive for short lists,
/// greedy otherwise.
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.len() <= 6 {
        let mut idx: Vec<usize> = (0..b.len()).collect();
        let mut best = f64::INFINITY;
        permute(&mut idx, 0, &mut |p| {
            let d = a.iter().zip(p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max);
            best = best.min(d);
        });
        best
    } else {
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }
}

fn permute(idx: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, f);
        idx.swap(k, i);
    }
}

/// Characteristic polynomial coefficients `c_0 … c_n` (monic) by the
/// Faddeev–LeVerrier recursion.
pub fn char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = Matrix::from_fn(n, n, |i, j| (0..n).map(|l| a[(i, l)] * m[(l, j)]).sum());
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        let am_trace: f64 = (0..n)
            .map(|i| (0..n).map(|l| a[(i, l)] * next[(l, i)]).sum::<f64>())
            .sum();
        c[n - k] = -am_trace / k as f64;
        m = next;
    }
    c
}

/// Roots of a monic polynomial by Aberth–Ehrlich iteration and Newton polish.
pub fn poly_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let eval = |z: Complex<f64>| {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &ck in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + ck;
        }
        (p, dp)
    };
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex<f64> = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 * radius {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() > 1e-6 * (1.0 + zi.norm()) {
                break;
            }
            *zi -= step;
        }
    }
    z
}
