use std::cmp::Ordering;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{cdot, cnorm2, require_square, DenseMatrix, LinalgError};
use crate::{Real, ToleranceProfile};

/// Group of numerically coincident eigenvalues and its eigenspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster<T> {
    /// Indices into [`EigenDecomposition::eigenvalues`].
    pub members: Vec<usize>,
    pub mean: Complex<T>,
    /// The cluster contains the conjugate of each of its members.
    pub self_conjugate: bool,
    /// Orthonormal basis of the computed eigenspace.
    pub basis: Vec<Vec<Complex<T>>>,
    pub geometric_multiplicity: usize,
}

impl<T> EigenCluster<T> {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.members.len()
    }

    /// Algebraic minus geometric multiplicity.
    pub fn defect(&self) -> usize {
        self.members.len().saturating_sub(self.geometric_multiplicity)
    }
}

/// Eigenvalues and eigenvectors of a general real square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition<T> {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<T>>,
    /// Unit eigenvectors; the largest-magnitude entry is real positive.
    pub eigenvectors: Vec<Vec<Complex<T>>>,
    /// `‖M v − λ v‖₂ / ‖M‖_F` per eigenpair.
    pub residual_norms: Vec<T>,
    pub clusters: Vec<EigenCluster<T>>,
    /// Cluster index of every eigenvalue.
    pub cluster_of: Vec<usize>,
    pub frobenius_norm: T,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn max_residual(&self) -> T {
        self.residual_norms
            .iter()
            .fold(T::zero(), |m, &r| m.max(r))
    }
}

/// Full eigen-decomposition of a real square matrix.
///
/// Eigenvalues come from balancing, Householder reduction to Hessenberg form
/// and the Francis implicit double-shift QR iteration in real arithmetic.
/// Eigenvectors come from shifted inverse iteration on the Hessenberg matrix,
/// one cluster of coincident eigenvalues at a time, so that repeated
/// eigenvalues receive independent eigenvectors whenever the eigenspace
/// allows it.
pub fn nonsym_eig<T: Real>(
    m: &DenseMatrix<T>,
    tol: &ToleranceProfile,
) -> Result<EigenDecomposition<T>, LinalgError> {
    let n = require_square(m)?;
    let fro = m.frobenius_norm();
    if n == 0 || fro == T::zero() {
        return Ok(zero_matrix_decomposition(n));
    }

    let mut balanced = m.clone();
    let scaling = balance(&mut balanced);
    let (hess, q) = hessenberg(&balanced);
    let mut eigenvalues = hqr(hess.clone())?;
    eigenvalues.sort_by(complex_order);

    let groups = cluster_eigenvalues(&eigenvalues, T::lit(tol.cluster_tol));
    let mut cluster_of = vec![0; n];
    for (c, g) in groups.iter().enumerate() {
        for &i in g {
            cluster_of[i] = c;
        }
    }

    let zero = Complex::new(T::zero(), T::zero());
    let mut eigenvectors = vec![vec![zero; n]; n];
    let mut done = vec![false; groups.len()];
    let hnorm = hess.frobenius_norm();
    let to_original = |w: &[Complex<T>]| -> Vec<Complex<T>> {
        let mut x = vec![zero; n];
        for i in 0..n {
            let mut s = zero;
            for k in 0..n {
                s += w[k] * q[(i, k)];
            }
            x[i] = s * scaling[i];
        }
        normalize_phase(&mut x);
        x
    };

    let mut self_conj = vec![false; groups.len()];
    let mut means = vec![zero; groups.len()];
    for (c, g) in groups.iter().enumerate() {
        let mean = g.iter().fold(zero, |s, &i| s + eigenvalues[i]) / T::from_count(g.len());
        means[c] = mean;
        self_conj[c] =
            mean.im.abs() <= T::lit(tol.cluster_tol) * (T::one() + mean.norm()) || g.len() == 1 && eigenvalues[g[0]].im == T::zero();
    }

    for c in 0..groups.len() {
        if done[c] {
            continue;
        }
        let g = &groups[c];
        // Each member is shifted by its own eigenvalue, so close but distinct
        // eigenvalues in one cluster still receive their own eigenvectors.
        let lus: Vec<HessenbergLu<T>> = g
            .iter()
            .map(|&i| {
                let mut shift = eigenvalues[i];
                if self_conj[c] {
                    shift.im = T::zero();
                }
                HessenbergLu::new(&hess, shift, hnorm)
            })
            .collect();
        let shifted_vectors = inverse_iteration(&lus);
        for (t, w) in shifted_vectors.iter().enumerate() {
            eigenvectors[g[t]] = to_original(w);
        }
        done[c] = true;

        if !self_conj[c] {
            // Conjugate partner cluster receives conjugate vectors.
            if let Some(pc) = mirror_cluster(&groups, &eigenvalues, c) {
                if !done[pc] && groups[pc].len() == g.len() {
                    let mut used = vec![false; g.len()];
                    for &pi in &groups[pc] {
                        let target = eigenvalues[pi].conj();
                        let pick = (0..g.len())
                            .filter(|&t| !used[t])
                            .min_by(|&a, &b| {
                                let da = (eigenvalues[g[a]] - target).norm();
                                let db = (eigenvalues[g[b]] - target).norm();
                                da.partial_cmp(&db).unwrap_or(Ordering::Equal)
                            })
                            .unwrap_or(0);
                        used[pick] = true;
                        eigenvectors[pi] = eigenvectors[g[pick]].iter().map(|z| z.conj()).collect();
                    }
                    done[pc] = true;
                }
            }
        }
    }

    let rank_tol = T::lit(tol.rank_tol);
    let clusters: Vec<EigenCluster<T>> = groups
        .iter()
        .enumerate()
        .map(|(c, g)| {
            let vectors: Vec<&Vec<Complex<T>>> = g.iter().map(|&i| &eigenvectors[i]).collect();
            let basis = orthonormal_span(&vectors, rank_tol);
            EigenCluster {
                members: g.clone(),
                mean: means[c],
                self_conjugate: self_conj[c],
                geometric_multiplicity: basis.len(),
                basis,
            }
        })
        .collect();

    let residual_norms = (0..n)
        .map(|i| {
            let v = &eigenvectors[i];
            let mv = m.mul_cvec(v);
            let r: Vec<Complex<T>> = mv.iter().zip(v).map(|(a, b)| a - b * eigenvalues[i]).collect();
            cnorm2(&r) / fro
        })
        .collect();

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        residual_norms,
        clusters,
        cluster_of,
        frobenius_norm: fro,
    })
}

fn zero_matrix_decomposition<T: Real>(n: usize) -> EigenDecomposition<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let eigenvectors: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { one } else { zero }).collect())
        .collect();
    let clusters = if n == 0 {
        Vec::new()
    } else {
        vec![EigenCluster {
            members: (0..n).collect(),
            mean: zero,
            self_conjugate: true,
            basis: eigenvectors.clone(),
            geometric_multiplicity: n,
        }]
    };
    EigenDecomposition {
        eigenvalues: vec![zero; n],
        eigenvectors,
        residual_norms: vec![T::zero(); n],
        clusters,
        cluster_of: vec![0; n],
        frobenius_norm: T::zero(),
    }
}

fn complex_order<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re
        .partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Single-linkage grouping: `λ_i` and `λ_j` are linked when
/// `|λ_i − λ_j| ≤ tol·(1 + max(|λ_i|, |λ_j|))`.
pub fn cluster_eigenvalues<T: Real>(values: &[Complex<T>], tol: T) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = T::one() + values[i].norm().max(values[j].norm());
            if (values[i] - values[j]).norm() <= tol * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn mirror_cluster<T: Real>(groups: &[Vec<usize>], values: &[Complex<T>], c: usize) -> Option<usize> {
    let target = values[groups[c][0]].conj();
    let idx = values.iter().position(|&z| z == target)?;
    groups.iter().position(|g| g.contains(&idx))
}

/// Scales `v` to unit 2-norm and rotates its largest-magnitude entry onto the
/// positive real axis.
pub fn normalize_phase<T: Real>(v: &mut [Complex<T>]) {
    let nrm = cnorm2(v);
    if nrm == T::zero() {
        return;
    }
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (T::one() + T::lit(1e-12)) {
            best_abs = a;
            best = i;
        }
    }
    let phase = v[best].conj() / v[best].norm();
    for z in v.iter_mut() {
        *z = *z * phase / nrm;
    }
    v[best].im = T::zero();
}

/// Orthonormal basis of span(vectors) by modified Gram–Schmidt with column
/// pivoting; directions whose residual falls below `rank_tol` are dropped.
pub fn orthonormal_span<T: Real>(vectors: &[&Vec<Complex<T>>], rank_tol: T) -> Vec<Vec<Complex<T>>> {
    let mut work: Vec<Vec<Complex<T>>> = vectors
        .iter()
        .map(|v| {
            let nrm = cnorm2(v);
            v.iter().map(|z| z / nrm).collect()
        })
        .collect();
    let mut basis: Vec<Vec<Complex<T>>> = Vec::new();
    let mut remaining: Vec<usize> = (0..work.len()).collect();
    while !remaining.is_empty() {
        let (pos, best_norm) = remaining
            .iter()
            .enumerate()
            .map(|(p, &i)| (p, cnorm2(&work[i])))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .unwrap();
        if !(best_norm > rank_tol) {
            break;
        }
        let idx = remaining.swap_remove(pos);
        let mut b: Vec<Complex<T>> = work[idx].iter().map(|z| z / best_norm).collect();
        // Re-orthogonalize once against the basis for stability.
        for q in &basis {
            let h = cdot(&b, q);
            for (bi, qi) in b.iter_mut().zip(q) {
                *bi -= qi * h;
            }
        }
        let nb = cnorm2(&b);
        b.iter_mut().for_each(|z| *z = *z / nb);
        for &i in &remaining {
            let h = cdot(&work[i], &b);
            for (wi, bi) in work[i].iter_mut().zip(&b) {
                *wi -= bi * h;
            }
        }
        basis.push(b);
    }
    basis
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable; returns the scaling `d` with `B = D⁻¹ M D`.
fn balance<T: Real>(a: &mut DenseMatrix<T>) -> Vec<T> {
    let n = a.rows();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut scale = vec![T::one(); n];
    let mut sweeps = 0;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                converged = false;
                scale[i] *= f;
                let ginv = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        sweeps += 1;
        if converged || sweeps > 100 {
            break;
        }
    }
    scale
}

/// Householder reduction `H = Qᵀ B Q` to upper Hessenberg form.
fn hessenberg<T: Real>(b: &DenseMatrix<T>) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = b.rows();
    let mut h = b.clone();
    let mut q = DenseMatrix::identity(n);
    let mut v = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let scale = ((k + 1)..n).fold(T::zero(), |s, i| s + h[(i, k)].abs());
        if scale == T::zero() {
            continue;
        }
        let mut alpha2 = T::zero();
        for i in (k + 1)..n {
            v[i] = h[(i, k)] / scale;
            alpha2 += v[i] * v[i];
        }
        let mut alpha = alpha2.sqrt();
        if v[k + 1] > T::zero() {
            alpha = -alpha;
        }
        v[k + 1] -= alpha;
        let vnorm2: T = ((k + 1)..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let beta = T::lit(2.0) / vnorm2;
        // H ← (I − β v vᵀ) H
        for j in 0..n {
            let mut s = T::zero();
            for i in (k + 1)..n {
                s += v[i] * h[(i, j)];
            }
            s *= beta;
            for i in (k + 1)..n {
                let upd = s * v[i];
                h[(i, j)] -= upd;
            }
        }
        // H ← H (I − β v vᵀ), Q ← Q (I − β v vᵀ)
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = T::zero();
                for j in (k + 1)..n {
                    s += mat[(i, j)] * v[j];
                }
                s *= beta;
                for j in (k + 1)..n {
                    let upd = s * v[j];
                    mat[(i, j)] -= upd;
                }
            }
        }
        h[(k + 1, k)] = alpha * scale;
        for i in (k + 2)..n {
            h[(i, k)] = T::zero();
        }
    }
    (h, q)
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration with Wilkinson and ad hoc exceptional shifts.
fn hqr<T: Real>(mut h: DenseMatrix<T>) -> Result<Vec<Complex<T>>, LinalgError> {
    let nn = h.rows();
    let zero = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut wr = vec![zero; nn];
    let mut wi = vec![zero; nn];
    let max_total = 40 * nn;
    let mut total = 0usize;

    let mut norm = zero;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut exshift = zero;
    let mut en = nn - 1;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    loop {
        // Look for a single small subdiagonal element.
        let mut l = en;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == zero {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == en {
            // One root.
            wr[en] = h[(en, en)] + exshift;
            wi[en] = zero;
            iter = 0;
            if en == 0 {
                break;
            }
            en -= 1;
        } else if l + 1 == en {
            // Two roots.
            w = h[(en, en - 1)] * h[(en - 1, en)];
            p = (h[(en - 1, en - 1)] - h[(en, en)]) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(en, en)] + exshift;
            if q >= zero {
                z = if p >= zero { p + z } else { p - z };
                wr[en - 1] = x + z;
                wr[en] = wr[en - 1];
                if z != zero {
                    wr[en] = x - w / z;
                }
                wi[en - 1] = zero;
                wi[en] = zero;
            } else {
                wr[en - 1] = x + p;
                wr[en] = x + p;
                wi[en - 1] = z;
                wi[en] = -z;
            }
            iter = 0;
            if en < 2 {
                break;
            }
            en -= 2;
        } else {
            total += 1;
            if total > max_total {
                return Err(LinalgError::BlockNoConvergence { stuck_block: en });
            }
            x = h[(en, en)];
            y = h[(en - 1, en - 1)];
            w = h[(en, en - 1)] * h[(en - 1, en)];

            if iter == 10 {
                exshift += x;
                for i in 0..=en {
                    h[(i, i)] -= x;
                }
                s = h[(en, en - 1)].abs() + h[(en - 1, en - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > zero {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in 0..=en {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut m = en - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs = eps
                    * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=en {
                h[(i, i - 2)] = zero;
                if i > m + 2 {
                    h[(i, i - 3)] = zero;
                }
            }

            // Double QR step on rows l..=en and columns m..=en.
            for k in m..en {
                let notlast = k != en - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { zero };
                    x = p.abs() + q.abs() + r.abs();
                    if x == zero {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                } else {
                    x = zero;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < zero {
                    s = -s;
                }
                if s != zero {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..=en {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in l..=en.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex::new(re, im))
        .collect())
}

/// LU factorization of `H − μI` for upper Hessenberg `H` with adjacent-row
/// pivoting. Zero pivots are replaced by `ε·‖H‖_F`, the standard device that
/// keeps inverse iteration well defined at an exact eigenvalue.
struct HessenbergLu<T> {
    u: Vec<Vec<Complex<T>>>,
    multipliers: Vec<Complex<T>>,
    swapped: Vec<bool>,
}

impl<T: Real> HessenbergLu<T> {
    fn new(h: &DenseMatrix<T>, shift: Complex<T>, hnorm: T) -> Self {
        let n = h.rows();
        let zero = Complex::new(T::zero(), T::zero());
        let mut a: Vec<Vec<Complex<T>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = Complex::new(h[(i, j)], T::zero());
                        if i == j {
                            v - shift
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let tiny = T::epsilon() * hnorm.max(T::min_positive_value());
        let mut multipliers = vec![zero; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            if a[k + 1][k].norm() > a[k][k].norm() {
                a.swap(k, k + 1);
                swapped[k] = true;
            }
            if a[k][k].norm() <= tiny {
                a[k][k] = Complex::new(tiny, T::zero());
            }
            let f = a[k + 1][k] / a[k][k];
            multipliers[k] = f;
            a[k + 1][k] = zero;
            if f != zero {
                let (top, bottom) = a.split_at_mut(k + 1);
                let (rk, rk1) = (&top[k], &mut bottom[0]);
                for j in (k + 1)..n {
                    rk1[j] -= f * rk[j];
                }
            }
        }
        if n > 0 && a[n - 1][n - 1].norm() <= tiny {
            a[n - 1][n - 1] = Complex::new(tiny, T::zero());
        }
        Self {
            u: a,
            multipliers,
            swapped,
        }
    }

    fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = b.len();
        let mut x = b.to_vec();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                x.swap(k, k + 1);
            }
            let xk = x[k];
            x[k + 1] -= self.multipliers[k] * xk;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.u[i][j] * x[j];
            }
            x[i] = s / self.u[i][i];
        }
        x
    }
}

// Inverse iteration for `count` eigenvectors sharing one shift. Later vectors
// are kept orthogonal to earlier ones during the first refinements, followed
// by one unprojected step that pulls each back onto an eigenvector.
fn inverse_iteration<T: Real>(lus: &[HessenbergLu<T>]) -> Vec<Vec<Complex<T>>> {
    const REFINEMENTS: usize = 5;
    let n = lus.first().map_or(0, |lu| lu.u.len());
    let mut ortho: Vec<Vec<Complex<T>>> = Vec::new();
    let mut out = Vec::with_capacity(lus.len());
    for (t, lu) in lus.iter().enumerate() {
        let mut v = start_vector::<T>(n, t);
        for step in 0..REFINEMENTS {
            let mut w = lu.solve(&v);
            if !w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                w = start_vector(n, t + 17 * (step + 1));
            }
            if step + 1 < REFINEMENTS {
                for _ in 0..2 {
                    for q in &ortho {
                        let h = cdot(&w, q);
                        for (wi, qi) in w.iter_mut().zip(q) {
                            *wi -= qi * h;
                        }
                    }
                }
            }
            let nrm = cnorm2(&w);
            if nrm == T::zero() {
                break;
            }
            v = w.iter().map(|z| z / nrm).collect();
        }
        let mut o = v.clone();
        for q in &ortho {
            let h = cdot(&o, q);
            for (oi, qi) in o.iter_mut().zip(q) {
                *oi -= qi * h;
            }
        }
        let on = cnorm2(&o);
        if on > T::lit(1e-8) {
            ortho.push(o.iter().map(|z| z / on).collect());
        }
        out.push(v);
    }
    out
}

// Deterministic, generic starting vector for inverse iteration.
fn start_vector<T: Real>(n: usize, seed: usize) -> Vec<Complex<T>> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ (seed as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            let u = ((state >> 11) as f64) / ((1u64 << 53) as f64);
            Complex::new(T::lit(0.5 + u), T::zero())
        })
        .collect()
}
