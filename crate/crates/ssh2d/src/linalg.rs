//! Dense complex Hermitian eigensolver.
//!
//! Householder reduction to a Hermitian tridiagonal matrix, a diagonal phase
//! transform that makes the tridiagonal real, then implicit-shift QL with
//! eigenvector accumulation. Eigenvalues come back ascending; eigenvectors
//! are gauge fixed so that repeated runs and degenerate subspaces give
//! identical output.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Hermiticity tolerance used on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Builds from a full row-major array, checking Hermiticity.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Invalid(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let m = HermitianMatrix { dim, data };
        let residual = m.hermiticity_residual();
        if residual > HERMITIAN_TOL * m.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        let data = (0..dim * dim).map(|idx| f(idx / dim, idx % dim)).collect();
        Self::from_rows(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    /// Adds `value` at `(i, j)` and its conjugate at `(j, i)`. On the
    /// diagonal only the real part `2 Re value` is added, matching `t + h.c.`.
    pub fn add_hopping(&mut self, i: usize, j: usize, value: C64) {
        let d = self.dim;
        if i == j {
            self.data[i * d + i] += C64::new(2.0 * value.re, 0.0);
        } else {
            self.data[i * d + j] += value;
            self.data[j * d + i] += value.conj();
        }
    }

    pub fn add_onsite(&mut self, i: usize, energy: f64) {
        self.data[i * self.dim + i] += C64::new(energy, 0.0);
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += (self.data[i * d + j] - self.data[j * d + i].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.data[i * d..(i + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn rows(&self) -> &[C64] {
        &self.data
    }
}

/// Full spectrum: ascending eigenvalues with matching orthonormal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSet {
    pub values: Vec<f64>,
    /// `vectors[j]` belongs to `values[j]`.
    pub vectors: Vec<Vec<C64>>,
}

impl EigenSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `||H V - V diag(E)||_F`.
    pub fn reconstruction_residual(&self, h: &HermitianMatrix) -> f64 {
        let mut s = 0.0;
        for (e, v) in self.values.iter().zip(&self.vectors) {
            let hv = h.matvec(v);
            s += hv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>();
        }
        s.sqrt()
    }

    /// `||V^dagger V - I||_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.vectors.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: C64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                s += (dot - target).norm_sqr();
            }
        }
        s.sqrt()
    }
}

pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenSet> {
    let n = h.dim();
    if n == 0 {
        return Ok(EigenSet {
            values: vec![],
            vectors: vec![],
        });
    }
    let (diag, sub, q) = tridiagonalize(h);

    // Phases that make the subdiagonal real and nonnegative.
    let mut phase = vec![C64::new(1.0, 0.0); n];
    let mut off = vec![0.0; n];
    for i in 0..n - 1 {
        let r = sub[i].norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 { phase[i] * sub[i] / r } else { phase[i] };
    }

    let mut values = diag;
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut values, &mut off, &mut z, n)?;

    // eigenvectors of H: columns of Q D Z
    let mut qd = q;
    for row in 0..n {
        for col in 0..n {
            qd[row * n + col] *= phase[col];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted_values: Vec<f64> = order.iter().map(|&j| values[j]).collect();
    let mut vectors: Vec<Vec<C64>> = order
        .iter()
        .map(|&j| {
            (0..n)
                .map(|row| {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..n {
                        acc += qd[row * n + t] * z[t * n + j];
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let scale = sorted_values
        .iter()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted_values[end] - sorted_values[end - 1] <= 1e-10 * scale {
            end += 1;
        }
        canonicalize_subspace(&mut vectors[start..end]);
        start = end;
    }

    Ok(EigenSet {
        values: sorted_values,
        vectors,
    })
}

/// Householder reduction `H = Q T Q^dagger`; returns (diag T, subdiag T, Q row-major).
fn tridiagonalize(h: &HermitianMatrix) -> (Vec<f64>, Vec<C64>, Vec<C64>) {
    let n = h.dim();
    let zero = C64::new(0.0, 0.0);
    let mut a = h.rows().to_vec();
    let mut q = vec![zero; n * n];
    for i in 0..n {
        q[i * n + i] = C64::new(1.0, 0.0);
    }
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n)
            .map(|i| a[i * n + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let x0 = a[(k + 1) * n + k];
        let tail: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if norm == 0.0 || tail == 0.0 {
            continue;
        }
        let unit = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -unit * norm;
        for vi in v.iter_mut() {
            *vi = zero;
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[i * n + k];
        }
        let vnorm: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v[k + 1..].iter_mut() {
            *vi /= vnorm;
        }
        // p = A v over the active block
        for i in k..n {
            let mut acc = zero;
            for j in k + 1..n {
                acc += a[i * n + j] * v[j];
            }
            p[i] = acc;
        }
        let kappa: C64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        // w = p - kappa v ; A <- A - 2 v w^dagger - 2 w v^dagger
        for i in k..n {
            p[i] -= kappa * v[i];
        }
        for i in k..n {
            for j in k..n {
                a[i * n + j] -= 2.0 * (v[i] * p[j].conj() + p[i] * v[j].conj());
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }
        // Q <- Q (I - 2 v v^dagger)
        for row in 0..n {
            let mut acc = zero;
            for j in k + 1..n {
                acc += q[row * n + j] * v[j];
            }
            for j in k + 1..n {
                q[row * n + j] -= 2.0 * acc * v[j].conj();
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    let sub = (0..n)
        .map(|i| if i + 1 < n { a[(i + 1) * n + i] } else { zero })
        .collect();
    (diag, sub, q)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix (EISPACK tql2).
/// `e[i]` couples `d[i]` and `d[i+1]`; `z` (row-major) accumulates rotations.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;

    let max_iter = 64 * n;
    let mut iterations = 0usize;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::NoConvergence {
                        iterations: max_iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk1 = z[k * n + i + 1];
                        let zk = z[k * n + i];
                        z[k * n + i + 1] = s * zk + c * zk1;
                        z[k * n + i] = c * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Replaces an orthonormal basis of a subspace by a canonical one that
/// depends only on the subspace: greedy projections of unit vectors, pivot
/// on the largest remaining weight (lowest index on ties).
fn canonicalize_subspace(vectors: &mut [Vec<C64>]) {
    let m = vectors.len();
    if m == 0 {
        return;
    }
    let n = vectors[0].len();
    let basis: Vec<Vec<C64>> = vectors.to_vec();
    let mut chosen: Vec<Vec<C64>> = Vec::with_capacity(m);
    for _ in 0..m {
        // weight of e_i in the part of the subspace not yet spanned
        let mut best = (0usize, -1.0f64);
        for i in 0..n {
            let mut w: f64 = basis.iter().map(|b| b[i].norm_sqr()).sum();
            w -= chosen.iter().map(|c| c[i].norm_sqr()).sum::<f64>();
            if w > best.1 + 1e-14 {
                best = (i, w);
            }
        }
        let i = best.0;
        // P e_i minus components along already chosen vectors
        let mut w: Vec<C64> = (0..n)
            .map(|row| basis.iter().map(|b| b[row] * b[i].conj()).sum())
            .collect();
        for c in &chosen {
            let coeff = c[i].conj();
            for (wr, cr) in w.iter_mut().zip(c) {
                *wr -= cr * coeff;
            }
        }
        // one re-orthogonalization pass for stability
        for c in &chosen {
            let dot: C64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wr, cr) in w.iter_mut().zip(c) {
                *wr -= cr * dot;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let pivot = w[i];
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for wr in w.iter_mut() {
            *wr = *wr * phase / norm;
        }
        chosen.push(w);
    }
    for (v, c) in vectors.iter_mut().zip(chosen) {
        *v = c;
    }
}
