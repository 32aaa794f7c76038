//! Covariance blocks and a dense symmetric eigensolver.
//!
//! The eigensolver reduces to tridiagonal form with Householder reflections
//! and then runs implicit QL iterations with Wilkinson-type shifts.
//! Eigenvectors are accumulated only on request.

use std::f64::consts::TAU;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ThermalSymbol;

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on `i >= j` and mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    /// Row-major entries; rejected unless exactly symmetric.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Principal sub-matrix on the given (not necessarily sorted) sites.
    pub fn principal_block(&self, sites: &[usize]) -> Result<Self> {
        if let Some(&s) = sites.iter().find(|&&s| s >= self.dim) {
            return Err(Error::invalid(format!(
                "site {s} outside a {}-dimensional matrix",
                self.dim
            )));
        }
        Ok(Self::from_fn(sites.len(), |i, j| {
            self.get(sites[i], sites[j])
        }))
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[r]` is the eigenvector for `values[r]`.
    pub vectors: Vec<Vec<f64>>,
}

const QL_MAX_ITERATIONS: usize = 60;

pub fn symmetric_eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let (mut d, mut e, _) = tridiagonalize(m, false);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

pub fn symmetric_eigen(m: &SymmetricMatrix) -> Result<SymmetricEigen> {
    let n = m.dim();
    let (mut d, mut e, q) = tridiagonalize(m, true);
    let mut z = q.expect("accumulated reflector product");
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&r| d[r]).collect();
    let vectors = order
        .iter()
        .map(|&r| (0..n).map(|k| z[k * n + r]).collect())
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Householder reduction `A = Q T Q^T`; returns the diagonal, the
/// off-diagonal (`e[i]` couples `i` and `i + 1`, `e[n-1] = 0`) and
/// optionally `Q` row-major.
fn tridiagonalize(m: &SymmetricMatrix, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let n = m.dim();
    let mut a = m.data.clone();
    let mut e = vec![0.0; n];
    let mut q = want_q.then(|| SymmetricMatrix::identity(n).data);

    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let len = n - lo;
        let norm = (lo..n).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = a[lo * n + k];
        let beta = -norm.copysign(x0);
        for (t, i) in (lo..n).enumerate() {
            v[t] = a[i * n + k];
        }
        v[0] = x0 - beta;
        let vtv: f64 = v[..len].iter().map(|x| x * x).sum();
        let tau = 2.0 / vtv;
        e[k] = beta;

        // p = tau * S v on the trailing block S = a[lo.., lo..]
        for (t, i) in (lo..n).enumerate() {
            let row = &a[i * n + lo..i * n + n];
            p[t] = tau * row.iter().zip(&v[..len]).map(|(s, x)| s * x).sum::<f64>();
        }
        let kappa = 0.5
            * tau
            * p[..len]
                .iter()
                .zip(&v[..len])
                .map(|(x, y)| x * y)
                .sum::<f64>();
        for t in 0..len {
            p[t] -= kappa * v[t];
        }
        for (t, i) in (lo..n).enumerate() {
            let (vi, wi) = (v[t], p[t]);
            let row = &mut a[i * n + lo..i * n + n];
            for ((s, &vj), &wj) in row.iter_mut().zip(&v[..len]).zip(&p[..len]) {
                *s -= vi * wj + wi * vj;
            }
        }

        if let Some(q) = q.as_mut() {
            // Q <- Q H_k, H_k acting on columns lo..n
            for r in 0..n {
                let row = &mut q[r * n + lo..r * n + n];
                let dot = tau * row.iter().zip(&v[..len]).map(|(x, y)| x * y).sum::<f64>();
                for (x, &vj) in row.iter_mut().zip(&v[..len]) {
                    *x -= dot * vj;
                }
            }
        }
    }
    if n >= 2 {
        e[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    (d, e, q)
}

/// Implicit QL on a symmetric tridiagonal matrix. Rotations are applied to
/// the columns of `z` (row-major, `n x n`) when given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<f64>>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > QL_MAX_ITERATIONS {
                return Err(Error::EigenNoConvergence {
                    index: l,
                    iterations,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let zk = &mut z[k * n..k * n + n];
                        let f = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * f;
                        zk[i] = c * zk[i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Where a coefficient table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffSource {
    /// Discrete transform on a ring of `N` sites; indices are periodic mod `N`.
    FiniteRing(usize),
    /// Continuum Fourier coefficients of the symbol.
    Infinite,
}

/// Fourier coefficients `x_k`, `0 <= k <= k_max`, of an even symbol
/// (`x_{-k} = x_k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCoeffs {
    coeffs: Vec<f64>,
    source: CoeffSource,
}

impl ToeplitzCoeffs {
    pub fn new(coeffs: Vec<f64>, source: CoeffSource) -> Self {
        Self { coeffs, source }
    }

    pub fn source(&self) -> CoeffSource {
        self.source
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// `x_k` for any integer `k` in range (reduced mod `N` for ring data).
    pub fn get(&self, k: i64) -> f64 {
        match self.source {
            CoeffSource::FiniteRing(n) => self.coeffs[k.rem_euclid(n as i64) as usize],
            CoeffSource::Infinite => self.coeffs[k.unsigned_abs() as usize],
        }
    }
}

fn forward_dft(samples: &[f64], planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Ring coefficients `x_k^(N) = (1/N) sum_j lambda(2 pi j / N) e^{-2 pi i j k / N}`
/// for `0 <= k < N`.
pub fn finite_coeffs(symbol: &ThermalSymbol, n: usize) -> Result<ToeplitzCoeffs> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "N must be even and at least 2, got {n}"
        )));
    }
    let samples: Vec<f64> = (0..n)
        .map(|j| symbol.eval(TAU * j as f64 / n as f64))
        .collect();
    let spectrum = forward_dft(&samples, &mut FftPlanner::new());
    let residue = spectrum.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > 1e-10 {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(ToeplitzCoeffs::new(
        spectrum.iter().map(|c| c.re).collect(),
        CoeffSource::FiniteRing(n),
    ))
}

pub const DEFAULT_COEFF_CEILING: usize = 1 << 20;

/// Continuum coefficients `x_k = (1/2pi) ∫ lambda(phi) e^{-ik phi} dphi` for
/// `0 <= k <= k_max` by the periodic rectangular rule, doubling the grid until
/// every coefficient moves by less than `tol`.
pub fn infinite_coeffs(symbol: &ThermalSymbol, k_max: usize, tol: f64) -> Result<ToeplitzCoeffs> {
    infinite_coeffs_with_ceiling(symbol, k_max, tol, DEFAULT_COEFF_CEILING)
}

pub fn infinite_coeffs_with_ceiling(
    symbol: &ThermalSymbol,
    k_max: usize,
    tol: f64,
    ceiling: usize,
) -> Result<ToeplitzCoeffs> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut planner = FftPlanner::new();
    let mut n = (4 * (k_max + 1)).max(64).next_power_of_two();
    let mut samples: Vec<f64> = (0..n)
        .map(|j| symbol.eval(TAU * j as f64 / n as f64))
        .collect();
    let take = |spec: Vec<Complex64>| -> Vec<f64> { spec[..=k_max].iter().map(|c| c.re).collect() };
    let mut current = take(forward_dft(&samples, &mut planner));
    loop {
        let next_n = 2 * n;
        if next_n > ceiling {
            return Err(Error::QuadratureNotConverged {
                grid: next_n,
                ceiling,
                delta: f64::NAN,
            });
        }
        let mut refined = Vec::with_capacity(next_n);
        for (j, &s) in samples.iter().enumerate() {
            refined.push(s);
            refined.push(symbol.eval(TAU * (2 * j + 1) as f64 / next_n as f64));
        }
        let next = take(forward_dft(&refined, &mut planner));
        let delta = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        samples = refined;
        n = next_n;
        current = next;
        if delta < tol {
            return Ok(ToeplitzCoeffs::new(current, CoeffSource::Infinite));
        }
    }
}

/// `L x L` Töplitz block `M[i][j] = x_{i-j}` (indices mod `N` for ring data).
pub fn toeplitz_block(coeffs: &ToeplitzCoeffs, l: usize) -> Result<SymmetricMatrix> {
    if l == 0 {
        return Err(Error::invalid("block size must be positive"));
    }
    let limit = match coeffs.source {
        CoeffSource::FiniteRing(n) => n,
        CoeffSource::Infinite => coeffs.k_max() + 1,
    };
    if l > limit {
        return Err(Error::invalid(format!(
            "block size {l} exceeds the available {limit} coefficients"
        )));
    }
    Ok(SymmetricMatrix::from_fn(l, |i, j| {
        coeffs.get(i as i64 - j as i64)
    }))
}
