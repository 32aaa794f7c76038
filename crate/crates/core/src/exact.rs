//! Exact finite-`N` mutual information of a bisected ring.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_of_block, purity_upper_fn, spectral_trace, EntropyKind};
use crate::error::{Error, Result};
use crate::fit;
use crate::linalg::{
    finite_coeffs, infinite_coeffs, symmetric_eigen, symmetric_eigenvalues, toeplitz_block,
    ToeplitzCoeffs,
};
use crate::model::ThermalSymbol;
use crate::tail::PoleExpansion;

/// Largest ring accepted by [`mutual_information_exact`].
pub const DEFAULT_MAX_SITES: usize = 4096;

/// Ring of `n` sites split into `A = {0, .., l-1}` and `B = {l, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingGeometry {
    pub n: usize,
    pub l: usize,
}

impl RingGeometry {
    /// `l = ceil(q n)`.
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid(format!("q must lie in (0, 1), got {q}")));
        }
        // guard against q * n landing a hair above an integer
        let l = (q * n as f64 - 1e-9).ceil().max(0.0) as usize;
        Self::with_block(n, l)
    }

    pub fn with_block(n: usize, l: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("N must be even, got {n}")));
        }
        if l == 0 || l >= n {
            return Err(Error::invalid(format!(
                "block size {l} must lie strictly between 0 and N = {n}"
            )));
        }
        Ok(Self { n, l })
    }

    pub fn complement(self) -> Self {
        Self {
            n: self.n,
            l: self.n - self.l,
        }
    }
}

/// Entropies (bits) of `A`, `B`, the whole ring, and `I = S_A + S_B - S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MIResult {
    pub s_a: f64,
    pub s_b: f64,
    pub s_total: f64,
    pub mi: f64,
    pub n: usize,
    pub l: usize,
    pub beta: f64,
    pub alpha: f64,
}

fn ring_spectrum(symbol: &ThermalSymbol, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| symbol.eval(TAU * j as f64 / n as f64))
        .collect()
}

pub fn mutual_information_exact(symbol: &ThermalSymbol, geom: RingGeometry) -> Result<MIResult> {
    mutual_information_exact_capped(symbol, geom, DEFAULT_MAX_SITES)
}

/// As [`mutual_information_exact`] with an explicit ring-size cap.
pub fn mutual_information_exact_capped(
    symbol: &ThermalSymbol,
    geom: RingGeometry,
    max_sites: usize,
) -> Result<MIResult> {
    if geom.n > max_sites {
        return Err(Error::invalid(format!(
            "N = {} exceeds the configured cap {max_sites}",
            geom.n
        )));
    }
    let kind = EntropyKind::new(symbol.alpha())?;
    let coeffs = finite_coeffs(symbol, geom.n)?;
    let s_a = entropy_of_block(&toeplitz_block(&coeffs, geom.l)?, kind)?;
    let s_b = entropy_of_block(&toeplitz_block(&coeffs, geom.n - geom.l)?, kind)?;
    // The full covariance matrix is circulant: its spectrum is the sampled symbol.
    let s_total = spectral_trace(&ring_spectrum(symbol, geom.n), |x| kind.value(x))?;
    Ok(MIResult {
        s_a,
        s_b,
        s_total,
        mi: s_a + s_b - s_total,
        n: geom.n,
        l: geom.l,
        beta: symbol.beta(),
        alpha: symbol.alpha(),
    })
}

/// Purity bounds on the von-Neumann mutual information of the ring,
/// with the full-ring traces taken spectrally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn ring_purity_bounds(symbol: &ThermalSymbol, geom: RingGeometry) -> Result<RingBounds> {
    let coeffs = finite_coeffs(symbol, geom.n)?;
    ring_purity_bounds_from(&coeffs, symbol, geom)
}

fn ring_purity_bounds_from(
    coeffs: &ToeplitzCoeffs,
    symbol: &ThermalSymbol,
    geom: RingGeometry,
) -> Result<RingBounds> {
    let (n, l) = (geom.n as i64, geom.l as i64);
    // sum over i in A, j in B of x_{i-j}^2, grouped by offset
    let mut lower = 0.0;
    for i in 0..l {
        for j in l..n {
            lower += coeffs.get(i - j).powi(2);
        }
    }
    let tr_u_block = |size: usize| -> Result<f64> {
        spectral_trace(
            &symmetric_eigenvalues(&toeplitz_block(coeffs, size)?)?,
            purity_upper_fn,
        )
    };
    let tr_u_total = spectral_trace(&ring_spectrum(symbol, geom.n), purity_upper_fn)?;
    let upper = tr_u_block(geom.l)? + tr_u_block(geom.n - geom.l)? - tr_u_total;
    Ok(RingBounds { lower, upper })
}

/// Exact von-Neumann mutual information together with its purity bounds,
/// sharing one coefficient table.
pub fn exact_with_bounds(
    symbol: &ThermalSymbol,
    geom: RingGeometry,
) -> Result<(MIResult, RingBounds)> {
    let coeffs = finite_coeffs(symbol, geom.n)?;
    let vn = ThermalSymbol::new(
        symbol.model.clone(),
        crate::model::ThermalParams::new(symbol.beta(), 1.0)?,
    );
    let mi = mutual_information_exact(&vn, geom)?;
    Ok((mi, ring_purity_bounds_from(&coeffs, symbol, geom)?))
}

/// Finite-size error of the block entropy at one ring size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeErrorRow {
    pub n: usize,
    /// `e_A(N) = |tr s(X^(N)|_A) - tr s(X|_A)|`.
    pub e_a: f64,
    /// Round-off scale of `e_a`: [`ERROR_FLOOR`] times the sum of the
    /// magnitudes of the terms that make it up.
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeErrorScan {
    pub rows: Vec<SizeErrorRow>,
    /// Fitted exponential decay rate of `e_A` in `N`; `None` when fewer than
    /// two rows are resolved.
    pub rate: Option<f64>,
}

/// Ten machine epsilons; values within this relative distance of their
/// round-off scale carry no information.
pub const ERROR_FLOOR: f64 = 10.0 * f64::EPSILON;

/// `e_A(N)` for each ring size, with `|A| = ceil(q N)`.
///
/// The ring block differs from the continuum block by the aliasing matrix
/// `E_{ab} = Σ_{m != 0} x_{a-b+mN}`, whose entries are exponentially small
/// in `N`. Subtracting two block entropies would bury that difference under
/// round-off of the entropies themselves, so `e_A` is evaluated as
/// `|tr(s'(X|_A) E)|`, exact up to `O(|E|^2)`, with the far coefficients
/// taken from the pole expansion of the symbol. This resolves `e_A` to full
/// relative precision far below machine epsilon.
pub fn finite_size_error_scan(
    symbol: &ThermalSymbol,
    q: f64,
    sizes: &[usize],
) -> Result<SizeErrorScan> {
    let kind = EntropyKind::new(symbol.alpha())?;
    let geoms = sizes
        .iter()
        .map(|&n| RingGeometry::new(n, q))
        .collect::<Result<Vec<_>>>()?;
    let l_max = geoms.iter().map(|g| g.l).max().unwrap_or(1);
    let j_min = geoms.iter().map(|g| g.n - g.l + 1).min().unwrap_or(1);
    let continuum = infinite_coeffs(symbol, l_max, 1e-15)?;
    let poles = PoleExpansion::new(symbol, j_min, 1e-18)?;
    let rows = crate::par::map_ordered(&geoms, |g| first_order_error(&continuum, &poles, kind, *g))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rate = fit_decay_rate(&rows);
    Ok(SizeErrorScan { rows, rate })
}

/// Largest double below one; keeps `s'` finite on saturated eigenvalues.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn first_order_error(
    continuum: &ToeplitzCoeffs,
    poles: &PoleExpansion,
    kind: EntropyKind,
    g: RingGeometry,
) -> Result<SizeErrorRow> {
    let (n, l) = (g.n, g.l);
    // e_k = Σ_{m >= 1} (x_{mN + k} + x_{mN - k}) for 0 <= k < l
    let alias: Vec<f64> = (0..l)
        .map(|k| {
            let mut total = 0.0;
            for m in 1.. {
                let term = poles.coeff(m * n + k) + poles.coeff(m * n - k);
                total += term;
                if term.abs() <= 1e-18 * total.abs() || m >= 64 {
                    break;
                }
            }
            total
        })
        .collect();
    let eig = symmetric_eigen(&toeplitz_block(continuum, l)?)?;
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    for (mu, v) in eig.values.iter().zip(&eig.vectors) {
        let ds = kind.deriv1(mu.clamp(-BELOW_ONE, BELOW_ONE));
        // v^T E v
        let mut quad = 0.0;
        let mut quad_abs = 0.0;
        for a in 0..l {
            for b in 0..l {
                let t = v[a] * v[b] * alias[a.abs_diff(b)];
                quad += t;
                quad_abs += t.abs();
            }
        }
        sum += ds * quad;
        magnitude += (ds * quad_abs).abs();
    }
    Ok(SizeErrorRow {
        n,
        e_a: sum.abs(),
        resolution: ERROR_FLOOR * magnitude,
    })
}

/// `e_A(N)` as the plain difference of the two block entropies. Only
/// meaningful while `e_A` is well above round-off of the entropies.
pub fn finite_size_error_direct(symbol: &ThermalSymbol, geom: RingGeometry) -> Result<f64> {
    let kind = EntropyKind::new(symbol.alpha())?;
    let ring = finite_coeffs(symbol, geom.n)?;
    let continuum = infinite_coeffs(symbol, geom.l, 1e-15)?;
    let s_ring = entropy_of_block(&toeplitz_block(&ring, geom.l)?, kind)?;
    let s_inf = entropy_of_block(&toeplitz_block(&continuum, geom.l)?, kind)?;
    Ok((s_ring - s_inf).abs())
}

/// Least-squares rate `kappa` in `e ~ C exp(-kappa N)` over the rows whose
/// value clears its round-off resolution.
pub fn fit_decay_rate(rows: &[SizeErrorRow]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.e_a > r.resolution && r.e_a > 0.0)
        .map(|r| (r.n as f64, r.e_a.ln()))
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    Some(-fit::ols(&xs, &ys).slope)
}
