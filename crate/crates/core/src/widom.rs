//! Large-`N` mutual information as a regularized periodic double integral.
//!
//! For a smooth symbol `lambda` the boundary term of the Szegő expansion
//! gives
//!
//! ```text
//! I = 1/(4 pi^2) ∬ D(θ, φ) R(θ, φ) dθ dφ,
//! D = (s(λ(θ)) - s(λ(φ))) / (λ(θ) - λ(φ)),
//! R = (λ'(φ) - λ'(θ)) / tan((φ - θ) / 2),
//! ```
//!
//! with `λ'` the derivative in the angle. Both factors flip sign under
//! `θ <-> φ`, so the integrand is symmetric; it is also smooth and
//! `2π`-periodic, which is what makes the rectangular rule converge
//! exponentially. The orientation of `R` above is the one for which the
//! diagonal limit `2 s'(λ) λ''` integrates to `-2 ∫ s''(λ) λ'^2 >= 0`.
//!
//! Nodes sit on two grids offset by half a cell, `θ_i = -π + i h` and
//! `φ_j = -π + (j + 1/2) h`, so `φ_j - θ_i` never vanishes and the
//! cotangent is tabulated once per offset `j - i`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::entropy::EntropyKind;
use crate::error::{Error, Result};
use crate::model::{normalize_angle, ThermalSymbol};
use crate::par::{map_range, pairwise_sum, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Points per axis of the first grid (even, at least 8).
    pub grid: usize,
    /// Absolute change between successive doublings accepted as converged.
    pub tol: f64,
    /// Below this `|λ(θ) - λ(φ)|`, measured in units of the distance of the
    /// pair from `±1`, the difference quotient is replaced by `s'`.
    pub lambda_match_eps: f64,
    /// Below this angular separation the cotangent factor uses `2 λ''`.
    pub angle_eps: f64,
    /// Largest grid per axis before giving up.
    pub max_grid: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            tol: 1e-10,
            lambda_match_eps: 1e-8,
            angle_eps: 1e-6,
            max_grid: 1 << 13,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 || !self.grid.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "grid must be an even integer of at least 8, got {}",
                self.grid
            )));
        }
        for (name, v) in [
            ("tol", self.tol),
            ("lambda_match_eps", self.lambda_match_eps),
            ("angle_eps", self.angle_eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_grid < self.grid {
            return Err(Error::invalid(format!(
                "max_grid {} is below the starting grid {}",
                self.max_grid, self.grid
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidomResult {
    /// Mutual information in bits.
    pub value: f64,
    pub grid_used: usize,
    /// Absolute change over the last grid doubling.
    pub est_error: f64,
}

/// Largest double below one; keeps `s'` finite where `λ` rounds to `±1`.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn entropy_kind(symbol: &ThermalSymbol) -> EntropyKind {
    EntropyKind::new(symbol.alpha()).expect("thermal parameters were validated")
}

/// Six-point Gauss-Legendre rule on `[-1, 1]`.
const GAUSS_NODES: [f64; 3] = [
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152,
];
const GAUSS_WEIGHTS: [f64; 3] = [
    0.467_913_934_572_691,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_4,
];

/// `D = (s(l1) - s(l2)) / (l1 - l2)` given `s1 = s(l1)`, `s2 = s(l2)`.
///
/// The plain quotient loses digits when `l1` and `l2` are close compared
/// with their distance to the poles of `s'` at `±1`. Pairs within
/// `eps` of each other on that scale use `s'` at the midpoint, and pairs
/// within a tenth of it average `s'` over the segment by Gauss-Legendre,
/// which is exact to round-off there.
#[inline]
fn difference_quotient(kind: EntropyKind, l1: f64, s1: f64, l2: f64, s2: f64, eps: f64) -> f64 {
    let dl = l1 - l2;
    let edge = 1.0 - l1.abs().max(l2.abs());
    let mid = 0.5 * (l1 + l2);
    if dl == 0.0 || dl.abs() < eps * edge {
        kind.deriv1(mid.clamp(-BELOW_ONE, BELOW_ONE))
    } else if dl.abs() < 0.1 * edge {
        let half = 0.5 * dl;
        GAUSS_NODES
            .iter()
            .zip(GAUSS_WEIGHTS)
            .map(|(t, w)| 0.5 * w * (kind.deriv1(mid + t * half) + kind.deriv1(mid - t * half)))
            .sum()
    } else {
        (s1 - s2) / dl
    }
}

/// Integrand `D(θ, φ) R(θ, φ)` with default regularization thresholds.
pub fn mi_integrand(symbol: &ThermalSymbol, kind: EntropyKind, theta: f64, phi: f64) -> f64 {
    mi_integrand_with(symbol, kind, theta, phi, &QuadratureConfig::default())
}

pub fn mi_integrand_with(
    symbol: &ThermalSymbol,
    kind: EntropyKind,
    theta: f64,
    phi: f64,
    cfg: &QuadratureConfig,
) -> f64 {
    let (lt, lp) = (symbol.eval(theta), symbol.eval(phi));
    let d = difference_quotient(
        kind,
        lt,
        kind.value(lt),
        lp,
        kind.value(lp),
        cfg.lambda_match_eps,
    );
    let delta = normalize_angle(phi - theta);
    let r = if delta.abs() < cfg.angle_eps {
        2.0 * symbol.deriv2(theta + 0.5 * delta)
    } else {
        (symbol.deriv1(phi) - symbol.deriv1(theta)) / (0.5 * delta).tan()
    };
    d * r
}

/// `K_n(φ) = Σ_{k=1}^{n} sin(kφ)` with default threshold.
pub fn kernel_k(n: usize, phi: f64) -> f64 {
    kernel_k_with(n, phi, QuadratureConfig::default().angle_eps)
}

/// Closed form `(cos(φ/2) - cos((n + 1/2) φ)) / (2 sin(φ/2))`, switching to
/// the direct sine sum when `φ` is within `angle_eps` of a multiple of `2π`.
pub fn kernel_k_with(n: usize, phi: f64, angle_eps: f64) -> f64 {
    let wrapped = normalize_angle(phi);
    if wrapped.abs() < angle_eps {
        return (1..=n).map(|k| (k as f64 * wrapped).sin()).sum();
    }
    let half = 0.5 * wrapped;
    (half.cos() - ((n as f64 + 0.5) * wrapped).cos()) / (2.0 * half.sin())
}

#[derive(Clone, Copy)]
enum Weight {
    Cotangent,
    Truncated(usize),
}

/// One rectangular-rule evaluation on an `n x n` offset grid.
fn rule(
    symbol: &ThermalSymbol,
    kind: EntropyKind,
    cfg: &QuadratureConfig,
    n: usize,
    weight: Weight,
) -> f64 {
    let h = 2.0 * PI / n as f64;
    let theta = |i: usize| -PI + i as f64 * h;
    let phi = |j: usize| -PI + (j as f64 + 0.5) * h;

    let lt: Vec<f64> = (0..n).map(|i| symbol.eval(theta(i))).collect();
    let lp: Vec<f64> = (0..n).map(|j| symbol.eval(phi(j))).collect();
    let dt: Vec<f64> = (0..n).map(|i| symbol.deriv1(theta(i))).collect();
    let dp: Vec<f64> = (0..n).map(|j| symbol.deriv1(phi(j))).collect();
    let st: Vec<f64> = lt.iter().map(|&x| kind.value(x)).collect();
    let sp: Vec<f64> = lp.iter().map(|&x| kind.value(x)).collect();

    // offset m = j - i (mod n) gives φ_j - θ_i = (m + 1/2) h (mod 2π)
    let offsets: Vec<f64> = (0..n)
        .map(|m| normalize_angle((m as f64 + 0.5) * h))
        .collect();
    let table: Vec<f64> = offsets
        .iter()
        .map(|&d| match weight {
            Weight::Cotangent => 1.0 / (0.5 * d).tan(),
            Weight::Truncated(k) => kernel_k_with(k, d, cfg.angle_eps),
        })
        .collect();
    let singular: Vec<bool> = offsets
        .iter()
        .map(|d| matches!(weight, Weight::Cotangent) && d.abs() < cfg.angle_eps)
        .collect();

    let eps = cfg.lambda_match_eps;
    let rows = map_range(n, |i| {
        let mut acc = CompensatedSum::default();
        for j in 0..n {
            let m = if j >= i { j - i } else { j + n - i };
            let d = difference_quotient(kind, lt[i], st[i], lp[j], sp[j], eps);
            let r = if singular[m] {
                2.0 * symbol.deriv2(theta(i) + 0.5 * offsets[m])
            } else {
                (dp[j] - dt[i]) * table[m]
            };
            acc.add(d * r);
        }
        acc.value()
    });
    let scale = match weight {
        Weight::Cotangent => 1.0,
        Weight::Truncated(_) => 2.0,
    };
    scale * pairwise_sum(&rows) / (n as f64 * n as f64)
}

fn converge(
    symbol: &ThermalSymbol,
    cfg: &QuadratureConfig,
    start: usize,
    weight: Weight,
) -> Result<WidomResult> {
    cfg.validate()?;
    let kind = entropy_kind(symbol);
    let mut n = start + start % 2;
    let mut prev = rule(symbol, kind, cfg, n, weight);
    let mut delta = f64::INFINITY;
    loop {
        let next = 2 * n;
        if next > cfg.max_grid {
            return Err(Error::QuadratureNotConverged {
                grid: next,
                ceiling: cfg.max_grid,
                delta,
            });
        }
        let value = rule(symbol, kind, cfg, next, weight);
        delta = (value - prev).abs();
        n = next;
        prev = value;
        if delta < cfg.tol {
            return Ok(WidomResult {
                value,
                grid_used: n,
                est_error: delta,
            });
        }
    }
}

fn beta_grid(symbol: &ThermalSymbol) -> usize {
    8 * symbol.beta().ceil() as usize
}

/// Asymptotic mutual information between a half-infinite block and its
/// complement, in bits, by grid doubling from `max(grid, 8 ceil(beta))`.
pub fn mutual_info_asymptotic(
    symbol: &ThermalSymbol,
    cfg: &QuadratureConfig,
) -> Result<WidomResult> {
    let start = cfg.grid.max(beta_grid(symbol));
    converge(symbol, cfg, start, Weight::Cotangent)
}

/// The same quantity with the cotangent replaced by the truncated sine
/// series `2 K_n(φ - θ)`:
/// `1/(2 pi^2) ∬ D(θ, φ) (λ'(φ) - λ'(θ)) K_n(φ - θ) dθ dφ`.
///
/// Convergence in `n_kernel` is slow and oscillatory because `K_n` only
/// tends to `cot/2` in the distributional sense; the closed double integral
/// is the practical route. The grid starts at `4 n_kernel` or more so the
/// trigonometric kernel is resolved.
pub fn mutual_info_kernel_truncated(
    symbol: &ThermalSymbol,
    n_kernel: usize,
    cfg: &QuadratureConfig,
) -> Result<WidomResult> {
    if n_kernel == 0 {
        return Err(Error::invalid("n_kernel must be at least 1"));
    }
    let start = cfg.grid.max(beta_grid(symbol)).max(4 * n_kernel);
    converge(symbol, cfg, start, Weight::Truncated(n_kernel))
}
