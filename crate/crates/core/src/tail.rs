//! Far Fourier coefficients of the thermal symbol from its poles.
//!
//! In `z = e^{iθ}` the symbol is `λ(z) = -tanh(β ε(z) / 2)` with `ε` a
//! Laurent polynomial, so `λ` is meromorphic with simple poles where
//! `ε(z) = iπ(2n + 1) / β`. Pushing the coefficient contour outwards gives,
//! for `j >= 1`,
//!
//! ```text
//! x_j = (2 / β) Σ_{|z_p| > 1} z_p^{-j-1} / ε'(z_p),
//! ```
//!
//! a sum dominated by the few poles nearest the unit circle. Unlike a
//! discrete transform, this keeps full relative accuracy for coefficients far
//! below machine epsilon, which is what the aliasing error of a finite ring
//! is made of.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ThermalSymbol;

/// Pole families beyond this many are never summed.
const MAX_FAMILIES: usize = 200_000;

#[derive(Debug, Clone)]
pub struct PoleExpansion {
    /// `(z_p, 2 / (β ε'(z_p)))` for the poles in the family `Im c > 0`; the
    /// conjugate family is accounted for by taking twice the real part.
    poles: Vec<(Complex64, Complex64)>,
}

impl PoleExpansion {
    /// Collects enough poles to evaluate `x_j` for every `j >= j_min` to
    /// about `rel_tol` relative accuracy.
    pub fn new(symbol: &ThermalSymbol, j_min: usize, rel_tol: f64) -> Result<Self> {
        if j_min == 0 {
            return Err(Error::invalid("pole expansion needs j_min >= 1"));
        }
        let d = trimmed(symbol.model.couplings());
        if d.len() < 2 {
            return Ok(Self { poles: Vec::new() });
        }
        let beta = symbol.beta();
        let exponent = -(j_min as f64) - 1.0;
        // far families shrink like n^{-p}; their remainder is about n / (p - 1)
        // times the last one
        let r = (d.len() - 1) as f64;
        let p = (j_min as f64 + r) / r;
        let mut poles = Vec::new();
        let mut leading = 0.0_f64;
        let mut quiet = 0;
        for n in 0..MAX_FAMILIES {
            let c = Complex64::new(0.0, PI * (2 * n + 1) as f64 / beta);
            let mut family = 0.0_f64;
            for z in laurent_roots(&d, c)? {
                if z.norm() <= 1.0 {
                    continue;
                }
                let w = 2.0 / (beta * laurent_deriv(&d, z));
                family = family.max((w * z.powf(exponent)).norm());
                poles.push((z, w));
            }
            leading = leading.max(family);
            if family * (n + 1) as f64 / (p - 1.0) <= rel_tol * leading {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(Self { poles });
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::QuadratureNotConverged {
            grid: MAX_FAMILIES,
            ceiling: MAX_FAMILIES,
            delta: f64::NAN,
        })
    }

    /// `x_j` for `j >= 1`.
    pub fn coeff(&self, j: usize) -> f64 {
        let e = -(j as f64) - 1.0;
        let sum: Complex64 = self.poles.iter().rev().map(|(z, w)| w * z.powf(e)).sum();
        2.0 * sum.re
    }
}

fn trimmed(couplings: &[f64]) -> Vec<f64> {
    let last = couplings.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    couplings[..=last].to_vec()
}

/// `dε/dz` for `ε(z) = d_0 + Σ_k d_k (z^k + z^{-k})`.
fn laurent_deriv(d: &[f64], z: Complex64) -> Complex64 {
    d.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &dk)| {
            let k = k as i32;
            dk * k as f64 * (z.powi(k - 1) - z.powi(-k - 1))
        })
        .sum()
}

/// Roots of `z^R (ε(z) - c)`, a polynomial of degree `2R`.
fn laurent_roots(d: &[f64], c: Complex64) -> Result<Vec<Complex64>> {
    let r = d.len() - 1;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * r + 1];
    coeffs[r] = Complex64::new(d[0], 0.0) - c;
    for (k, &dk) in d.iter().enumerate().skip(1) {
        coeffs[r + k] += dk;
        coeffs[r - k] += dk;
    }
    if r == 1 {
        return Ok(quadratic_roots(coeffs[2], coeffs[1], coeffs[0]).to_vec());
    }
    aberth(&coeffs)
}

/// Roots of `a z^2 + b z + c` without cancellation.
fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // pick the sign that adds magnitudes
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    [q / a, c / q]
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Aberth–Ehrlich simultaneous iteration; `coeffs[k]` multiplies `z^k`.
fn aberth(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg].norm();
    // Cauchy-style radius estimates for the starting circle
    let upper = 1.0
        + coeffs[..deg]
            .iter()
            .map(|a| a.norm() / lead)
            .fold(0.0, f64::max);
    let lower = coeffs[0].norm()
        / (coeffs[0].norm() + coeffs[1..].iter().map(|a| a.norm()).fold(0.0, f64::max));
    let radius = (upper * lower.max(1e-300)).sqrt();
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..deg {
            let (p, dp) = horner(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&k| k != i)
                .map(|k| 1.0 / (z[i] - z[k]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    Err(Error::invalid("polynomial root iteration did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::infinite_coeffs;
    use crate::model::{ModelSpec, ThermalParams};

    fn check_against_transform(couplings: Vec<f64>, beta: f64) {
        let s = ThermalSymbol::new(
            ModelSpec::new(couplings).unwrap(),
            ThermalParams::new(beta, 1.0).unwrap(),
        );
        let fft = infinite_coeffs(&s, 40, 1e-16).unwrap();
        let poles = PoleExpansion::new(&s, 12, 1e-16).unwrap();
        for j in 12..=40 {
            let (a, b) = (poles.coeff(j), fft.as_slice()[j]);
            if b.abs() > 1e-11 {
                assert!((a - b).abs() < 1e-6 * b.abs(), "j={j}: {a} vs {b}");
            } else {
                assert!((a - b).abs() < 1e-15, "j={j}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn matches_transform_coefficients() {
        check_against_transform(vec![1.0, 1.0], 1.0);
        check_against_transform(vec![0.3, 1.0], 3.0);
        check_against_transform(vec![4.0, 1.0], 2.0);
        check_against_transform(vec![0.2, 1.0, -0.4], 1.5);
        check_against_transform(vec![0.0, 0.7, 0.0, 0.25], 2.0);
    }

    #[test]
    fn far_coefficients_keep_decaying() {
        let s = ThermalSymbol::new(
            ModelSpec::xx(1.0, 1.0),
            ThermalParams::new(1.0, 1.0).unwrap(),
        );
        let poles = PoleExpansion::new(&s, 20, 1e-18).unwrap();
        for j in (50..300).step_by(50) {
            let (near, far) = (poles.coeff(j).abs(), poles.coeff(j + 50).abs());
            assert!(far > 0.0 && far < 1e-20 * near, "{j}: {near} {far}");
        }
    }

    #[test]
    fn local_model_has_no_tail() {
        let s = ThermalSymbol::new(
            ModelSpec::new(vec![0.5, 0.0]).unwrap(),
            ThermalParams::new(1.0, 1.0).unwrap(),
        );
        assert_eq!(PoleExpansion::new(&s, 3, 1e-18).unwrap().coeff(5), 0.0);
    }

    #[test]
    fn polynomial_roots() {
        // (z - 2)(z + 0.5)(z - i)(z + 3i)
        let roots = [
            Complex64::new(2.0, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -3.0),
        ];
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        let found = aberth(&coeffs).unwrap();
        for r in roots {
            assert!(found.iter().any(|z| (z - r).norm() < 1e-12));
        }
    }
}
