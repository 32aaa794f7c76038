//! Lattice models, the dispersion relation and the thermal symbol.
//!
//! A model is a finite coupling sequence `v_1, ..., v_r`. The Hamiltonian
//! matrix on the ring is circulant with reflection-symmetric entries
//! `d_0 = v_1`, `d_{±k} = v_{k+1}` for `1 <= k < r`, so the dispersion is
//!
//! ```text
//! eps(theta) = d_0 + 2 * sum_{k=1}^{r-1} d_k cos(k theta)
//! ```
//!
//! and the thermal symbol is `lambda = f ∘ eps` with `f(x) = -tanh(beta x / 2)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-range, reflection-symmetric hopping model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    couplings: Vec<f64>,
}

impl ModelSpec {
    /// `couplings[k]` is `v_{k+1}`, i.e. the Fourier coefficient `d_k`.
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::invalid("coupling range must be at least 1"));
        }
        if let Some(bad) = couplings.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("coupling {bad} is not finite")));
        }
        Ok(Self { couplings })
    }

    /// Fermionic XX chain: on-site `a`, nearest-neighbour hopping `b`.
    pub fn xx(a: f64, b: f64) -> Self {
        Self::new(vec![a, b]).expect("finite XX couplings")
    }

    pub fn range(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Coefficient `d_k` of the (infinite-chain) Hamiltonian matrix.
    pub fn coefficient(&self, k: i64) -> f64 {
        self.couplings
            .get(k.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// Hamiltonian matrix entry `V_{ij}` on a ring of `n` sites. Offsets that
    /// alias onto the same residue mod `n` are summed, so the ring spectrum is
    /// exactly `eps(2 pi j / n)` even when `n < 2r - 1`.
    pub fn ring_entry(&self, n: usize, i: usize, j: usize) -> f64 {
        let n = n as i64;
        let r = self.range() as i64 - 1;
        let diff = (i as i64 - j as i64).rem_euclid(n);
        (-r..=r)
            .filter(|m| m.rem_euclid(n) == diff)
            .map(|m| self.coefficient(m))
            .sum()
    }

    /// `|d_0| + 2 sum |d_k|`, an upper bound for `|eps|`.
    pub fn sup_norm(&self) -> f64 {
        self.couplings[0].abs() + 2.0 * self.couplings[1..].iter().map(|d| d.abs()).sum::<f64>()
    }

    pub fn dispersion(&self, theta: f64) -> f64 {
        let theta = normalize_angle(theta);
        self.couplings[0]
            + 2.0
                * self.couplings[1..]
                    .iter()
                    .enumerate()
                    .map(|(k, d)| d * ((k + 1) as f64 * theta).cos())
                    .sum::<f64>()
    }

    pub fn dispersion_deriv1(&self, theta: f64) -> f64 {
        let theta = normalize_angle(theta);
        -2.0 * self.couplings[1..]
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let k = (k + 1) as f64;
                k * d * (k * theta).sin()
            })
            .sum::<f64>()
    }

    pub fn dispersion_deriv2(&self, theta: f64) -> f64 {
        let theta = normalize_angle(theta);
        -2.0 * self.couplings[1..]
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let k = (k + 1) as f64;
                k * k * d * (k * theta).cos()
            })
            .sum::<f64>()
    }
}

/// Inverse temperature and Renyi order (`alpha == 1` is von Neumann).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub beta: f64,
    pub alpha: f64,
}

impl ThermalParams {
    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        Ok(Self { beta, alpha })
    }
}

/// Maps `theta` into `[-pi, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    if (-PI..PI).contains(&theta) {
        theta
    } else {
        (theta + PI).rem_euclid(TAU) - PI
    }
}

pub fn dispersion_eval(model: &ModelSpec, theta: f64) -> f64 {
    model.dispersion(theta)
}

/// Filling function `f(x) = -tanh(beta x / 2)`.
pub fn fermi_function(x: f64, beta: f64) -> f64 {
    -(0.5 * beta * x).tanh()
}

/// `sech^2(y)` without the cancellation of `1 - tanh^2`.
fn sech2(y: f64) -> f64 {
    let e = (-2.0 * y.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Thermal symbol `lambda = f ∘ eps` with its first two angular derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSymbol {
    pub model: ModelSpec,
    pub thermal: ThermalParams,
}

impl ThermalSymbol {
    pub fn new(model: ModelSpec, thermal: ThermalParams) -> Self {
        Self { model, thermal }
    }

    pub fn beta(&self) -> f64 {
        self.thermal.beta
    }

    pub fn alpha(&self) -> f64 {
        self.thermal.alpha
    }

    pub fn eval(&self, theta: f64) -> f64 {
        fermi_function(self.model.dispersion(theta), self.thermal.beta)
    }

    pub fn deriv1(&self, theta: f64) -> f64 {
        let beta = self.thermal.beta;
        let y = 0.5 * beta * self.model.dispersion(theta);
        -0.5 * beta * sech2(y) * self.model.dispersion_deriv1(theta)
    }

    pub fn deriv2(&self, theta: f64) -> f64 {
        let beta = self.thermal.beta;
        let y = 0.5 * beta * self.model.dispersion(theta);
        let s2 = sech2(y);
        let e1 = self.model.dispersion_deriv1(theta);
        let e2 = self.model.dispersion_deriv2(theta);
        0.5 * beta * beta * s2 * y.tanh() * e1 * e1 - 0.5 * beta * s2 * e2
    }

    /// `tanh(beta ||eps||_inf / 2)`, a bound on `|lambda|` strictly below 1.
    pub fn sup_bound(&self) -> f64 {
        (0.5 * self.thermal.beta * self.model.sup_norm()).tanh()
    }
}

pub fn thermal_symbol(model: ModelSpec, thermal: ThermalParams) -> ThermalSymbol {
    ThermalSymbol::new(model, thermal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn xx(a: f64, b: f64, beta: f64) -> ThermalSymbol {
        ThermalSymbol::new(ModelSpec::xx(a, b), ThermalParams::new(beta, 1.0).unwrap())
    }

    #[test]
    fn dispersion_of_xx_chain() {
        let m = ModelSpec::xx(1.0, 1.0);
        assert_relative_eq!(dispersion_eval(&m, 0.0), 3.0);
        assert_relative_eq!(dispersion_eval(&m, PI), -1.0);
        assert_relative_eq!(dispersion_eval(&m, PI / 2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fermi_function_values() {
        assert_eq!(fermi_function(0.0, 3.7), 0.0);
        assert_relative_eq!(fermi_function(2.0, 1.0), -0.761594, epsilon = 1e-6);
        assert!((fermi_function(1.0, 50.0) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn symbol_at_pi() {
        let s = xx(1.0, 1.0, 2.0);
        assert_relative_eq!(s.eval(PI), 1f64.tanh(), epsilon = 1e-15);
        assert_relative_eq!(s.eval(PI), 0.761594, epsilon = 1e-6);
        assert_eq!(s.deriv1(0.0), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelSpec::new(vec![]).is_err());
        assert!(ModelSpec::new(vec![1.0, f64::NAN]).is_err());
        assert!(ThermalParams::new(0.0, 1.0).is_err());
        assert!(ThermalParams::new(-1.0, 1.0).is_err());
        assert!(ThermalParams::new(1.0, -0.5).is_err());
    }

    #[test]
    fn derived_coefficients_are_reflection_symmetric() {
        let m = ModelSpec::new(vec![0.3, -1.0, 0.25]).unwrap();
        assert_eq!(m.coefficient(0), 0.3);
        assert_eq!(m.coefficient(1), -1.0);
        assert_eq!(m.coefficient(-1), -1.0);
        assert_eq!(m.coefficient(-2), 0.25);
        assert_eq!(m.coefficient(3), 0.0);
    }

    #[test]
    fn ring_entries_alias_on_small_rings() {
        let m = ModelSpec::xx(0.5, 1.0);
        assert_eq!(m.ring_entry(2, 0, 1), 2.0);
        assert_eq!(m.ring_entry(2, 0, 0), 0.5);
        assert_eq!(m.ring_entry(6, 0, 5), 1.0);
        assert_eq!(m.ring_entry(6, 0, 3), 0.0);
    }

    #[test]
    fn angles_reduce_mod_two_pi() {
        let s = xx(0.3, 1.1, 1.7);
        for &t in &[0.4, 2.9, -3.0] {
            assert_relative_eq!(s.eval(t + 4.0 * TAU), s.eval(t), epsilon = 1e-12);
            assert_relative_eq!(s.deriv1(t - TAU), s.deriv1(t), epsilon = 1e-12);
        }
        assert!(normalize_angle(PI) < PI);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = ThermalSymbol::new(
            ModelSpec::new(vec![0.4, 1.0, -0.3]).unwrap(),
            ThermalParams::new(1.3, 1.0).unwrap(),
        );
        let h = 1e-5;
        for i in 0..64 {
            let t = -PI + (i as f64 + 0.37) * TAU / 64.0;
            let fd1 = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            let fd2 = (s.deriv1(t + h) - s.deriv1(t - h)) / (2.0 * h);
            assert!((fd1 - s.deriv1(t)).abs() <= 1e-6 * s.deriv1(t).abs().max(1e-3));
            assert!((fd2 - s.deriv2(t)).abs() <= 1e-6 * s.deriv2(t).abs().max(1e-3));
        }
    }

    proptest! {
        #[test]
        fn symbol_parity_and_bound(
            a in -3.0f64..3.0,
            b in -2.0f64..2.0,
            c in -1.0f64..1.0,
            beta in 0.01f64..30.0,
            theta in -PI..PI,
        ) {
            let s = ThermalSymbol::new(
                ModelSpec::new(vec![a, b, c]).unwrap(),
                ThermalParams::new(beta, 1.0).unwrap(),
            );
            let bound = s.sup_bound();
            prop_assert!(s.eval(theta).abs() <= bound + 1e-15);
            // mathematically below 1; tanh rounds to 1 once beta |eps| / 2 > 19
            prop_assert!(s.eval(theta).abs() <= 1.0);
            prop_assert!((s.eval(theta) - s.eval(-theta)).abs() <= 1e-12);
            prop_assert!((s.deriv1(theta) + s.deriv1(-theta)).abs() <= 1e-12 * (1.0 + s.deriv1(theta).abs()));
            prop_assert!((s.deriv2(theta) - s.deriv2(-theta)).abs() <= 1e-12 * (1.0 + s.deriv2(theta).abs()));
            prop_assert!(s.deriv1(PI).abs() <= 1e-12 * (1.0 + beta));
        }
    }
}
