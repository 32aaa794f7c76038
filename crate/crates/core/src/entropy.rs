//! Entropy functionals on covariance spectra.
//!
//! A Gaussian mode with covariance eigenvalue `x` has occupation
//! probabilities `p = (1 + x) / 2`, `q = (1 - x) / 2`; its Renyi-`alpha`
//! entropy is `s_alpha(x) = log2(p^alpha + q^alpha) / (1 - alpha)` and the
//! von-Neumann entropy is the binary entropy of `p`. Block entropies are
//! traces of these functions over the block spectrum.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, SymmetricMatrix};

/// Round-off slack tolerated (and clamped) outside `[-1, 1]` for scalars.
pub const SCALAR_SLACK: f64 = 1e-12;
/// Slack for eigenvalues of covariance blocks.
pub const SPECTRUM_SLACK: f64 = 1e-8;

/// Renyi order; `alpha == 1` exactly selects von Neumann.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyKind {
    alpha: f64,
}

impl EntropyKind {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn von_neumann() -> Self {
        Self { alpha: 1.0 }
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }

    pub fn is_von_neumann(self) -> bool {
        self.alpha == 1.0
    }

    /// `s_alpha(x)` with `x` clamped to `[-1, 1]`.
    pub fn value(self, x: f64) -> f64 {
        let x = x.clamp(-1.0, 1.0);
        let p = 0.5 * (1.0 + x);
        let q = 0.5 * (1.0 - x);
        if self.is_von_neumann() {
            return -(xlog2x(p) + xlog2x(q));
        }
        let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
        if lo == 0.0 {
            // pure mode: p^alpha + q^alpha = 1 (0^0 counted as 0 for alpha = 0)
            return 0.0;
        }
        let ratio_pow = (lo / hi).powf(self.alpha);
        (self.alpha * hi.log2() + ratio_pow.ln_1p() / LN_2) / (1.0 - self.alpha)
    }

    /// `s_alpha'(x)` for `|x| < 1` (infinite or NaN at the poles).
    pub fn deriv1(self, x: f64) -> f64 {
        if self.is_von_neumann() {
            return 0.5 * ((1.0 - x) / (1.0 + x)).log2();
        }
        if self.alpha == 0.0 {
            return 0.0;
        }
        let (g, _) = self.power_ratios(x);
        self.alpha / ((1.0 - self.alpha) * LN_2) * g
    }

    /// `s_alpha''(x)` for `|x| < 1`.
    pub fn deriv2(self, x: f64) -> f64 {
        if self.is_von_neumann() {
            return -(1.0 / (1.0 + x) + 1.0 / (1.0 - x)) / (2.0 * LN_2);
        }
        if self.alpha == 0.0 {
            return 0.0;
        }
        let (g, h) = self.power_ratios(x);
        -self.alpha / LN_2 * (h + self.alpha / (1.0 - self.alpha) * g * g)
    }

    /// Returns `(G, H)` with
    /// `G = (u^{a-1} - w^{a-1}) / (u^a + w^a)`,
    /// `H = (u^{a-2} + w^{a-2}) / (u^a + w^a)`, `u = 1 + x`, `w = 1 - x`,
    /// scaled by the larger base to avoid overflow.
    fn power_ratios(self, x: f64) -> (f64, f64) {
        let a = self.alpha;
        let u = 1.0 + x;
        let w = 1.0 - x;
        let m = u.max(w);
        let (ur, wr) = (u / m, w / m);
        let den = ur.powf(a) + wr.powf(a);
        let g = (ur.powf(a - 1.0) - wr.powf(a - 1.0)) / (m * den);
        let h = (ur.powf(a - 2.0) + wr.powf(a - 2.0)) / (m * m * den);
        (g, h)
    }
}

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

fn check_unit(x: f64, slack: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 + slack {
        return Err(Error::invalid(format!("argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Mode entropy in bits; `|x|` may exceed 1 by at most [`SCALAR_SLACK`].
pub fn s_alpha(x: f64, kind: EntropyKind) -> Result<f64> {
    Ok(kind.value(check_unit(x, SCALAR_SLACK)?))
}

/// First derivative; requires `|x| < 1`.
pub fn s_alpha_deriv(x: f64, kind: EntropyKind) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::invalid(format!("derivative undefined at {x}")));
    }
    Ok(kind.deriv1(x))
}

/// Second derivative; requires `|x| < 1`.
pub fn s_alpha_deriv2(x: f64, kind: EntropyKind) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::invalid(format!("derivative undefined at {x}")));
    }
    Ok(kind.deriv2(x))
}

/// Trace of a scalar function over a covariance spectrum, rejecting
/// eigenvalues more than [`SPECTRUM_SLACK`] outside `[-1, 1]`.
pub fn spectral_trace(spectrum: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut total = 0.0;
    for &mu in spectrum {
        if mu.is_nan() || mu.abs() > 1.0 + SPECTRUM_SLACK {
            return Err(Error::SpectrumOutOfRange(mu));
        }
        total += f(mu.clamp(-1.0, 1.0));
    }
    Ok(total)
}

/// `tr s_alpha(M)` in bits.
pub fn entropy_of_block(m: &SymmetricMatrix, kind: EntropyKind) -> Result<f64> {
    let spectrum = symmetric_eigenvalues(m)?;
    spectral_trace(&spectrum, |x| kind.value(x))
}

/// Quadratic purity function `l(x) = (1 - x^2) / 2`.
pub fn purity_lower_fn(x: f64) -> f64 {
    0.5 * (1.0 - x * x)
}

/// `u(x) = sqrt(1 - x^2) / ln 2`.
pub fn purity_upper_fn(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt() / LN_2
}

/// Lower and upper bounds on the von-Neumann mutual information between the
/// first `split` modes and the rest, from the pinching
/// `P = X_A ⊕ X_B`: `tr l(P) - tr l(X) <= I <= tr u(P) - tr u(X)`.
pub fn purity_bounds(x_full: &SymmetricMatrix, split: usize) -> Result<(f64, f64)> {
    let n = x_full.dim();
    if split == 0 || split >= n {
        return Err(Error::invalid(format!(
            "split {split} must lie strictly between 0 and {n}"
        )));
    }
    // tr l(P) - tr l(X) = (||X||^2 - ||P||^2) / 2 = sum over the A x B block
    let lower: f64 = (0..split)
        .map(|i| (split..n).map(|j| x_full.get(i, j).powi(2)).sum::<f64>())
        .sum();
    let a: Vec<usize> = (0..split).collect();
    let b: Vec<usize> = (split..n).collect();
    let tr_u = |m: &SymmetricMatrix| -> Result<f64> {
        spectral_trace(&symmetric_eigenvalues(m)?, purity_upper_fn)
    };
    let upper =
        tr_u(&x_full.principal_block(&a)?)? + tr_u(&x_full.principal_block(&b)?)? - tr_u(x_full)?;
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn kind(alpha: f64) -> EntropyKind {
        EntropyKind::new(alpha).unwrap()
    }

    #[test]
    fn closed_form_values() {
        for &a in &[0.0, 0.5, 1.0, 2.0, 7.0] {
            assert_relative_eq!(s_alpha(0.0, kind(a)).unwrap(), 1.0, epsilon = 1e-15);
            assert_eq!(s_alpha(1.0, kind(a)).unwrap(), 0.0);
            assert_eq!(s_alpha(-1.0, kind(a)).unwrap(), 0.0);
            assert_eq!(s_alpha_deriv(0.0, kind(a)).unwrap(), 0.0);
        }
        let vn = 2.0 - 0.75 * 3f64.log2();
        assert_relative_eq!(s_alpha(0.5, kind(1.0)).unwrap(), vn, epsilon = 1e-15);
        assert_relative_eq!(vn, 0.811278, epsilon = 1e-6);
        let s2 = (8.0f64 / 5.0).log2();
        assert_relative_eq!(s_alpha(0.5, kind(2.0)).unwrap(), s2, epsilon = 1e-15);
        assert_relative_eq!(s2, 0.678072, epsilon = 1e-6);
        assert_relative_eq!(
            s_alpha_deriv(0.5, kind(1.0)).unwrap(),
            0.5 * (1.0f64 / 3.0).log2(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            s_alpha_deriv(0.5, kind(1.0)).unwrap(),
            -0.792481,
            epsilon = 1e-6
        );
    }

    #[test]
    fn slack_and_domain() {
        assert_eq!(s_alpha(1.0 + 5e-13, kind(1.0)).unwrap(), 0.0);
        assert!(s_alpha(1.0 + 1e-9, kind(1.0)).is_err());
        assert!(s_alpha(f64::NAN, kind(1.0)).is_err());
        assert!(s_alpha_deriv(1.0, kind(2.0)).is_err());
        assert!(s_alpha_deriv2(-1.0, kind(1.0)).is_err());
        assert!(EntropyKind::new(-0.1).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for &a in &[0.5, 1.0, 1.5, 2.0, 3.0] {
            let k = kind(a);
            for i in 0..=198 {
                let x = -0.99 + 0.01 * i as f64;
                let fd1 = (k.value(x + h) - k.value(x - h)) / (2.0 * h);
                let d1 = k.deriv1(x);
                assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1e-2), "a={a} x={x}");
                let fd2 = (k.deriv1(x + h) - k.deriv1(x - h)) / (2.0 * h);
                let d2 = k.deriv2(x);
                assert!(
                    (fd2 - d2).abs() <= 1e-6 * d2.abs(),
                    "a={a} x={x}: {fd2} vs {d2}"
                );
            }
        }
    }

    #[test]
    fn holder_witness_for_half_order() {
        let k = kind(0.5);
        let mut worst: f64 = 0.0;
        for e in 2..14 {
            let y = 1.0 - 10f64.powi(-e);
            let ratio = (k.value(1.0) - k.value(y)).abs() / (1.0 - y).sqrt();
            worst = worst.max(ratio);
        }
        // s_{1/2}(1) - s_{1/2}(y) ~ sqrt(2 (1 - y)) / ln 2 near the pure end
        assert!(worst < 1.01 * 2f64.sqrt() / LN_2, "{worst}");
    }

    #[test]
    fn concavity_fails_beyond_order_two() {
        // Binary Renyi entropies are concave only for alpha <= 2.
        let k = kind(3.9);
        let (x, y) = (0.8, 0.4);
        assert!(k.value(0.5 * (x + y)) < 0.5 * (k.value(x) + k.value(y)) - 1e-3);
        assert!((1..100).any(|i| k.deriv2(i as f64 / 100.0) > 0.0));
        assert!((1..100).all(|i| kind(2.0).deriv2(i as f64 / 100.0) < 0.0));
    }

    #[test]
    fn block_entropies() {
        assert_relative_eq!(
            entropy_of_block(&SymmetricMatrix::zeros(5), kind(1.0)).unwrap(),
            5.0
        );
        assert_eq!(
            entropy_of_block(&SymmetricMatrix::identity(4), kind(2.0)).unwrap(),
            0.0
        );
        let m = SymmetricMatrix::from_row_major(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_relative_eq!(
            entropy_of_block(&m, kind(1.0)).unwrap(),
            1.622556,
            epsilon = 1e-6
        );
        let bad = SymmetricMatrix::from_row_major(1, vec![1.5]).unwrap();
        assert!(matches!(
            entropy_of_block(&bad, kind(1.0)),
            Err(Error::SpectrumOutOfRange(_))
        ));
    }

    #[test]
    fn bounds_vanish_for_block_diagonal() {
        let m = SymmetricMatrix::from_fn(4, |i, j| match (i < 2, j < 2) {
            (true, true) | (false, false) => {
                if i == j {
                    0.3
                } else {
                    0.1
                }
            }
            _ => 0.0,
        });
        let (lo, hi) = purity_bounds(&m, 2).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi.abs() < 1e-14);
        assert!(purity_bounds(&m, 0).is_err());
        assert!(purity_bounds(&m, 4).is_err());
    }

    proptest! {
        #[test]
        fn concavity(x in -1.0f64..1.0, y in -1.0f64..1.0, a in 0.0f64..=2.0) {
            let k = kind(a);
            prop_assert!(k.value(0.5 * (x + y)) >= 0.5 * (k.value(x) + k.value(y)) - 1e-12);
        }

        #[test]
        fn renyi_monotone_in_order(x in -1.0f64..1.0, a in 0.0f64..4.0, da in 0.0f64..3.0) {
            // orders close to 1 lose digits to the 1 / (1 - alpha) prefactor
            prop_assert!(kind(a).value(x) >= kind(a + da).value(x) - 1e-9);
            prop_assert!((kind(a).value(x) - kind(a).value(-x)).abs() < 1e-14);
            let v = kind(a).value(x);
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        }
    }
}
