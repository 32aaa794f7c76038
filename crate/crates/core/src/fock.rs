//! Brute-force Fock-space oracle for rings of at most eight sites.
//!
//! The Gibbs state is assembled as a product over single-particle eigenmodes
//! `b_k = sum_j O_jk f_j` of `(1 - n_k) + (2 n_k - 1) b_k^† b_k`, with Fermi-Dirac
//! occupations `n_k`. Fermions are mapped to qubits with Jordan-Wigner
//! strings ordered by site index, so `A = {0, .., L-1}` occupies the low bits.
//! Reduced states are ordinary partial traces; the thermal state is
//! parity-even, which makes them the correct fermionic reductions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{mutual_information_exact, RingGeometry};
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues, SymmetricMatrix};
use crate::model::ThermalSymbol;

pub const MAX_FOCK_SITES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockCheck {
    pub mi_fock: f64,
    pub mi_gaussian: f64,
}

/// Row-major dense matrix of dimension `dim`.
struct Dense {
    dim: usize,
    data: Vec<f64>,
}

impl Dense {
    fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    fn mul(&self, other: &Dense) -> Dense {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..k * n + n];
                for (o, b) in out[i * n..i * n + n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Dense { dim: n, data: out }
    }
}

/// `f_i^† f_j |state>` as `(sign, new_state)`, or `None` if it vanishes.
fn hop(state: usize, i: usize, j: usize) -> Option<(f64, usize)> {
    if state & (1 << j) == 0 {
        return None;
    }
    let parity = |s: usize, site: usize| (s & ((1 << site) - 1)).count_ones();
    let mut sign = parity(state, j);
    let mid = state ^ (1 << j);
    if mid & (1 << i) != 0 {
        return None;
    }
    sign += parity(mid, i);
    let out = mid | (1 << i);
    Some((if sign % 2 == 0 { 1.0 } else { -1.0 }, out))
}

/// Many-body Gibbs state of the ring in the site occupation basis.
fn gibbs_state(symbol: &ThermalSymbol, n: usize) -> Result<Dense> {
    let v = SymmetricMatrix::from_fn(n, |i, j| symbol.model.ring_entry(n, i, j));
    let modes = symmetric_eigen(&v)?;
    let dim = 1usize << n;
    let beta = symbol.beta();
    let mut rho = Dense::identity(dim);
    for (eps, o) in modes.values.iter().zip(&modes.vectors) {
        let occ = 0.5 * (1.0 - (0.5 * beta * eps).tanh());
        // factor = (1 - occ) I + (2 occ - 1) b^† b
        let mut factor = vec![0.0; dim * dim];
        for s in 0..dim {
            factor[s * dim + s] = 1.0 - occ;
        }
        for i in 0..n {
            for j in 0..n {
                let w = (2.0 * occ - 1.0) * o[i] * o[j];
                if w == 0.0 {
                    continue;
                }
                for s in 0..dim {
                    if let Some((sign, t)) = hop(s, i, j) {
                        factor[t * dim + s] += w * sign;
                    }
                }
            }
        }
        rho = rho.mul(&Dense { dim, data: factor });
    }
    Ok(rho)
}

fn partial_trace(rho: &Dense, n: usize, l: usize, keep_low: bool) -> Dense {
    let (kept_bits, traced_bits) = if keep_low { (l, n - l) } else { (n - l, l) };
    let kd = 1usize << kept_bits;
    let td = 1usize << traced_bits;
    let index = |k: usize, t: usize| if keep_low { k | (t << l) } else { t | (k << l) };
    let mut out = vec![0.0; kd * kd];
    for a in 0..kd {
        for b in 0..kd {
            out[a * kd + b] = (0..td)
                .map(|t| rho.data[index(a, t) * rho.dim + index(b, t)])
                .sum();
        }
    }
    Dense { dim: kd, data: out }
}

fn many_body_entropy(rho: &Dense, alpha: f64) -> Result<f64> {
    // symmetrize away round-off before the eigensolve
    let m = SymmetricMatrix::from_fn(rho.dim, |i, j| {
        0.5 * (rho.data[i * rho.dim + j] + rho.data[j * rho.dim + i])
    });
    let probs: Vec<f64> = symmetric_eigenvalues(&m)?
        .into_iter()
        .map(|p| p.max(0.0))
        .collect();
    if alpha == 1.0 {
        Ok(-probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.log2())
            .sum::<f64>())
    } else {
        let moment: f64 = probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p.powf(alpha))
            .sum();
        Ok(moment.log2() / (1.0 - alpha))
    }
}

/// Mutual information between the first `l` sites and the rest of an
/// `n`-site ring, from the explicit `2^n`-dimensional Gibbs state and from
/// the Gaussian covariance pipeline.
pub fn fock_space_crosscheck(symbol: &ThermalSymbol, n: usize, l: usize) -> Result<FockCheck> {
    if n > MAX_FOCK_SITES {
        return Err(Error::invalid(format!(
            "Fock-space oracle supports at most {MAX_FOCK_SITES} sites, got {n}"
        )));
    }
    let geom = RingGeometry::with_block(n, l)?;
    let alpha = symbol.alpha();
    let rho = gibbs_state(symbol, n)?;
    let s_total = many_body_entropy(&rho, alpha)?;
    let s_a = many_body_entropy(&partial_trace(&rho, n, l, true), alpha)?;
    let s_b = many_body_entropy(&partial_trace(&rho, n, l, false), alpha)?;
    let gaussian = mutual_information_exact(symbol, geom)?;
    Ok(FockCheck {
        mi_fock: s_a + s_b - s_total,
        mi_gaussian: gaussian.mi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, ThermalParams};

    fn sym(a: f64, b: f64, beta: f64, alpha: f64) -> ThermalSymbol {
        ThermalSymbol::new(
            ModelSpec::xx(a, b),
            ThermalParams::new(beta, alpha).unwrap(),
        )
    }

    #[test]
    fn hopping_signs() {
        // f_0^† f_1 on |01> (site 1 occupied) -> |10>, no string crossed
        assert_eq!(hop(0b10, 0, 1), Some((1.0, 0b01)));
        // f_2^† f_0 on |011>: annihilate site 0 (+), create site 2 past site 1 (-)
        assert_eq!(hop(0b011, 2, 0), Some((-1.0, 0b110)));
        assert_eq!(hop(0b01, 0, 1), None);
        assert_eq!(hop(0b11, 0, 1), None);
        assert_eq!(hop(0b01, 0, 0), Some((1.0, 0b01)));
    }

    #[test]
    fn gibbs_state_is_normalized() {
        let rho = gibbs_state(&sym(0.3, 1.0, 1.2, 1.0), 4).unwrap();
        let tr: f64 = (0..16).map(|i| rho.data[i * 16 + i]).sum();
        assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_ring() {
        let c = fock_space_crosscheck(&sym(0.0, 1.0, 1.0, 1.0), 2, 1).unwrap();
        assert!((c.mi_fock - c.mi_gaussian).abs() < 1e-8, "{c:?}");
        assert!(c.mi_fock > 0.0);
    }

    #[test]
    fn four_sites() {
        let hot = fock_space_crosscheck(&sym(1.0, 1.0, 1e-9, 1.0), 4, 2).unwrap();
        assert!(hot.mi_fock.abs() < 1e-8 && hot.mi_gaussian.abs() < 1e-8);
        for &beta in &[0.3, 1.0, 5.0] {
            let c = fock_space_crosscheck(&sym(0.5, 1.0, beta, 1.0), 4, 2).unwrap();
            assert!(c.mi_fock >= -1e-12);
            assert!((c.mi_fock - c.mi_gaussian).abs() < 1e-8);
        }
    }

    #[test]
    fn longer_range_and_eight_sites() {
        let s = ThermalSymbol::new(
            ModelSpec::new(vec![0.2, 1.0, -0.4]).unwrap(),
            ThermalParams::new(1.5, 2.0).unwrap(),
        );
        let c = fock_space_crosscheck(&s, 8, 3).unwrap();
        assert!((c.mi_fock - c.mi_gaussian).abs() < 1e-8, "{c:?}");
        assert!(fock_space_crosscheck(&s, 10, 5).is_err());
    }
}
