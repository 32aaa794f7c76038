//! Slabs on a `D`-dimensional torus cut by two parallel hyperplanes.
//!
//! The lattice is `Z_M^{D-1}` transversally and a long ring longitudinally.
//! A transverse discrete Fourier transform (one phase `2π t_j k_j / M` per
//! component) block-diagonalizes the hopping matrix into one-dimensional
//! chains labelled by `k ∈ {0, .., M-1}^{D-1}`, with couplings
//!
//! ```text
//! d~(k)_m = Σ_t cos(2π t·k / M) d_(t, m).
//! ```
//!
//! The cut commutes with the transform, so the mutual information is the sum
//! of one-dimensional values over modes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ThermalParams, ThermalSymbol};
use crate::par::map_ordered;
use crate::widom::{mutual_info_asymptotic, QuadratureConfig};

/// Default cap on the number of transverse modes `M^{D-1}`.
pub const DEFAULT_MAX_MODES: usize = 4096;

/// Real symmetric hopping on the torus. Offsets are `D`-vectors whose last
/// component is longitudinal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    dim: usize,
    width: usize,
    couplings: BTreeMap<Vec<i64>, f64>,
}

impl TorusSpec {
    pub fn new(dim: usize, width: usize, couplings: BTreeMap<Vec<i64>, f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!(
                "torus dimension must be at least 2, got {dim}"
            )));
        }
        if width == 0 {
            return Err(Error::invalid("transverse width M must be positive"));
        }
        for (t, &v) in &couplings {
            if t.len() != dim {
                return Err(Error::invalid(format!(
                    "offset {t:?} has {} components, expected {dim}",
                    t.len()
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("coupling at {t:?} is not finite")));
            }
            // transverse reflection and full reflection must both be symmetries
            let mut flipped = t.iter().map(|x| -x).collect::<Vec<_>>();
            check_partner(&couplings, t, v, &flipped)?;
            flipped[dim - 1] = t[dim - 1];
            check_partner(&couplings, t, v, &flipped)?;
        }
        Ok(Self {
            dim,
            width,
            couplings,
        })
    }

    /// Separable hypercubic model: on-site `a`, nearest-neighbour hopping `b`
    /// along every axis.
    pub fn tight_binding(dim: usize, width: usize, a: f64, b: f64) -> Result<Self> {
        let mut couplings = BTreeMap::new();
        couplings.insert(vec![0; dim], a);
        for axis in 0..dim {
            for sign in [-1, 1] {
                let mut t = vec![0; dim];
                t[axis] = sign;
                couplings.insert(t, b);
            }
        }
        Self::new(dim, width, couplings)
    }

    /// A one-dimensional model placed along the longitudinal axis with no
    /// transverse hopping.
    pub fn embed_chain(dim: usize, width: usize, model: &ModelSpec) -> Result<Self> {
        let mut couplings = BTreeMap::new();
        let r = model.range() as i64 - 1;
        for m in -r..=r {
            let mut t = vec![0; dim];
            t[dim - 1] = m;
            couplings.insert(t, model.coefficient(m));
        }
        Self::new(dim, width, couplings)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn mode_count(&self) -> usize {
        self.width.saturating_pow(self.dim as u32 - 1)
    }

    fn longitudinal_range(&self) -> usize {
        self.couplings
            .keys()
            .map(|t| t[self.dim - 1].unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Mode labels in lexicographic order, last component fastest.
    pub fn modes(&self) -> Vec<Vec<usize>> {
        let d = self.dim - 1;
        (0..self.mode_count())
            .map(|mut flat| {
                let mut k = vec![0; d];
                for slot in k.iter_mut().rev() {
                    *slot = flat % self.width;
                    flat /= self.width;
                }
                k
            })
            .collect()
    }
}

fn check_partner(map: &BTreeMap<Vec<i64>, f64>, t: &[i64], v: f64, partner: &[i64]) -> Result<()> {
    let other = map.get(partner).copied().unwrap_or(0.0);
    if (other - v).abs() > 1e-12 * v.abs().max(1.0) {
        return Err(Error::invalid(format!(
            "couplings are not reflection symmetric: d{t:?} = {v} but d{partner:?} = {other}"
        )));
    }
    Ok(())
}

/// Effective one-dimensional couplings `d~(k)_0, .., d~(k)_r` of one mode.
pub fn mode_couplings(spec: &TorusSpec, k: &[usize]) -> Result<Vec<f64>> {
    let r = spec.longitudinal_range();
    let mut re = vec![0.0; r + 1];
    let mut im = vec![0.0; r + 1];
    for (t, &v) in &spec.couplings {
        let m = t[spec.dim - 1];
        if m < 0 {
            continue;
        }
        let phase: f64 = t[..spec.dim - 1]
            .iter()
            .zip(k)
            .map(|(&tj, &kj)| TAU * (tj * kj as i64) as f64 / spec.width as f64)
            .sum();
        re[m as usize] += phase.cos() * v;
        im[m as usize] += phase.sin() * v;
    }
    let residue = im.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if residue > 1e-10 {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(re)
}

/// Coupling sequences of every transverse mode, in [`TorusSpec::modes`] order.
pub fn transverse_dispersions(spec: &TorusSpec) -> Result<Vec<(Vec<usize>, Vec<f64>)>> {
    spec.modes()
        .into_iter()
        .map(|k| {
            let d = mode_couplings(spec, &k)?;
            Ok((k, d))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusMode {
    pub index: Vec<usize>,
    pub couplings: Vec<f64>,
    pub value: f64,
    pub grid_used: usize,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusResult {
    pub total: f64,
    pub modes: Vec<TorusMode>,
}

pub fn mutual_info_torus(
    spec: &TorusSpec,
    thermal: ThermalParams,
    cfg: &QuadratureConfig,
) -> Result<TorusResult> {
    mutual_info_torus_capped(spec, thermal, cfg, DEFAULT_MAX_MODES)
}

/// Sum of asymptotic one-dimensional mutual informations over transverse
/// modes. The first failing mode aborts the sum and is named in the error.
pub fn mutual_info_torus_capped(
    spec: &TorusSpec,
    thermal: ThermalParams,
    cfg: &QuadratureConfig,
    max_modes: usize,
) -> Result<TorusResult> {
    if spec.mode_count() > max_modes {
        return Err(Error::invalid(format!(
            "{} transverse modes exceed the cap of {max_modes}",
            spec.mode_count()
        )));
    }
    cfg.validate()?;
    let dispersions = transverse_dispersions(spec)?;
    let modes = map_ordered(&dispersions, |(k, d)| -> Result<TorusMode> {
        let wrap = |source: Error| Error::TorusMode {
            index: k.clone(),
            source: Box::new(source),
        };
        let model = ModelSpec::new(d.clone()).map_err(wrap)?;
        let r = mutual_info_asymptotic(&ThermalSymbol::new(model, thermal), cfg).map_err(wrap)?;
        Ok(TorusMode {
            index: k.clone(),
            couplings: d.clone(),
            value: r.value,
            grid_used: r.grid_used,
            est_error: r.est_error,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let total = modes.iter().map(|m| m.value).sum();
    Ok(TorusResult { total, modes })
}
