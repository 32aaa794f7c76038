//! Parameter sweeps. Rows are computed independently (in parallel when the
//! `parallel` feature is on) and always returned in input order.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    exact_with_bounds, finite_size_error_scan, mutual_information_exact, RingGeometry,
};
use crate::fit::{fit_exp_rate, fit_high_temperature, fit_log_beta_slope, FitReport};
use crate::model::{ModelSpec, ThermalParams, ThermalSymbol};
use crate::par::map_ordered;
use crate::torus::{mutual_info_torus, TorusSpec};
use crate::widom::{mutual_info_asymptotic, mutual_info_kernel_truncated, QuadratureConfig};

/// `count` points from `lo` to `hi` inclusive with constant ratio.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(Error::invalid(format!(
            "geometric grid needs 0 < lo <= hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| lo * (ratio * i as f64).exp()).collect();
    grid[count - 1] = hi;
    Ok(grid)
}

pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(hi >= lo) || count == 0 {
        return Err(Error::invalid(format!(
            "linear grid needs lo <= hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// One temperature-scan record. Failures are kept in `error` so the scan
/// can carry on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub mi_asymptotic: Option<f64>,
    pub mi_exact: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub est_error: Option<f64>,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

/// Asymptotic mutual information at each `beta`, plus the exact value on
/// `ring` when given. Purity bounds are attached only for the von-Neumann
/// entropy, where they apply.
pub fn temperature_scan(
    model: &ModelSpec,
    alpha: f64,
    betas: &[f64],
    ring: Option<RingGeometry>,
    cfg: &QuadratureConfig,
) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    let thermals = betas
        .iter()
        .map(|&b| ThermalParams::new(b, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(map_ordered(&thermals, |&thermal| {
        let start = Instant::now();
        let symbol = ThermalSymbol::new(model.clone(), thermal);
        let mut row = ScanRow {
            beta: thermal.beta,
            mi_asymptotic: None,
            mi_exact: None,
            lower_bound: None,
            upper_bound: None,
            est_error: None,
            wall_time_ms: 0.0,
            error: None,
        };
        let mut failures = Vec::new();
        match mutual_info_asymptotic(&symbol, cfg) {
            Ok(r) => {
                row.mi_asymptotic = Some(r.value);
                row.est_error = Some(r.est_error);
            }
            Err(e) => failures.push(e.to_string()),
        }
        if let Some(geom) = ring {
            let exact = if alpha == 1.0 {
                exact_with_bounds(&symbol, geom).map(|(mi, b)| {
                    row.lower_bound = Some(b.lower);
                    row.upper_bound = Some(b.upper);
                    mi
                })
            } else {
                mutual_information_exact(&symbol, geom)
            };
            match exact {
                Ok(mi) => row.mi_exact = Some(mi.mi),
                Err(e) => failures.push(e.to_string()),
            }
        }
        if !failures.is_empty() {
            row.error = Some(failures.join("; "));
        }
        row.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        row
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemperatureFit {
    High,
    LowCritical,
    LowGapped,
}

/// Fit over the rows that carry an asymptotic value. `window` defaults to
/// the whole scan, except for `LowCritical` where it is the top decade
/// `[beta_max / 10, beta_max]`.
pub fn fit_temperature_scan(
    rows: &[ScanRow],
    kind: TemperatureFit,
    window: Option<(f64, f64)>,
) -> Result<FitReport> {
    let (betas, values): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.mi_asymptotic.map(|v| (r.beta, v)))
        .unzip();
    let hi = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = betas.iter().cloned().fold(f64::INFINITY, f64::min);
    match kind {
        TemperatureFit::High => fit_high_temperature(&betas, &values, window.unwrap_or((lo, hi))),
        TemperatureFit::LowCritical => {
            fit_log_beta_slope(&betas, &values, window.unwrap_or((hi / 10.0, hi)))
        }
        TemperatureFit::LowGapped => fit_exp_rate(&betas, &values, window.unwrap_or((lo, hi))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub n: usize,
    pub e_a: f64,
    pub mi_exact: f64,
    pub mi_asymptotic: f64,
    pub gap: f64,
}

/// Finite-size block-entropy error and the exact-versus-asymptotic gap for
/// each ring size.
pub fn size_scan(
    symbol: &ThermalSymbol,
    q: f64,
    sizes: &[usize],
    cfg: &QuadratureConfig,
) -> Result<Vec<SizeRow>> {
    let asym = mutual_info_asymptotic(symbol, cfg)?.value;
    let errors = finite_size_error_scan(symbol, q, sizes)?;
    let exact = map_ordered(sizes, |&n| {
        mutual_information_exact(symbol, RingGeometry::new(n, q)?).map(|r| r.mi)
    });
    errors
        .rows
        .iter()
        .zip(exact)
        .map(|(row, mi)| {
            let mi = mi?;
            Ok(SizeRow {
                n: row.n,
                e_a: row.e_a,
                mi_exact: mi,
                mi_asymptotic: asym,
                gap: (mi - asym).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub n_kernel: usize,
    pub value: f64,
    /// `value - closed`, with `closed` the cotangent-kernel value.
    pub delta: f64,
}

pub fn kernel_scan(
    symbol: &ThermalSymbol,
    n_kernels: &[usize],
    cfg: &QuadratureConfig,
) -> Result<Vec<KernelRow>> {
    let closed = mutual_info_asymptotic(symbol, cfg)?.value;
    map_ordered(n_kernels, |&n| {
        mutual_info_kernel_truncated(symbol, n, cfg).map(|r| KernelRow {
            n_kernel: n,
            value: r.value,
            delta: r.value - closed,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub m: usize,
    pub total: f64,
    pub per_width: f64,
}

/// Total torus mutual information for each transverse width, with the
/// width-normalized value `total / M^{D-1}`.
pub fn torus_width_scan(
    widths: &[usize],
    spec_for: impl Fn(usize) -> Result<TorusSpec>,
    thermal: ThermalParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<WidthRow>> {
    widths
        .iter()
        .map(|&m| {
            let spec = spec_for(m)?;
            let r = mutual_info_torus(&spec, thermal, cfg)?;
            Ok(WidthRow {
                m,
                total: r.total,
                per_width: r.total / spec.mode_count() as f64,
            })
        })
        .collect()
}
