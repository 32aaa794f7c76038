//! Least-squares fits used by the temperature and size scans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
///
/// Panics if fewer than two points are given.
pub fn ols(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// Slope of `I` against `ln beta`.
    LogBetaSlope,
    /// Decay rate `kappa` of `ln I ~ -kappa beta`.
    ExpRate,
    /// Extrapolated `lim_{beta -> 0} I / beta^2`.
    QuadraticCoeff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: FitKind,
    pub coefficient: f64,
    pub r_squared: f64,
    /// Range of the independent variable used.
    pub window: (f64, f64),
}

fn windowed(betas: &[f64], values: &[f64], window: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    betas
        .iter()
        .zip(values)
        .filter(|(b, v)| **b >= window.0 && **b <= window.1 && v.is_finite())
        .map(|(b, v)| (*b, *v))
        .unzip()
}

fn need_points(n: usize, at_least: usize) -> Result<()> {
    if n < at_least {
        return Err(Error::invalid(format!(
            "fit window holds {n} usable points, need at least {at_least}"
        )));
    }
    Ok(())
}

pub fn fit_log_beta_slope(betas: &[f64], values: &[f64], window: (f64, f64)) -> Result<FitReport> {
    let (b, v) = windowed(betas, values, window);
    need_points(b.len(), 2)?;
    let lx: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let f = ols(&lx, &v);
    Ok(FitReport {
        kind: FitKind::LogBetaSlope,
        coefficient: f.slope,
        r_squared: f.r_squared,
        window,
    })
}

pub fn fit_exp_rate(betas: &[f64], values: &[f64], window: (f64, f64)) -> Result<FitReport> {
    let (b, v): (Vec<f64>, Vec<f64>) = {
        let (b, v) = windowed(betas, values, window);
        b.into_iter().zip(v).filter(|(_, v)| *v > 0.0).unzip()
    };
    need_points(b.len(), 2)?;
    let lv: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let f = ols(&b, &lv);
    Ok(FitReport {
        kind: FitKind::ExpRate,
        coefficient: -f.slope,
        r_squared: f.r_squared,
        window,
    })
}

/// Polynomial extrapolation of `g(beta) = I / beta^2` in the variable
/// `beta^2` to `beta = 0` (Neville's scheme; Richardson extrapolation for
/// halved temperatures). `r_squared` measures the linear fit of `g` against
/// `beta^2`.
pub fn fit_high_temperature(
    betas: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<FitReport> {
    let (b, v) = windowed(betas, values, window);
    need_points(b.len(), 2)?;
    let x: Vec<f64> = b.iter().map(|t| t * t).collect();
    let g: Vec<f64> = v.iter().zip(&x).map(|(i, x)| i / x).collect();
    let line = ols(&x, &g);
    Ok(FitReport {
        kind: FitKind::QuadraticCoeff,
        coefficient: neville_at_zero(&x, &g),
        r_squared: line.r_squared,
        window,
    })
}

/// Value at 0 of the interpolating polynomial through `(x_i, y_i)`.
pub fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (x[i], x[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}
