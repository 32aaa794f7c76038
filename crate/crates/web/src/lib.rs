//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations are exported: the thermal symbol over the Brillouin
//! zone, the asymptotic mutual information over a range of inverse
//! temperatures, and the double-integral integrand on a square grid. Each
//! has a plain Rust twin so it can be tested natively.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use ffmi_core::entropy::EntropyKind;
use ffmi_core::scan::geometric_grid;
use ffmi_core::widom::{mi_integrand, mutual_info_asymptotic};
use ffmi_core::{ModelSpec, QuadratureConfig, ThermalParams, ThermalSymbol};

/// Heatmaps above this many points per side are refused.
pub const MAX_HEATMAP_SIDE: usize = 512;

fn symbol(couplings: &[f64], beta: f64, alpha: f64) -> Result<ThermalSymbol, String> {
    let model = ModelSpec::new(couplings.to_vec()).map_err(|e| e.to_string())?;
    let thermal = ThermalParams::new(beta, alpha).map_err(|e| e.to_string())?;
    Ok(ThermalSymbol::new(model, thermal))
}

fn angles(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| -PI + 2.0 * PI * (i as f64 + 0.5) / points as f64)
}

/// `[θ_0, ε_0, λ_0, θ_1, ε_1, λ_1, ...]` at `points` midpoints of `[-π, π)`.
pub fn symbol_curve_values(
    couplings: &[f64],
    beta: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if points == 0 {
        return Err("need at least one point".into());
    }
    let s = symbol(couplings, beta, 1.0)?;
    Ok(angles(points)
        .flat_map(|t| [t, s.model.dispersion(t), s.eval(t)])
        .collect())
}

/// `[β_0, I_0, β_1, I_1, ...]` on a geometric grid; a point whose quadrature
/// fails carries `NaN`.
pub fn mi_versus_beta_values(
    couplings: &[f64],
    alpha: f64,
    beta_min: f64,
    beta_max: f64,
    count: usize,
    tol: f64,
) -> Result<Vec<f64>, String> {
    let betas = geometric_grid(beta_min, beta_max, count).map_err(|e| e.to_string())?;
    let cfg = QuadratureConfig {
        tol,
        ..Default::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * betas.len());
    for beta in betas {
        let s = symbol(couplings, beta, alpha)?;
        let value = mutual_info_asymptotic(&s, &cfg).map_or(f64::NAN, |r| r.value);
        out.extend([beta, value]);
    }
    Ok(out)
}

/// Row-major `side x side` samples of the integrand, `θ` down and `φ`
/// across, both on midpoints of `[-π, π)`.
pub fn integrand_grid(
    couplings: &[f64],
    beta: f64,
    alpha: f64,
    side: usize,
) -> Result<Vec<f64>, String> {
    if side == 0 || side > MAX_HEATMAP_SIDE {
        return Err(format!("heatmap side must be in 1..={MAX_HEATMAP_SIDE}"));
    }
    let s = symbol(couplings, beta, alpha)?;
    let kind = EntropyKind::new(alpha).map_err(|e| e.to_string())?;
    let axis: Vec<f64> = angles(side).collect();
    Ok(axis
        .iter()
        .flat_map(|&t| axis.iter().map(move |&p| (t, p)))
        .map(|(t, p)| mi_integrand(&s, kind, t, p))
        .collect())
}

#[wasm_bindgen]
pub fn symbol_curve(couplings: &[f64], beta: f64, points: usize) -> Result<Vec<f64>, JsError> {
    symbol_curve_values(couplings, beta, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mi_versus_beta(
    couplings: &[f64],
    alpha: f64,
    beta_min: f64,
    beta_max: f64,
    count: usize,
    tol: f64,
) -> Result<Vec<f64>, JsError> {
    mi_versus_beta_values(couplings, alpha, beta_min, beta_max, count, tol)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn integrand_heatmap(
    couplings: &[f64],
    beta: f64,
    alpha: f64,
    side: usize,
) -> Result<Vec<f64>, JsError> {
    integrand_grid(couplings, beta, alpha, side).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_layout() {
        let c = symbol_curve_values(&[0.0, 1.0], 2.0, 4).unwrap();
        assert_eq!(c.len(), 12);
        for triple in c.chunks(3) {
            let (t, e, l) = (triple[0], triple[1], triple[2]);
            assert!((e - 2.0 * t.cos()).abs() < 1e-14);
            assert!((l + (e).tanh()).abs() < 1e-14);
        }
        assert!(symbol_curve_values(&[], 1.0, 4).is_err());
    }

    #[test]
    fn mi_curve_matches_direct_evaluation() {
        let v = mi_versus_beta_values(&[1.0, 1.0], 1.0, 0.5, 4.0, 4, 1e-10).unwrap();
        assert_eq!(v.len(), 8);
        let s = symbol(&[1.0, 1.0], 4.0, 1.0).unwrap();
        let direct = mutual_info_asymptotic(&s, &QuadratureConfig::default())
            .unwrap()
            .value;
        assert_eq!(v[6], 4.0);
        assert!((v[7] - direct).abs() < 1e-9);
        assert!(v.chunks(2).all(|p| p[1] > 0.0));
    }

    #[test]
    fn heatmap_is_symmetric() {
        let side = 16;
        let g = integrand_grid(&[0.3, 1.0], 1.5, 1.0, side).unwrap();
        assert_eq!(g.len(), side * side);
        for i in 0..side {
            for j in 0..side {
                assert!((g[i * side + j] - g[j * side + i]).abs() < 1e-12);
            }
        }
        assert!(integrand_grid(&[0.3, 1.0], 1.5, 1.0, MAX_HEATMAP_SIDE + 1).is_err());
    }
}
