//! One function per subcommand. Each validates its inputs up front, runs the
//! computation, and renders the result; nothing is written here.

use serde_json::{json, Value};

use ffmi_core::exact::{exact_with_bounds, mutual_information_exact, RingGeometry};
use ffmi_core::fit::FitReport;
use ffmi_core::fock::{fock_space_crosscheck, MAX_FOCK_SITES};
use ffmi_core::scan::{
    fit_temperature_scan, geometric_grid, kernel_scan, linear_grid, size_scan, temperature_scan,
};
use ffmi_core::torus::{mutual_info_torus_capped, TorusSpec, DEFAULT_MAX_MODES};
use ffmi_core::widom::mutual_info_asymptotic;
use ffmi_core::{ModelSpec, ThermalSymbol};

use crate::args::{Command, Flags, Format, Spacing};
use crate::output::{json_text, num, Cell, Table};
use crate::CliError;

/// Rendered output plus an error to report after it has been written, for
/// commands whose data stays useful when a final step fails.
pub struct Outcome {
    pub text: String,
    pub deferred: Option<CliError>,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Self {
            text,
            deferred: None,
        }
    }
}

pub fn run(command: &Command, flags: &Flags) -> Result<Outcome, CliError> {
    match command {
        Command::Exact(_) => exact(flags).map(Into::into),
        Command::Asymptotic(_) => asymptotic(flags).map(Into::into),
        Command::Kernel(_) => kernel(flags).map(Into::into),
        Command::ScanTemperature(_) => scan_temperature(flags),
        Command::ScanSize(_) => scan_size(flags).map(Into::into),
        Command::Torus(_) => torus(flags).map(Into::into),
        Command::Bounds(_) => bounds(flags).map(Into::into),
        Command::Crosscheck(_) => crosscheck(flags).map(Into::into),
    }
}

fn couplings_json(model: &ModelSpec) -> Value {
    Value::Array(model.couplings().iter().map(|&v| num(v)).collect())
}

/// A one-record result as a JSON object or a one-row CSV table.
fn single(
    format: Format,
    fields: Vec<(&'static str, Cell)>,
    extra: Vec<(&'static str, Value)>,
) -> String {
    let (columns, row): (Vec<_>, Vec<_>) = fields.into_iter().unzip();
    let mut table = Table::new(columns);
    table.push(row);
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut record = table.records().remove(0);
            let obj = record.as_object_mut().expect("records are objects");
            for (k, v) in extra {
                obj.insert(k.into(), v);
            }
            json_text(&record)
        }
    }
}

fn exact(flags: &Flags) -> Result<String, CliError> {
    let model = flags.model()?;
    let thermal = flags.thermal()?;
    let geom = flags.ring()?;
    let r = mutual_information_exact(&ThermalSymbol::new(model.clone(), thermal), geom)?;
    Ok(single(
        flags.format_or(Format::Json),
        vec![
            ("s_A", r.s_a.into()),
            ("s_B", r.s_b.into()),
            ("s_total", r.s_total.into()),
            ("mi", r.mi.into()),
            ("N", r.n.into()),
            ("L", r.l.into()),
            ("beta", r.beta.into()),
            ("alpha", r.alpha.into()),
        ],
        vec![("couplings", couplings_json(&model))],
    ))
}

fn asymptotic(flags: &Flags) -> Result<String, CliError> {
    let model = flags.model()?;
    let thermal = flags.thermal()?;
    let cfg = flags.quadrature()?;
    let r = mutual_info_asymptotic(&ThermalSymbol::new(model.clone(), thermal), &cfg)?;
    Ok(single(
        flags.format_or(Format::Json),
        vec![
            ("value", r.value.into()),
            ("grid_used", r.grid_used.into()),
            ("est_error", r.est_error.into()),
            ("beta", thermal.beta.into()),
            ("alpha", thermal.alpha.into()),
        ],
        vec![("couplings", couplings_json(&model))],
    ))
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => json_text(&Value::Array(table.records())),
    }
}

fn kernel(flags: &Flags) -> Result<String, CliError> {
    let symbol = ThermalSymbol::new(flags.model()?, flags.thermal()?);
    let cfg = flags.quadrature()?;
    let orders = flags
        .n_kernel
        .clone()
        .unwrap_or_else(|| (0..=8).map(|p| 1 << p).collect());
    if orders.is_empty() || orders.contains(&0) {
        return Err(CliError::Usage(
            "--n-kernel needs one or more positive orders".into(),
        ));
    }
    let mut table = Table::new(vec!["n_kernel", "value", "delta"]);
    for row in kernel_scan(&symbol, &orders, &cfg)? {
        table.push(vec![
            row.n_kernel.into(),
            row.value.into(),
            row.delta.into(),
        ]);
    }
    Ok(render(&table, flags.format_or(Format::Csv)))
}

fn beta_grid(flags: &Flags) -> Result<Vec<f64>, CliError> {
    if let Some(b) = &flags.betas {
        if flags.beta_min.is_some() || flags.beta_max.is_some() {
            return Err(CliError::Usage(
                "give either --betas or --beta-min/--beta-max".into(),
            ));
        }
        if b.is_empty() {
            return Err(CliError::Usage("--betas is empty".into()));
        }
        return Ok(b.clone());
    }
    let (Some(lo), Some(hi)) = (flags.beta_min, flags.beta_max) else {
        return Err(CliError::Usage(
            "a temperature scan needs --betas or both --beta-min and --beta-max".into(),
        ));
    };
    let count = flags.beta_count.unwrap_or(9);
    Ok(match flags.spacing.unwrap_or(Spacing::Geometric) {
        Spacing::Geometric => geometric_grid(lo, hi, count)?,
        Spacing::Linear => linear_grid(lo, hi, count)?,
    })
}

fn fit_json(fit: &FitReport) -> Value {
    json!({
        "kind": fit.kind,
        "coefficient": num(fit.coefficient),
        "r_squared": num(fit.r_squared),
        "window": [num(fit.window.0), num(fit.window.1)],
    })
}

fn scan_temperature(flags: &Flags) -> Result<Outcome, CliError> {
    let model = flags.model()?;
    let alpha = flags.alpha();
    let cfg = flags.quadrature()?;
    let betas = beta_grid(flags)?;
    // validates every beta before any quadrature runs
    for &b in &betas {
        ffmi_core::ThermalParams::new(b, alpha)?;
    }
    let ring = flags.n.map(|_| flags.ring()).transpose()?;
    let window = match (flags.fit_min, flags.fit_max) {
        (None, None) => None,
        (lo, hi) => {
            let lo = lo.unwrap_or(f64::NEG_INFINITY);
            let hi = hi.unwrap_or(f64::INFINITY);
            if !(lo <= hi) {
                return Err(CliError::Usage(format!("empty fit window [{lo}, {hi}]")));
            }
            Some((lo, hi))
        }
    };
    if window.is_some() && flags.fit.is_none() {
        return Err(CliError::Usage("--fit-min/--fit-max need --fit".into()));
    }

    let rows = temperature_scan(&model, alpha, &betas, ring, &cfg)?;
    let mut columns = vec![
        "beta",
        "mi_asymptotic",
        "mi_exact",
        "lower_bound",
        "upper_bound",
        "est_error",
    ];
    if flags.timing {
        columns.push("wall_time_ms");
    }
    columns.push("error");
    let mut table = Table::new(columns);
    for r in &rows {
        let mut cells: Vec<Cell> = vec![
            r.beta.into(),
            r.mi_asymptotic.into(),
            r.mi_exact.into(),
            r.lower_bound.into(),
            r.upper_bound.into(),
            r.est_error.into(),
        ];
        if flags.timing {
            cells.push(r.wall_time_ms.into());
        }
        cells.push(r.error.clone().into());
        table.push(cells);
    }

    let fit = flags
        .fit
        .map(|kind| fit_temperature_scan(&rows, kind.into(), window));
    let format = flags.format_or(Format::Csv);
    let (fit_value, deferred) = match fit {
        None => (None, None),
        Some(Ok(f)) => (Some(fit_json(&f)), None),
        Some(Err(e)) => (None, Some(CliError::from(e))),
    };
    let text = match format {
        Format::Csv => {
            if let Some(f) = &fit_value {
                eprintln!("fit {f}");
            }
            table.to_csv()
        }
        Format::Json => {
            let mut obj = json!({ "rows": table.records() });
            if let Some(f) = fit_value {
                obj["fit"] = f;
            }
            json_text(&obj)
        }
    };
    Ok(Outcome { text, deferred })
}

fn size_list(flags: &Flags) -> Result<Vec<usize>, CliError> {
    if let Some(s) = &flags.sizes {
        if s.is_empty() {
            return Err(CliError::Usage("--sizes is empty".into()));
        }
        return Ok(s.clone());
    }
    let (Some(lo), Some(hi)) = (flags.n_min, flags.n_max) else {
        return Err(CliError::Usage(
            "a size scan needs --sizes or both --N-min and --N-max".into(),
        ));
    };
    let step = flags.n_step.unwrap_or(2);
    if step == 0 || lo > hi {
        return Err(CliError::Usage(format!(
            "empty size range {lo}..={hi} step {step}"
        )));
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn scan_size(flags: &Flags) -> Result<String, CliError> {
    let symbol = ThermalSymbol::new(flags.model()?, flags.thermal()?);
    let cfg = flags.quadrature()?;
    let q = flags.q();
    let sizes = size_list(flags)?;
    for &n in &sizes {
        RingGeometry::new(n, q)?;
    }
    let mut table = Table::new(vec!["N", "e_A", "mi_exact", "mi_asymptotic", "gap"]);
    for r in size_scan(&symbol, q, &sizes, &cfg)? {
        table.push(vec![
            r.n.into(),
            r.e_a.into(),
            r.mi_exact.into(),
            r.mi_asymptotic.into(),
            r.gap.into(),
        ]);
    }
    Ok(render(&table, flags.format_or(Format::Csv)))
}

fn torus_spec(flags: &Flags, dim: usize, m: usize) -> Result<TorusSpec, CliError> {
    Ok(match &flags.couplings {
        Some(_) => TorusSpec::embed_chain(dim, m, &flags.model()?)?,
        None => TorusSpec::tight_binding(dim, m, flags.a.unwrap_or(0.0), flags.b.unwrap_or(1.0))?,
    })
}

fn torus(flags: &Flags) -> Result<String, CliError> {
    flags.model()?;
    let thermal = flags.thermal()?;
    let cfg = flags.quadrature()?;
    let dim = flags.dim.unwrap_or(2);
    let cap = flags.max_modes.unwrap_or(DEFAULT_MAX_MODES);
    let widths = match (&flags.widths, flags.m) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --M or --widths".into())),
        (Some(w), None) if !w.is_empty() => w.clone(),
        (Some(_), None) => return Err(CliError::Usage("--widths is empty".into())),
        (None, m) => vec![m.unwrap_or(1)],
    };
    let specs = widths
        .iter()
        .map(|&m| {
            let spec = torus_spec(flags, dim, m)?;
            if spec.mode_count() > cap {
                return Err(CliError::Usage(format!(
                    "width {m} gives {} transverse modes, above --max-modes {cap}",
                    spec.mode_count()
                )));
            }
            Ok(spec)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    if flags.widths.is_some() {
        let mut table = Table::new(vec!["M", "total", "per_width"]);
        for spec in &specs {
            let r = mutual_info_torus_capped(spec, thermal, &cfg, cap)?;
            table.push(vec![
                spec.width().into(),
                r.total.into(),
                (r.total / spec.mode_count() as f64).into(),
            ]);
        }
        return Ok(render(&table, flags.format_or(Format::Csv)));
    }

    let spec = &specs[0];
    let r = mutual_info_torus_capped(spec, thermal, &cfg, cap)?;
    let label = |k: &[usize]| k.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    match flags.format_or(Format::Json) {
        Format::Csv => {
            let mut table = Table::new(vec!["mode", "value", "grid_used", "est_error"]);
            for md in &r.modes {
                table.push(vec![
                    Cell::Text(label(&md.index)),
                    md.value.into(),
                    md.grid_used.into(),
                    md.est_error.into(),
                ]);
            }
            Ok(table.to_csv())
        }
        Format::Json => {
            let modes: Vec<Value> = r
                .modes
                .iter()
                .map(|md| {
                    json!({
                        "k": md.index,
                        "couplings": md.couplings.iter().map(|&v| num(v)).collect::<Vec<_>>(),
                        "value": num(md.value),
                        "grid_used": md.grid_used,
                        "est_error": num(md.est_error),
                    })
                })
                .collect();
            Ok(json_text(&json!({
                "dim": dim,
                "M": spec.width(),
                "beta": num(thermal.beta),
                "alpha": num(thermal.alpha),
                "total": num(r.total),
                "modes": modes,
            })))
        }
    }
}

fn bounds(flags: &Flags) -> Result<String, CliError> {
    if flags.alpha() != 1.0 {
        return Err(CliError::Usage(
            "purity bounds apply to the von-Neumann entropy only (alpha = 1)".into(),
        ));
    }
    let symbol = ThermalSymbol::new(flags.model()?, flags.thermal()?);
    let geom = flags.ring()?;
    let (mi, b) = exact_with_bounds(&symbol, geom)?;
    Ok(single(
        flags.format_or(Format::Json),
        vec![
            ("lower", b.lower.into()),
            ("upper", b.upper.into()),
            ("mi_exact", mi.mi.into()),
            ("N", geom.n.into()),
            ("L", geom.l.into()),
            ("beta", symbol.beta().into()),
        ],
        vec![],
    ))
}

fn crosscheck(flags: &Flags) -> Result<String, CliError> {
    let symbol = ThermalSymbol::new(flags.model()?, flags.thermal()?);
    let geom = flags.ring()?;
    if geom.n > MAX_FOCK_SITES {
        return Err(CliError::Usage(format!(
            "the Fock-space oracle handles N <= {MAX_FOCK_SITES}, got {}",
            geom.n
        )));
    }
    let c = fock_space_crosscheck(&symbol, geom.n, geom.l)?;
    Ok(single(
        flags.format_or(Format::Json),
        vec![
            ("mi_fock", c.mi_fock.into()),
            ("mi_gaussian", c.mi_gaussian.into()),
            ("abs_diff", (c.mi_fock - c.mi_gaussian).abs().into()),
            ("N", geom.n.into()),
            ("L", geom.l.into()),
            ("beta", symbol.beta().into()),
            ("alpha", symbol.alpha().into()),
        ],
        vec![],
    ))
}
