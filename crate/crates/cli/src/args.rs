//! Command-line flags, the optional JSON config file, and their merge.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use ffmi_core::exact::RingGeometry;
use ffmi_core::scan::TemperatureFit;
use ffmi_core::{ModelSpec, QuadratureConfig, ThermalParams};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "ffmi",
    version,
    about = "Mutual information of thermal free-fermion chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact mutual information of the bisected ring (dense eigensolves).
    Exact(Flags),
    /// Large-N double-integral value.
    Asymptotic(Flags),
    /// Kernel-truncated values against the closed form, per truncation order.
    Kernel(Flags),
    /// Sweep over inverse temperature, with optional scaling fit.
    ScanTemperature(Flags),
    /// Finite-size error and exact-versus-asymptotic gap per ring size.
    ScanSize(Flags),
    /// Slab on a D-dimensional torus, one width or a sweep over widths.
    Torus(Flags),
    /// Purity lower and upper bounds around the exact value.
    Bounds(Flags),
    /// Brute-force Fock-space oracle against the Gaussian formula.
    Crosscheck(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Exact(f)
            | Command::Asymptotic(f)
            | Command::Kernel(f)
            | Command::ScanTemperature(f)
            | Command::ScanSize(f)
            | Command::Torus(f)
            | Command::Bounds(f)
            | Command::Crosscheck(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitArg {
    High,
    LowCritical,
    LowGapped,
}

impl From<FitArg> for TemperatureFit {
    fn from(f: FitArg) -> Self {
        match f {
            FitArg::High => TemperatureFit::High,
            FitArg::LowCritical => TemperatureFit::LowCritical,
            FitArg::LowGapped => TemperatureFit::LowGapped,
        }
    }
}

/// Every flag, shared by all subcommands. A config file may set any of them
/// under the same long name; flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Flags {
    /// On-site energy of the XX chain.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Nearest-neighbour hopping of the XX chain.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// General couplings v1,v2,... (v1 on-site, v_{k+1} at distance k).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(deserialize_with = "list")]
    pub couplings: Option<Vec<f64>>,
    /// Inverse temperature.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Renyi order; exactly 1 selects von Neumann.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Ring size (even).
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Block fraction; the block holds ceil(qN) sites.
    #[arg(long)]
    pub q: Option<f64>,
    /// Starting quadrature points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Convergence tolerance between grid doublings.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest quadrature grid per axis.
    #[arg(long)]
    pub max_grid: Option<usize>,
    /// Worker threads for row-parallel work.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat JSON object keyed by long flag names.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Explicit inverse temperatures for a scan.
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "list")]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub beta_min: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub beta_count: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
    /// Scaling fit applied to a temperature scan.
    #[arg(long, value_enum)]
    pub fit: Option<FitArg>,
    /// Lower end of the fit window in beta.
    #[arg(long)]
    pub fit_min: Option<f64>,
    /// Upper end of the fit window in beta.
    #[arg(long)]
    pub fit_max: Option<f64>,
    /// Add a wall_time_ms column (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,

    /// Ring sizes for a size scan.
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "list")]
    pub sizes: Option<Vec<usize>>,
    #[arg(long = "N-min")]
    #[serde(rename = "N-min")]
    pub n_min: Option<usize>,
    #[arg(long = "N-max")]
    #[serde(rename = "N-max")]
    pub n_max: Option<usize>,
    #[arg(long = "N-step")]
    #[serde(rename = "N-step")]
    pub n_step: Option<usize>,

    /// Kernel truncation orders.
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "list")]
    pub n_kernel: Option<Vec<usize>>,

    /// Torus dimension D.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Transverse torus width.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// Transverse widths for a torus sweep.
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "list")]
    pub widths: Option<Vec<usize>>,
    #[arg(long)]
    pub max_modes: Option<usize>,

    /// Accepted for scripts that ask for it; every command is deterministic.
    #[arg(long)]
    pub seedless: bool,
}

/// A list given either as a JSON array or as the comma-separated string
/// the command line takes.
fn list<'de, D, T>(de: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr + Deserialize<'de>,
    T::Err: fmt::Display,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw<T> {
        Items(Vec<T>),
        Text(String),
    }
    match Option::<Raw<T>>::deserialize(de)? {
        None => Ok(None),
        Some(Raw::Items(v)) => Ok(Some(v)),
        Some(Raw::Text(s)) => s
            .split(',')
            .map(|p| p.trim().parse::<T>().map_err(de::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
    }
}

impl Flags {
    /// Overlays the command-line flags on the config file named by
    /// `--config`, if any.
    pub fn resolve(&self) -> Result<Flags, CliError> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let mut merged = read_config(path)?;
        let given = serde_json::to_value(self).expect("flags serialize");
        for (k, v) in given.as_object().expect("flags are an object") {
            if !(v.is_null() || v == &Value::Bool(false)) {
                merged.insert(k.clone(), v.clone());
            }
        }
        serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn model(&self) -> Result<ModelSpec, CliError> {
        if let Some(c) = &self.couplings {
            if self.a.is_some() || self.b.is_some() {
                return Err(CliError::Usage(
                    "give either --couplings or --a/--b, not both".into(),
                ));
            }
            return Ok(ModelSpec::new(c.clone())?);
        }
        Ok(ModelSpec::new(vec![
            self.a.unwrap_or(0.0),
            self.b.unwrap_or(1.0),
        ])?)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0)
    }

    pub fn beta(&self) -> Result<f64, CliError> {
        self.beta
            .ok_or_else(|| CliError::Usage("--beta is required".into()))
    }

    pub fn thermal(&self) -> Result<ThermalParams, CliError> {
        Ok(ThermalParams::new(self.beta()?, self.alpha())?)
    }

    pub fn q(&self) -> f64 {
        self.q.unwrap_or(0.5)
    }

    pub fn ring(&self) -> Result<RingGeometry, CliError> {
        let n = self
            .n
            .ok_or_else(|| CliError::Usage("--N is required".into()))?;
        Ok(RingGeometry::new(n, self.q())?)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let mut cfg = QuadratureConfig::default();
        if let Some(g) = self.grid {
            cfg.grid = g;
            cfg.max_grid = cfg.max_grid.max(g);
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(m) = self.max_grid {
            cfg.max_grid = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => {
            if map.contains_key("config") {
                return Err(CliError::Usage(
                    "a config file cannot name another config".into(),
                ));
            }
            Ok(map)
        }
        Ok(_) => Err(CliError::Usage(format!(
            "config {} must be a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}
