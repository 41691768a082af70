//! Command-line schema, config files and the resolved-config echo.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

const BOOL_FLAGS: [&str; 5] = ["--dense-check", "--help", "-h", "--version", "-V"];

#[derive(Parser, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(name = "trapspectra", version, about = "Spectral and Monte Carlo tools for the mean-field trap model")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    #[serde(flatten)]
    pub global: Global,
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Global {
    /// key=value file (or a JSON config echo); flags on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed; a fresh one is generated and echoed when absent.
    #[arg(long, global = true, env = "TRAPSPECTRA_SEED")]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    /// Relative tolerance of the secular root solve.
    #[arg(long, global = true, default_value_t = 1e-14)]
    pub tol: f64,
    /// Truncation tolerance for contours.
    #[arg(long, global = true, default_value_t = 1e-15)]
    pub eps: f64,
    /// Gauss-Jacobi nodes per panel on the branch cut.
    #[arg(long, global = true, default_value_t = 16)]
    pub quad_order: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Eigenvalues and spectral weights of the generator.
    Spectrum(SpectrumArgs),
    /// Pi(theta t_w, t_w) on a theta grid.
    Aging(AgingArgs),
    /// Finite-N correlators on a t grid.
    Corr(CorrArgs),
    /// Monte Carlo estimators.
    Mc(McArgs),
    /// Grand-canonical landscapes in the three scaling regimes.
    Ppp(PppArgs),
    /// Bromwich inversion of a Laplace transform.
    Tauberian(TauberianArgs),
    /// Average rate over the smallest rate gap.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LandscapeArgs {
    /// Number of sites of a sampled canonical landscape.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Explicit rates, comma separated; overrides sampling.
    #[arg(long, value_parser = parse_list)]
    pub rates: Option<String>,
    /// Landscape file (JSON as written by the library, or CSV of rates).
    #[arg(long)]
    pub landscape: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub landscape: LandscapeArgs,
    /// Add the eigenvalues of a dense symmetric solve as a column.
    #[arg(long)]
    pub dense_check: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Limit,
    Spectral,
    Contour,
    Mc,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct AgingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub landscape: LandscapeArgs,
    /// Comma list, or lo:hi:n for n geometric points.
    #[arg(long, default_value = "0.2:5:9", value_parser = parse_grid_str)]
    pub theta_grid: String,
    #[arg(long, default_value_t = 1000.0)]
    pub tw: f64,
    #[arg(long, value_enum, default_value = "limit")]
    pub method: Method,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// Two-time correlation Pi_N(t, t_w).
    Pi,
    /// E 1{x_N(t) >= delta}.
    Deep,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CorrArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub landscape: LandscapeArgs,
    #[arg(long, default_value = "0.5,5,50", value_parser = parse_grid_str)]
    pub t_grid: String,
    #[arg(long, default_value_t = 5.0)]
    pub tw: f64,
    #[arg(long, value_enum, default_value = "spectral")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "pi")]
    pub quantity: Quantity,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Pi,
    Pi1,
    Pi2,
    Txdist,
    Survival,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub landscape: LandscapeArgs,
    #[arg(long, value_enum, default_value = "pi")]
    pub estimator: Estimator,
    /// Lag times (pi, pi1, pi2) or observation times (txdist).
    #[arg(long, default_value = "1,10,100", value_parser = parse_grid_str)]
    pub t_grid: String,
    #[arg(long, default_value_t = 100.0)]
    pub tw: f64,
    /// Deep-trap threshold for pi1, pi2 and survival.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Confinement horizons for survival.
    #[arg(long, default_value = "1,10", value_parser = parse_grid_str)]
    pub u_grid: String,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Fixed time unit tau0.
    Fixed,
    /// tau0 = e^E.
    Canonical,
    /// tau0 -> 0 at fixed coverage tau0 e^-E.
    Zero,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PppQuantity {
    Pi,
    Windows,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PppArgs {
    #[arg(long, value_enum, default_value = "canonical")]
    pub regime: Regime,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Energy threshold E (fixed and canonical regimes).
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Time unit (fixed and zero regimes).
    #[arg(long)]
    pub tau0: Option<f64>,
    /// tau0 e^-E in the zero regime.
    #[arg(long, default_value_t = 1000.0)]
    pub coverage: f64,
    #[arg(long, value_enum, default_value = "pi")]
    pub quantity: PppQuantity,
    #[arg(long, default_value = "0.2:5:9", value_parser = parse_grid_str)]
    pub theta_grid: String,
    #[arg(long, default_value_t = 1000.0)]
    pub tw: f64,
    /// Windows lo:hi, comma separated.
    #[arg(long, default_value = "0.5:1,1:2,2:4", value_parser = parse_windows_str)]
    pub windows: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// b omega^-beta.
    Power,
    /// Laplace transform of the aging limit at (alpha, theta).
    Pihat,
    /// Laplace transform of the deep-trap occupation 1{x >= delta} at alpha.
    Hhat,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TauberianArgs {
    #[arg(long, value_enum, default_value = "power")]
    pub transform: Transform,
    /// Exponent beta (defaults: 0.5 for power, 1 for pihat, alpha for hhat).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value = "1,10,100", value_parser = parse_grid_str)]
    pub s_grid: String,
    /// Tabulate omega^beta G_hat(omega) on this grid instead of inverting.
    #[arg(long, value_parser = parse_grid_str)]
    pub omega_grid: Option<String>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DiagnoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub landscape: LandscapeArgs,
}

/// Echo written alongside every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Echo {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub cli: Cli,
}

impl Echo {
    pub fn new(cli: &Cli) -> Self {
        Self { tool: "trapspectra".into(), version: env!("CARGO_PKG_VERSION").into(), cli: cli.clone() }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

pub fn parse_list(s: &str) -> Result<String, String> {
    parse_floats(s).map(|_| s.to_string())
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {p:?}")))
        .collect()
}

fn parse_grid_str(s: &str) -> Result<String, String> {
    parse_grid(s).map(|_| s.to_string())
}

/// `a,b,c` or `lo:hi:n` (geometric, inclusive).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad grid start {lo:?}"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad grid end {hi:?}"))?;
            let n: usize = n.trim().parse().map_err(|_| format!("bad grid size {n:?}"))?;
            if !(lo > 0.0 && hi > lo && hi.is_finite()) || n == 0 {
                return Err(format!("geometric grid needs 0 < lo < hi and n >= 1, got {s}"));
            }
            Ok(trapspectra::numeric::geomspace(lo, hi, n))
        }
        [_] => parse_floats(s),
        _ => Err(format!("grid must be a comma list or lo:hi:n, got {s}")),
    }
}

fn parse_windows_str(s: &str) -> Result<String, String> {
    parse_windows(s).map(|_| s.to_string())
}

pub fn parse_windows(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',')
        .map(|w| {
            let (lo, hi) = w.split_once(':').ok_or_else(|| format!("window must be lo:hi, got {w:?}"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad window start {lo:?}"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad window end {hi:?}"))?;
            Ok((lo, hi))
        })
        .collect()
}

/// Key/value pairs from a config file: plain `key = value` lines, or a JSON echo.
pub fn read_config(text: &str) -> Result<Vec<(String, String)>, String> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| format!("config JSON: {e}"))?;
        let obj = v.as_object().ok_or("config JSON must be an object")?;
        return Ok(json_pairs(obj));
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn json_pairs(obj: &Map<String, Value>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (k, v) in obj {
        if k == "tool" || k == "version" {
            continue;
        }
        let s = match v {
            Value::Null => continue,
            Value::Bool(b) => b.to_string(),
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.push((k.clone(), s));
    }
    out
}

/// Index of the subcommand token in `args` (program name excluded).
fn find_subcommand(args: &[String]) -> Option<usize> {
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if a.starts_with('-') {
            if !a.contains('=') && !BOOL_FLAGS.contains(&a.as_str()) {
                i += 1;
            }
        } else {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Splices config-file entries between the subcommand and the user's own
/// flags, so that later (user) occurrences override them.
pub fn merge_argv(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some((prog, rest)) = argv.split_first() else {
        return Ok(argv);
    };
    let Some(path) = config_path(rest) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let pairs = read_config(&text)?;
    let mut user: Vec<String> = rest.to_vec();
    let sub = match find_subcommand(&user) {
        Some(i) => user.remove(i),
        None => pairs
            .iter()
            .find(|(k, _)| k == "command")
            .map(|(_, v)| v.clone())
            .ok_or("no subcommand given on the command line or in the config")?,
    };
    let mut out = vec![prog.clone(), sub];
    for (k, v) in pairs {
        if k == "command" || k == "config" {
            continue;
        }
        let flag = format!("--{k}");
        match v.as_str() {
            "true" if BOOL_FLAGS.contains(&flag.as_str()) => out.push(flag),
            "false" if BOOL_FLAGS.contains(&flag.as_str()) => {}
            _ => out.push(format!("{flag}={v}")),
        }
    }
    out.extend(user);
    Ok(out)
}
