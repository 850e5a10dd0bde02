use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use krylov_core::catalog::{parameter_samples, SystemDefinition};
use krylov_core::numeric::{default_digits, parse_rational};
use krylov_core::{Mode, Scalar, SystemKind, SystemSpec};
use serde::Serialize;

pub const DEFAULT_SIZE: u32 = 5;
pub const DEFAULT_T_GRID: (&str, &str, usize) = ("0", "10", 101);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Moments,
    Lanczos,
    Complexity,
    Verify,
    HeisenbergCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Lanczos => "lanczos",
            Command::Complexity => "complexity",
            Command::Verify => "verify",
            Command::HeisenbergCheck => "heisenberg-check",
        }
    }

    fn needs_exponentials(self) -> bool {
        matches!(self, Command::Complexity | Command::HeisenbergCheck)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// System name, e.g. krawtchouk, q_racah, hermite.
    #[arg(long)]
    pub system: Option<String>,
    /// JSON system definition: {"kind", "N", "params", "mode", "precision"}.
    #[arg(long, conflicts_with_all = ["system", "size", "params"])]
    pub system_file: Option<PathBuf>,
    /// Size N of a finite system (default 5).
    #[arg(short = 'N', long = "size")]
    pub size: Option<u32>,
    /// Parameter as name=value; rationals as p/q. Unset parameters take the default sample.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// exact or bigreal.
    #[arg(long)]
    pub mode: Option<String>,
    /// Decimal digits for bigreal arithmetic (default from KRYLOV_PRECISION, else 50).
    #[arg(long)]
    pub precision: Option<u32>,
    /// Inverse temperature; required for infinite systems.
    #[arg(long)]
    pub beta: Option<String>,
    /// Number of even moments / Lanczos depth.
    #[arg(short = 'K', default_value_t = 6)]
    pub k: usize,
    /// Time grid start:stop:count.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Truncation of the energy representation for infinite systems.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Relative tail tolerance for thermal sums.
    #[arg(long)]
    pub tail_tol: Option<String>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    fn new(field: &'static str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.message)
    }
}

/// Fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub system: String,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub params: BTreeMap<String, String>,
    pub mode: String,
    pub precision: u32,
    pub beta: Option<String>,
    #[serde(rename = "K")]
    pub k: usize,
    pub t_grid: Option<(String, String, usize)>,
    pub n_max: Option<u32>,
    pub tail_tol: Option<String>,
    pub output: Option<String>,
    pub format: Format,
}

/// A validated configuration plus the objects it describes.
pub struct Resolved {
    pub config: RunConfig,
    pub spec: SystemSpec,
    pub beta: Option<Scalar>,
    pub times: Vec<Scalar>,
    pub tail_tol: Option<Scalar>,
}

impl RunConfig {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn csv_header(&self) -> String {
        format!("# config={}\n", serde_json::to_string(self).expect("config serializes"))
    }
}

pub fn resolve_precision(p: Option<u32>) -> Result<u32, ConfigError> {
    let digits = p.unwrap_or_else(default_digits);
    if digits < 20 {
        return Err(ConfigError::new(
            "precision",
            format!("{digits} digits is below the minimum of 20"),
        ));
    }
    Mode::bigreal(digits).map_err(|e| ConfigError::new("precision", e.to_string()))?;
    Ok(digits)
}

fn parse_mode(s: &str, digits: u32) -> Result<Mode, ConfigError> {
    match s.to_ascii_lowercase().as_str() {
        "exact" => Ok(Mode::Exact),
        "bigreal" => Mode::bigreal(digits).map_err(|e| ConfigError::new("precision", e.to_string())),
        other => Err(ConfigError::new(
            "mode",
            format!("unknown mode '{other}', expected exact or bigreal"),
        )),
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| ConfigError::new("param", format!("'{p}' is not of the form name=value")))?;
        let (k, v) = (k.trim(), v.trim());
        parse_rational(v).map_err(|e| ConfigError::new("param", format!("{k}: {e}")))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::new("param", format!("{k} given twice")));
        }
    }
    Ok(out)
}

fn parse_t_grid(s: &str) -> Result<(String, String, usize), ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts[..] else {
        return Err(ConfigError::new("t-grid", "expected start:stop:count"));
    };
    for x in [a, b] {
        parse_rational(x).map_err(|e| ConfigError::new("t-grid", format!("{x}: {e}")))?;
    }
    let count: usize = c
        .parse()
        .map_err(|_| ConfigError::new("t-grid", format!("count '{c}' is not a positive integer")))?;
    if count == 0 {
        return Err(ConfigError::new("t-grid", "count must be at least 1"));
    }
    Ok((a.to_string(), b.to_string(), count))
}

fn format_rational(s: &str) -> String {
    parse_rational(s)
        .map(|r| r.to_string())
        .unwrap_or_else(|_| s.to_string())
}

/// Resolves `args` for one system. `kind_override` is used by `verify --all`.
pub fn resolve(
    command: Command,
    args: &CommonArgs,
    kind_override: Option<SystemKind>,
) -> Result<Resolved, ConfigError> {
    let (system_name, size, mut params, mode_name, file_precision) = match (&args.system_file, kind_override) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("system-file", format!("{}: {e}", path.display())))?;
            let def = SystemDefinition::from_json(&text).map_err(|e| ConfigError::new("system-file", e.to_string()))?;
            (def.kind, def.n, def.params, Some(def.mode), def.precision)
        }
        (_, Some(kind)) => (
            kind.name().to_string(),
            args.size,
            parse_params(&args.params)?,
            None,
            None,
        ),
        (None, None) => {
            let s = args
                .system
                .clone()
                .ok_or_else(|| ConfigError::new("system", "--system is required"))?;
            (s, args.size, parse_params(&args.params)?, None, None)
        }
    };
    let kind = SystemKind::from_name(&system_name).map_err(|e| ConfigError::new("system", e.to_string()))?;
    let precision = resolve_precision(args.precision.or(file_precision))?;
    let mode_name = args.mode.clone().or(mode_name).unwrap_or_else(|| "bigreal".into());
    let mode = parse_mode(&mode_name, precision)?;
    if mode.is_exact() && !kind.is_finite() {
        return Err(ConfigError::new("mode", "mode=exact requires a finite discrete system"));
    }
    if mode.is_exact() && command.needs_exponentials() {
        return Err(ConfigError::new(
            "mode",
            format!(
                "mode=exact is not available for {}, which needs exponentials",
                command.name()
            ),
        ));
    }
    let size = match (kind.is_finite(), size) {
        (true, None) => Some(DEFAULT_SIZE),
        (true, Some(0)) => return Err(ConfigError::new("N", "N must be at least 1")),
        (false, Some(_)) => {
            return Err(ConfigError::new(
                "N",
                format!("{} is infinite and takes no N", kind.name()),
            ))
        }
        (_, n) => n,
    };
    if let Some(unknown) = params.keys().find(|k| !kind.param_names().contains(&k.as_str())) {
        return Err(ConfigError::new(
            "param",
            format!(
                "{} has no parameter '{unknown}' (expected {:?})",
                kind.name(),
                kind.param_names()
            ),
        ));
    }
    let defaults = parameter_samples(kind, size).remove(0);
    for (k, v) in defaults {
        params.entry(k).or_insert_with(|| v.to_string());
    }
    let params: BTreeMap<String, String> = params.into_iter().map(|(k, v)| (k, format_rational(&v))).collect();
    let exact: BTreeMap<_, _> = params
        .iter()
        .map(|(k, v)| (k.clone(), parse_rational(v).expect("validated above")))
        .collect();
    let spec = SystemSpec::new(kind, size, &exact, mode).map_err(|e| ConfigError::new("param", e.to_string()))?;

    let beta = match (kind.is_finite(), &args.beta) {
        (false, None) => {
            return Err(ConfigError::new(
                "beta",
                format!("--beta is required for {}", kind.name()),
            ))
        }
        (true, Some(_)) => {
            return Err(ConfigError::new(
                "beta",
                format!("{} is finite and takes no beta", kind.name()),
            ))
        }
        (false, Some(b)) => {
            let v = mode.parse(b).map_err(|e| ConfigError::new("beta", e.to_string()))?;
            if !v.is_positive() {
                return Err(ConfigError::new("beta", "beta must be positive"));
            }
            Some(v)
        }
        (true, None) => None,
    };
    if args.k == 0 {
        return Err(ConfigError::new("K", "K must be at least 1"));
    }
    let grid = match (&args.t_grid, command.needs_exponentials()) {
        (Some(g), _) => Some(parse_t_grid(g)?),
        (None, true) => Some((DEFAULT_T_GRID.0.into(), DEFAULT_T_GRID.1.into(), DEFAULT_T_GRID.2)),
        (None, false) => None,
    };
    let times = match &grid {
        Some((a, b, c)) => {
            let dm = if mode.is_exact() {
                Mode::bigreal(precision).expect("checked")
            } else {
                mode
            };
            let start = dm.parse(a).map_err(|e| ConfigError::new("t-grid", e.to_string()))?;
            let stop = dm.parse(b).map_err(|e| ConfigError::new("t-grid", e.to_string()))?;
            krylov_core::dynamics::linspace(&start, &stop, *c)
        }
        None => Vec::new(),
    };
    if let Some(n) = args.n_max {
        if kind.is_finite() {
            return Err(ConfigError::new("n-max", "truncation applies only to infinite systems"));
        }
        if n < 2 {
            return Err(ConfigError::new("n-max", "n-max must be at least 2"));
        }
    }
    let tail_tol = match &args.tail_tol {
        Some(t) => {
            let v = Mode::bigreal(precision)
                .expect("checked")
                .parse(t)
                .map_err(|e| ConfigError::new("tail-tol", e.to_string()))?;
            if !v.is_positive() {
                return Err(ConfigError::new("tail-tol", "tail tolerance must be positive"));
            }
            Some(v)
        }
        None => None,
    };
    let config = RunConfig {
        command,
        system: kind.name().to_string(),
        n: size,
        params,
        mode: if mode.is_exact() {
            "exact".into()
        } else {
            "bigreal".into()
        },
        precision,
        beta: args.beta.clone(),
        k: args.k,
        t_grid: grid,
        n_max: args.n_max,
        tail_tol: args.tail_tol.clone(),
        output: args.output.as_ref().map(|p| p.display().to_string()),
        format: args.format,
    };
    Ok(Resolved {
        config,
        spec,
        beta,
        times,
        tail_tol,
    })
}
