//! Flat `key = value` configuration with command-line overrides.
//!
//! Values use TOML scalar and array syntax (`n_sites = 400`,
//! `distances = [1, 2]`, `sweep_mode = "delta"`). On the command line the
//! quotes around strings may be dropped and lists may be written `1,2`.
//! Precedence: command defaults < config file < command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::Value;

use crate::meanfield::SolverOptions;
use crate::measures::OptimizerOptions;
use crate::model::ModelParams;
use crate::oracle::MAX_SITES;

use super::csv::fmt_f64;
use super::CliError;

/// Which parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Post-quench anisotropy `Δ_F`.
    Delta,
    /// Pre-quench field `h_I`.
    Field,
    /// Common anisotropy of a field quench `h_I → h_F`.
    Anisotropy,
}

impl SweepMode {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "delta" => Some(Self::Delta),
            "field" => Some(Self::Field),
            "anisotropy" => Some(Self::Anisotropy),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::Field => "field",
            Self::Anisotropy => "anisotropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ground,
    Quench,
    Sweep,
    Scaling,
    OracleCompare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ground => "ground",
            Self::Quench => "quench",
            Self::Sweep => "sweep",
            Self::Scaling => "scaling",
            Self::OracleCompare => "oracle-compare",
        }
    }
}

/// Every recognized key with its global default.
const DEFAULTS: &[(&str, &str)] = &[
    ("coupling_j", "1.0"),
    ("anisotropy", "1.0"),
    ("field", "0.0"),
    ("n_sites", "256"),
    ("delta_initial", "0.98"),
    ("delta_final", "1.0"),
    ("field_initial", "0.0"),
    ("field_final", "0.0"),
    ("t_max", "40.0"),
    ("dt", "0.02"),
    ("distances", "[1]"),
    ("sweep_mode", "\"delta\""),
    ("sweep_start", "0.2"),
    ("sweep_stop", "3.0"),
    ("sweep_step", "0.05"),
    ("sizes", "[100, 200, 400, 800]"),
    ("t_max_periods", "3.0"),
    ("mixing", "0.5"),
    ("tol", "1e-12"),
    ("max_iter", "10000"),
    ("restarts", "8"),
    ("seed", "25481509289"),
    ("n_theta", "65"),
    ("n_phi", "129"),
    ("refine_tol", "1e-7"),
    ("cusp_skip", "5.0"),
    ("cusp_prominence", "0.5"),
    ("output", "\"-\""),
    ("threads", "0"),
];

fn command_defaults(cmd: Command) -> &'static [(&'static str, &'static str)] {
    match cmd {
        Command::OracleCompare => &[
            ("n_sites", "8"),
            ("t_max", "20.0"),
            ("dt", "0.1"),
            ("distances", "[1, 2]"),
        ],
        _ => &[],
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub coupling_j: f64,
    pub anisotropy: f64,
    pub field: f64,
    pub n_sites: usize,
    pub delta_initial: f64,
    pub delta_final: f64,
    pub field_initial: f64,
    pub field_final: f64,
    pub t_max: f64,
    pub dt: f64,
    pub distances: Vec<usize>,
    pub sweep_mode: SweepMode,
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_step: f64,
    pub sizes: Vec<usize>,
    pub t_max_periods: f64,
    pub solver: SolverOptions,
    pub optimizer: OptimizerOptions,
    pub cusp_skip: f64,
    pub cusp_prominence: f64,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    /// Worker count; 0 uses the rayon default. Not part of the CSV header.
    pub threads: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_value(text: &str) -> Option<Value> {
    let doc = format!("v = {text}");
    doc.parse::<toml::Table>().ok().and_then(|mut t| t.remove("v"))
}

/// Parses a command-line `key=value`, accepting bare strings and `1,2` lists.
pub fn parse_override(arg: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{arg}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(config_err(format!("override `{arg}` has an empty key")));
    }
    let value = parse_value(raw)
        .or_else(|| {
            if raw.contains(',') {
                parse_value(&format!("[{raw}]"))
            } else {
                None
            }
        })
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Reads a flat config file. Nested tables are rejected.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, Value>, CliError> {
    let table: toml::Table = text.parse().map_err(|e| config_err(format!("malformed config: {e}")))?;
    let mut out = BTreeMap::new();
    for (k, v) in table {
        if v.is_table() {
            return Err(config_err(format!("config must be flat; `{k}` is a table")));
        }
        out.insert(k, v);
    }
    Ok(out)
}

struct Resolver {
    values: BTreeMap<String, Value>,
}

impl Resolver {
    fn get(&self, key: &str) -> &Value {
        &self.values[key]
    }

    fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v = match self.get(key) {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            other => return Err(config_err(format!("`{key}` must be a number, got {other}"))),
        };
        if !v.is_finite() {
            return Err(config_err(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    fn usize(&self, key: &str) -> Result<usize, CliError> {
        match self.get(key) {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            other => Err(config_err(format!(
                "`{key}` must be a non-negative integer, got {other}"
            ))),
        }
    }

    fn string(&self, key: &str) -> Result<String, CliError> {
        match self.get(key) {
            Value::String(s) => Ok(s.clone()),
            other => Err(config_err(format!("`{key}` must be a string, got {other}"))),
        }
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        let items = match self.get(key) {
            Value::Array(a) => a.clone(),
            Value::Integer(_) => vec![self.get(key).clone()],
            other => return Err(config_err(format!("`{key}` must be a list of integers, got {other}"))),
        };
        items
            .iter()
            .map(|v| match v {
                Value::Integer(i) if *i > 0 => Ok(*i as usize),
                other => Err(config_err(format!(
                    "`{key}` entries must be positive integers, got {other}"
                ))),
            })
            .collect()
    }
}

impl ExperimentConfig {
    /// Merges defaults, file values and overrides, then validates.
    pub fn resolve(
        command: Command,
        file: BTreeMap<String, Value>,
        overrides: Vec<(String, Value)>,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (k, v) in DEFAULTS.iter().chain(command_defaults(command)) {
            values.insert(k.to_string(), parse_value(v).expect("default parses"));
        }
        for (k, v) in file.into_iter().chain(overrides) {
            if !values.contains_key(&k) {
                return Err(config_err(format!("unknown key `{k}`")));
            }
            values.insert(k, v);
        }
        let r = Resolver { values };
        let sweep_mode_name = r.string("sweep_mode")?;
        let sweep_mode = SweepMode::parse(&sweep_mode_name).ok_or_else(|| {
            config_err(format!(
                "sweep_mode must be delta, field or anisotropy, got `{sweep_mode_name}`"
            ))
        })?;
        let output = r.string("output")?;
        let cfg = Self {
            command,
            coupling_j: r.f64("coupling_j")?,
            anisotropy: r.f64("anisotropy")?,
            field: r.f64("field")?,
            n_sites: r.usize("n_sites")?,
            delta_initial: r.f64("delta_initial")?,
            delta_final: r.f64("delta_final")?,
            field_initial: r.f64("field_initial")?,
            field_final: r.f64("field_final")?,
            t_max: r.f64("t_max")?,
            dt: r.f64("dt")?,
            distances: r.usize_list("distances")?,
            sweep_mode,
            sweep_start: r.f64("sweep_start")?,
            sweep_stop: r.f64("sweep_stop")?,
            sweep_step: r.f64("sweep_step")?,
            sizes: r.usize_list("sizes")?,
            t_max_periods: r.f64("t_max_periods")?,
            solver: SolverOptions {
                mixing: r.f64("mixing")?,
                tol: r.f64("tol")?,
                max_iter: r.usize("max_iter")?,
                restarts: r.usize("restarts")?,
                seed: r.usize("seed")? as u64,
            },
            optimizer: OptimizerOptions {
                n_theta: r.usize("n_theta")?,
                n_phi: r.usize("n_phi")?,
                refine_tol: r.f64("refine_tol")?,
            },
            cusp_skip: r.f64("cusp_skip")?,
            cusp_prominence: r.f64("cusp_prominence")?,
            output: if output == "-" {
                None
            } else {
                Some(PathBuf::from(output))
            },
            threads: r.usize("threads")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults plus overrides, no file.
    pub fn from_overrides(command: Command, overrides: &[&str]) -> Result<Self, CliError> {
        let parsed = overrides.iter().map(|o| parse_override(o)).collect::<Result<_, _>>()?;
        Self::resolve(command, BTreeMap::new(), parsed)
    }

    fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(config_err(msg)) };
        check(self.coupling_j > 0.0, "coupling_j must be positive")?;
        check(self.dt > 0.0, "dt must be positive")?;
        check(self.t_max >= 0.0, "t_max must be non-negative")?;
        check(self.sweep_step > 0.0, "sweep_step must be positive")?;
        check(
            self.sweep_stop >= self.sweep_start,
            "sweep_stop must not be below sweep_start",
        )?;
        check(self.t_max_periods > 0.0, "t_max_periods must be positive")?;
        check(self.cusp_skip >= 0.0, "cusp_skip must be non-negative")?;
        check(
            self.cusp_prominence > 0.0 && self.cusp_prominence <= 1.0,
            "cusp_prominence must lie in (0, 1]",
        )?;
        check(!self.distances.is_empty(), "distances must not be empty")?;
        check(
            self.solver.mixing > 0.0 && self.solver.mixing <= 1.0,
            "mixing must lie in (0, 1]",
        )?;
        check(self.solver.tol > 0.0, "tol must be positive")?;
        check(self.solver.max_iter > 0, "max_iter must be positive")?;
        self.optimizer.validate().map_err(|e| config_err(e.to_string()))?;
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        check(sizes.len() == self.sizes.len(), "sizes must not contain duplicates")?;
        let size_list: Vec<usize> = match self.command {
            Command::Scaling => self.sizes.clone(),
            _ => vec![self.n_sites],
        };
        if self.command == Command::Scaling {
            check(size_list.len() >= 3, "scaling needs at least three sizes")?;
        }
        let m_max = *self.distances.iter().max().expect("nonempty");
        for &n in &size_list {
            ModelParams::new(self.coupling_j, 0.0, 0.0, n).map_err(|e| config_err(e.to_string()))?;
            check(m_max < n / 2, "distances must be below N/2")?;
        }
        if self.command == Command::OracleCompare && self.n_sites > MAX_SITES {
            return Err(config_err(format!(
                "oracle-compare needs n_sites <= {MAX_SITES}, got {}",
                self.n_sites
            )));
        }
        Ok(())
    }

    /// The swept values `start + k·step`, rounded to 12 decimals.
    pub fn sweep_axis(&self) -> Vec<f64> {
        let count = ((self.sweep_stop - self.sweep_start) / self.sweep_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| {
                let x = self.sweep_start + k as f64 * self.sweep_step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    }

    /// `# key = value` lines for every resolved key except `threads`.
    pub fn header_lines(&self) -> Vec<String> {
        let list = |v: &[usize]| {
            let mut s = String::from("[");
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{x}");
            }
            s.push(']');
            s
        };
        let f = fmt_f64;
        let mut kv: Vec<(&str, String)> = vec![
            ("coupling_j", f(self.coupling_j)),
            ("anisotropy", f(self.anisotropy)),
            ("field", f(self.field)),
            ("n_sites", self.n_sites.to_string()),
            ("delta_initial", f(self.delta_initial)),
            ("delta_final", f(self.delta_final)),
            ("field_initial", f(self.field_initial)),
            ("field_final", f(self.field_final)),
            ("t_max", f(self.t_max)),
            ("dt", f(self.dt)),
            ("distances", list(&self.distances)),
            ("sweep_mode", format!("\"{}\"", self.sweep_mode.name())),
            ("sweep_start", f(self.sweep_start)),
            ("sweep_stop", f(self.sweep_stop)),
            ("sweep_step", f(self.sweep_step)),
            ("sizes", list(&self.sizes)),
            ("t_max_periods", f(self.t_max_periods)),
            ("mixing", f(self.solver.mixing)),
            ("tol", f(self.solver.tol)),
            ("max_iter", self.solver.max_iter.to_string()),
            ("restarts", self.solver.restarts.to_string()),
            ("seed", self.solver.seed.to_string()),
            ("n_theta", self.optimizer.n_theta.to_string()),
            ("n_phi", self.optimizer.n_phi.to_string()),
            ("refine_tol", f(self.optimizer.refine_tol)),
            ("cusp_skip", f(self.cusp_skip)),
            ("cusp_prominence", f(self.cusp_prominence)),
            (
                "output",
                format!(
                    "\"{}\"",
                    self.output
                        .as_ref()
                        .map_or("-".to_string(), |p| p.display().to_string())
                ),
            ),
        ];
        kv.sort_by(|a, b| a.0.cmp(b.0));
        kv.into_iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }
}
