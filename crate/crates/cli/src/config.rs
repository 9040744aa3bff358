use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pq_stancu::{Mode, PQParams, Scalar, StancuParams, TargetFn};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pq-stancu",
    version,
    about = "(p,q)-Bernstein-Stancu operator experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate f and S_n(f;x) over a uniform grid.
    Eval,
    /// Closed-form moments S_n(1), S_n(t), S_n(t^2) and the central second moment.
    Moments,
    /// Classical-modulus rate bound and Ditzian-Totik modulus factor per grid point.
    Bounds,
    /// S_{n-1}(f) >= S_n(f) >= f for convex f over a contiguous degree range.
    Monotonic,
    /// Korovkin sup-errors along a (p_n, q_n) sequence.
    Stat,
    /// Overlay f and S_n(f) for a grid of parameter sets (CSV + SVG).
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Moments => "moments",
            Command::Bounds => "bounds",
            Command::Monotonic => "monotonic",
            Command::Stat => "stat",
            Command::Figures => "figures",
        }
    }
}

/// Every option is also a config-file key of the same name.
#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Degree.
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Degrees: `10,30,50`, `2..=10` or `2..11`.
    #[arg(long = "n-list", global = true)]
    pub n_list: Option<String>,
    /// Accepts decimals, `a/b` or scientific notation.
    #[arg(long, global = true)]
    pub p: Option<String>,
    #[arg(long, global = true)]
    pub q: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub beta: Option<String>,
    /// Number of uniform grid points on [0,1].
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Built-in function name.
    #[arg(long = "fn", global = true)]
    pub func: Option<String>,
    /// Polynomial coefficients c0,c1,... (constant term first).
    #[arg(long, global = true, conflicts_with = "func")]
    pub coeffs: Option<String>,
    #[arg(long, global = true, value_parser = ["float", "rational"])]
    pub mode: Option<String>,
    #[arg(long = "out-csv", global = true)]
    pub out_csv: Option<String>,
    #[arg(long = "out-svg", global = true)]
    pub out_svg: Option<String>,
    /// Slack allowed before an asserted inequality counts as violated.
    #[arg(long, global = true)]
    pub tolerance: Option<String>,
    /// Degree ladder for `stat`.
    #[arg(long, global = true)]
    pub ladder: Option<String>,
    /// Closeness threshold for the parameter-sequence check in `stat`.
    #[arg(long, global = true)]
    pub epsilon: Option<String>,
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "n",
    "n-list",
    "p",
    "q",
    "alpha",
    "beta",
    "grid",
    "fn",
    "coeffs",
    "mode",
    "out-csv",
    "out-svg",
    "tolerance",
    "ladder",
    "epsilon",
];

impl Opts {
    fn flags(&self) -> BTreeMap<&'static str, String> {
        let pairs = [
            ("n", &self.n),
            ("n-list", &self.n_list),
            ("p", &self.p),
            ("q", &self.q),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("grid", &self.grid),
            ("fn", &self.func),
            ("coeffs", &self.coeffs),
            ("mode", &self.mode),
            ("out-csv", &self.out_csv),
            ("out-svg", &self.out_svg),
            ("tolerance", &self.tolerance),
            ("ladder", &self.ladder),
            ("epsilon", &self.epsilon),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

/// Reads `key = value` lines. Blank lines and `#` comments are skipped;
/// unknown keys are rejected.
pub fn parse_config(text: &str, origin: &Path) -> Result<BTreeMap<&'static str, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("{}:{}: {msg}", origin.display(), i + 1));
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        let k = k.trim().trim_start_matches("--");
        let key = KEYS
            .iter()
            .find(|known| **known == k || known.replace('-', "_") == k)
            .ok_or_else(|| bad(format!("unknown key {k:?}")))?;
        out.insert(*key, v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FnSel {
    Named(String),
    Coeffs(Vec<String>),
}

impl FnSel {
    pub fn resolve<T: Scalar>(&self) -> Result<TargetFn<T>, CliError> {
        match self {
            FnSel::Named(name) => Ok(pq_stancu::target::corpus::lookup(name)?),
            FnSel::Coeffs(cs) => {
                let coeffs = cs
                    .iter()
                    .map(|c| T::parse_decimal(c))
                    .collect::<pq_stancu::Result<Vec<T>>>()?;
                Ok(TargetFn::polynomial(coeffs).renamed(format!("poly[{}]", cs.join(","))))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            FnSel::Named(name) => name.clone(),
            FnSel::Coeffs(cs) => format!("poly[{}]", cs.join(",")),
        }
    }
}

/// Flags merged over the config file, with numeric fields still as text
/// because their parsing depends on the mode.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Command,
    pub ns: Option<Vec<usize>>,
    pub p: Option<String>,
    pub q: Option<String>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub grid: usize,
    pub func: Option<FnSel>,
    pub mode: Mode,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub tolerance: Option<String>,
    pub ladder: Option<Vec<usize>>,
    pub epsilon: Option<String>,
}

pub const DEFAULT_GRID: usize = 101;

impl Settings {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut merged = match &cli.opts.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?;
                parse_config(&text, path)?
            }
            None => BTreeMap::new(),
        };
        let flags = cli.opts.flags();
        // A flag for either function selector replaces both config entries.
        if flags.contains_key("fn") || flags.contains_key("coeffs") {
            merged.remove("fn");
            merged.remove("coeffs");
        }
        if flags.contains_key("n") || flags.contains_key("n-list") {
            merged.remove("n");
            merged.remove("n-list");
        }
        merged.extend(flags);
        Settings::from_map(cli.command, &merged)
    }

    pub fn from_map(
        command: Command,
        m: &BTreeMap<&'static str, String>,
    ) -> Result<Self, CliError> {
        let get = |k: &str| m.get(k).cloned();
        let ns = match (get("n"), get("n-list")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either n or n-list, not both".into()))
            }
            (Some(n), None) => Some(vec![parse_usize("n", &n)?]),
            (None, Some(list)) => Some(parse_degree_list("n-list", &list)?),
            (None, None) => None,
        };
        let grid = match get("grid") {
            Some(g) => parse_usize("grid", &g)?,
            None => DEFAULT_GRID,
        };
        if grid < 2 {
            return Err(CliError::Usage(format!(
                "grid must have at least 2 points, got {grid}"
            )));
        }
        let func = match (get("fn"), get("coeffs")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either fn or coeffs, not both".into()))
            }
            (Some(name), None) => Some(FnSel::Named(name)),
            (None, Some(cs)) => {
                let cs: Vec<String> = cs.split(',').map(|c| c.trim().to_string()).collect();
                if cs.iter().any(String::is_empty) {
                    return Err(CliError::Usage(format!("empty entry in coeffs {cs:?}")));
                }
                Some(FnSel::Coeffs(cs))
            }
            (None, None) => None,
        };
        let mode = match get("mode").as_deref() {
            None | Some("float") => Mode::Float,
            Some("rational") => Mode::Rational,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "mode must be float or rational, got {other:?}"
                )))
            }
        };
        let ladder = get("ladder")
            .map(|l| parse_degree_list("ladder", &l))
            .transpose()?;
        Ok(Settings {
            command,
            ns,
            p: get("p"),
            q: get("q"),
            alpha: get("alpha"),
            beta: get("beta"),
            grid,
            func,
            mode,
            out_csv: get("out-csv").map(PathBuf::from),
            out_svg: get("out-svg").map(PathBuf::from),
            tolerance: get("tolerance"),
            ladder,
            epsilon: get("epsilon"),
        })
    }

    pub fn pq<T: Scalar>(&self) -> Result<PQParams<T>, CliError> {
        let p = parse_scalar("p", self.p.as_deref().unwrap_or("0.95"))?;
        let q = parse_scalar("q", self.q.as_deref().unwrap_or("0.9"))?;
        Ok(PQParams::new(p, q)?)
    }

    pub fn stancu<T: Scalar>(&self) -> Result<StancuParams<T>, CliError> {
        let a = parse_scalar("alpha", self.alpha.as_deref().unwrap_or("0"))?;
        let b = parse_scalar("beta", self.beta.as_deref().unwrap_or("0"))?;
        Ok(StancuParams::new(a, b)?)
    }

    pub fn tolerance<T: Scalar>(&self, default: T) -> Result<T, CliError> {
        match &self.tolerance {
            Some(t) => {
                let t: T = parse_scalar("tolerance", t)?;
                if t < T::zero() {
                    return Err(CliError::Usage(format!(
                        "tolerance {t} must be nonnegative"
                    )));
                }
                Ok(t)
            }
            None => Ok(default),
        }
    }

    /// Human-readable parameter summary echoed with errors.
    pub fn describe(&self) -> String {
        let show =
            |o: &Option<String>, d: &str| o.clone().unwrap_or_else(|| format!("{d} (default)"));
        let ns = match &self.ns {
            Some(ns) => format!("{ns:?}"),
            None => "default".into(),
        };
        format!(
            "{} mode={} n={ns} p={} q={} alpha={} beta={} fn={}",
            self.command.name(),
            self.mode,
            show(&self.p, "0.95"),
            show(&self.q, "0.9"),
            show(&self.alpha, "0"),
            show(&self.beta, "0"),
            self.func.as_ref().map_or("default".into(), FnSel::label),
        )
    }
}

pub fn parse_scalar<T: Scalar>(key: &str, s: &str) -> Result<T, CliError> {
    T::parse_decimal(s).map_err(|e| CliError::Usage(format!("{key}: {e}")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("{key}: {s:?} is not a nonnegative integer ({e})")))
}

/// Comma-separated degrees and ranges (`a..b` half-open, `a..=b` inclusive),
/// returned sorted without duplicates.
pub fn parse_degree_list(key: &str, s: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..=") {
            out.extend(parse_usize(key, a)?..=parse_usize(key, b)?);
        } else if let Some((a, b)) = part.split_once("..") {
            out.extend(parse_usize(key, a)?..parse_usize(key, b)?);
        } else {
            out.push(parse_usize(key, part)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(CliError::Usage(format!("{key}: {s:?} names no degrees")));
    }
    Ok(out)
}
