//! Run configuration: a flat `key = value` file merged with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use bose_chaos::chaos::QOrder;
use bose_chaos::fock::{BasisKind, Boundary, Parity, SectorSpec, Symmetry};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Keys accepted in config files and as `--key` flags (dashes become underscores).
pub const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "n",
    "l",
    "bc",
    "q",
    "parity",
    "basis",
    "eta",
    "eta_grid",
    "eps",
    "k_states",
    "lambda",
    "realizations",
    "seed",
    "threads",
    "out",
    "format",
    "export_matrix",
    "dims",
    "q_orders",
    "bins",
];

/// Error from the line-level config parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Splits `key = value` lines. `#` starts a comment; blank lines are skipped;
/// keys must be known and may appear once.
pub fn parse_config_text(text: &str) -> std::result::Result<BTreeMap<String, String>, ParseError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ParseError { line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Basis,
    Spectrum,
    Scan,
    EgoeScan,
    LambdaScan,
    Compare,
    Baselines,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Basis => "basis",
            Experiment::Spectrum => "spectrum",
            Experiment::Scan => "scan",
            Experiment::EgoeScan => "egoe-scan",
            Experiment::LambdaScan => "lambda-scan",
            Experiment::Compare => "compare",
            Experiment::Baselines => "baselines",
        }
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "basis" => Experiment::Basis,
            "spectrum" => Experiment::Spectrum,
            "scan" => Experiment::Scan,
            "egoe-scan" | "egoe_scan" => Experiment::EgoeScan,
            "lambda-scan" | "lambda_scan" => Experiment::LambdaScan,
            "compare" => Experiment::Compare,
            "baselines" => Experiment::Baselines,
            other => return Err(CliError::config(format!("experiment: unknown value `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    /// Tables as CSV; matrices in the little-endian binary layout.
    Bin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub l: usize,
    pub bc: Boundary,
    pub q: Option<usize>,
    pub parity: Option<Parity>,
    pub basis: BasisKind,
    pub eta: Option<f64>,
    pub eta_grid: Vec<f64>,
    pub eps_targets: Vec<f64>,
    pub k_states: usize,
    pub lambdas: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    /// Worker threads; 0 picks the number of CPUs.
    pub threads: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub export_matrix: Option<PathBuf>,
    pub dims: Vec<usize>,
    pub q_orders: Vec<QOrder>,
    pub bins: usize,
}

pub const DEFAULT_K_STATES: usize = 100;
pub const DEFAULT_REALIZATIONS: usize = 100;
pub const DEFAULT_SEED: u64 = 20_240_501;

/// 30 log-spaced points in `[1e-3, 10]`.
pub fn default_eta_grid() -> Vec<f64> {
    log_grid(1e-3, 10.0, 30)
}

/// Five points spanning the chaotic window used for distribution comparisons.
pub fn default_compare_eta_grid() -> Vec<f64> {
    lin_grid(0.25, 0.38, 5)
}

pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::config(format!("{key}: cannot parse `{v}`")))
}

/// A grid is a comma list, `log(a, b, n)` or `lin(a, b, n)`.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    for (prefix, log) in [("log(", true), ("lin(", false)] {
        if let Some(inner) = v.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(CliError::config(format!("{key}: expected {prefix}a, b, n)")));
            }
            let a: f64 = parse_num(key, parts[0])?;
            let b: f64 = parse_num(key, parts[1])?;
            let n: usize = parse_num(key, parts[2])?;
            if n == 0 || n > 100_000 {
                return Err(CliError::config(format!("{key}: point count must be in 1..=100000")));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err(CliError::config(format!("{key}: log grid needs positive endpoints")));
            }
            let g = if log { log_grid(a, b, n) } else { lin_grid(a, b, n) };
            return check_finite(key, g);
        }
    }
    let g = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<Vec<f64>>>()?;
    check_finite(key, g)
}

fn check_finite(key: &str, g: Vec<f64>) -> Result<Vec<f64>> {
    if g.iter().any(|x| !x.is_finite()) {
        return Err(CliError::config(format!("{key}: values must be finite")));
    }
    Ok(g)
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

impl RunConfig {
    /// Builds and validates a configuration for `experiment` from merged key-value pairs.
    pub fn from_map(experiment: Experiment, map: &BTreeMap<String, String>) -> Result<Self> {
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(format!("unknown key `{key}`")));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        if let Some(e) = get("experiment") {
            let e: Experiment = e.parse()?;
            if e != experiment {
                return Err(CliError::config(format!(
                    "experiment: file says `{}` but `{}` was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        let num = |k: &str, default: Option<usize>| -> Result<usize> {
            match get(k) {
                Some(v) => parse_num(k, v),
                None => default.ok_or_else(|| CliError::config(format!("{k}: missing"))),
            }
        };
        let needs_system = !matches!(experiment, Experiment::Baselines);
        let (n, l) = if needs_system { (num("n", None)?, num("l", None)?) } else { (0, 0) };
        let bc = match get("bc").unwrap_or("hwbc") {
            "hwbc" => Boundary::Hwbc,
            "pbc" => Boundary::Pbc,
            other => return Err(CliError::config(format!("bc: expected hwbc or pbc, got `{other}`"))),
        };
        let q = get("q").map(|v| parse_num::<usize>("q", v)).transpose()?;
        let parity = match get("parity") {
            None | Some("none") => None,
            Some("+1" | "1" | "even") => Some(Parity::Even),
            Some("-1" | "odd") => Some(Parity::Odd),
            Some(other) => return Err(CliError::config(format!("parity: expected +1 or -1, got `{other}`"))),
        };
        let basis = match get("basis").unwrap_or("interaction") {
            "interaction" => BasisKind::Interaction,
            "tunneling" => BasisKind::Tunneling,
            other => {
                return Err(CliError::config(format!(
                    "basis: expected interaction or tunneling, got `{other}`"
                )))
            }
        };
        let eta = get("eta").map(|v| parse_num::<f64>("eta", v)).transpose()?;
        let eta_grid = match get("eta_grid") {
            Some(v) => parse_grid("eta_grid", v)?,
            None => match (experiment, eta) {
                (_, Some(e)) => vec![e],
                (Experiment::Compare, None) => default_compare_eta_grid(),
                _ => default_eta_grid(),
            },
        };
        let eps_targets = match get("eps") {
            Some(v) => parse_grid("eps", v)?,
            None => match experiment {
                Experiment::EgoeScan | Experiment::LambdaScan | Experiment::Compare => vec![0.5],
                _ => Vec::new(),
            },
        };
        let lambdas = match get("lambda") {
            Some(v) => parse_grid("lambda", v)?,
            None => match experiment {
                Experiment::LambdaScan => log_grid(1e-2, 10.0, 13),
                _ => vec![1.0],
            },
        };
        let format = match get("format").unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            "bin" => OutputFormat::Bin,
            other => return Err(CliError::config(format!("format: expected csv, json or bin, got `{other}`"))),
        };
        let dims = match get("dims") {
            Some(v) => parse_list("dims", v)?,
            None => (6..=14).map(|p| 1usize << p).collect(),
        };
        let q_orders = match get("q_orders") {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<QOrder>().map_err(|e| CliError::config(format!("q_orders: {e}"))))
                .collect::<Result<Vec<_>>>()?,
            None => vec![QOrder::Finite(1.0), QOrder::Finite(2.0), QOrder::Infinity],
        };
        let cfg = RunConfig {
            experiment,
            n,
            l,
            bc,
            q,
            parity,
            basis,
            eta,
            eta_grid,
            eps_targets,
            k_states: num("k_states", Some(DEFAULT_K_STATES))?,
            lambdas,
            realizations: num("realizations", Some(DEFAULT_REALIZATIONS))?,
            seed: get("seed").map(|v| parse_num("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED),
            threads: num("threads", Some(0))?,
            out: PathBuf::from(get("out").unwrap_or("out")),
            format,
            export_matrix: get("export_matrix").map(PathBuf::from),
            dims,
            q_orders,
            bins: num("bins", Some(100))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::config(m));
        let needs_system = !matches!(self.experiment, Experiment::Baselines);
        if needs_system {
            if self.n == 0 {
                return bad("n: need at least one particle".into());
            }
            if self.l == 0 {
                return bad("l: need at least one site".into());
            }
        }
        if self.bc == Boundary::Hwbc && self.q.is_some() {
            return bad("q: quasimomentum needs bc = pbc".into());
        }
        if matches!(self.experiment, Experiment::Scan | Experiment::Spectrum | Experiment::Compare) {
            if self.eta_grid.is_empty() {
                return bad("eta_grid: must not be empty".into());
            }
            if self.eta_grid.iter().any(|&e| !(e >= 0.0)) {
                return bad("eta_grid: values must be non-negative".into());
            }
        }
        if self.experiment == Experiment::Spectrum && self.eta_grid.len() != 1 {
            return bad("eta: spectrum takes a single eta".into());
        }
        if self.eps_targets.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return bad("eps: targets must lie in [0, 1]".into());
        }
        if matches!(self.experiment, Experiment::EgoeScan | Experiment::LambdaScan | Experiment::Compare) {
            if self.eps_targets.is_empty() {
                return bad("eps: need at least one target".into());
            }
            if self.realizations == 0 {
                return bad("realizations: must be positive".into());
            }
            if self.lambdas.is_empty() {
                return bad("lambda: must not be empty".into());
            }
            if self.basis != BasisKind::Interaction {
                return bad("basis: the embedded ensemble lives in the interaction basis".into());
            }
            if matches!(self.sector().symmetry, Symmetry::Momentum { .. }) {
                return bad("q: the embedded ensemble has no translation symmetry; use hwbc or the full pbc space".into());
            }
        }
        if self.k_states == 0 {
            return bad("k_states: must be positive".into());
        }
        if self.bins == 0 {
            return bad("bins: must be positive".into());
        }
        if self.experiment == Experiment::Baselines && (self.dims.is_empty() || self.dims.iter().any(|&d| d < 2)) {
            return bad("dims: need dimensions of at least 2".into());
        }
        if self.q_orders.is_empty() {
            return bad("q_orders: must not be empty".into());
        }
        if self.format == OutputFormat::Bin && self.experiment != Experiment::Spectrum {
            return bad("format: bin output is only available for spectrum".into());
        }
        if needs_system {
            self.sector().validate().map_err(|e| CliError::config(format!("sector: {e}")))?;
        }
        Ok(())
    }

    /// Symmetry sector selected by `bc`, `q` and `parity`.
    pub fn sector(&self) -> SectorSpec {
        let symmetry = match (self.bc, self.q, self.parity) {
            (Boundary::Hwbc, _, Some(p)) => Symmetry::Parity(p),
            (Boundary::Hwbc, _, None) => Symmetry::Full,
            (Boundary::Pbc, None, None) => Symmetry::Full,
            (Boundary::Pbc, q, parity) => Symmetry::Momentum { q: q.unwrap_or(0), parity },
        };
        SectorSpec { bc: self.bc, n: self.n, l: self.l, symmetry }
    }

    /// Stable text form of everything that affects results (not `out` or `threads`).
    pub fn canonical(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "experiment={}", self.experiment.name());
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "l={}", self.l);
        let _ = writeln!(s, "sector={}", self.sector().label());
        let _ = writeln!(s, "basis={}", self.basis);
        let _ = writeln!(s, "eta_grid={}", list(&self.eta_grid));
        let _ = writeln!(s, "eps={}", list(&self.eps_targets));
        let _ = writeln!(s, "k_states={}", self.k_states);
        let _ = writeln!(s, "lambda={}", list(&self.lambdas));
        let _ = writeln!(s, "realizations={}", self.realizations);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "format={:?}", self.format);
        let _ = writeln!(s, "export_matrix={}", self.export_matrix.is_some());
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "dims={}", dims.join(","));
        let qs: Vec<String> = self.q_orders.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(s, "q_orders={}", qs.join(","));
        let _ = writeln!(s, "bins={}", self.bins);
        s
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
