//! Flat `key = value` experiment configs with `#` comments.
//!
//! Nested structures (Markov kernels, bias scripts, interval schedules)
//! live in auxiliary CSV files referenced by path, relative to the config
//! file. Unknown keys are rejected so typos surface as config errors
//! instead of silently ignored settings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use fairwatch::{
    Dynamics, Horizon, MarkovDynamics, MeasureKind, Mode, TargetIntervalSchedule, UnitInterval,
};

use crate::CliError;

/// Raised during parsing; wrapped into [`CliError::Config`] by callers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "out",
    "steps",
    "trials",
    "dynamics",
    "bias",
    "p1",
    "beta0",
    "beta1",
    "kernel_file",
    "bias_file",
    "stationary_start",
    "monitor",
    "measure",
    "horizon",
    "mode",
    "delta",
    "tau",
    "enforcer",
    "interval_lo",
    "interval_hi",
    "window",
    "threshold_p",
    "cost",
    "schedule_file",
    "infeasible",
];

/// A parsed config: the effective key-value map after CLI overrides.
#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl Config {
    /// Parses the config file and applies overrides (`seed`, `out`).
    pub fn load(
        path: &Path,
        seed_override: Option<u64>,
        out_override: Option<&Path>,
    ) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::parse(&text).map_err(|e| CliError::Config(e.0))?;
        config.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        if let Some(seed) = seed_override {
            config.values.insert("seed".into(), seed.to_string());
        }
        if let Some(out) = out_override {
            config
                .values
                .insert("out".into(), out.display().to_string());
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(ConfigError(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self {
            values,
            base_dir: PathBuf::from("."),
        })
    }

    /// FNV-1a hash of the effective (sorted) key-value pairs, as 16 hex
    /// digits. Stable across runs and platforms.
    pub fn hash(&self) -> String {
        let mut acc: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                acc ^= b as u64;
                acc = acc.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for (k, v) in &self.values {
            eat(k.as_bytes());
            eat(b"=");
            eat(v.as_bytes());
            eat(b"\n");
        }
        format!("{acc:016x}")
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn parse_typed<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("key `{key}`: cannot parse `{raw}`")))
    }

    pub fn parse_typed_or<T: std::str::FromStr>(
        &self,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        Ok(self.parse_optional(key)?.unwrap_or(default))
    }

    /// `Ok(None)` when absent, an error when present but malformed.
    pub fn parse_optional<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("key `{key}`: cannot parse `{raw}`"))),
        }
    }

    pub fn experiment(&self) -> Result<&str, CliError> {
        self.require("experiment")
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parse_typed_or("seed", 0)
    }

    pub fn out_path(&self) -> Result<PathBuf, CliError> {
        Ok(PathBuf::from(self.require("out")?))
    }

    pub fn delta(&self) -> Result<f64, CliError> {
        let delta: f64 = self.parse_typed_or("delta", 0.05)?;
        if delta <= 0.0 || delta >= 1.0 {
            return Err(CliError::Config(format!("delta {delta} outside (0,1)")));
        }
        Ok(delta)
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        match self.get("mode").unwrap_or("pointwise") {
            "pointwise" => Ok(Mode::Pointwise),
            "uniform" => Ok(Mode::Uniform),
            other => Err(CliError::Config(format!(
                "mode `{other}` (want pointwise|uniform)"
            ))),
        }
    }

    pub fn measure(&self) -> Result<MeasureKind, CliError> {
        match self.get("measure").unwrap_or("outcome") {
            "outcome" => Ok(MeasureKind::OutcomeFairness),
            "bias" => Ok(MeasureKind::BiasFairness),
            "current" => Ok(MeasureKind::CurrentFairness),
            other => Err(CliError::Config(format!(
                "measure `{other}` (want outcome|bias|current)"
            ))),
        }
    }

    pub fn horizon(&self) -> Result<Horizon, CliError> {
        match self.get("horizon").unwrap_or("0") {
            "inf" | "infinity" => Ok(Horizon::Infinite),
            raw => raw
                .parse()
                .map(Horizon::Finite)
                .map_err(|_| CliError::Config(format!("horizon `{raw}` (want integer or inf)"))),
        }
    }

    pub fn target_interval(&self) -> Result<UnitInterval, CliError> {
        let lo: f64 = self.parse_typed("interval_lo")?;
        let hi: f64 = self.parse_typed("interval_hi")?;
        UnitInterval::new(lo, hi).map_err(|e| CliError::Config(format!("target interval: {e}")))
    }

    pub fn cost_model(&self) -> Result<fairwatch::CostModel, CliError> {
        let raw = self.get("cost").unwrap_or("unit");
        fairwatch::CostModel::from_descriptor(raw)
            .ok_or_else(|| CliError::Config(format!("cost `{raw}` (want unit|bias-weighted)")))
    }

    /// Builds the dynamics, loading auxiliary files when referenced.
    pub fn dynamics(&self) -> Result<Dynamics, CliError> {
        match self.require("dynamics")? {
            "constant" => {
                let p: f64 = self.parse_typed("bias")?;
                Dynamics::constant(p).map_err(|e| CliError::Config(e.to_string()))
            }
            "additive" => {
                let p1: f64 = self.parse_typed("p1")?;
                let beta0: f64 = self.parse_typed("beta0")?;
                let beta1: f64 = self.parse_typed("beta1")?;
                Dynamics::additive(p1, beta0, beta1).map_err(|e| CliError::Config(e.to_string()))
            }
            "markov" => {
                let file = self.aux_path(self.require("kernel_file")?);
                let mut markov = load_kernel(&file)?;
                if self.parse_typed_or("stationary_start", false)? {
                    let chain = fairwatch::induced_chain(&markov);
                    let marginal = chain
                        .stationary_coin_marginal()
                        .map_err(|e| CliError::Config(format!("stationary start: {e}")))?;
                    markov = markov
                        .with_initial(marginal)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                }
                Ok(Dynamics::Markov(markov))
            }
            "scripted" => {
                let file = self.aux_path(self.require("bias_file")?);
                let biases = load_biases(&file)?;
                Dynamics::scripted(biases).map_err(|e| CliError::Config(e.to_string()))
            }
            other => Err(CliError::Config(format!(
                "dynamics `{other}` (want constant|markov|additive|scripted)"
            ))),
        }
    }

    /// Target schedule from `schedule_file`, or the trivial schedule.
    pub fn schedule(&self) -> Result<TargetIntervalSchedule, CliError> {
        match self.get("schedule_file") {
            None => Ok(TargetIntervalSchedule::trivial()),
            Some(rel) => load_schedule(&self.aux_path(rel)),
        }
    }

    fn aux_path(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|raw| raw.split('#').next().unwrap_or("").trim().to_string())
        .filter(|line| !line.is_empty())
        .collect())
}

/// Kernel CSV: tagged rows
/// `bias,<k>,<p>` | `init,<k>,<w>` | `kernel,<k>,<x>,<k'>,<q>`.
fn load_kernel(path: &Path) -> Result<MarkovDynamics, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut biases: BTreeMap<usize, f64> = BTreeMap::new();
    let mut init: BTreeMap<usize, f64> = BTreeMap::new();
    let mut entries: Vec<(usize, u8, usize, f64)> = Vec::new();
    for line in read_lines(path)? {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match fields.as_slice() {
            ["bias", k, p] => {
                let k: usize = k
                    .parse()
                    .map_err(|_| bad(format!("bad coin index `{k}`")))?;
                let p: f64 = p.parse().map_err(|_| bad(format!("bad bias `{p}`")))?;
                biases.insert(k, p);
            }
            ["init", k, w] => {
                let k: usize = k
                    .parse()
                    .map_err(|_| bad(format!("bad coin index `{k}`")))?;
                let w: f64 = w.parse().map_err(|_| bad(format!("bad weight `{w}`")))?;
                init.insert(k, w);
            }
            ["kernel", k, x, k2, q] => {
                let k: usize = k
                    .parse()
                    .map_err(|_| bad(format!("bad coin index `{k}`")))?;
                let x: u8 = x.parse().map_err(|_| bad(format!("bad outcome `{x}`")))?;
                let k2: usize = k2
                    .parse()
                    .map_err(|_| bad(format!("bad coin index `{k2}`")))?;
                let q: f64 = q
                    .parse()
                    .map_err(|_| bad(format!("bad probability `{q}`")))?;
                entries.push((k, x, k2, q));
            }
            _ => return Err(bad(format!("unrecognized row `{line}`"))),
        }
    }
    let n = biases.len();
    if n == 0 {
        return Err(bad("no bias rows".into()));
    }
    if biases.keys().copied().ne(0..n) {
        return Err(bad("coin indices must be 0..n".into()));
    }
    let bias_vec: Vec<f64> = biases.values().copied().collect();
    let mut rows = vec![[vec![0.0; n], vec![0.0; n]]; n];
    for (k, x, k2, q) in entries {
        if k >= n || k2 >= n || x > 1 {
            return Err(bad(format!("kernel row ({k},{x},{k2}) out of range")));
        }
        rows[k][x as usize][k2] = q;
    }
    let mut init_vec = vec![0.0; n];
    if init.is_empty() {
        init_vec = vec![1.0 / n as f64; n];
    } else {
        for (k, w) in init {
            if k >= n {
                return Err(bad(format!("init index {k} out of range")));
            }
            init_vec[k] = w;
        }
    }
    MarkovDynamics::new(bias_vec, rows, init_vec).map_err(|e| bad(e.to_string()))
}

/// Bias script: one bias per line.
fn load_biases(path: &Path) -> Result<Vec<f64>, CliError> {
    read_lines(path)?
        .iter()
        .map(|line| {
            line.parse::<f64>()
                .map_err(|_| CliError::Config(format!("{}: bad bias `{line}`", path.display())))
        })
        .collect()
}

/// Schedule CSV: rows `t,lo,hi`.
fn load_schedule(path: &Path) -> Result<TargetIntervalSchedule, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut schedule = TargetIntervalSchedule::trivial();
    for line in read_lines(path)? {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [t, lo, hi] = fields.as_slice() else {
            return Err(bad(format!("expected `t,lo,hi`, got `{line}`")));
        };
        let t: u64 = t.parse().map_err(|_| bad(format!("bad time `{t}`")))?;
        let lo: f64 = lo.parse().map_err(|_| bad(format!("bad lo `{lo}`")))?;
        let hi: f64 = hi.parse().map_err(|_| bad(format!("bad hi `{hi}`")))?;
        let interval = UnitInterval::new(lo, hi).map_err(|e| bad(e.to_string()))?;
        schedule.set_override(t, interval);
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_key_values_with_comments() {
        let config = Config::parse(
            "# an experiment\nexperiment = simulate\nsteps = 10 # inline\n\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(config.experiment().unwrap(), "simulate");
        assert_eq!(config.seed().unwrap(), 7);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(Config::parse("experiment = simulate\nbogus = 1\n").is_err());
        assert!(Config::parse("seed = 1\nseed = 2\n").is_err());
        assert!(Config::parse("just a line\n").is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = Config::parse("experiment = simulate\nseed = 1\n").unwrap();
        let b = Config::parse("seed = 1\nexperiment = simulate\n").unwrap();
        let c = Config::parse("experiment = simulate\nseed = 2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn defaults_apply() {
        let config = Config::parse("experiment = simulate\n").unwrap();
        assert_eq!(config.seed().unwrap(), 0);
        assert_eq!(config.mode().unwrap(), Mode::Pointwise);
        assert!((config.delta().unwrap() - 0.05).abs() < 1e-15);
    }
}
