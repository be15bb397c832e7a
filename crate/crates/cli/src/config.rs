//! Run settings: built-in defaults, then the TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use harq_core::{ChannelParams, Scheme};
use serde::Deserialize;

/// Environment variable naming the directory for output files when `--out`
/// is not given.
pub const OUT_DIR_ENV: &str = "HARQ_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Type1,
    Cc,
    Ir,
    All,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeChoice::Type1 => vec![Scheme::TypeI],
            SchemeChoice::Cc => vec![Scheme::ChaseCombining],
            SchemeChoice::Ir => vec![Scheme::IncrementalRedundancy],
            SchemeChoice::All => Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed-form allocation under the high-SNR outage model.
    PpaAsymptotic,
    /// Numerical allocation under the exact outage.
    PpaExact,
    /// Equal power per round, sized with the high-SNR outage.
    Fpa,
    /// Equal power per round, sized with the exact outage.
    FpaExact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::PpaAsymptotic => "ppa-asymptotic",
            Method::PpaExact => "ppa-exact",
            Method::Fpa => "fpa",
            Method::FpaExact => "fpa-exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Epsilon,
    Rho,
    M,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Rho => "rho",
            SweepAxis::M => "m",
        }
    }

    pub fn default_values(self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "1e-2,1e-3,1e-4,1e-5,1e-6",
            SweepAxis::Rho => "0:0.9:0.1",
            SweepAxis::M => "1:4:1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub m: Option<u32>,
    pub omega: Option<OneOrMany<f64>>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarqSection {
    pub scheme: Option<SchemeChoice>,
    pub rounds: Option<usize>,
    pub rate: Option<f64>,
    pub powers: Option<OneOrMany<f64>>,
    pub power_db: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub epsilon: Option<f64>,
    pub method: Option<OneOrMany<Method>>,
    pub truncation_tolerance: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub over: Option<SweepAxis>,
    pub values: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub channel: Option<ChannelSection>,
    pub harq: Option<HarqSection>,
    pub solver: Option<SolverSection>,
    pub output: Option<OutputSection>,
    pub sweep: Option<SweepSection>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub m: u32,
    /// One value is broadcast to every round.
    pub omega: Vec<f64>,
    pub rho: f64,
    pub delta: f64,
    pub scheme: SchemeChoice,
    pub rounds: usize,
    pub rate: f64,
    pub powers: Option<Vec<f64>>,
    pub power_db: Option<String>,
    pub epsilon: f64,
    pub methods: Option<Vec<Method>>,
    pub truncation_tolerance: f64,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub over: Option<SweepAxis>,
    pub values: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            m: 2,
            omega: vec![1.0],
            rho: 0.5,
            delta: 1.0,
            scheme: SchemeChoice::All,
            rounds: 2,
            rate: 2.0,
            powers: None,
            power_db: None,
            epsilon: 1e-6,
            methods: None,
            truncation_tolerance: harq_core::outage::DEFAULT_TRUNCATION_TOLERANCE,
            trials: 1_000_000,
            seed: 1,
            out: None,
            format: Format::Csv,
            over: None,
            values: None,
        }
    }
}

impl Settings {
    pub fn apply_file(&mut self, file: FileConfig) {
        if let Some(c) = file.channel {
            set(&mut self.m, c.m);
            set(&mut self.omega, c.omega.map(OneOrMany::into_vec));
            set(&mut self.rho, c.rho);
            set(&mut self.delta, c.delta);
        }
        if let Some(h) = file.harq {
            set(&mut self.scheme, h.scheme);
            set(&mut self.rounds, h.rounds);
            set(&mut self.rate, h.rate);
            if let Some(p) = h.powers {
                self.powers = Some(p.into_vec());
            }
            if let Some(g) = h.power_db {
                self.power_db = Some(g);
            }
        }
        if let Some(s) = file.solver {
            set(&mut self.epsilon, s.epsilon);
            if let Some(m) = s.method {
                self.methods = Some(m.into_vec());
            }
            set(&mut self.truncation_tolerance, s.truncation_tolerance);
            set(&mut self.trials, s.trials);
            set(&mut self.seed, s.seed);
        }
        if let Some(o) = file.output {
            if let Some(p) = o.path {
                self.out = Some(p);
            }
            set(&mut self.format, o.format);
        }
        if let Some(s) = file.sweep {
            if let Some(o) = s.over {
                self.over = Some(o);
            }
            if let Some(v) = s.values {
                self.values = Some(v);
            }
        }
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        self.scheme.schemes()
    }

    /// Channel parameters for `rounds` rounds with the given `m` and `ρ`.
    pub fn channel_with(&self, m: u32, rho: f64) -> Result<ChannelParams> {
        let omegas = broadcast(&self.omega, self.rounds, "omega")?;
        Ok(ChannelParams::new(m, omegas, rho, self.delta)?)
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        self.channel_with(self.m, self.rho)
    }

    /// Explicit per-round powers, broadcast when a single value is given.
    pub fn explicit_powers(&self) -> Result<Option<Vec<f64>>> {
        self.powers
            .as_ref()
            .map(|p| broadcast(p, self.rounds, "powers"))
            .transpose()
    }

    /// Where output goes: `--out`, else `$HARQ_OUT_DIR/<command>.<ext>`, else stdout.
    pub fn output_path(&self, command: &str) -> Option<PathBuf> {
        if let Some(p) = &self.out {
            return Some(p.clone());
        }
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{command}.{}", self.format.extension())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            bail!("rounds must be at least 1");
        }
        if self.m == 0 {
            bail!("m must be at least 1");
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            bail!("rate must be positive and finite, got {}", self.rate);
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            bail!("epsilon must lie in (0, 1), got {}", self.epsilon);
        }
        if !(self.truncation_tolerance > 0.0 && self.truncation_tolerance < 1.0) {
            bail!("truncation tolerance must lie in (0, 1)");
        }
        if self.trials == 0 {
            bail!("trials must be positive");
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn broadcast(values: &[f64], rounds: usize, name: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; rounds]),
        n if n == rounds => Ok(values.to_vec()),
        n => bail!("{name} has {n} entries but {rounds} rounds were requested"),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("'{s}' is not a number")))
        .collect()
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
///
/// Grid points are computed as `start + i·step` and rounded to 12
/// significant digits, so `0:0.9:0.1` yields `0.3` rather than
/// `0.30000000000000004`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let values = match parts.as_slice() {
        [_] => parse_list(text)?,
        [a, b, s] => {
            let (a, b, s): (f64, f64, f64) = (
                a.parse().with_context(|| format!("bad range start '{a}'"))?,
                b.parse().with_context(|| format!("bad range stop '{b}'"))?,
                s.parse().with_context(|| format!("bad range step '{s}'"))?,
            );
            if !(s.is_finite() && s != 0.0) || (b - a) / s < 0.0 {
                bail!("range {text} does not reach its stop value");
            }
            let count = ((b - a) / s + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                bail!("range {text} has too many points");
            }
            (0..count).map(|i| round_sig(a + i as f64 * s)).collect()
        }
        _ => bail!("expected start:stop:step or a comma-separated list, got '{text}'"),
    };
    if values.is_empty() {
        bail!("empty value list '{text}'");
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        bail!("non-finite grid value {v}");
    }
    Ok(values)
}

fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        let g = parse_grid("0:0.9:0.1").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[9], 0.9);
        assert_eq!(parse_grid("1:4:1").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_grid("1e-2, 1e-3").unwrap(), vec![1e-2, 1e-3]);
        assert_eq!(parse_grid("30:0:-10").unwrap(), vec![30.0, 20.0, 10.0, 0.0]);
        assert!(parse_grid("0:1:-1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn file_overrides_defaults() {
        let file = FileConfig::parse(
            r#"
            [channel]
            m = 1
            omega = [1.0, 0.5]
            rho = 0.0
            [harq]
            scheme = "type1"
            rate = 1.0
            [solver]
            epsilon = 1e-3
            method = ["ppa-asymptotic", "fpa"]
            [output]
            format = "json"
            "#,
        )
        .unwrap();
        let mut s = Settings::default();
        s.apply_file(file);
        assert_eq!(s.m, 1);
        assert_eq!(s.scheme, SchemeChoice::Type1);
        assert_eq!(s.methods, Some(vec![Method::PpaAsymptotic, Method::Fpa]));
        assert_eq!(s.format, Format::Json);
        assert_eq!(s.delta, 1.0);
        assert_eq!(s.channel().unwrap().omegas(), &[1.0, 0.5]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("[channel]\nmm = 2\n").is_err());
        assert!(FileConfig::parse("[plot]\nx = 1\n").is_err());
        assert!(FileConfig::parse("[solver]\nmethod = \"newton\"\n").is_err());
    }

    #[test]
    fn omega_broadcast_and_length_check() {
        let mut s = Settings { rounds: 3, ..Settings::default() };
        assert_eq!(s.channel().unwrap().omegas(), &[1.0, 1.0, 1.0]);
        s.omega = vec![1.0, 2.0];
        assert!(s.channel().is_err());
    }
}
