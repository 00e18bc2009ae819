//! Run configuration: a flat `key=value` file plus command-line overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qmetts::{CMode, Measurement, PoolKind, QiteOptions, RhsScaling, Variant};

use crate::error::{CliError, CliResult};
use crate::output::fmt_g;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementMode {
    Exact,
    Shots,
}

impl MeasurementMode {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementMode::Exact => "exact",
            MeasurementMode::Shots => "shots",
        }
    }
}

impl FromStr for MeasurementMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(MeasurementMode::Exact),
            "shots" => Ok(MeasurementMode::Shots),
            other => Err(format!("unknown measurement mode {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    /// CSV plus a `.json` sidecar next to it.
    CsvJson,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::CsvJson => "csv+json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "csv+json" | "json" => Ok(OutputFormat::CsvJson),
            other => Err(format!("unknown output format {other:?}")),
        }
    }
}

/// Every setting of a sweep or oracle run.
///
/// For the Gross-Neveu variant the coupling grid holds `ag` and `a_mu` is the
/// chemical potential; the Thirring variants ignore `a_mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub n_sites: usize,
    pub am: f64,
    pub a_mu: f64,
    pub g2_start: f64,
    pub g2_stop: f64,
    pub g2_step: f64,
    pub dbeta: f64,
    pub k_steps: usize,
    pub trotter_steps: usize,
    pub threshold: f64,
    pub measurement: MeasurementMode,
    pub shots: usize,
    pub c_mode: CMode,
    pub rhs_scaling: RhsScaling,
    pub pool: PoolKind,
    pub svd_cutoff: f64,
    pub seed: u64,
    /// Oracle temperature grid.
    pub temperatures: Vec<f64>,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Keys accepted in config files, in echo order.
pub const KEYS: &[&str] = &[
    "variant",
    "n_sites",
    "am",
    "a_mu",
    "g2_start",
    "g2_stop",
    "g2_step",
    "dbeta",
    "k_steps",
    "trotter_steps",
    "threshold",
    "measurement",
    "shots",
    "c_mode",
    "rhs_scaling",
    "pool",
    "svd_cutoff",
    "seed",
    "temperatures",
    "threads",
    "output",
    "format",
];

fn default_grid(variant: Variant) -> (f64, f64, f64) {
    match variant {
        Variant::Minkowski => (0.0, 5.0, 0.2),
        Variant::Euclidean | Variant::GrossNeveu => (0.0, 3.0, 0.1),
    }
}

/// `0.01, 0.02, ..., 1.0`.
pub fn default_temperatures() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

impl RunConfig {
    pub fn defaults(variant: Variant) -> Self {
        let (g2_start, g2_stop, g2_step) = default_grid(variant);
        let q = QiteOptions::<f64>::default();
        Self {
            variant,
            n_sites: 4,
            am: 0.5,
            a_mu: 0.0,
            g2_start,
            g2_stop,
            g2_step,
            dbeta: q.dbeta,
            k_steps: 20,
            trotter_steps: q.trotter_steps,
            threshold: q.threshold,
            measurement: MeasurementMode::Exact,
            shots: 1024,
            c_mode: q.c_mode,
            rhs_scaling: q.rhs_scaling,
            pool: PoolKind::OddY,
            svd_cutoff: q.svd_cutoff,
            seed: 0,
            temperatures: default_temperatures(),
            threads: 0,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    /// Builds a config from ordered `(key, value)` pairs; later pairs win.
    ///
    /// The variant is resolved first so its coupling-grid defaults apply
    /// wherever the grid keys are absent.
    pub fn from_pairs<'a, I>(pairs: I) -> CliResult<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let variant = match pairs.iter().rev().find(|(k, _)| *k == "variant") {
            Some((_, v)) => v.parse::<Variant>().map_err(|e| CliError::Usage(e.to_string()))?,
            None => Variant::Euclidean,
        };
        let mut cfg = Self::defaults(variant);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| CliError::Usage(format!("bad value {value:?} for {key}: {e}")))
        }
        match key {
            "variant" => self.variant = parse(key, value)?,
            "n_sites" => self.n_sites = parse(key, value)?,
            "am" => self.am = parse(key, value)?,
            "a_mu" => self.a_mu = parse(key, value)?,
            "g2_start" => self.g2_start = parse(key, value)?,
            "g2_stop" => self.g2_stop = parse(key, value)?,
            "g2_step" => self.g2_step = parse(key, value)?,
            "dbeta" => self.dbeta = parse(key, value)?,
            "k_steps" => self.k_steps = parse(key, value)?,
            "trotter_steps" => self.trotter_steps = parse(key, value)?,
            "threshold" => self.threshold = parse(key, value)?,
            "measurement" => self.measurement = parse(key, value)?,
            "shots" => self.shots = parse(key, value)?,
            "c_mode" => self.c_mode = parse(key, value)?,
            "rhs_scaling" => self.rhs_scaling = parse(key, value)?,
            "pool" => self.pool = parse(key, value)?,
            "svd_cutoff" => self.svd_cutoff = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "temperatures" => {
                self.temperatures = value
                    .split(',')
                    .map(|t| parse::<f64>(key, t.trim()))
                    .collect::<CliResult<Vec<_>>>()?
            }
            "threads" => self.threads = parse(key, value)?,
            "output" => self.output = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "format" => self.format = parse(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) || self.n_sites > 12 {
            return bad(format!("n_sites = {} must be even and between 2 and 12", self.n_sites));
        }
        if !(self.g2_step > 0.0) || self.g2_stop < self.g2_start {
            return bad(format!(
                "coupling grid {}..{} step {} is empty",
                self.g2_start, self.g2_stop, self.g2_step
            ));
        }
        if !(self.dbeta > 0.0) || self.k_steps == 0 || self.trotter_steps == 0 {
            return bad("dbeta, k_steps and trotter_steps must be positive".into());
        }
        if self.measurement == MeasurementMode::Shots && self.shots == 0 {
            return bad("shots must be positive in shots mode".into());
        }
        if self.temperatures.is_empty() || self.temperatures.iter().any(|t| !(*t > 0.0)) {
            return bad("temperatures must be a non-empty list of positive values".into());
        }
        Ok(())
    }

    /// Reads a `key=value` file (`#` starts a comment) and applies `overrides` on top.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
            None => String::new(),
        };
        let mut pairs = parse_pairs(&text)?;
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Coupling values `start, start + step, ...` up to `stop`, rounded to 12 digits.
    pub fn g2_grid(&self) -> Vec<f64> {
        let n = ((self.g2_stop - self.g2_start) / self.g2_step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let g = self.g2_start + i as f64 * self.g2_step;
                fmt_g(g).parse().expect("formatted float")
            })
            .collect()
    }

    pub fn qite_options(&self) -> QiteOptions<f64> {
        QiteOptions {
            dbeta: self.dbeta,
            trotter_steps: self.trotter_steps,
            threshold: self.threshold,
            c_mode: self.c_mode,
            rhs_scaling: self.rhs_scaling,
            svd_cutoff: self.svd_cutoff,
        }
    }

    pub fn measurement(&self) -> Measurement {
        match self.measurement {
            MeasurementMode::Exact => Measurement::Exact,
            MeasurementMode::Shots => Measurement::Shots { shots: self.shots, seed: self.seed },
        }
    }

    pub fn model_params(&self, g2: f64) -> qmetts::ModelParams<f64> {
        match self.variant {
            Variant::GrossNeveu => qmetts::ModelParams::gross_neveu(self.n_sites, self.am, g2, self.a_mu),
            v => qmetts::ModelParams::new(v, self.n_sites, self.am, g2),
        }
    }

    /// `(key, value)` pairs in [`KEYS`] order; parsing them back gives an equal config.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let temps = self.temperatures.iter().map(|t| fmt_g(*t)).collect::<Vec<_>>().join(",");
        let output = self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        vec![
            ("variant", self.variant.name().to_string()),
            ("n_sites", self.n_sites.to_string()),
            ("am", fmt_g(self.am)),
            ("a_mu", fmt_g(self.a_mu)),
            ("g2_start", fmt_g(self.g2_start)),
            ("g2_stop", fmt_g(self.g2_stop)),
            ("g2_step", fmt_g(self.g2_step)),
            ("dbeta", fmt_g(self.dbeta)),
            ("k_steps", self.k_steps.to_string()),
            ("trotter_steps", self.trotter_steps.to_string()),
            ("threshold", fmt_g(self.threshold)),
            ("measurement", self.measurement.name().to_string()),
            ("shots", self.shots.to_string()),
            ("c_mode", self.c_mode.name().to_string()),
            ("rhs_scaling", self.rhs_scaling.name().to_string()),
            ("pool", self.pool.name().to_string()),
            ("svd_cutoff", fmt_g(self.svd_cutoff)),
            ("seed", self.seed.to_string()),
            ("temperatures", temps),
            ("threads", self.threads.to_string()),
            ("output", output),
            ("format", self.format.name().to_string()),
        ]
    }

    /// The echo as `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.echo() {
            writeln!(s, "{k}={v}").expect("write to string");
        }
        s
    }
}

/// Splits `key=value` lines, skipping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_variant() {
        let e = RunConfig::from_pairs([]).unwrap();
        assert_eq!(e.variant, Variant::Euclidean);
        assert_eq!(e.g2_grid().len(), 31);
        let m = RunConfig::from_pairs([("variant", "minkowski")]).unwrap();
        let grid = m.g2_grid();
        assert_eq!(grid.len(), 26);
        assert_eq!(grid[1], 0.2);
        assert_eq!(grid[25], 5.0);
        assert_eq!(m.dbeta, 0.25);
        assert_eq!((m.k_steps, m.trotter_steps, m.shots), (20, 10, 1024));
        assert_eq!(m.threshold, 0.001);
        assert_eq!(m.am, 0.5);
    }

    #[test]
    fn grid_values_are_clean_decimals() {
        let cfg = RunConfig::defaults(Variant::Euclidean);
        let grid = cfg.g2_grid();
        assert_eq!(grid[3], 0.3);
        assert_eq!(grid[30], 3.0);
    }

    #[test]
    fn later_pairs_override() {
        let cfg = RunConfig::from_pairs([("k_steps", "5"), ("k_steps", "7"), ("c_mode", "linear")]).unwrap();
        assert_eq!(cfg.k_steps, 7);
        assert_eq!(cfg.c_mode, CMode::Linear);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_pairs([
            ("variant", "gn"),
            ("a_mu", "0.35"),
            ("measurement", "shots"),
            ("seed", "42"),
            ("temperatures", "0.1, 0.5,1"),
            ("output", "out.csv"),
            ("format", "csv+json"),
        ])
        .unwrap();
        let pairs = parse_pairs(&cfg.to_text()).unwrap();
        let back = RunConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_input_is_a_usage_error() {
        assert!(matches!(RunConfig::from_pairs([("colour", "red")]), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::from_pairs([("k_steps", "-1")]), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::from_pairs([("n_sites", "3")]), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::from_pairs([("g2_step", "0")]), Err(CliError::Usage(_))));
        assert!(parse_pairs("no equals sign").is_err());
    }
}
