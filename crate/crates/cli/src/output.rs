//! CSV result files with a `# key=value` metadata header and an optional JSON sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{parse_pairs, RunConfig, KEYS};
use crate::error::{CliError, CliResult};

pub const HEADER: &str = "variant,g2,k,beta,T,observable,value,weight_sum,stderr,mode,seed";

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Renders like C's `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One result row. Oracle rows use `k = 0` and carry the partition function in `weight_sum`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub variant: String,
    pub g2: f64,
    pub k: usize,
    pub beta: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub observable: String,
    pub value: f64,
    pub weight_sum: f64,
    pub stderr: f64,
    pub mode: String,
    pub seed: u64,
}

impl Row {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.variant,
            fmt_g(self.g2),
            self.k,
            fmt_g(self.beta),
            fmt_g(self.temperature),
            self.observable,
            fmt_g(self.value),
            fmt_g(self.weight_sum),
            fmt_g(self.stderr),
            self.mode,
            self.seed
        )
    }

    fn from_csv(line: &str, lineno: usize) -> CliResult<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(CliError::Format(format!("line {lineno}: expected 11 fields, found {}", f.len())));
        }
        let num = |i: usize| -> CliResult<f64> {
            f[i].parse().map_err(|_| CliError::Format(format!("line {lineno}: bad number {:?}", f[i])))
        };
        let int = |i: usize| -> CliResult<u64> {
            f[i].parse().map_err(|_| CliError::Format(format!("line {lineno}: bad integer {:?}", f[i])))
        };
        Ok(Row {
            variant: f[0].to_string(),
            g2: num(1)?,
            k: int(2)? as usize,
            beta: num(3)?,
            temperature: num(4)?,
            observable: f[5].to_string(),
            value: num(6)?,
            weight_sum: num(7)?,
            stderr: num(8)?,
            mode: f[9].to_string(),
            seed: int(10)?,
        })
    }
}

/// Contents of a result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    /// Ordered `key=value` metadata, including the full config echo.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

/// Timestamp recorded in file metadata: `SOURCE_DATE_EPOCH` if set, else `unset`.
pub fn timestamp() -> String {
    std::env::var("SOURCE_DATE_EPOCH").unwrap_or_else(|_| "unset".into())
}

impl ResultFile {
    pub fn new(command: &str, config: &RunConfig, rows: Vec<Row>) -> Self {
        let mut metadata = vec![
            ("command".to_string(), command.to_string()),
            ("artifact_version".to_string(), ARTIFACT_VERSION.to_string()),
            ("timestamp".to_string(), timestamp()),
        ];
        metadata.extend(config.echo().into_iter().map(|(k, v)| (k.to_string(), v)));
        Self { metadata, rows }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Rebuilds the run configuration from the metadata echo.
    pub fn config(&self) -> CliResult<RunConfig> {
        RunConfig::from_pairs(
            self.metadata.iter().filter(|(k, _)| KEYS.contains(&k.as_str())).map(|(k, v)| (k.as_str(), v.as_str())),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            writeln!(s, "# {k}={v}").expect("write to string");
        }
        s.push_str(HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str) -> CliResult<Self> {
        let mut meta_text = String::new();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix('#') {
                meta_text.push_str(m.trim());
                meta_text.push('\n');
            } else if !seen_header {
                if line.trim() != HEADER {
                    return Err(CliError::Format(format!("line {}: expected header {HEADER:?}", i + 1)));
                }
                seen_header = true;
            } else if !line.trim().is_empty() {
                rows.push(Row::from_csv(line, i + 1)?);
            }
        }
        if !seen_header {
            return Err(CliError::Format("missing CSV header".into()));
        }
        let metadata = parse_pairs(&meta_text).map_err(|e| CliError::Format(e.to_string()))?;
        Ok(Self { metadata, rows })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_csv(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
    }

    /// Writes the CSV and, when asked, a JSON sidecar at `<path>.json`.
    pub fn write(&self, path: &Path, with_json: bool) -> CliResult<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))?;
        if with_json {
            let side = sidecar_path(path);
            let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Format(e.to_string()))?;
            std::fs::write(&side, json + "\n").map_err(|e| CliError::io(&side, e))?;
        }
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
