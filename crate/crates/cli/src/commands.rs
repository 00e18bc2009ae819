//! `sweep`, `oracle` and `compare`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use qmetts::oracle::{self, ThermalOracle, LOW_TEMPERATURE_BETA};
use qmetts::thermal::{self, BasisSet};
use qmetts::{model, OperatorPool, Qite};

use crate::config::{MeasurementMode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_g, ResultFile, Row};

/// Runs `f` on a pool of `threads` workers, or on the global pool when `threads == 0`.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

/// QMETTS over the coupling grid: one complete-basis average per `g2`.
pub fn sweep(cfg: &RunConfig) -> CliResult<ResultFile> {
    let observables = model::observables(cfg.n_sites).map_err(CliError::core("observables"))?;
    let pool = OperatorPool::new(cfg.pool, cfg.n_sites).map_err(CliError::core("operator pool"))?;
    let measurement = cfg.measurement();
    let mut rows = Vec::new();
    for g2 in cfg.g2_grid() {
        let ctx = format!("{} at g2 = {}", cfg.variant, fmt_g(g2));
        let ah = model::assemble(&cfg.model_params(g2)).map_err(CliError::core(ctx.clone()))?.ah;
        let qite = Qite::new(ah, pool.clone(), cfg.qite_options()).map_err(CliError::core(ctx.clone()))?;
        let table = with_threads(cfg.threads, || {
            thermal::qmetts_average(&qite, &observables, &BasisSet::Computational, cfg.k_steps, measurement)
        })?
        .map_err(CliError::core(ctx))?;
        for r in table.rows {
            rows.push(Row {
                variant: cfg.variant.name().to_string(),
                g2,
                k: r.k,
                beta: r.beta,
                temperature: r.temperature,
                observable: r.observable,
                value: r.value,
                weight_sum: r.weight_sum,
                stderr: r.stderr,
                mode: cfg.measurement.name().to_string(),
                seed: cfg.seed,
            });
        }
    }
    Ok(ResultFile::new("sweep", cfg, rows))
}

/// Exact diagonalization over the coupling grid and the configured temperatures.
pub fn oracle_sweep(cfg: &RunConfig) -> CliResult<ResultFile> {
    let base = cfg.model_params(0.0);
    let sweep = oracle::coupling_sweep(&base, &cfg.temperatures, &cfg.g2_grid()).map_err(CliError::core("oracle"))?;
    let mut rows = Vec::with_capacity(2 * sweep.points.len());
    for p in &sweep.points {
        for (name, value) in [(model::CHIRAL, p.chiral), (model::FERMION_NUMBER, p.fermion_number)] {
            rows.push(Row {
                variant: cfg.variant.name().to_string(),
                g2: p.g2,
                k: 0,
                beta: p.beta,
                temperature: p.temperature,
                observable: name.to_string(),
                value,
                weight_sum: p.partition,
                stderr: 0.0,
                mode: "oracle".to_string(),
                seed: cfg.seed,
            });
        }
    }
    Ok(ResultFile::new("oracle", cfg, rows))
}

#[derive(Clone, Debug)]
pub struct CompareOptions {
    pub tolerance: f64,
    /// Points within this distance in `g2` of a plateau step are excluded.
    pub exclusion: f64,
    /// Restrict the comparison to one temperature.
    pub temperature: Option<f64>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { tolerance: 0.05, exclusion: 0.2, temperature: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparePoint {
    pub g2: f64,
    pub temperature: f64,
    pub observable: String,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub stderr: f64,
    pub excluded: bool,
    /// The reference was computed afresh rather than read from the file.
    pub reevaluated: bool,
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub points: Vec<ComparePoint>,
    pub steps: Vec<f64>,
    pub exclusion: f64,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    /// Fraction of included points with `deviation <= 3 stderr` (shots mode only).
    pub within_three_sigma: Option<f64>,
    pub pass: bool,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Compares a result file against a reference file at matching `(g2, T, observable)`.
///
/// Reference values missing at a QMETTS temperature are recomputed by exact
/// diagonalization, provided the reference covers the coupling.
pub fn compare(values: &ResultFile, reference: &ResultFile, opts: &CompareOptions) -> CliResult<CompareReport> {
    let cfg = values.config()?;
    let ref_cfg = reference.config()?;
    if (cfg.variant, cfg.n_sites) != (ref_cfg.variant, ref_cfg.n_sites) || !same(cfg.am, ref_cfg.am) || !same(cfg.a_mu, ref_cfg.a_mu) {
        return Err(CliError::Format(format!(
            "model mismatch: {} N={} am={} vs {} N={} am={}",
            cfg.variant, cfg.n_sites, cfg.am, ref_cfg.variant, ref_cfg.n_sites, ref_cfg.am
        )));
    }
    let selected: Vec<&Row> = values
        .rows
        .iter()
        .filter(|r| opts.temperature.is_none_or(|t| same(r.temperature, t)))
        .collect();
    if selected.is_empty() {
        return Err(CliError::Format("no rows at the requested temperature".into()));
    }
    let ref_g2: Vec<f64> = reference.rows.iter().map(|r| r.g2).collect();
    let missing: BTreeSet<String> =
        selected.iter().filter(|r| !ref_g2.iter().any(|g| same(*g, r.g2))).map(|r| fmt_g(r.g2)).collect();
    if !missing.is_empty() {
        return Err(CliError::Format(format!(
            "grid mismatch: reference has no rows at g2 = {}",
            missing.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }

    let mut grid: Vec<f64> = selected.iter().map(|r| r.g2).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| same(*a, *b));
    let steps = oracle::plateau_steps(&cfg.model_params(0.0), &grid, LOW_TEMPERATURE_BETA)
        .map_err(CliError::core("plateau detection"))?;

    let observables = model::observables(cfg.n_sites).map_err(CliError::core("observables"))?;
    let ops: Vec<_> = observables.iter().map(|(_, o)| o.clone()).collect();
    let mut cached: Option<(f64, ThermalOracle<f64>)> = None;
    let mut points = Vec::with_capacity(selected.len());
    for r in selected {
        let found = reference
            .rows
            .iter()
            .find(|o| same(o.g2, r.g2) && same(o.temperature, r.temperature) && o.observable == r.observable);
        let (reference_value, reevaluated) = match found {
            Some(o) => (o.value, false),
            None => {
                let which = observables
                    .iter()
                    .position(|(n, _)| *n == r.observable)
                    .ok_or_else(|| CliError::Format(format!("unknown observable {:?}", r.observable)))?;
                if cached.as_ref().is_none_or(|(g, _)| !same(*g, r.g2)) {
                    let ah = model::assemble(&cfg.model_params(r.g2)).map_err(CliError::core("oracle"))?.ah;
                    cached = Some((r.g2, ThermalOracle::new(&ah, &ops).map_err(CliError::core("oracle"))?));
                }
                let (_, o) = cached.as_ref().expect("oracle cached");
                (o.expectation(which, 1.0 / r.temperature).map_err(CliError::core("oracle"))?, true)
            }
        };
        points.push(ComparePoint {
            g2: r.g2,
            temperature: r.temperature,
            observable: r.observable.clone(),
            value: r.value,
            reference: reference_value,
            deviation: (r.value - reference_value).abs(),
            stderr: r.stderr,
            excluded: oracle::near_step(r.g2, &steps, opts.exclusion),
            reevaluated,
        });
    }

    let included: Vec<&ComparePoint> = points.iter().filter(|p| !p.excluded).collect();
    let max_deviation = included.iter().map(|p| p.deviation).fold(0.0, f64::max);
    let mean_deviation = if included.is_empty() {
        0.0
    } else {
        included.iter().map(|p| p.deviation).sum::<f64>() / included.len() as f64
    };
    let within_three_sigma = (cfg.measurement == MeasurementMode::Shots && !included.is_empty()).then(|| {
        included.iter().filter(|p| p.deviation <= 3.0 * p.stderr).count() as f64 / included.len() as f64
    });
    let pass = match within_three_sigma {
        Some(frac) => frac >= 0.95,
        None => max_deviation <= opts.tolerance,
    };
    Ok(CompareReport {
        points,
        steps,
        exclusion: opts.exclusion,
        tolerance: opts.tolerance,
        max_deviation,
        mean_deviation,
        within_three_sigma,
        pass,
    })
}

impl CompareReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let w = |s: &mut String, line: String| {
            s.push_str(&line);
            s.push('\n');
        };
        w(&mut s, "g2,T,observable,value,reference,deviation,stderr,excluded,reevaluated".into());
        for p in &self.points {
            w(
                &mut s,
                format!(
                    "{},{},{},{},{},{},{},{},{}",
                    fmt_g(p.g2),
                    fmt_g(p.temperature),
                    p.observable,
                    fmt_g(p.value),
                    fmt_g(p.reference),
                    fmt_g(p.deviation),
                    fmt_g(p.stderr),
                    p.excluded,
                    p.reevaluated
                ),
            );
        }
        for st in &self.steps {
            let _ = writeln!(
                s,
                "# excluded window: g2 in [{}, {}] around step at {}",
                fmt_g(st - self.exclusion),
                fmt_g(st + self.exclusion),
                fmt_g(*st)
            );
        }
        let included = self.points.iter().filter(|p| !p.excluded).count();
        let _ = writeln!(s, "# points={} included={}", self.points.len(), included);
        let _ = writeln!(s, "# max_deviation={}", fmt_g(self.max_deviation));
        let _ = writeln!(s, "# mean_deviation={}", fmt_g(self.mean_deviation));
        if let Some(f) = self.within_three_sigma {
            let _ = writeln!(s, "# within_3_sigma={}", fmt_g(f));
        }
        let _ = writeln!(s, "# tolerance={}", fmt_g(self.tolerance));
        let _ = writeln!(s, "# result={}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}
