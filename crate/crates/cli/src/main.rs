use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmetts::SiteTables;
use qmetts_cli::commands::{self, CompareOptions};
use qmetts_cli::config::OutputFormat;
use qmetts_cli::{validate, CliError, CliResult, ResultFile, RunConfig};

#[derive(Parser)]
#[command(name = "qmetts", version, about = "Finite-temperature QITE sweeps of the lattice massive Thirring model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// QMETTS thermal averages over the coupling grid.
    Sweep(RunArgs),
    /// Exact-diagonalization reference over the coupling and temperature grids.
    Oracle(RunArgs),
    /// Compare a result file against a reference file.
    Compare {
        values: PathBuf,
        reference: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Half-width of the excluded window around each plateau step.
        #[arg(long, default_value_t = 0.2)]
        exclusion: f64,
        /// Only compare rows at this temperature.
        #[arg(long)]
        temperature: Option<f64>,
        /// Write the per-point report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Validate {
        /// Use deliberately broken site tables (negative control).
        #[arg(long)]
        corrupt_mc: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra KEY=VALUE overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    n_sites: Option<String>,
    #[arg(long)]
    am: Option<String>,
    #[arg(long)]
    a_mu: Option<String>,
    #[arg(long)]
    g2_start: Option<String>,
    #[arg(long)]
    g2_stop: Option<String>,
    #[arg(long)]
    g2_step: Option<String>,
    #[arg(long)]
    dbeta: Option<String>,
    #[arg(long)]
    k_steps: Option<String>,
    #[arg(long)]
    trotter_steps: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    measurement: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    c_mode: Option<String>,
    #[arg(long)]
    rhs_scaling: Option<String>,
    #[arg(long)]
    pool: Option<String>,
    #[arg(long)]
    svd_cutoff: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    temperatures: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long, short)]
    output: Option<String>,
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn config(&self) -> CliResult<RunConfig> {
        let flags = [
            ("variant", &self.variant),
            ("n_sites", &self.n_sites),
            ("am", &self.am),
            ("a_mu", &self.a_mu),
            ("g2_start", &self.g2_start),
            ("g2_stop", &self.g2_stop),
            ("g2_step", &self.g2_step),
            ("dbeta", &self.dbeta),
            ("k_steps", &self.k_steps),
            ("trotter_steps", &self.trotter_steps),
            ("threshold", &self.threshold),
            ("measurement", &self.measurement),
            ("shots", &self.shots),
            ("c_mode", &self.c_mode),
            ("rhs_scaling", &self.rhs_scaling),
            ("pool", &self.pool),
            ("svd_cutoff", &self.svd_cutoff),
            ("seed", &self.seed),
            ("temperatures", &self.temperatures),
            ("threads", &self.threads),
            ("output", &self.output),
            ("format", &self.format),
        ];
        let mut overrides: Vec<(String, String)> =
            flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

fn emit(file: &ResultFile, cfg: &RunConfig) -> CliResult<()> {
    match &cfg.output {
        Some(path) => file.write(path, cfg.format == OutputFormat::CsvJson),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(file.to_csv().as_bytes()).map_err(|e| CliError::io("<stdout>".as_ref(), e))
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.config()?;
            emit(&commands::sweep(&cfg)?, &cfg)?;
            Ok(true)
        }
        Command::Oracle(args) => {
            let cfg = args.config()?;
            emit(&commands::oracle_sweep(&cfg)?, &cfg)?;
            Ok(true)
        }
        Command::Compare { values, reference, tolerance, exclusion, temperature, report } => {
            let opts = CompareOptions { tolerance, exclusion, temperature };
            let rep = commands::compare(&ResultFile::read(&values)?, &ResultFile::read(&reference)?, &opts)?;
            let text = rep.render();
            match report {
                Some(p) => {
                    std::fs::write(&p, &text).map_err(|e| CliError::io(&p, e))?;
                    let summary: String = text.lines().filter(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect();
                    print!("{summary}");
                }
                None => print!("{text}"),
            }
            Ok(rep.pass)
        }
        Command::Validate { corrupt_mc } => {
            let tables = if corrupt_mc { validate::corrupted_tables() } else { SiteTables::STANDARD };
            let (text, ok) = validate::validate(&tables);
            print!("{text}");
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qmetts: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
