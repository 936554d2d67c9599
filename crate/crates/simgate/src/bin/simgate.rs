//! Thin CLI over the library: run one gate, sweep a parameter, or dump the
//! instantaneous spectrum. Exit codes: 0 ok, 2 config error, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use simgate::experiments::{
    preset, rows_to_csv, run_gate, run_sweep, spectrum_to_csv, spectrum_trace, Model, RunConfig,
    RunError, SweepSpec, SweepVariable, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "simgate", about = "Adiabatic-passage gate simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: fig2 | fig3-local | fig3-cnot.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override the model tier: ideal | effective | exact.
    #[arg(long, value_name = "MODEL")]
    model: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig, RunError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => RunConfig::from_file(path)?,
            (None, Some(name)) => preset(name).ok_or_else(|| {
                RunError::Config(simgate::experiments::ConfigError::UnknownPreset(
                    name.clone(),
                ))
            })?,
            _ =>

                return Err(RunError::Config(
                    simgate::experiments::ConfigError::UnknownPreset(format!(
                        "pass exactly one of --config or --preset ({})",
                        PRESET_NAMES.join("|")
                    )),
                )),
        };
        if let Some(m) = &self.model {
            cfg.model = match m.as_str() {
                "ideal" => Model::Ideal,
                "effective" => Model::Effective,
                "exact" => Model::Exact,
                other => {
                    return Err(RunError::Config(
                        simgate::experiments::ConfigError::UnknownPreset(format!(
                            "unknown model '{other}'"
                        )),
                    ))
                }
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one gate and write a JSON report.
    Run {
        #[command(flatten)]
        source: Source,
        /// Report destination.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Sweep one variable and write a CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Variable: total_time | u_bb | occupation_imbalance.
        #[arg(long, value_name = "VAR")]
        sweep: SweepVariable,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        points: usize,
        /// Log-spaced grid.
        #[arg(long)]
        log: bool,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Dump the instantaneous spectrum along the protocol as CSV.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Number of time samples.
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simgate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run { source, out } => {
            let cfg = source.load()?;
            let report = run_gate(&cfg)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write(&out, &(json + "\n"))?;
            println!(
                "{} gate ({} model): error {:.3e}, leakage {:.3e}, min gap {:.3e} -> {}",
                serde_json::to_string(&report.gate).unwrap().trim_matches('"'),
                report.model,
                report.error,
                report.leakage,
                report.min_gap,
                out.display()
            );
            Ok(())
        }
        Command::Sweep {
            source,
            sweep,
            min,
            max,
            points,
            log,
            out,
        } => {
            let base = source.load()?;
            let spec = SweepSpec {
                variable: sweep,
                min,
                max,
                points,
                log,
                base,
            };
            let rows = run_sweep(&spec)?;
            write(&out, &rows_to_csv(&rows))?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!(
                "{} sweep points ({} failed) -> {}",
                rows.len(),
                failed,
                out.display()
            );
            Ok(())
        }
        Command::Spectrum {
            source,
            out,
            samples,
        } => {
            let cfg = source.load()?;
            let tr = spectrum_trace(&cfg, samples)?;
            write(&out, &spectrum_to_csv(&tr))?;
            println!("{} spectrum samples -> {}", tr.times.len(), out.display());
            Ok(())
        }
    }
}

fn write(path: &PathBuf, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text)
        .map_err(|e| RunError::Config(simgate::experiments::ConfigError::Io(e)))
}
