use clap::{Parser, Subcommand, ValueEnum};
use hetnet::config::Mode;
use hetnet::emit::{emit, render, Format};
use hetnet::experiment::{evaluate, AnalyticModel, RunOptions, SimulationRequest};
use hetnet::{Error, ExperimentConfig, ResultRow};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hetnet", version, about = "LTE/Wi-Fi cluster bit-rate and blocking analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(clap::Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration file.
    Validate { config: PathBuf },
    /// Evaluate the base configuration for every sensitivity pair.
    Analyze {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Also write the generator in sparse text form.
        #[arg(long)]
        dump_generator: Option<PathBuf>,
    },
    /// Analytic rows plus simulated counterparts.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u32>,
    },
    /// Evaluate the configured sweep.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

fn write_rows(rows: &[ResultRow], out: &Output) -> hetnet::Result<()> {
    match &out.output {
        Some(path) => emit(rows, out.format.into(), path),
        None => {
            let bytes = render(rows, out.format.into())?;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

fn dump(model: &AnalyticModel, path: &Path) -> hetnet::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    model.generator.write_sparse(Some(&model.space), &mut file)?;
    file.flush()?;
    Ok(())
}

fn run(cli: Cli) -> hetnet::Result<()> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!(
                "ok: {} services, {} sub-cells, {} LTE units",
                cfg.services.len(),
                cfg.geometry.subcells.len(),
                cfg.networks.lte_units
            );
            Ok(())
        }
        Command::Analyze {
            config,
            out,
            dump_generator,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let model = AnalyticModel::build(&cfg)?;
            if let Some(path) = dump_generator {
                dump(&model, &path)?;
            }
            let rows = evaluate(
                &model,
                &RunOptions {
                    sweep: false,
                    simulation: None,
                },
            )?;
            write_rows(&rows, &out)
        }
        Command::Simulate {
            config,
            out,
            seed,
            reps,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let model = AnalyticModel::build(&cfg)?;
            let opts = RunOptions {
                sweep: cfg.sweep.is_some(),
                simulation: Some(SimulationRequest {
                    seed: seed.unwrap_or(cfg.simulation.seed),
                    replications: reps.unwrap_or(cfg.simulation.replications),
                }),
            };
            if opts.simulation.is_some_and(|s| s.replications == 0) {
                return Err(Error::Config(vec!["--reps must be >= 1".into()]));
            }
            write_rows(&evaluate(&model, &opts)?, &out)
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let model = AnalyticModel::build(&cfg)?;
            let simulation = (cfg.mode != Mode::Analytic).then_some(SimulationRequest {
                seed: cfg.simulation.seed,
                replications: cfg.simulation.replications,
            });
            let opts = RunOptions {
                sweep: true,
                simulation,
            };
            write_rows(&evaluate(&model, &opts)?, &out)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_config() => 2,
        Error::Io(_) | Error::EmptyResults => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetnet: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
