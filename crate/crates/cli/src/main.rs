use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mucorr_cli::error::FieldError;
use mucorr_cli::output::{emit, Format};
use mucorr_cli::run::{local_settings_of, run, sweep, Report};
use mucorr_cli::scenario::{
    GridRange, McOverrides, Scenario, SweepParameter, BUILTINS, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use mucorr_cli::CliError;
use mucorr_core::montecarlo::SampleConfig;

#[derive(Parser)]
#[command(name = "mucorr", version, about = "Correlations between measured and unmeasured outcomes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario or a scenario file.
    Run {
        scenario: String,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Tabulate derived quantities over a parameter grid.
    Sweep {
        /// theta_degrees or isotropic_p
        #[arg(long)]
        parameter: String,
        #[arg(long, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, allow_negative_numbers = true)]
        max: f64,
        #[arg(long)]
        step: f64,
        /// Scenario supplying local settings and Monte Carlo defaults.
        #[arg(long)]
        base: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// List built-in scenarios.
    List,
    /// Check a scenario without running it.
    Validate { scenario: String },
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// Add Monte Carlo estimates.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl McArgs {
    fn overrides(&self) -> McOverrides {
        McOverrides {
            enable: self.mc,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, out, mc } => {
            let s = Scenario::load(&scenario)?.with_mc_overrides(mc.overrides())?;
            emit(&run(&s)?, out.format, out.out.as_deref())
        }
        Command::Sweep {
            parameter,
            min,
            max,
            step,
            base,
            out,
            mc,
        } => {
            let param = SweepParameter::parse(&parameter).ok_or_else(|| {
                CliError::Validation(vec![FieldError::new(
                    "--parameter",
                    format!("unknown sweep parameter `{parameter}` (expected theta_degrees or isotropic_p)"),
                )])
            })?;
            let range = GridRange::new(min, max, step).map_err(CliError::Validation)?;
            let (id, local, cfg) = match base {
                Some(b) => {
                    let s = Scenario::load(&b)?.with_mc_overrides(mc.overrides())?;
                    let local = local_settings_of(&s);
                    (s.id, local, s.mc)
                }
                None => {
                    let o = mc.overrides();
                    let cfg = if o.enable || o.samples.is_some() || o.seed.is_some() {
                        Some(
                            SampleConfig::new(o.samples.unwrap_or(DEFAULT_SAMPLES), o.seed.unwrap_or(DEFAULT_SEED))
                                .map_err(|_| CliError::Validation(vec![FieldError::new("--samples", "must be at least 1")]))?,
                        )
                    } else {
                        None
                    };
                    (format!("sweep-{}", param.name()), None, cfg)
                }
            };
            let table = sweep(&id, param, range, local, cfg)?;
            emit(&Report::Sweep(table), out.format, out.out.as_deref())
        }
        Command::List => {
            for (id, _) in BUILTINS {
                let s = Scenario::builtin(id).expect("built-in scenarios are valid");
                println!("{id:<16} {:<15} {}", s.kind.name(), s.description);
            }
            Ok(())
        }
        Command::Validate { scenario } => {
            let s = Scenario::load(&scenario)?;
            println!("ok: {} ({})", s.id, s.kind.name());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Validation(errs) => {
                    for fe in errs {
                        eprintln!("error: {fe}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
