use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use fpdce_cli::commands::{self, NumberFormat};
use fpdce_cli::scenario_file::{parse_model, parse_scenario, parse_tie_rule};
use fpdce_core::{ModeSpec, Snapshot};

/// Single-photon Fabry-Perot release, mirror reflection and delayed-choice
/// experiments.
#[derive(Parser)]
#[command(name = "fpdce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModeArgs {
    /// Cavity length.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Mode number.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Speed of light.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl ModeArgs {
    fn mode(&self) -> anyhow::Result<ModeSpec> {
        Ok(ModeSpec::new(self.a, self.n, self.c)?)
    }
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print values with 17 significant digits.
    #[arg(long)]
    fixed17: bool,
}

impl Output {
    fn format(&self) -> NumberFormat {
        NumberFormat {
            fixed17: self.fixed17,
        }
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample E, B and the density on a uniform grid.
    Snapshot {
        #[command(flatten)]
        mode: ModeArgs,
        /// Reflection parameter: distance travelled by the trailing edge.
        #[arg(long, conflicts_with = "t")]
        s: Option<f64>,
        /// Time since release (or cavity time with --cavity).
        #[arg(long)]
        t: Option<f64>,
        /// Sample the cavity eigenmode instead of the released state.
        #[arg(long, requires = "t")]
        cavity: bool,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Energy ledger over a sweep of the reflection parameter.
    Energy {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Analytic versus located position of the inner discontinuity.
    Track {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo delayed-choice experiment from a scenario file.
    Dce {
        scenario: PathBuf,
        /// qm or preferred-way.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// earliest-inserted or closest.
        #[arg(long)]
        tie_rule: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Verify identities and oracles; exits 2 on any failure.
    Check {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
}

enum Outcome {
    Ok,
    Violated,
}

fn execute(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Snapshot {
            mode,
            s,
            t,
            cavity,
            grid,
            output,
        } => {
            let mode = mode.mode()?;
            let snap = match (s, t) {
                (Some(s), None) => Snapshot::reflection(&mode, s, grid)?,
                (None, Some(t)) if cavity => Snapshot::cavity(&mode, t, grid)?,
                (None, Some(t)) => Snapshot::free(&mode, t, grid)?,
                _ => bail!("one of --s or --t is required"),
            };
            output.emit(&commands::snapshot_csv(&snap, output.format()))?;
        }
        Command::Energy {
            mode,
            steps,
            output,
        } => {
            output.emit(&commands::energy_csv(
                &mode.mode()?,
                steps,
                output.format(),
            )?)?;
        }
        Command::Track {
            mode,
            steps,
            grid,
            output,
        } => {
            let rows = commands::track(&mode.mode()?, steps, grid)?;
            output.emit(&commands::track_csv(&rows, output.format()))?;
        }
        Command::Dce {
            scenario,
            model,
            seed,
            trials,
            tie_rule,
            output,
        } => {
            let text = fs::read_to_string(&scenario)
                .with_context(|| format!("reading {}", scenario.display()))?;
            let mut sc = parse_scenario(&text)?;
            if let Some(m) = model {
                sc.model = parse_model(&m)?;
            }
            if let Some(r) = tie_rule {
                sc.tie_rule = parse_tie_rule(&r)?;
            }
            sc.seed = seed.unwrap_or(sc.seed);
            sc.trials = trials.unwrap_or(sc.trials);
            let run = commands::dce(&sc, output.format())?;
            let summary = commands::dce_summary(&run);
            output.emit(&run.csv)?;
            if output.out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
            if !run.violations.is_empty() {
                return Ok(Outcome::Violated);
            }
        }
        Command::Check { mode, steps } => {
            let report = commands::check(&mode.mode()?, steps)?;
            for line in &report.lines {
                println!("{line}");
            }
            if !report.ok {
                return Ok(Outcome::Violated);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
