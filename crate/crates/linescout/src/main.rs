//! Command-line front end. See README for the file formats.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use linescout::cli::{self, CliError, Mode, OracleKind, RunOptions};

#[derive(Parser)]
#[command(
    name = "linescout",
    version,
    about = "Boundary identification by active sampling"
)]
struct Top {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Det,
    Stoch,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed (same as --override control.seed=N).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the horizon (same as --override control.horizon=M).
    #[arg(long)]
    steps: Option<usize>,
    /// Raw overrides, repeatable: --override control.varrho=0.2
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl CommonRunArgs {
    fn override_pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for o in &self.overrides {
            match o.split_once('=') {
                Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
                None => {
                    return Err(CliError::Input(format!("override {o:?} must be KEY=VALUE")));
                }
            }
        }
        if let Some(seed) = self.seed {
            out.push(("control.seed".into(), seed.to_string()));
        }
        if let Some(steps) = self.steps {
            out.push(("control.horizon".into(), steps.to_string()));
        }
        Ok(out)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory.csv, report.txt (and
    /// belief.csv, plot.svg) into --out.
    Run {
        #[command(flatten)]
        common: CommonRunArgs,
        #[arg(long, value_enum, default_value = "det")]
        mode: ModeArg,
        /// Credible level summarized for stochastic runs.
        #[arg(long, default_value_t = 0.8)]
        level: f64,
        /// Skip the SVG plot.
        #[arg(long)]
        no_svg: bool,
    },
    /// Run seeded stochastic replicates and write coverage.csv into --out.
    Calibrate {
        #[command(flatten)]
        common: CommonRunArgs,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long, default_value_t = 0.8)]
        level: f64,
    },
    /// Brute-force verification oracles over a dataset file.
    Oracle {
        #[command(subcommand)]
        which: OracleCmd,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Grid + LP separability verdicts.
    SeparabilityGrid { dataset: PathBuf },
    /// Feasible-region projections over a parameter box.
    PolygonProject {
        dataset: PathBuf,
        /// Box as theta_min,theta_max,c_min,c_max (radians/meters).
        #[arg(long, value_name = "T0,T1,C0,C1")]
        r#box: Option<String>,
    },
    /// Best separating margin over a direction grid.
    MarginGrid { dataset: PathBuf },
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run {
            common,
            mode,
            level,
            no_svg,
        } => {
            let overrides = common.override_pairs()?;
            let mode = match mode {
                ModeArg::Det => Mode::Det,
                ModeArg::Stoch => Mode::Stoch,
            };
            let report = cli::cmd_run(
                &common.scenario,
                mode,
                &common.out,
                &overrides,
                &RunOptions { no_svg, level },
            )?;
            println!(
                "ok: {} steps, artifacts in {}",
                report.steps,
                common.out.display()
            );
            Ok(())
        }
        Command::Calibrate {
            common,
            runs,
            level,
        } => {
            let overrides = common.override_pairs()?;
            let cal = cli::cmd_calibrate(&common.scenario, runs, level, &common.out, &overrides)?;
            println!(
                "coverage: joint={} theta={} c={} over {} runs (level {})",
                cal.coverage,
                cal.theta_coverage,
                cal.c_coverage,
                cal.rows.len(),
                level
            );
            Ok(())
        }
        Command::Oracle { which } => {
            let out = match which {
                OracleCmd::SeparabilityGrid { dataset } => {
                    cli::cmd_oracle(OracleKind::SeparabilityGrid, &dataset, None)?
                }
                OracleCmd::PolygonProject { dataset, r#box } => {
                    let bx = match r#box {
                        None => None,
                        Some(s) => {
                            let parts: Vec<f64> = s
                                .split(',')
                                .map(|p| p.trim().parse::<f64>())
                                .collect::<Result<_, _>>()
                                .map_err(|e| CliError::Input(format!("bad --box: {e}")))?;
                            if parts.len() != 4 {
                                return Err(CliError::Input("--box needs four numbers".into()));
                            }
                            Some((parts[0], parts[1], parts[2], parts[3]))
                        }
                    };
                    cli::cmd_oracle(OracleKind::PolygonProject, &dataset, bx)?
                }
                OracleCmd::MarginGrid { dataset } => {
                    cli::cmd_oracle(OracleKind::MarginGrid, &dataset, None)?
                }
            };
            print!("{out}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let top = Top::parse();
    match run(top.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
