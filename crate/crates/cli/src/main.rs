//! `pathlin`: linearize, synthesize and check sampled curves on model
//! manifolds.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failures
//! and failed tolerance checks.

mod check;
mod commands;
mod files;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pathlin_core::geometry::MODEL_NAMES;
use pathlin_core::TransportConfig;

use commands::{BasisKind, FlowArgs, FrameKind, Outcome, Sinks};
use files::{invalid, lookup_model, to_json, Invalid};

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "pathlin", version, about = "Path-space linearization on model manifolds")]
struct Cli {
    /// RK4 substeps per grid interval.
    #[arg(long, global = true, default_value_t = 2)]
    n_substeps: usize,
    /// Report tolerance failures but exit 0. Tolerances are not changed.
    #[arg(long, global = true)]
    tolerance_report_only: bool,
    /// Seed for the invariant suite.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the diagnostic report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the samples as CSV for plotting.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct DataOutputArgs {
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

impl From<OutputArgs> for Sinks {
    fn from(a: OutputArgs) -> Self {
        Sinks {
            output: a.output,
            report: a.report,
            csv: a.csv,
        }
    }
}

impl From<DataOutputArgs> for Sinks {
    fn from(a: DataOutputArgs) -> Self {
        Sinks {
            output: a.output,
            report: a.report,
            csv: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the model manifolds and their charts.
    Models {
        #[arg(long)]
        describe: Option<String>,
    },
    /// Curve file -> tangent-curve file.
    Linearize {
        curve: PathBuf,
        #[arg(long, value_enum, default_value = "orthonormal")]
        frame: FrameKind,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tangent-curve file -> curve file.
    Synthesize {
        tangent_curve: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Linearize and synthesize again; report the pointwise error.
    Roundtrip {
        curve: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Two-parameter maps on squares.
    Cube2 {
        #[command(subcommand)]
        direction: CubeCommand,
    },
    /// Fit a polynomial to the linearization and realize it as a curve.
    Polyfit {
        curve: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value = "bernstein")]
        basis: BasisKind,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Flow a points file along the carrier field that moves P to Q.
    Flow {
        points: PathBuf,
        /// `x,y` or `CHART:x,y`.
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        time: f64,
        /// Integrate geodesics instead of using closed forms.
        #[arg(long)]
        shooting: bool,
        #[command(flatten)]
        out: DataOutputArgs,
    },
    /// Move a curve through its basepoint to one through `--to`.
    Trivialize {
        curve: PathBuf,
        #[arg(long)]
        to: String,
        #[arg(long)]
        shooting: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Inverse of `trivialize` for the chart based at `--base`.
    Untrivialize {
        curve: PathBuf,
        #[arg(long)]
        base: String,
        #[arg(long)]
        shooting: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Reparametrize a curve by arc length.
    Normalize {
        curve: PathBuf,
        /// Smallest admissible speed.
        #[arg(long, default_value_t = 1e-3)]
        floor: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the seeded invariant suite and print a table.
    Check {
        /// Restrict to these models (repeatable); default all.
        #[arg(long)]
        model: Vec<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CubeCommand {
    /// Cube file -> cube-linearization file.
    Forward {
        cube: PathBuf,
        #[arg(long, value_enum, default_value = "orthonormal")]
        frame: FrameKind,
        #[command(flatten)]
        out: DataOutputArgs,
    },
    /// Cube-linearization file -> cube file.
    Inverse {
        linearization: PathBuf,
        #[command(flatten)]
        out: DataOutputArgs,
    },
}

fn dispatch(cli: Cli, echo: &[String]) -> Result<Outcome> {
    if cli.n_substeps == 0 {
        return Err(invalid("--n-substeps: must be at least 1"));
    }
    let cfg = TransportConfig {
        substeps: cli.n_substeps,
        ..TransportConfig::default()
    };
    match cli.command {
        Command::Models { describe } => commands::models(describe.as_deref()),
        Command::Linearize { curve, frame, out } => {
            commands::linearize(echo, &curve, frame, &out.into(), &cfg)
        }
        Command::Synthesize { tangent_curve, out } => {
            commands::synthesize(echo, &tangent_curve, &out.into(), &cfg)
        }
        Command::Roundtrip { curve, output } => commands::roundtrip(echo, &curve, output, &cfg),
        Command::Cube2 { direction } => match direction {
            CubeCommand::Forward { cube, frame, out } => {
                commands::cube_forward(echo, &cube, frame, &out.into(), &cfg)
            }
            CubeCommand::Inverse { linearization, out } => {
                commands::cube_inverse(echo, &linearization, &out.into(), &cfg)
            }
        },
        Command::Polyfit {
            curve,
            degree,
            basis,
            out,
        } => commands::polyfit(echo, &curve, degree, basis, &out.into(), &cfg),
        Command::Flow {
            points,
            p,
            q,
            time,
            shooting,
            out,
        } => {
            let args = FlowArgs {
                points: &points,
                p: &p,
                q: &q,
                time,
                shooting,
            };
            commands::flow_points(echo, &args, &out.into())
        }
        Command::Trivialize {
            curve,
            to,
            shooting,
            out,
        } => commands::trivialize_curve(echo, &curve, &to, shooting, &out.into()),
        Command::Untrivialize {
            curve,
            base,
            shooting,
            out,
        } => commands::untrivialize_curve(echo, &curve, &base, shooting, &out.into()),
        Command::Normalize { curve, floor, out } => commands::normalize(echo, &curve, floor, &out.into()),
        Command::Check { model, report } => {
            let names: Vec<&str> = if model.is_empty() {
                MODEL_NAMES.to_vec()
            } else {
                let mut names: Vec<&str> = model.iter().map(String::as_str).collect();
                names.sort_unstable();
                names.dedup();
                names
            };
            let models = names.iter().map(|n| lookup_model(n)).collect::<Result<Vec<_>>>()?;
            let rows = check::run(&models, cli.seed, &cfg);
            let rep = check::report(echo, &rows);
            let mut writes = vec![(None, check::table(&rows, cli.seed))];
            if let Some(path) = report {
                writes.push((Some(path), to_json(&rep)?));
            }
            Ok(Outcome {
                writes,
                report: Some(rep),
            })
        }
    }
}

fn emit(outcome: &Outcome) -> Result<()> {
    for (dest, text) in &outcome.writes {
        match dest {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout")?,
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err.chain().any(|e| {
        e.is::<Invalid>()
            || e.downcast_ref::<pathlin_core::Error>()
                .is_some_and(pathlin_core::Error::is_validation)
    });
    if validation {
        EXIT_INVALID
    } else {
        EXIT_NUMERICAL
    }
}

fn main() -> ExitCode {
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let report_only = cli.tolerance_report_only;
    let outcome = match dispatch(cli, &echo).and_then(|o| emit(&o).map(|()| o)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Some(report) = &outcome.report {
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!(
                "check failed: {} = {:.3e} (tolerance {:.1e})",
                c.name, c.value, c.tolerance
            );
        }
    }
    if outcome.pass() || report_only {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERICAL)
    }
}
