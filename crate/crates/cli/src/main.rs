use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use t2m_cli::commands::{cmd_coeffs, cmd_geodesic, cmd_jacobi, cmd_verify, render_report, OutputPlan};
use t2m_cli::{AtState, CliError, CliResult, ScenarioConfig};
use t2m_core::verify::DEFAULT_SEED;

#[derive(Parser)]
#[command(name = "t2m", version, about = "Geodesics, Jacobi fields and connection coefficients of second-order dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files; relative config output paths resolve against it.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Print metric, spray, connection, curvature and dual coefficients at one state.
    Coeffs {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// State as "x=..;y=..;y2=.." (comma-separated components); y2 defaults to the extension value.
        #[arg(long)]
        at: Option<String>,
    },
    /// Integrate a trajectory and write it with its horizontality residuals.
    Geodesic {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Integrate a trajectory and a deviation field along it.
    Jacobi {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also compare against the finite-difference deviation oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Run the verification suites and report every check.
    Verify {
        /// "all" or one suite name.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Multiplies every upper-bound tolerance (values below 1 tighten the suite).
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Write verify_report.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn print_json(doc: &Value) {
    println!("{}", serde_json::to_string_pretty(doc).expect("json value serializes"));
}

fn load(args: &ScenarioArgs) -> CliResult<(t2m_cli::Scenario, OutputPlan)> {
    let sc = ScenarioConfig::load(&args.config)?.build()?;
    Ok((
        sc,
        OutputPlan {
            out_dir: args.out_dir.clone(),
        },
    ))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Coeffs { scenario, at } => {
            let at: Option<AtState> = at.as_deref().map(str::parse).transpose()?;
            let (sc, plan) = load(&scenario)?;
            print_json(&cmd_coeffs(&sc, at.as_ref(), &plan)?);
        }
        Command::Geodesic { scenario } => {
            let (sc, plan) = load(&scenario)?;
            print_json(&cmd_geodesic(&sc, &plan)?);
        }
        Command::Jacobi { scenario, oracle } => {
            let (sc, plan) = load(&scenario)?;
            print_json(&cmd_jacobi(&sc, oracle, &plan)?);
        }
        Command::Verify {
            suite,
            seed,
            tolerance_scale,
            out_dir,
        } => {
            let report = cmd_verify(&suite, seed, tolerance_scale, out_dir.as_deref())?;
            print!("{}", render_report(&report));
            if !report.pass {
                return Err(CliError::VerifyFailed(format!(
                    "{} of {} checks failed",
                    report.failures().count(),
                    report.records.len()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}
