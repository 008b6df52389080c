use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coopreg::Error;
use coopreg::scenario::{cmd_check, cmd_simulate, cmd_synthesize, load_scenario, Overrides, Scenario};

/// Synthesize, simulate and check cooperative regulators for networked reaction-diffusion agents.
#[derive(Parser, Debug)]
#[command(name = "coop-reg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; defaults to the scenario's `output.directory`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grid intervals M.
    #[arg(long = "grid-points", value_name = "M")]
    grid_points: Option<usize>,
    #[arg(long, value_name = "DT")]
    dt: Option<f64>,
    #[arg(long, value_name = "T")]
    horizon: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute gains and the stability certificate.
    Synthesize(Common),
    /// Run the closed loop and write the trace and metrics.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Gains file; synthesized into the output directory when omitted.
        #[arg(long)]
        gains: Option<PathBuf>,
    },
    /// Evaluate every checkable design hypothesis.
    Check(Common),
}

fn load(common: &Common) -> coopreg::Result<(Scenario, PathBuf)> {
    let scenario = load_scenario(&common.scenario)?.with_overrides(Overrides {
        grid_points: common.grid_points,
        dt: common.dt,
        horizon: common.horizon,
    })?;
    let out = common
        .out
        .clone()
        .or_else(|| scenario.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((scenario, out))
}

fn run(cli: &Cli) -> coopreg::Result<bool> {
    match &cli.command {
        Command::Synthesize(common) => {
            let (scenario, out) = load(common)?;
            let outcome = cmd_synthesize(&scenario, &out)?;
            match (&outcome.report.error, &outcome.report.design) {
                (Some(e), _) => eprintln!("synthesis failed [{}]: {}", e.kind, e.message),
                (None, Some(d)) => println!(
                    "certificate {}: decay margin {:.6}, overall rate {:.6}, ν = {:.6}",
                    if outcome.pass { "pass" } else { "FAIL" },
                    d.alpha_ev,
                    d.overall_alpha,
                    d.nu
                ),
                (None, None) => {}
            }
            report_dir(&out);
            Ok(outcome.pass)
        }
        Command::Simulate { common, gains } => {
            let (scenario, out) = load(common)?;
            let outcome = cmd_simulate(&scenario, gains.as_deref(), &out)?;
            let m = &outcome.metrics;
            println!(
                "tail error {:.3e} (band {:.3e}), settling time {}, decay rate {}",
                m.tail_error,
                m.settling_band,
                m.settling_time.map_or("never".into(), |t| format!("{t:.3}")),
                m.decay_rate.map_or("n/a".into(), |r| format!("{r:.4}"))
            );
            report_dir(&out);
            Ok(outcome.pass)
        }
        Command::Check(common) => {
            let (scenario, out) = load(common)?;
            let report = cmd_check(&scenario)?;
            println!("{report}");
            if common.out.is_some() {
                std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
                let path = out.join("check.txt");
                std::fs::write(&path, format!("{report}\n")).map_err(|e| Error::io(&path, e))?;
            }
            Ok(report.pass)
        }
    }
}

fn report_dir(out: &Path) {
    println!("outputs written to {}", out.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}
