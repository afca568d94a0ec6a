use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use varwave::initial::{Scenario, ScenarioKind};
use varwave::{parse_config, refinement_study, run_checks, run_simulation, SimConfig};

#[derive(Parser)]
#[command(name = "varwave", about = "Upwind solver for the variational wave equation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write series.csv plus snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Permit dt·c/dx > 1 (reproduces the literal Δt = Δx experiments).
        #[arg(long)]
        allow_supercritical: bool,
    },
    /// Grid-refinement study: rerun at n_cells·2^k and report convergence.
    Refine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: usize,
    },
    /// Invariant suite only; no snapshots are written.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// List built-in scenarios and their default parameters.
    Scenarios,
}

fn load_config(path: &PathBuf) -> Result<SimConfig, varwave::Error> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn print_summary(summary: &varwave::RunSummary) -> bool {
    for w in &summary.warnings {
        eprintln!("WARNING: {w}");
    }
    for c in &summary.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("CHECK {}: {} ({})", c.name, status, c.detail);
    }
    summary.all_passed()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            allow_supercritical,
        } => load_config(&config).and_then(|mut cfg| {
            cfg.allow_supercritical |= allow_supercritical;
            let summary = run_simulation(&cfg)?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!(
                "dt = {:.6e}, {} records, final t = {:.6}",
                summary.dt,
                summary.records.len(),
                summary.records.last().map(|r| r.t).unwrap_or(0.0)
            );
            Ok(print_summary(&summary))
        }),
        Command::Refine { config, levels } => load_config(&config).and_then(|cfg| {
            let report = refinement_study(&cfg, levels)?;
            println!("level  n_cells        dx    hi_alpha");
            for ((n, dx), hi) in report.levels.iter().zip(report.hi_alpha_per_level.iter()) {
                println!("       {n:>7}  {dx:>8.5}  {hi:>10.6}");
            }
            println!("pairwise L2(u) distances: {:?}", report.pairwise_l2_u);
            println!("observed order: {:.3}", report.observed_order);
            let converging = report
                .pairwise_l2_u
                .windows(2)
                .all(|w| w[1] < w[0]);
            if !converging {
                eprintln!("WARNING: pairwise distances are not decreasing");
            }
            Ok(converging)
        }),
        Command::Check { config } => load_config(&config).map(|cfg| {
            match run_checks(&cfg) {
                Ok(summary) => print_summary(&summary),
                Err(e) => {
                    eprintln!("error: {e}");
                    false
                }
            }
        }),
        Command::Scenarios => {
            for kind in [
                ScenarioKind::GaussRs,
                ScenarioKind::GaussRsNeg,
                ScenarioKind::GlasseyPulse,
            ] {
                let sc = Scenario::new(kind);
                let desc = match kind {
                    ScenarioKind::GaussRs => {
                        "opposed Gaussian pulses, S > 0 (as printed); arctan speed"
                    }
                    ScenarioKind::GaussRsNeg => {
                        "opposed Gaussian pulses, both nonpositive; arctan speed"
                    }
                    ScenarioKind::GlasseyPulse => {
                        "u0 = pi/4 + exp(-x^2), ut0 = -c(u0) u0'; liquid-crystal speed"
                    }
                    ScenarioKind::Custom => unreachable!(),
                };
                println!("{}: {}", kind.name(), desc);
                for (k, v) in &sc.params {
                    println!("    scenario.{k} = {v}");
                }
            }
            Ok(true)
        }
    };

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
