use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use vine_nav_cli::commands::{self, SweepRows};
use vine_nav_cli::CliError;

/// Simulate and plan tip-everting growing robots among polygonal obstacles.
///
/// Angles on the command line and in files are in degrees, lengths in meters.
#[derive(Parser)]
#[command(name = "vine-nav", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deploy a design on a map and write an SVG overlay and a trace document.
    Simulate(commands::SimulateArgs),
    /// Plan a contact-exploiting design for a map.
    Plan(commands::PlanArgs),
    /// Monte Carlo success probability of a design, as one CSV row.
    Evaluate(commands::EvaluateArgs),
    /// Success over a grid of one parameter.
    Sweep(commands::SweepArgs),
    /// Write a built-in map and a matching design.
    Export(commands::ExportArgs),
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("VINE_NAV_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("VINE_NAV_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => {
            let trace = commands::simulate(&args)?;
            let tip = trace.final_tip();
            let reason = trace.termination.map_or("running".to_string(), |t| t.to_string());
            println!(
                "tip ({:.4}, {:.4}) m after {:.4} m, {} events, {reason}",
                tip.x,
                tip.y,
                trace.length(),
                trace.events.len()
            );
        }
        Command::Plan(args) => {
            let (_, report) = commands::plan_command(&args)?;
            println!(
                "{} waypoints, {} turns, success {:.4} [{:.4}, {:.4}], {} contact events",
                report.sequence.len(),
                report.turn_count,
                report.estimate.probability,
                report.estimate.wilson_lo,
                report.estimate.wilson_hi,
                report.contact_events
            );
        }
        Command::Evaluate(args) => {
            let row = commands::evaluate(&args)?;
            println!(
                "success {}/{} = {:.4} [{:.4}, {:.4}]",
                row.successes, row.trials, row.probability, row.wilson_lo, row.wilson_hi
            );
        }
        Command::Sweep(args) => match commands::sweep(&args)? {
            SweepRows::Estimates(rows) => println!("{} grid points", rows.len()),
            SweepRows::StartAngles(rows) => {
                let ok = rows.iter().filter(|r| r.outcome == vine_nav::uncertainty::TrialOutcome::Success).count();
                println!("{} grid points, {ok} reach the goal", rows.len());
            }
        },
        Command::Export(args) => commands::export(&args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
