mod args;
mod commands;
mod input;

use std::fs;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, FamilyAction};
use commands::Output;

const EXIT_WARNINGS: u8 = 2;

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SCLAB_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("SCLAB_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(Output, Option<&std::path::Path>)> {
    Ok(match &cli.command {
        Command::CheckAdapted { input, window } => (commands::check_adapted_cmd(input, window)?, input.out.as_deref()),
        Command::Resolvent { input, lambda, radii } => {
            (commands::resolvent_cmd(input, *lambda, radii)?, input.out.as_deref())
        }
        Command::Simulate {
            input,
            trajectories,
            horizon,
            jump_cap,
            escape_radius,
        } => (
            commands::simulate_cmd(input, *trajectories, *horizon, *jump_cap, *escape_radius)?,
            input.out.as_deref(),
        ),
        Command::MetricVerify { input, window, samples } => (
            commands::metric_verify_cmd(input, window, *samples)?,
            input.out.as_deref(),
        ),
        Command::Volume {
            input,
            r_max,
            r_min,
            steps,
            csv,
        } => (
            commands::volume_cmd(input, *r_max, *r_min, *steps, csv.as_deref())?,
            input.out.as_deref(),
        ),
        Command::Family { action } => {
            let FamilyAction::Gen { out, .. } = action;
            (commands::family_cmd(action)?, out.as_deref())
        }
        Command::VerifyAll { seed, out, timings } => (commands::verify_all_cmd(*seed, *timings)?, out.as_deref()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|(output, out)| {
        let (text, warned) = match output {
            Output::Report(r) => {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
                (r.to_json(), r.has_warnings())
            }
            Output::Text(t) => (t, false),
        };
        match out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(warned)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_WARNINGS),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
