use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bjorling::io::{exit_code, parse_config, run_scenario, RunOutcome};
use bjorling::Error;

/// Discrete minimal surfaces from Björling data.
#[derive(Debug, Parser)]
#[command(name = "bjorling", version)]
struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn report(outcome: &RunOutcome) {
    println!(
        "scenario {}{}",
        outcome.scenario,
        if outcome.reflected { " (reflected in y -> -y)" } else { "" }
    );
    for a in &outcome.audits {
        println!(
            "eps {:<8} hw {:<4} ok {:<6} divergent {:<4} cr {:.2e} closure {:.2e} path {:.2e}",
            a.eps, a.half_width, a.ok, a.divergent, a.cross_ratio_defect, a.closure_defect, a.path_gap
        );
    }
    for r in &outcome.reports {
        println!(
            "eps {:<8} G {:.3e} edge {:.3e} F {:.3e} diagonal {:.3e} vertex {:.3e}",
            r.eps,
            r.g_sup,
            r.edge_sup(),
            r.f_sup,
            r.diagonal,
            r.vertex
        );
    }
    for o in &outcome.orders {
        match &o.fit {
            Some(f) => println!("order {:<9} {:.3}", o.name, f.slope),
            None => println!("order {:<9} (error underflow)", o.name),
        }
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: &Cli) -> Result<RunOutcome, Error> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| Error::Io {
        context: format!("reading {}", cli.config.display()),
        message: e.to_string(),
    })?;
    let config = parse_config(&text)?;
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    run_scenario(&config, &base, &cli.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if !cli.quiet {
                report(&outcome);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
