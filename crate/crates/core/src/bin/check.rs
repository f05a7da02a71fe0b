//! Scenario checker: loads a scenario file, runs the requested verification
//! suite, and emits a deterministic report.
//!
//! Exit codes: 0 all checks passed (or were expected-negative and held),
//! 1 at least one check failed, 2 usage error, 3 scenario load error,
//! 4 internal numeric error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use pn_tangent::geometry::Scenario;
use pn_tangent::report::Report;
use pn_tangent::suites::{run_suite, Suite, Workspace};

#[derive(Parser)]
#[command(
    name = "check",
    about = "Verify the identities of a recursion-tensor scenario at sampled chart points"
)]
struct Args {
    /// Scenario file (JSON document)
    #[arg(long)]
    scenario: PathBuf,
    /// Suite: connection | lifts | torsion | sck | eigen | all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Override the scenario's sample count
    #[arg(long)]
    points: Option<usize>,
    /// Override the scenario's sampling seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the JSON report to this path
    #[arg(long)]
    json: Option<PathBuf>,
    /// Suppress the text report on stdout
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let suite = match Suite::from_str(&args.suite) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let mut scenario = match Scenario::from_file(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot load scenario: {e}");
            return ExitCode::from(3);
        }
    };
    if let Some(points) = args.points {
        scenario.sampling.count = points;
    }
    if let Some(seed) = args.seed {
        scenario.sampling.seed = seed;
    }
    if let Some(tol) = args.tol {
        scenario.sampling.tolerance = tol;
    }

    let started = std::time::Instant::now();
    let ws = match Workspace::new(scenario) {
        Ok(ws) => ws,
        Err(e) => {
            eprintln!("error: scenario setup failed: {e}");
            return ExitCode::from(3);
        }
    };

    let checks = match run_suite(&ws, suite) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    };

    let report = Report::new(ws.scenario.name.clone(), ws.scenario.sampling.seed, checks);

    if let Some(path) = &args.json {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(4);
        }
    }
    if !args.quiet {
        print!("{}", report.render_text(Some(started.elapsed())));
    }

    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
