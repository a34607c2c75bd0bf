//! `sgdefect`: verification runner for sine-Gordon integrability identities
//! with and without an integrable defect.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::ScenarioConfig;
use report::{Format, Timing};
use suites::{run_suite, ALL_SUITES};

#[derive(Parser)]
#[command(name = "sgdefect", version, about = "Numerical checks of sine-Gordon integrability with a defect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites selected in a scenario config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for reports (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the available suites.
    ListSuites,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListSuites => {
            for s in ALL_SUITES {
                println!("{:<24} {}  [{}]", s.name(), s.description(), s.anchor());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, format, jobs } => run(&config, &out, format, jobs),
    }
}

fn run(config: &std::path::Path, out: &std::path::Path, format: Format, jobs: Option<usize>) -> ExitCode {
    let cfg = match ScenarioConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (scenario, lambdas) = match cfg.scenario().and_then(|s| Ok((s, cfg.lambdas()?))) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::from(2);
    }

    let results: Vec<_> = cfg
        .suites()
        .par_iter()
        .map(|&s| {
            let start = Instant::now();
            let r = run_suite(s, &cfg, &scenario, &lambdas);
            (r, start.elapsed().as_secs_f64())
        })
        .collect();

    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for (r, secs) in &results {
        if let Err(e) = report::write_report(out, r, format) {
            eprintln!("error: writing {} report: {e}", r.suite);
            return ExitCode::from(2);
        }
        let failed = r.cases.iter().filter(|c| !c.pass).count();
        println!("{:<24} {:>4} cases  {:>4} failed  {:.2}s", r.suite, r.cases.len(), failed, secs);
        for c in r.cases.iter().filter(|c| !c.pass) {
            failures.push(format!("{}/{}: gap {:?} > tolerance {:e} {}", r.suite, c.case, c.gap, c.tolerance, c.note));
        }
        timings.push(Timing { suite: r.suite, seconds: *secs });
    }
    if let Err(e) = report::write_timings(out, &timings) {
        eprintln!("error: writing timings: {e}");
        return ExitCode::from(2);
    }
    if failures.is_empty() {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("{} failing case(s):", failures.len());
        for f in &failures {
            println!("  {f}");
        }
        ExitCode::from(1)
    }
}
