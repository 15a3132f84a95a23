//! `xmodhol`: runs the checks and constructions of `xmodhol-core` on JSON
//! scenario files.
//!
//! Exit status is 0 when every requested verdict passes, 1 when one fails
//! and 2 when the scenario cannot be read, parsed or resolved.

mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use xmodhol_core::corpus;
use xmodhol_core::scenario::{corpus_scenario, xmod_scenario};
use xmodhol_core::{Scenario, TaskKind};

use report::Report;
use tasks::{run_task, select, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "xmodhol", version, about = "Crossed modules, double groupoids and holonomy over finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Crossed module axiom suites.
    Validate(Common),
    /// Build the double groupoid of squares and check its laws.
    Double(Common),
    /// Recover the crossed module from the double groupoid.
    Gamma(Common),
    /// List free derivations, the invertible ones and linear sections.
    Derivations(Common),
    /// Sections, germs, the holonomy groupoid and its charts.
    Holonomy(Common),
    /// The universal morphism out of the holonomy groupoid.
    Universal(Common),
    /// Every task listed in the scenario.
    Run(Common),
    /// Write the built-in corpus as scenario files.
    Corpus {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Run only the named tasks.
    #[arg(long = "task", num_args = 1..)]
    tasks: Vec<String>,
    /// Directory receiving full tables of the built structures.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest admissible space.
    #[arg(long, default_value_t = 64)]
    max_points: usize,
    /// Longest factorisation tried when building the universal morphism.
    #[arg(long, default_value_t = 8)]
    word_bound: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Add per-task wall-clock times to the report.
    #[arg(long)]
    timing: bool,
}

enum Failure {
    Input(anyhow::Error),
    Other(anyhow::Error),
}

fn run(kind: Option<TaskKind>, args: &Common) -> Result<bool, Failure> {
    let text = std::fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading {}", args.scenario.display()))
        .map_err(Failure::Input)?;
    let sc = Scenario::from_json(&text, args.max_points).map_err(|e| Failure::Input(e.into()))?;
    let chosen = select(&sc, kind, &args.tasks).map_err(Failure::Input)?;
    if let Some(dir) = &args.dump {
        tasks::ensure_dir(dir).map_err(Failure::Other)?;
    }
    let opts = RunOptions { seed: args.seed, word_bound: args.word_bound, dump: args.dump.clone() };
    let mut reports = Vec::with_capacity(chosen.len());
    for task in &chosen {
        let t = Instant::now();
        let mut r = run_task(&sc, task, &opts).map_err(Failure::Other)?;
        if args.timing {
            r.millis = Some(t.elapsed().as_secs_f64() * 1e3);
        }
        reports.push(r);
    }
    let report = Report {
        scenario: args.scenario.display().to_string(),
        seed: args.seed,
        passed: reports.iter().all(|r| r.passed),
        tasks: reports,
    };
    match args.format {
        Format::Text => print!("{}", report.text()),
        Format::Json => print!("{}", report.json()),
    }
    Ok(report.passed)
}

fn slug(name: &str) -> String {
    name.to_lowercase().replace('/', "_")
}

fn write_corpus(out: &std::path::Path) -> anyhow::Result<()> {
    tasks::ensure_dir(out)?;
    let mut files: Vec<(String, String)> =
        corpus::all_items().iter().map(|item| (slug(&item.name), corpus_scenario(item).to_json())).collect();
    for (name, cm) in [
        ("broken_cm2", corpus::broken_cm2()),
        ("broken_cm1", corpus::broken_cm1()),
        ("broken_action", corpus::broken_action()),
    ] {
        files.push((name.into(), xmod_scenario(&cm).to_json()));
    }
    for (name, text) in files {
        let path = out.join(format!("{name}.json"));
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Validate(a) => (Some(TaskKind::Validate), a),
        Command::Double(a) => (Some(TaskKind::Double), a),
        Command::Gamma(a) => (Some(TaskKind::Gamma), a),
        Command::Derivations(a) => (Some(TaskKind::Derivations), a),
        Command::Holonomy(a) => (Some(TaskKind::Holonomy), a),
        Command::Universal(a) => (Some(TaskKind::Universal), a),
        Command::Run(a) => (None, a),
        Command::Corpus { out } => {
            return match write_corpus(out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
