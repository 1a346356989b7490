use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rplsim::expctl::matrix::{cells, run_cells, run_one, Cell};
use rplsim::expctl::output::{self, OutputError};
use rplsim::expctl::scenario::{Scenario, ScenarioError};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "rplsim", version, about = "RPL DAO insider attack simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment matrix (or one cell) of a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Single cell, e.g. `limsd,static,1s` or `rpl,mobile`.
        #[arg(long)]
        cell: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write a per-run event trace next to the CSV files.
        #[arg(long)]
        trace: bool,
        /// Overrides base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides replications.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Rebuild summary, figure files and the comparison table from runs.csv.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn fail(code: u8, kind: &str, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("rplsim: {kind} error: {msg}");
    ExitCode::from(code)
}

fn output_fail(e: OutputError) -> ExitCode {
    match e {
        OutputError::Format { .. } => fail(EXIT_CONFIG, "input", e),
        _ => fail(EXIT_IO, "io", e),
    }
}

fn simulate(
    scenario: PathBuf,
    cell: Option<String>,
    out: PathBuf,
    trace: bool,
    seed: Option<u64>,
    reps: Option<usize>,
) -> ExitCode {
    let mut s = match Scenario::load(&scenario) {
        Ok(s) => s,
        Err(e @ ScenarioError::Io { .. }) => return fail(EXIT_IO, "io", e),
        Err(e) => return fail(EXIT_CONFIG, "config", e),
    };
    if let Some(seed) = seed {
        s.base_seed = seed;
    }
    if let Some(r) = reps {
        s.replications = r;
    }
    if let Err(e) = s.validate() {
        return fail(EXIT_CONFIG, "config", e);
    }
    let selected = match cell {
        Some(spec) => match Cell::parse(&spec) {
            Ok(c) => vec![c],
            Err(e) => return fail(EXIT_CONFIG, "config", e),
        },
        None => cells(&s),
    };
    if let Err(e) = fs::create_dir_all(&out) {
        return fail(EXIT_IO, "io", format!("{}: {e}", out.display()));
    }
    let records = if trace {
        let mut records = Vec::new();
        for c in &selected {
            for rep in 0..s.replications {
                let (rec, _, lines) = match run_one(&s, c, rep, true) {
                    Ok(r) => r,
                    Err(e) => return fail(EXIT_RUNTIME, "runtime", e),
                };
                let path = out.join(format!("trace_{}_{rep}.log", c.id()));
                let mut text = lines.join("\n");
                text.push('\n');
                if let Err(e) = fs::write(&path, text) {
                    return fail(EXIT_IO, "io", format!("{}: {e}", path.display()));
                }
                records.push(rec);
            }
        }
        records
    } else {
        match run_cells(&s, &selected) {
            Ok(r) => r,
            Err(e) => return fail(EXIT_RUNTIME, "runtime", e),
        }
    };
    match output::write_all(&out, &records) {
        Ok(rows) => {
            print!("{}", output::comparison(&rows));
            ExitCode::SUCCESS
        }
        Err(e) => output_fail(e),
    }
}

fn report(input: PathBuf) -> ExitCode {
    let records = match output::read_runs(&input.join("runs.csv")) {
        Ok(r) => r,
        Err(e) => return output_fail(e),
    };
    let rows = output::summarize(&records);
    let written = output::write_summary(&input.join("summary.csv"), &rows)
        .and_then(|_| output::write_figures(&input, &rows))
        .and_then(|_| {
            let p = input.join("comparison.txt");
            fs::write(&p, output::comparison(&rows))
                .map_err(|source| OutputError::Io { path: p.display().to_string(), source })
        });
    match written {
        Ok(()) => {
            print!("{}", output::comparison(&rows));
            ExitCode::SUCCESS
        }
        Err(e) => output_fail(e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Simulate { scenario, cell, out, trace, seed, reps } => simulate(scenario, cell, out, trace, seed, reps),
        Cmd::Report { input } => report(input),
    }
}
