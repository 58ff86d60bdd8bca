use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use summlab_core::index_lab::bound_table;
use summlab_core::spaces::Exponent;
use summlab_core::{SearchBudget, DEFAULT_TUPLE_BUDGET};

mod config;
mod report;
mod runner;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "summlab", version, about = "Index-of-summability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments declared in a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Global seed [default: config "seed", then $SUMMLAB_SEED, then 42].
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads [default: hardware count].
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
        tuple_budget: u64,
    },
    /// Print every bound formula at the given parameters.
    Bounds {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Cotype of the target space ("inf" allowed).
        #[arg(long)]
        r: Option<String>,
    },
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("SUMMLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("SUMMLAB_SEED is not an integer: {s:?}")),
        Err(_) => Ok(None),
    }
}

fn run(config_path: PathBuf, out: PathBuf, seed: Option<u64>, threads: Option<usize>, tuple_budget: u64) -> ExitCode {
    let config = match config::load(&config_path, tuple_budget) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("schema error: {e}");
            return ExitCode::from(2);
        }
    };
    let seed = match seed
        .or(config.seed)
        .map(Ok)
        .unwrap_or_else(|| env_seed().map(|s| s.unwrap_or(DEFAULT_SEED)))
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    let budget = SearchBudget {
        seed,
        tuple_budget,
        ..config.search.unwrap_or_default()
    };
    let records: Vec<runner::Record> = pool.install(|| {
        config
            .experiments
            .iter()
            .enumerate()
            .map(|(i, e)| runner::run_experiment(i, e, &budget))
            .collect()
    });
    let info = report::RunInfo {
        seed,
        tuple_budget,
        threads: pool.current_num_threads(),
        config: &config_path,
    };
    if let Err(e) = report::write_all(&out, &records, &info) {
        eprintln!("cannot write reports to {}: {e}", out.display());
        return ExitCode::from(2);
    }
    let failing: Vec<&runner::Record> = records.iter().filter(|r| !r.passed()).collect();
    for rec in &records {
        println!("{:<6} {}", if rec.passed() { "ok" } else { "FAIL" }, rec.name());
    }
    if failing.is_empty() {
        ExitCode::SUCCESS
    } else {
        for rec in failing {
            for a in rec.failures() {
                eprintln!("failed: {} / {}: {}", rec.name(), a.name, a.detail);
            }
        }
        ExitCode::from(1)
    }
}

fn print_bounds(m: usize, p: f64, q: f64, r: Option<String>) -> ExitCode {
    let r = match r.map(|s| {
        s.parse::<f64>()
            .map_err(|_| s)
            .and_then(|v| Exponent::new(v).map_err(|e| e.to_string()))
    }) {
        None => None,
        Some(Ok(r)) => Some(r),
        Some(Err(e)) => {
            eprintln!("invalid r: {e}");
            return ExitCode::from(2);
        }
    };
    if m == 0 || !(p > 0.0) || !(q > 0.0) {
        eprintln!("need m ≥ 1 and p, q > 0");
        return ExitCode::from(2);
    }
    let r_label = r.map(|r| format!(", r={r}")).unwrap_or_default();
    println!("m={m}, p={p}, q={q}{r_label}");
    println!("{:<20} {:<12} {:<22} range", "bound", "branch", "value");
    for row in bound_table(m, p, q, r) {
        let value = row
            .value
            .map(|v| format!("{v:.12}"))
            .unwrap_or_else(|| "n/a (out of range)".into());
        println!(
            "{:<20} {:<12} {:<22} {}",
            row.kind.to_string(),
            row.branch,
            value,
            row.range
        );
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            tuple_budget,
        } => run(config, out, seed, threads, tuple_budget),
        Command::Bounds { m, p, q, r } => print_bounds(m, p, q, r),
    }
}
