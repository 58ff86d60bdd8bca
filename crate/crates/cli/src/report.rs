use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use summlab_core::index_lab::{bound_csv, BOUND_CSV_HEADER};

use crate::runner::Record;

#[derive(Serialize)]
struct Results<'a> {
    seed: u64,
    tuple_budget: u64,
    passed: bool,
    experiments: &'a [Record],
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    unix_time: u64,
    threads: usize,
    config: &'a str,
}

fn file_stem(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{index:02}_{clean}")
}

pub struct RunInfo<'a> {
    pub seed: u64,
    pub tuple_budget: u64,
    pub threads: usize,
    pub config: &'a Path,
}

/// Writes `results.json`, `metadata.json`, `bounds.csv`, `slopes.csv` and
/// one `plot_*.dat` per slope experiment. Only `metadata.json` depends on
/// the wall clock or the thread count.
pub fn write_all(out: &Path, records: &[Record], info: &RunInfo<'_>) -> io::Result<()> {
    fs::create_dir_all(out)?;
    let results = Results {
        seed: info.seed,
        tuple_budget: info.tuple_budget,
        passed: records.iter().all(Record::passed),
        experiments: records,
    };
    let mut json = serde_json::to_string_pretty(&results).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(out.join("results.json"), json)?;

    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        unix_time: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        threads: info.threads,
        config: &info.config.to_string_lossy(),
    };
    let mut json = serde_json::to_string_pretty(&meta).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(out.join("metadata.json"), json)?;

    let mut bounds = format!("experiment,{BOUND_CSV_HEADER}\n");
    let mut slopes = String::from("experiment,m,p,q,slope,intercept,residual,conservative,grid\n");
    for (i, rec) in records.iter().enumerate() {
        match rec {
            Record::Bounds { name, rows, .. } => {
                for line in bound_csv(rows).lines().skip(1) {
                    let _ = writeln!(bounds, "{name},{line}");
                }
            }
            Record::Slope {
                name,
                m,
                p,
                q,
                samples,
                estimate,
                ..
            } => {
                if let Some(e) = estimate {
                    let grid: Vec<String> = e.grid.iter().map(usize::to_string).collect();
                    let _ = writeln!(
                        slopes,
                        "{name},{m},{p},{q},{},{},{},{},{}",
                        e.slope,
                        e.intercept,
                        e.residual,
                        e.conservative,
                        grid.join(";")
                    );
                }
                let mut dat = String::from("# log_n log_quotient\n");
                for s in samples.iter().filter(|s| s.quotient > 0.0) {
                    let _ = writeln!(dat, "{} {}", (s.n as f64).ln(), s.quotient.ln());
                }
                fs::write(out.join(format!("plot_{}.dat", file_stem(i, name))), dat)?;
            }
            Record::Oracle { .. } => {}
        }
    }
    fs::write(out.join("bounds.csv"), bounds)?;
    fs::write(out.join("slopes.csv"), slopes)?;
    Ok(())
}
