//! `bench`: thread-scaling measurements on synthetic dense tournaments.
//!
//! CSV columns: `kind,m,density,threads,repeat,wall_ms,supersteps,iterations,undecided,winners`.
//! `kind` is `run` for a single measurement and `median` for the per-cell
//! summary that follows its runs (whose `repeat` is empty). `winners` is a
//! `;`-separated id list.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use schulze_core::generators::random_tournament;
use schulze_core::schulze::{run_schulze, SchulzeConfig};
use schulze_core::{CandidateId, WeightedTournament};

use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,5000,10000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.94")]
    pub densities: Vec<f64>,
    #[arg(long = "threads", value_delimiter = ',', default_value = "1,2,4,8")]
    pub thread_counts: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub max_weight: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub kind: &'static str,
    pub m: usize,
    pub density: f64,
    pub threads: usize,
    pub repeat: Option<usize>,
    pub wall_ms: f64,
    pub supersteps: usize,
    pub iterations: usize,
    pub undecided: usize,
    pub winners: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub output: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn median_ms(&self, m: usize, density: f64, threads: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.kind == "median" && r.m == m && r.density == density && r.threads == threads)
            .map(|r| r.wall_ms)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn join_ids(ids: &[CandidateId]) -> String {
    ids.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

/// Runs every thread count `repeats` times on `t`, appending run and
/// median rows.
pub fn bench_instance(
    t: &WeightedTournament,
    density: f64,
    thread_counts: &[usize],
    repeats: usize,
    rows: &mut Vec<BenchRow>,
) -> Result<(), CliError> {
    let m = t.candidate_count();
    let mut reference: Option<Vec<CandidateId>> = None;
    for &threads in thread_counts {
        let mut times = Vec::with_capacity(repeats);
        let mut last = None;
        for repeat in 0..repeats {
            let start = Instant::now();
            let out = run_schulze(t, &SchulzeConfig::with_threads(threads))?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            times.push(wall_ms);
            match &reference {
                Some(w) if *w != out.winners => return Err(CliError::Inconsistent { m, density }),
                Some(_) => {}
                None => reference = Some(out.winners.clone()),
            }
            let row = BenchRow {
                kind: "run",
                m,
                density,
                threads,
                repeat: Some(repeat),
                wall_ms,
                supersteps: out.supersteps,
                iterations: out.iterations,
                undecided: out.undecided_after_init,
                winners: join_ids(&out.winners),
            };
            rows.push(row.clone());
            last = Some(row);
        }
        if let Some(last) = last {
            rows.push(BenchRow {
                kind: "median",
                repeat: None,
                wall_ms: median(&mut times),
                ..last
            });
        }
    }
    Ok(())
}

pub fn run_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    if args.sizes.is_empty() || args.densities.is_empty() || args.thread_counts.is_empty() || args.repeats == 0 {
        return Err(CliError::Usage(
            "bench grids must be non-empty and --repeats positive".into(),
        ));
    }
    if args.thread_counts.contains(&0) {
        return Err(CliError::Usage("thread counts must be positive".into()));
    }
    let mut rows = Vec::new();
    for &m in &args.sizes {
        for &density in &args.densities {
            let t = random_tournament(m, density, args.max_weight, args.seed)?;
            bench_instance(&t, density, &args.thread_counts, args.repeats, &mut rows)?;
        }
    }
    let mut writer = csv::Writer::from_path(&args.output).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: args.output.display().to_string(),
            source,
        },
        other => CliError::Usage(format!("{other:?}")),
    })?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|source| CliError::Io {
        path: args.output.display().to_string(),
        source,
    })?;
    Ok(BenchReport {
        output: args.output.display().to_string(),
        rows,
    })
}
