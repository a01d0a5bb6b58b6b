//! `winners`: read an instance, apply a rule, report as JSON.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use schulze_core::ingest::{parse_profile, parse_tournament, profile_from_charts, read_chart_csv, ChartColumns};
use schulze_core::oracles::{ranked_pairs, schulze_winners_seq, schwartz_set, TieBreakOrder};
use schulze_core::pregel::{default_threads, THREADS_ENV};
use schulze_core::schulze::{peel, SchulzeConfig};
use schulze_core::{build_tournament, majority_margins, CandidateDirectory, CandidateId, WeightedTournament};

use crate::{read_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Profile,
    Tournament,
    Charts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Schulze,
    SchulzeSeq,
    RankedPairs,
    Schwartz,
}

#[derive(Debug, Clone, Args)]
pub struct WinnersArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Detected from the file contents when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, value_enum, default_value = "schulze")]
    pub rule: Rule,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Emit winner sets until at least this many candidates are ranked.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "date,region")]
    pub group_cols: Vec<String>,
    #[arg(long, default_value = "rank")]
    pub rank_col: String,
    #[arg(long, default_value = "item")]
    pub item_col: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinnersReport {
    pub rule: Rule,
    pub winners: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<Vec<String>>>,
    pub candidates: usize,
    pub edges: usize,
    pub undecided_after_preprocessing: Option<usize>,
    pub wall_time_ms: f64,
    pub supersteps: Option<usize>,
    pub iterations: Option<usize>,
    pub threads: Option<usize>,
}

/// A parsed instance: tournament plus candidate labels.
pub struct Instance {
    pub candidates: CandidateDirectory,
    pub tournament: WeightedTournament,
}

fn detect_format(text: &str) -> InputFormat {
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if first.starts_with("candidates:") {
        InputFormat::Profile
    } else if first.starts_with("m ") {
        InputFormat::Tournament
    } else {
        InputFormat::Charts
    }
}

pub fn load_instance(args: &WinnersArgs) -> Result<Instance, CliError> {
    let text = read_file(&args.input)?;
    let format = args.format.unwrap_or_else(|| detect_format(&text));
    let parsed = match format {
        InputFormat::Tournament => {
            let tournament = parse_tournament(&text)?;
            return Ok(Instance {
                candidates: CandidateDirectory::numeric(tournament.candidate_count()),
                tournament,
            });
        }
        InputFormat::Profile => parse_profile(&text)?,
        InputFormat::Charts => {
            let columns = ChartColumns {
                group_cols: args.group_cols.clone(),
                rank_col: args.rank_col.clone(),
                item_col: args.item_col.clone(),
            };
            profile_from_charts(&read_chart_csv(text.as_bytes(), &columns)?)?
        }
    };
    let tournament = build_tournament(&majority_margins(&parsed.profile))?;
    Ok(Instance {
        candidates: parsed.candidates,
        tournament,
    })
}

fn labels(dir: &CandidateDirectory, ids: &[CandidateId]) -> Vec<String> {
    ids.iter().map(|&c| dir.label(c).to_string()).collect()
}

/// Repeatedly removes the winners reported by `rule` from the residual tournament.
fn peel_sequential<F>(t: &WeightedTournament, k: usize, rule: F) -> Result<Vec<Vec<CandidateId>>, CliError>
where
    F: Fn(&WeightedTournament) -> Result<Vec<CandidateId>, CliError>,
{
    let mut remaining: Vec<CandidateId> = (0..t.candidate_count() as CandidateId).collect();
    let mut sets = Vec::new();
    let mut emitted = 0;
    while emitted < k && !remaining.is_empty() {
        let local = rule(&t.induced(&remaining))?;
        let set: Vec<CandidateId> = local.iter().map(|&c| remaining[c as usize]).collect();
        emitted += set.len();
        remaining.retain(|c| !set.contains(c));
        sets.push(set);
    }
    Ok(sets)
}

pub fn run_winners(args: &WinnersArgs) -> Result<WinnersReport, CliError> {
    let instance = load_instance(args)?;
    evaluate(
        &instance,
        args.rule,
        args.threads.unwrap_or_else(default_threads),
        args.top_k,
    )
}

pub fn evaluate(
    instance: &Instance,
    rule: Rule,
    threads: usize,
    top_k: Option<usize>,
) -> Result<WinnersReport, CliError> {
    let t = &instance.tournament;
    let dir = &instance.candidates;
    if top_k == Some(0) {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let k = top_k.unwrap_or(1);
    let mut report = WinnersReport {
        rule,
        winners: Vec::new(),
        ranking: None,
        candidates: t.candidate_count(),
        edges: t.edge_count(),
        undecided_after_preprocessing: None,
        wall_time_ms: 0.0,
        supersteps: None,
        iterations: None,
        threads: None,
    };
    let start = Instant::now();
    let sets: Vec<Vec<CandidateId>> = match rule {
        Rule::Schulze => {
            let rounds = peel(t, k, &SchulzeConfig::with_threads(threads))?;
            report.undecided_after_preprocessing = rounds.first().map(|r| r.undecided_after_init);
            report.supersteps = Some(rounds.iter().map(|r| r.supersteps).sum());
            report.iterations = Some(rounds.iter().map(|r| r.iterations).sum());
            report.threads = Some(threads);
            rounds.into_iter().map(|r| r.winners).collect()
        }
        Rule::SchulzeSeq => peel_sequential(t, k, |r| {
            if r.candidate_count() == 0 {
                return Err(CliError::Usage("no candidates".into()));
            }
            Ok(schulze_winners_seq(r))
        })?,
        Rule::RankedPairs => {
            let out = ranked_pairs(&t.margins(), &TieBreakOrder::identity(t.candidate_count()))?;
            out.ranking.iter().take(k).map(|&c| vec![c]).collect()
        }
        Rule::Schwartz => {
            if top_k.is_some() {
                return Err(CliError::Usage("--top-k is not supported for the schwartz rule".into()));
            }
            vec![schwartz_set(t)]
        }
    };
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    report.winners = sets.first().map(|s| labels(dir, s)).unwrap_or_default();
    if top_k.is_some() {
        report.ranking = Some(sets.iter().map(|s| labels(dir, s)).collect());
    }
    Ok(report)
}
