//! Text formats for profiles and tournaments, and chart-style ranking data.
//!
//! Profile format:
//!
//! ```text
//! # comment
//! candidates: a, b, c
//! 3: a > b = c
//! c > a
//! ```
//!
//! Candidates missing from a ballot are tied below every listed one.
//!
//! Tournament format: `m <count>` followed by `from,to,weight` lines with
//! integer ids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

use crate::tournament::{
    CandidateDirectory, CandidateId, Edge, PreferenceProfile, TournamentError, WeakOrder, WeightedTournament,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: expected header `{expected}`")]
    MissingHeader { line: usize, expected: &'static str },
    #[error("line {line}: unknown candidate `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: malformed ballot: {detail}")]
    MalformedTier { line: usize, detail: String },
    #[error("line {line}: empty ballot")]
    EmptyBallot { line: usize },
    #[error("line {line}: invalid count `{text}`")]
    BadCount { line: usize, text: String },
    #[error("line {line}: malformed edge `{text}`")]
    MalformedEdge { line: usize, text: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: TournamentError },
    #[error("invalid label `{0}`")]
    BadLabel(String),
    #[error(transparent)]
    Tournament(#[from] TournamentError),
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("row {row}: invalid rank `{value}`")]
    BadRank { row: usize, value: String },
    #[error("group `{group}` lists rank {rank} twice")]
    DuplicateRank { group: String, rank: u32 },
    #[error("group `{group}` lists `{item}` twice")]
    DuplicateItem { group: String, item: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A profile together with the labels its ids stand for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProfile {
    pub candidates: CandidateDirectory,
    pub profile: PreferenceProfile,
}

/// Lines with comments stripped and blanks dropped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && label.trim() == label && !label.contains(['>', '=', ',', ':', '#', '\n', '\r'])
}

pub fn parse_profile(text: &str) -> Result<ParsedProfile, IngestError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(IngestError::MissingHeader {
        line: 1,
        expected: "candidates: ...",
    })?;
    let labels = header.strip_prefix("candidates:").ok_or(IngestError::MissingHeader {
        line: hline,
        expected: "candidates: ...",
    })?;
    let labels: Vec<&str> = labels.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
    if let Some(bad) = labels.iter().find(|l| !valid_label(l)) {
        return Err(IngestError::BadLabel(bad.to_string()));
    }
    let candidates = CandidateDirectory::new(labels.iter().copied())
        .map_err(|source| IngestError::Invalid { line: hline, source })?;
    let m = candidates.len();
    let mut profile = PreferenceProfile::new(m);

    for (line, body) in lines {
        let (count, ballot) = match body.split_once(':') {
            Some((c, rest)) => {
                let count = c
                    .trim()
                    .parse::<u64>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| IngestError::BadCount {
                        line,
                        text: c.trim().to_string(),
                    })?;
                (count, rest.trim())
            }
            None => (1, body),
        };
        if ballot.is_empty() {
            return Err(IngestError::EmptyBallot { line });
        }
        let mut tiers = Vec::new();
        for tier in ballot.split('>') {
            let mut ids = Vec::new();
            for label in tier.split('=').map(str::trim) {
                if label.is_empty() {
                    return Err(IngestError::MalformedTier {
                        line,
                        detail: format!("empty candidate in `{ballot}`"),
                    });
                }
                let id = candidates.id(label).ok_or_else(|| IngestError::UnknownLabel {
                    line,
                    label: label.to_string(),
                })?;
                ids.push(id);
            }
            tiers.push(ids);
        }
        let order = WeakOrder::completed(m, tiers).map_err(|e| IngestError::MalformedTier {
            line,
            detail: e.to_string(),
        })?;
        profile
            .push(order, count)
            .map_err(|source| IngestError::Invalid { line, source })?;
    }
    Ok(ParsedProfile { candidates, profile })
}

/// Inverse of [`parse_profile`]: one line per ballot, in order.
pub fn write_profile(candidates: &CandidateDirectory, profile: &PreferenceProfile) -> Result<String, IngestError> {
    if candidates.len() != profile.candidate_count() {
        return Err(TournamentError::CandidateCount {
            expected: profile.candidate_count(),
            got: candidates.len(),
        }
        .into());
    }
    if let Some(bad) = candidates.labels().iter().find(|l| !valid_label(l)) {
        return Err(IngestError::BadLabel(bad.clone()));
    }
    let mut out = format!("candidates: {}\n", candidates.labels().join(", "));
    for ballot in profile.ballots() {
        if ballot.weight != 1 {
            let _ = write!(out, "{}: ", ballot.weight);
        }
        let tiers: Vec<String> = ballot
            .order
            .tiers()
            .iter()
            .map(|tier| tier.iter().map(|&c| candidates.label(c)).collect::<Vec<_>>().join("="))
            .collect();
        out.push_str(&tiers.join(">"));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_tournament(text: &str) -> Result<WeightedTournament, IngestError> {
    let mut lines = content_lines(text);
    let missing = |line| IngestError::MissingHeader {
        line,
        expected: "m <count>",
    };
    let (hline, header) = lines.next().ok_or(missing(1))?;
    let m = header
        .strip_prefix('m')
        .filter(|rest| rest.starts_with(char::is_whitespace))
        .and_then(|rest| rest.trim().parse::<usize>().ok())
        .ok_or(missing(hline))?;
    let mut edges = Vec::new();
    let mut line_of = Vec::new();
    for (line, body) in lines {
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [f, t, w] => f
                .parse::<CandidateId>()
                .ok()
                .zip(t.parse::<CandidateId>().ok())
                .zip(w.parse::<i64>().ok()),
            _ => None,
        };
        let ((from, to), weight) = parsed.ok_or_else(|| IngestError::MalformedEdge {
            line,
            text: body.to_string(),
        })?;
        if weight <= 0 {
            return Err(IngestError::Invalid {
                line,
                source: TournamentError::NonPositiveWeight { from, to },
            });
        }
        edges.push(Edge {
            from,
            to,
            weight: weight as u64,
        });
        line_of.push(line);
    }
    // Re-validate edge by edge on failure to report the offending line.
    WeightedTournament::new(m, edges.iter().copied()).map_err(|source| {
        let line = (1..=edges.len())
            .find(|&k| WeightedTournament::new(m, edges[..k].iter().copied()).is_err())
            .map_or(hline, |k| line_of[k - 1]);
        IngestError::Invalid { line, source }
    })
}

pub fn write_tournament(t: &WeightedTournament) -> String {
    let mut out = format!("m {}\n", t.candidate_count());
    for e in t.edges() {
        let _ = writeln!(out, "{},{},{}", e.from, e.to, e.weight);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartRecord {
    pub group_key: String,
    pub rank: u32,
    pub item_label: String,
}

/// One voter per group, ranking its listed items by ascending rank with all
/// other items tied at the bottom. Candidates are every item seen, sorted.
pub fn profile_from_charts(records: &[ChartRecord]) -> Result<ParsedProfile, IngestError> {
    let universe: BTreeSet<&str> = records.iter().map(|r| r.item_label.as_str()).collect();
    let candidates = CandidateDirectory::new(universe.iter().copied())?;
    let mut groups: BTreeMap<&str, BTreeMap<u32, &str>> = BTreeMap::new();
    for r in records {
        if groups
            .entry(&r.group_key)
            .or_default()
            .insert(r.rank, &r.item_label)
            .is_some()
        {
            return Err(IngestError::DuplicateRank {
                group: r.group_key.clone(),
                rank: r.rank,
            });
        }
    }
    let m = candidates.len();
    let mut profile = PreferenceProfile::new(m);
    for (group, ranking) in groups {
        let mut seen = BTreeSet::new();
        let mut tiers = Vec::with_capacity(ranking.len());
        for item in ranking.into_values() {
            if !seen.insert(item) {
                return Err(IngestError::DuplicateItem {
                    group: group.to_string(),
                    item: item.to_string(),
                });
            }
            tiers.push(vec![candidates.id(item).expect("item in universe")]);
        }
        profile.push(WeakOrder::completed(m, tiers)?, 1)?;
    }
    Ok(ParsedProfile { candidates, profile })
}

/// Column names used to read chart rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartColumns {
    /// Joined with `|` to form the group key.
    pub group_cols: Vec<String>,
    pub rank_col: String,
    pub item_col: String,
}

impl Default for ChartColumns {
    fn default() -> Self {
        ChartColumns {
            group_cols: vec!["date".into(), "region".into()],
            rank_col: "rank".into(),
            item_col: "item".into(),
        }
    }
}

/// Reads chart records from CSV with a header row.
pub fn read_chart_csv<R: Read>(reader: R, columns: &ChartColumns) -> Result<Vec<ChartRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let group_idx = columns
        .group_cols
        .iter()
        .map(|c| index(c))
        .collect::<Result<Vec<_>, _>>()?;
    let rank_idx = index(&columns.rank_col)?;
    let item_idx = index(&columns.item_col)?;

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let rank_text = field(rank_idx);
        let rank = rank_text
            .parse::<u32>()
            .ok()
            .filter(|&r| r > 0)
            .ok_or_else(|| IngestError::BadRank {
                row: i + 1,
                value: rank_text.to_string(),
            })?;
        records.push(ChartRecord {
            group_key: group_idx.iter().map(|&k| field(k)).collect::<Vec<_>>().join("|"),
            rank,
            item_label: field(item_idx).to_string(),
        });
    }
    Ok(records)
}
