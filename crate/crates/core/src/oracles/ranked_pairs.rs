use super::OracleError;
use crate::tournament::{CandidateId, MarginMatrix};

/// A fixed linear order over candidates used to break margin ties
/// (position 0 has the highest priority).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreakOrder {
    order: Vec<CandidateId>,
    rank: Vec<usize>,
}

impl TieBreakOrder {
    pub fn new(order: Vec<CandidateId>) -> Result<Self, OracleError> {
        let m = order.len();
        let mut rank = vec![usize::MAX; m];
        for (i, &c) in order.iter().enumerate() {
            match rank.get_mut(c as usize) {
                Some(r) if *r == usize::MAX => *r = i,
                _ => return Err(OracleError::InvalidTieBreak(m)),
            }
        }
        Ok(TieBreakOrder { order, rank })
    }

    pub fn identity(m: usize) -> Self {
        TieBreakOrder {
            order: (0..m as CandidateId).collect(),
            rank: (0..m).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        let order: Vec<CandidateId> = self.order.iter().rev().copied().collect();
        TieBreakOrder::new(order).expect("reversal of a permutation")
    }

    pub fn rank(&self, c: CandidateId) -> usize {
        self.rank[c as usize]
    }

    pub fn order(&self) -> &[CandidateId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairDecision {
    pub from: CandidateId,
    pub to: CandidateId,
    pub margin: i64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPairsOutcome {
    /// Best first.
    pub ranking: Vec<CandidateId>,
    pub winner: CandidateId,
    /// Every considered pair in processing order.
    pub decisions: Vec<PairDecision>,
}

/// Ranked pairs subject to the tie-breaking order `tb`.
///
/// All ordered pairs with a non-negative margin are locked in by descending
/// margin; equal margins are ordered by the tie-break ranks of the first and
/// then the second candidate. A pair is skipped if it would close a cycle.
pub fn ranked_pairs(margins: &MarginMatrix, tb: &TieBreakOrder) -> Result<RankedPairsOutcome, OracleError> {
    margins.check_antisymmetric()?;
    let m = margins.candidate_count();
    if tb.len() != m {
        return Err(OracleError::InvalidTieBreak(m));
    }
    if m == 0 {
        return Err(OracleError::Empty);
    }
    let mut pairs: Vec<(CandidateId, CandidateId, i64)> = Vec::new();
    for a in 0..m as CandidateId {
        for b in 0..m as CandidateId {
            let mu = margins.get(a, b);
            if a != b && mu >= 0 {
                pairs.push((a, b, mu));
            }
        }
    }
    pairs.sort_by_key(|&(a, b, mu)| (std::cmp::Reverse(mu), tb.rank(a), tb.rank(b)));

    let mut locked: Vec<Vec<CandidateId>> = vec![Vec::new(); m];
    let mut decisions = Vec::with_capacity(pairs.len());
    let mut stack = Vec::new();
    let mut seen = vec![false; m];
    for (a, b, mu) in pairs {
        let kept = !reaches(&locked, b, a, &mut stack, &mut seen);
        if kept {
            locked[a as usize].push(b);
        }
        decisions.push(PairDecision {
            from: a,
            to: b,
            margin: mu,
            kept,
        });
    }

    let ranking = unique_topological_order(&locked).ok_or(OracleError::RankingNotTotal)?;
    Ok(RankedPairsOutcome {
        winner: ranking[0],
        ranking,
        decisions,
    })
}

/// Depth-first reachability over the kept pairs.
pub(super) fn reaches(
    adj: &[Vec<CandidateId>],
    from: CandidateId,
    to: CandidateId,
    stack: &mut Vec<CandidateId>,
    seen: &mut [bool],
) -> bool {
    if from == to {
        return true;
    }
    seen.iter_mut().for_each(|s| *s = false);
    stack.clear();
    stack.push(from);
    seen[from as usize] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v as usize] {
            if u == to {
                return true;
            }
            if !seen[u as usize] {
                seen[u as usize] = true;
                stack.push(u);
            }
        }
    }
    false
}

/// Kahn's algorithm; `None` unless exactly one source exists at every step.
fn unique_topological_order(adj: &[Vec<CandidateId>]) -> Option<Vec<CandidateId>> {
    let m = adj.len();
    let mut indegree = vec![0usize; m];
    for &u in adj.iter().flatten() {
        indegree[u as usize] += 1;
    }
    let mut ready: Vec<CandidateId> = (0..m as CandidateId).filter(|&v| indegree[v as usize] == 0).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(v) = ready.pop() {
        if !ready.is_empty() {
            return None;
        }
        order.push(v);
        for &u in &adj[v as usize] {
            indegree[u as usize] -= 1;
            if indegree[u as usize] == 0 {
                ready.push(u);
            }
        }
    }
    (order.len() == m).then_some(order)
}
