use std::collections::VecDeque;

use rayon::prelude::*;

use super::OracleError;
use crate::tournament::{CandidateId, WeakOrder, Weight, WeightedTournament};

/// Widths `p(a,b)` of widest paths; 0 means "no path". The diagonal is kept
/// at 0 and carries no meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidestPathMatrix {
    m: usize,
    p: Vec<Weight>,
}

impl WidestPathMatrix {
    pub fn candidate_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, a: CandidateId, b: CandidateId) -> Weight {
        self.p[a as usize * self.m + b as usize]
    }

    /// `a` beats `b` under the Schulze method.
    pub fn beats(&self, a: CandidateId, b: CandidateId) -> bool {
        self.get(a, b) > self.get(b, a)
    }

    pub fn row(&self, a: CandidateId) -> &[Weight] {
        &self.p[a as usize * self.m..(a as usize + 1) * self.m]
    }
}

/// Max-min Floyd–Warshall. Rows are relaxed in parallel for each pivot.
pub fn widest_paths(t: &WeightedTournament) -> WidestPathMatrix {
    let m = t.candidate_count();
    let mut p = vec![0; m * m];
    for e in t.edges() {
        p[e.from as usize * m + e.to as usize] = e.weight;
    }
    for k in 0..m {
        let pivot: Vec<Weight> = p[k * m..(k + 1) * m].to_vec();
        p.par_chunks_mut(m.max(1)).enumerate().for_each(|(i, row)| {
            let through = row[k];
            if i == k || through == 0 {
                return;
            }
            for (j, (cell, &onward)) in row.iter_mut().zip(&pivot).enumerate() {
                let cand = through.min(onward);
                if cand > *cell && j != i {
                    *cell = cand;
                }
            }
        });
    }
    WidestPathMatrix { m, p }
}

fn reachable_over(
    t: &WeightedTournament,
    s: CandidateId,
    d: CandidateId,
    admit: impl Fn(Weight) -> bool,
) -> Result<bool, OracleError> {
    let m = t.candidate_count();
    for id in [s, d] {
        if id as usize >= m {
            return Err(OracleError::OutOfRange { id, m });
        }
    }
    if s == d {
        return Err(OracleError::SameEndpoints(s));
    }
    let mut seen = vec![false; m];
    let mut queue = VecDeque::from([s]);
    seen[s as usize] = true;
    while let Some(v) = queue.pop_front() {
        for (u, w) in t.out_edges(v) {
            if admit(w) && !seen[u as usize] {
                if u == d {
                    return Ok(true);
                }
                seen[u as usize] = true;
                queue.push_back(u);
            }
        }
    }
    Ok(false)
}

/// Is there a path `s → d` whose every edge weighs at least `w`?
pub fn wp_geq(t: &WeightedTournament, s: CandidateId, d: CandidateId, w: Weight) -> Result<bool, OracleError> {
    reachable_over(t, s, d, |x| x >= w)
}

/// Is there a path `s → d` whose every edge weighs more than `w`?
pub fn wp_gt(t: &WeightedTournament, s: CandidateId, d: CandidateId, w: Weight) -> Result<bool, OracleError> {
    reachable_over(t, s, d, |x| x > w)
}

fn winners_of(p: &WidestPathMatrix) -> Vec<CandidateId> {
    let m = p.candidate_count() as CandidateId;
    (0..m)
        .filter(|&a| (0..m).all(|b| b == a || p.get(b, a) <= p.get(a, b)))
        .collect()
}

/// Candidates that no other candidate beats, via Floyd–Warshall.
pub fn schulze_winners_seq(t: &WeightedTournament) -> Vec<CandidateId> {
    winners_of(&widest_paths(t))
}

/// The Schulze ranking `a R b ⇔ p(a,b) ≥ p(b,a)` as tiers, best first.
///
/// Fails if `R` is not complete and transitive.
pub fn schulze_ranking(t: &WeightedTournament) -> Result<WeakOrder, OracleError> {
    let p = widest_paths(t);
    let m = t.candidate_count();
    let ids = 0..m as CandidateId;
    let weakly_above: Vec<usize> = ids
        .clone()
        .map(|a| ids.clone().filter(|&b| b != a && p.get(a, b) >= p.get(b, a)).count())
        .collect();
    let mut order: Vec<CandidateId> = ids.clone().collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(weakly_above[c as usize]), c));
    let mut tiers: Vec<Vec<CandidateId>> = Vec::new();
    let mut last = None;
    for c in order {
        if last == Some(weakly_above[c as usize]) {
            tiers.last_mut().expect("tier opened").push(c);
        } else {
            tiers.push(vec![c]);
            last = Some(weakly_above[c as usize]);
        }
    }
    let ranking = WeakOrder::new(m, tiers)?;
    // A relation that coincides with the tier order is a weak order.
    let pos = ranking.positions();
    for a in ids.clone() {
        for b in ids.clone() {
            if a != b && (p.get(a, b) >= p.get(b, a)) != (pos[a as usize] <= pos[b as usize]) {
                return Err(OracleError::NotWeakOrder { a, b });
            }
        }
    }
    Ok(ranking)
}
