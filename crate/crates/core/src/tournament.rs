//! Profiles, majority margins, weighted tournaments and dominance graphs.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

/// Dense candidate index in `0..m`.
pub type CandidateId = u32;

/// Edge weight of a weighted tournament (a strictly positive majority margin).
pub type Weight = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TournamentError {
    #[error("candidate {id} out of range for {m} candidates")]
    OutOfRange { id: CandidateId, m: usize },
    #[error("self-loop on candidate {0}")]
    SelfLoop(CandidateId),
    #[error("edge ({from},{to}) has non-positive weight")]
    NonPositiveWeight { from: CandidateId, to: CandidateId },
    #[error("duplicate edge ({from},{to})")]
    DuplicateEdge { from: CandidateId, to: CandidateId },
    #[error("both ({a},{b}) and ({b},{a}) present")]
    BothDirections { a: CandidateId, b: CandidateId },
    #[error("margins not antisymmetric at ({a},{b})")]
    NotAntisymmetric { a: CandidateId, b: CandidateId },
    #[error("margin matrix has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("invalid weak order: {0}")]
    InvalidOrder(String),
    #[error("ballot is over {got} candidates, profile has {expected}")]
    CandidateCount { expected: usize, got: usize },
    #[error("voter weight must be positive")]
    ZeroWeight,
    #[error("duplicate candidate label {0:?}")]
    DuplicateLabel(String),
}

/// Bijection between dense candidate ids and external labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateDirectory {
    labels: Vec<String>,
    index: HashMap<String, CandidateId>,
}

impl CandidateDirectory {
    pub fn new<I, S>(labels: I) -> Result<Self, TournamentError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (id, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), id as CandidateId).is_some() {
                return Err(TournamentError::DuplicateLabel(label.clone()));
            }
        }
        Ok(CandidateDirectory { labels, index })
    }

    /// Labels `"0"`, `"1"`, ... for inputs that carry bare ids.
    pub fn numeric(m: usize) -> Self {
        CandidateDirectory::new((0..m).map(|i| i.to_string())).expect("numeric labels are unique")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: CandidateId) -> &str {
        &self.labels[id as usize]
    }

    pub fn id(&self, label: &str) -> Option<CandidateId> {
        self.index.get(label).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// A complete, transitive ranking stored as an ordered sequence of tiers.
///
/// Candidates in the same tier are tied; earlier tiers are preferred. Tiers
/// are non-empty, disjoint and cover `0..m`. Ids inside a tier are kept sorted
/// so equal orders compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeakOrder {
    m: usize,
    tiers: Vec<Vec<CandidateId>>,
}

impl WeakOrder {
    pub fn new(m: usize, mut tiers: Vec<Vec<CandidateId>>) -> Result<Self, TournamentError> {
        let mut seen = vec![false; m];
        let mut count = 0;
        for tier in &mut tiers {
            if tier.is_empty() {
                return Err(TournamentError::InvalidOrder("empty tier".into()));
            }
            tier.sort_unstable();
            for &c in tier.iter() {
                let slot = seen
                    .get_mut(c as usize)
                    .ok_or(TournamentError::OutOfRange { id: c, m })?;
                if *slot {
                    return Err(TournamentError::InvalidOrder(format!("candidate {c} ranked twice")));
                }
                *slot = true;
                count += 1;
            }
        }
        if count != m {
            return Err(TournamentError::InvalidOrder(format!(
                "ranks {count} of {m} candidates"
            )));
        }
        Ok(WeakOrder { m, tiers })
    }

    /// A strict linear order, best first.
    pub fn linear(order: &[CandidateId]) -> Result<Self, TournamentError> {
        WeakOrder::new(order.len(), order.iter().map(|&c| vec![c]).collect())
    }

    /// Completes a truncated ballot: every candidate not mentioned in `listed`
    /// lands in one extra bottom tier.
    pub fn completed(m: usize, mut listed: Vec<Vec<CandidateId>>) -> Result<Self, TournamentError> {
        let mut mentioned = vec![false; m];
        for &c in listed.iter().flatten() {
            if let Some(slot) = mentioned.get_mut(c as usize) {
                *slot = true;
            }
        }
        let rest: Vec<CandidateId> = (0..m as CandidateId).filter(|&c| !mentioned[c as usize]).collect();
        if !rest.is_empty() {
            listed.push(rest);
        }
        WeakOrder::new(m, listed)
    }

    pub fn candidate_count(&self) -> usize {
        self.m
    }

    pub fn tiers(&self) -> &[Vec<CandidateId>] {
        &self.tiers
    }

    /// Tier index of every candidate (smaller is better).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.m];
        for (i, tier) in self.tiers.iter().enumerate() {
            for &c in tier {
                pos[c as usize] = i;
            }
        }
        pos
    }

    pub fn is_linear(&self) -> bool {
        self.tiers.iter().all(|t| t.len() == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub order: WeakOrder,
    pub weight: u64,
}

/// A multiset of weighted voters' weak orders over `m` candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    m: usize,
    ballots: Vec<Ballot>,
}

impl PreferenceProfile {
    pub fn new(m: usize) -> Self {
        PreferenceProfile { m, ballots: Vec::new() }
    }

    pub fn push(&mut self, order: WeakOrder, weight: u64) -> Result<(), TournamentError> {
        if order.candidate_count() != self.m {
            return Err(TournamentError::CandidateCount {
                expected: self.m,
                got: order.candidate_count(),
            });
        }
        if weight == 0 {
            return Err(TournamentError::ZeroWeight);
        }
        self.ballots.push(Ballot { order, weight });
        Ok(())
    }

    pub fn candidate_count(&self) -> usize {
        self.m
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn voter_count(&self) -> usize {
        self.ballots.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.ballots.iter().map(|b| b.weight).sum()
    }
}

/// Signed pairwise majority margins, row-major `m × m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginMatrix {
    m: usize,
    mu: Vec<i64>,
}

impl MarginMatrix {
    pub fn zeros(m: usize) -> Self {
        MarginMatrix { m, mu: vec![0; m * m] }
    }

    /// Wraps raw row-major values. Only the shape is checked here; use
    /// [`MarginMatrix::check_antisymmetric`] for the algebraic invariants.
    pub fn from_rows(m: usize, mu: Vec<i64>) -> Result<Self, TournamentError> {
        if mu.len() != m * m {
            return Err(TournamentError::Shape {
                expected: m * m,
                got: mu.len(),
            });
        }
        Ok(MarginMatrix { m, mu })
    }

    pub fn candidate_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, a: CandidateId, b: CandidateId) -> i64 {
        self.mu[a as usize * self.m + b as usize]
    }

    /// Sets `mu(a,b) = value` and `mu(b,a) = -value`.
    pub fn set_pair(&mut self, a: CandidateId, b: CandidateId, value: i64) {
        let m = self.m;
        self.mu[a as usize * m + b as usize] = value;
        self.mu[b as usize * m + a as usize] = -value;
    }

    pub fn check_antisymmetric(&self) -> Result<(), TournamentError> {
        for a in 0..self.m as CandidateId {
            for b in a..self.m as CandidateId {
                if self.get(a, b) != -self.get(b, a) {
                    return Err(TournamentError::NotAntisymmetric { a, b });
                }
            }
        }
        Ok(())
    }
}

/// `mu(a,b)` = weight of voters ranking `a` strictly above `b` minus the converse.
pub fn majority_margins(profile: &PreferenceProfile) -> MarginMatrix {
    let m = profile.candidate_count();
    let mu = profile
        .ballots()
        .par_iter()
        .fold(
            || vec![0i64; m * m],
            |mut acc, ballot| {
                let w = ballot.weight as i64;
                let tiers = ballot.order.tiers();
                for (i, upper) in tiers.iter().enumerate() {
                    for lower in &tiers[i + 1..] {
                        for &a in upper {
                            for &b in lower {
                                acc[a as usize * m + b as usize] += w;
                                acc[b as usize * m + a as usize] -= w;
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0i64; m * m],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    MarginMatrix { m, mu }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: CandidateId,
    pub to: CandidateId,
    pub weight: Weight,
}

/// Candidates plus asymmetric, strictly positive weighted edges.
///
/// Stored as a compressed out-adjacency with each row sorted by target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedTournament {
    m: usize,
    offsets: Vec<usize>,
    targets: Vec<CandidateId>,
    weights: Vec<Weight>,
}

impl WeightedTournament {
    pub fn empty(m: usize) -> Self {
        WeightedTournament {
            m,
            offsets: vec![0; m + 1],
            targets: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a tournament from an arbitrary edge list, rejecting anything
    /// that breaks the tournament invariants.
    pub fn new<I>(m: usize, edges: I) -> Result<Self, TournamentError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        for e in &edges {
            for id in [e.from, e.to] {
                if id as usize >= m {
                    return Err(TournamentError::OutOfRange { id, m });
                }
            }
            if e.from == e.to {
                return Err(TournamentError::SelfLoop(e.from));
            }
            if e.weight == 0 {
                return Err(TournamentError::NonPositiveWeight { from: e.from, to: e.to });
            }
        }
        edges.sort_unstable_by_key(|e| (e.from, e.to));
        for pair in edges.windows(2) {
            if (pair[0].from, pair[0].to) == (pair[1].from, pair[1].to) {
                return Err(TournamentError::DuplicateEdge {
                    from: pair[0].from,
                    to: pair[0].to,
                });
            }
        }
        let mut offsets = vec![0usize; m + 1];
        for e in &edges {
            offsets[e.from as usize + 1] += 1;
        }
        for i in 0..m {
            offsets[i + 1] += offsets[i];
        }
        let t = WeightedTournament {
            m,
            offsets,
            targets: edges.iter().map(|e| e.to).collect(),
            weights: edges.iter().map(|e| e.weight).collect(),
        };
        for e in t.edges() {
            if e.from < e.to && t.weight(e.to, e.from).is_some() {
                return Err(TournamentError::BothDirections { a: e.from, b: e.to });
            }
        }
        Ok(t)
    }

    /// Two-pass construction for generators that already guarantee the
    /// invariants and emit each row in ascending target order. `emit` is
    /// called twice and must produce the same sequence both times.
    pub(crate) fn from_sorted_rows_unchecked<F>(m: usize, emit: F) -> Self
    where
        F: Fn(&mut dyn FnMut(CandidateId, CandidateId, Weight)),
    {
        let mut offsets = vec![0usize; m + 1];
        emit(&mut |from, _, _| offsets[from as usize + 1] += 1);
        for i in 0..m {
            offsets[i + 1] += offsets[i];
        }
        let total = offsets[m];
        let mut targets = vec![0; total];
        let mut weights = vec![0; total];
        let mut cursor = offsets.clone();
        emit(&mut |from, to, w| {
            let slot = &mut cursor[from as usize];
            targets[*slot] = to;
            weights[*slot] = w;
            *slot += 1;
        });
        let t = WeightedTournament {
            m,
            offsets,
            targets,
            weights,
        };
        debug_assert!((0..m).all(|a| t.row_targets(a as CandidateId).windows(2).all(|w| w[0] < w[1])));
        t
    }

    pub fn candidate_count(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    fn row_targets(&self, a: CandidateId) -> &[CandidateId] {
        &self.targets[self.offsets[a as usize]..self.offsets[a as usize + 1]]
    }

    pub fn out_edges(&self, a: CandidateId) -> impl Iterator<Item = (CandidateId, Weight)> + '_ {
        let range = self.offsets[a as usize]..self.offsets[a as usize + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.m as CandidateId)
            .flat_map(move |from| self.out_edges(from).map(move |(to, weight)| Edge { from, to, weight }))
    }

    pub fn weight(&self, a: CandidateId, b: CandidateId) -> Option<Weight> {
        let row = self.row_targets(a);
        row.binary_search(&b)
            .ok()
            .map(|i| self.weights[self.offsets[a as usize] + i])
    }

    /// Signed margin implied by the tournament; absent pairs read as zero.
    pub fn margin(&self, a: CandidateId, b: CandidateId) -> i64 {
        if let Some(w) = self.weight(a, b) {
            w as i64
        } else if let Some(w) = self.weight(b, a) {
            -(w as i64)
        } else {
            0
        }
    }

    pub fn margins(&self) -> MarginMatrix {
        let mut mm = MarginMatrix::zeros(self.m);
        for e in self.edges() {
            mm.set_pair(e.from, e.to, e.weight as i64);
        }
        mm
    }

    /// Renames candidate `c` to `new_id_of[c]`.
    pub fn relabel(&self, new_id_of: &[CandidateId]) -> Self {
        assert_eq!(new_id_of.len(), self.m, "relabeling must cover every candidate");
        let edges = self.edges().map(|e| Edge {
            from: new_id_of[e.from as usize],
            to: new_id_of[e.to as usize],
            weight: e.weight,
        });
        WeightedTournament::new(self.m, edges).expect("relabeling preserves tournament invariants")
    }

    /// Sub-tournament on `keep` (renumbered `0..keep.len()` in the given order).
    pub fn induced(&self, keep: &[CandidateId]) -> Self {
        let mut new_id = vec![None; self.m];
        for (i, &c) in keep.iter().enumerate() {
            new_id[c as usize] = Some(i as CandidateId);
        }
        let edges = self.edges().filter_map(|e| {
            Some(Edge {
                from: new_id[e.from as usize]?,
                to: new_id[e.to as usize]?,
                weight: e.weight,
            })
        });
        WeightedTournament::new(keep.len(), edges).expect("induced subgraph of a tournament")
    }
}

/// `E = {(a,b) : mu(a,b) > 0}` with `mu(a,b)` as the weight.
pub fn build_tournament(margins: &MarginMatrix) -> Result<WeightedTournament, TournamentError> {
    margins.check_antisymmetric()?;
    let m = margins.candidate_count();
    Ok(WeightedTournament::from_sorted_rows_unchecked(m, |emit| {
        for a in 0..m as CandidateId {
            for b in 0..m as CandidateId {
                let mu = margins.get(a, b);
                if mu > 0 {
                    emit(a, b, mu as Weight);
                }
            }
        }
    }))
}

/// Unweighted digraph with an edge `a → b` iff `a` dominates `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceGraph {
    m: usize,
    offsets: Vec<usize>,
    targets: Vec<CandidateId>,
}

impl DominanceGraph {
    pub fn candidate_count(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, a: CandidateId) -> &[CandidateId] {
        &self.targets[self.offsets[a as usize]..self.offsets[a as usize + 1]]
    }

    pub fn edges(&self) -> impl Iterator<Item = (CandidateId, CandidateId)> + '_ {
        (0..self.m as CandidateId).flat_map(move |a| self.successors(a).iter().map(move |&b| (a, b)))
    }
}

pub fn dominance_graph(t: &WeightedTournament) -> DominanceGraph {
    DominanceGraph {
        m: t.m,
        offsets: t.offsets.clone(),
        targets: t.targets.clone(),
    }
}

/// Sum of signed margins `Σ_b mu(c,b)` for every candidate.
pub fn borda_scores(t: &WeightedTournament) -> Vec<i64> {
    let mut score = vec![0i64; t.candidate_count()];
    for e in t.edges() {
        score[e.from as usize] += e.weight as i64;
        score[e.to as usize] -= e.weight as i64;
    }
    score
}

/// Candidates by descending Borda score, ties by ascending id. Position `i`
/// holds the candidate that receives the new id `i`.
pub fn borda_id_order(t: &WeightedTournament) -> Vec<CandidateId> {
    let score = borda_scores(t);
    let mut order: Vec<CandidateId> = (0..t.candidate_count() as CandidateId).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(score[c as usize]), c));
    order
}

/// Inverts a permutation given as `order[new] = old` into `new_id_of[old] = new`.
pub fn invert_permutation(order: &[CandidateId]) -> Vec<CandidateId> {
    let mut inv = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        inv[old as usize] = new as CandidateId;
    }
    inv
}
