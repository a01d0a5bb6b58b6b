//! Synthetic instances: McGarvey profiles, random tournaments and profiles,
//! and the two hardness reductions used as property-test sources.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::oracles::{EmasInstance, TieBreakOrder};
use crate::tournament::{
    CandidateId, Edge, MarginMatrix, PreferenceProfile, TournamentError, WeakOrder, Weight, WeightedTournament,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("edge {from}->{to} has odd weight {weight}")]
    OddWeight {
        from: CandidateId,
        to: CandidateId,
        weight: Weight,
    },
    #[error("density {0} outside (0, 1]")]
    Density(f64),
    #[error("maximum weight {0} must be even and at least 2")]
    MaxWeight(Weight),
    #[error("vertex {id} missing from a graph with {n} vertices")]
    VertexMissing { id: u32, n: usize },
    #[error("source and target coincide ({0})")]
    SameEndpoints(u32),
    #[error("instance has a self-loop or two edges on one vertex pair")]
    NotSimple,
    #[error(transparent)]
    Tournament(#[from] TournamentError),
}

/// Profile of `Σ μ(e)` linear orders whose margins reproduce `t`.
///
/// Each edge `(a, b)` of weight `w` contributes `w / 2` ballot pairs
/// `a > b > rest ascending` and `rest descending > a > b`.
pub fn mcgarvey_profile(t: &WeightedTournament) -> Result<PreferenceProfile, GeneratorError> {
    let m = t.candidate_count();
    let mut profile = PreferenceProfile::new(m);
    for e in t.edges() {
        if e.weight % 2 != 0 {
            return Err(GeneratorError::OddWeight {
                from: e.from,
                to: e.to,
                weight: e.weight,
            });
        }
        let rest: Vec<CandidateId> = (0..m as CandidateId).filter(|&c| c != e.from && c != e.to).collect();
        let mut first = vec![e.from, e.to];
        first.extend(&rest);
        let mut second: Vec<CandidateId> = rest.iter().rev().copied().collect();
        second.extend([e.from, e.to]);
        let first = WeakOrder::linear(&first)?;
        let second = WeakOrder::linear(&second)?;
        for _ in 0..e.weight / 2 {
            profile.push(first.clone(), 1)?;
            profile.push(second.clone(), 1)?;
        }
    }
    Ok(profile)
}

/// For every unordered pair, with probability `density`, one edge of uniform
/// direction and uniform even weight in `[2, max_even_weight]`.
pub fn random_tournament(
    m: usize,
    density: f64,
    max_even_weight: Weight,
    seed: u64,
) -> Result<WeightedTournament, GeneratorError> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(GeneratorError::Density(density));
    }
    if max_even_weight < 2 || !max_even_weight.is_multiple_of(2) {
        return Err(GeneratorError::MaxWeight(max_even_weight));
    }
    let halves = max_even_weight / 2;
    // Replays the same stream twice (count, then fill) instead of buffering
    // the edge list.
    Ok(WeightedTournament::from_sorted_rows_unchecked(m, |emit| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for a in 0..m as CandidateId {
            for b in a + 1..m as CandidateId {
                if rng.random::<f64>() >= density {
                    continue;
                }
                let forward: bool = rng.random();
                let w = 2 * rng.random_range(1..=halves);
                if forward {
                    emit(a, b, w);
                } else {
                    emit(b, a, w);
                }
            }
        }
    }))
}

/// `n` uniformly random linear orders of weight 1.
pub fn random_profile(m: usize, n: usize, seed: u64) -> PreferenceProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = PreferenceProfile::new(m);
    let mut order: Vec<CandidateId> = (0..m as CandidateId).collect();
    for _ in 0..n {
        order.shuffle(&mut rng);
        let ballot = WeakOrder::linear(&order).expect("a permutation is a linear order");
        profile.push(ballot, 1).expect("ballot covers all candidates");
    }
    profile
}

/// Plain directed graph on `0..n`; self-loops and parallel edges allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Digraph {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self, GeneratorError> {
        for &(u, v) in &edges {
            for id in [u, v] {
                if id as usize >= n {
                    return Err(GeneratorError::VertexMissing { id, n });
                }
            }
        }
        Ok(Digraph { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Breadth-first search from `from`.
    pub fn reaches(&self, from: u32, to: u32) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
        }
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([from]);
        seen[from as usize] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                return true;
            }
            for &v in &adj[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }
}

/// Each ordered pair `(u, v)` with `u != v` becomes an edge with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u != v && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Digraph { n, edges }
}

/// Tournament in which `a` is the unique Schulze winner iff `g` has a path
/// from `a` to `b`.
///
/// Edges into `a` and out of `b` are dropped (as are self-loops). Of every
/// remaining pair `u⇄v` the edge from the smaller to the larger id is routed
/// through a new midpoint. Every vertex `u != b`, midpoints included, gets a
/// new vertex `r_u` with edges `b → r_u → u`. All weights are 4 except
/// `r_a → a`, which is 2. Numbering: original vertices, then midpoints in
/// order of creation, then the `r_u` in order of `u`.
pub fn reduce_reachability(g: &Digraph, a: u32, b: u32) -> Result<WeightedTournament, GeneratorError> {
    for id in [a, b] {
        if id as usize >= g.n {
            return Err(GeneratorError::VertexMissing { id, n: g.n });
        }
    }
    if a == b {
        return Err(GeneratorError::SameEndpoints(a));
    }
    let mut kept: Vec<(u32, u32)> = g
        .edges
        .iter()
        .copied()
        .filter(|&(u, v)| u != v && v != a && u != b)
        .collect();
    kept.sort_unstable();
    kept.dedup();
    let present: HashSet<(u32, u32)> = kept.iter().copied().collect();

    let mut next = g.n as u32;
    let mut edges = Vec::new();
    for &(u, v) in &kept {
        if u < v && present.contains(&(v, u)) {
            let mid = next;
            next += 1;
            edges.push(Edge {
                from: u,
                to: mid,
                weight: 4,
            });
            edges.push(Edge {
                from: mid,
                to: v,
                weight: 4,
            });
        } else {
            edges.push(Edge {
                from: u,
                to: v,
                weight: 4,
            });
        }
    }
    let inner = next;
    for u in (0..inner).filter(|&u| u != b) {
        let r = next;
        next += 1;
        edges.push(Edge {
            from: b,
            to: r,
            weight: 4,
        });
        edges.push(Edge {
            from: r,
            to: u,
            weight: if u == a { 2 } else { 4 },
        });
    }
    Ok(WeightedTournament::new(next as usize, edges)?)
}

/// Rewrites `inst` so that it has no self-loops and no two edges on the same
/// vertex pair, without changing whether the designated edge is in the EMAS.
///
/// A self-loop `(v, v)` becomes the path `v → x → y → v` on two new vertices;
/// the later edge of a repeated or opposite pair `(v, u)` becomes `v → x → u`.
/// The replacement edges take the original's place in the order, and the
/// designated edge maps to the last of them.
pub fn preprocess_emas(inst: &EmasInstance) -> EmasInstance {
    let mut next = inst.vertex_count() as u32;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(inst.edges().len());
    let mut designated = 0;
    for (i, &(u, v)) in inst.edges().iter().enumerate() {
        if u == v {
            let (x, y) = (fresh(), fresh());
            edges.extend([(v, x), (x, y), (y, v)]);
        } else if !seen.insert((u.min(v), u.max(v))) {
            let x = fresh();
            edges.extend([(u, x), (x, v)]);
        } else {
            edges.push((u, v));
        }
        if i == inst.designated() {
            designated = edges.len() - 1;
        }
    }
    EmasInstance::new(next as usize, edges, designated).expect("rewritten instance is well-formed")
}

/// Margins and tie-break order on `V ∪ {0}` such that candidate 0 wins
/// ranked pairs iff the designated edge is not in the EMAS.
///
/// Vertex `v` becomes candidate `v + 1`. With `m` edges, the `i`-th edge
/// (1-based) gets margin `m - i + 1`, except the designated edge `(u, v)`
/// with index `j`, which is replaced by `μ(u, 0) = m - j + 1` and
/// `μ(0, v) = m + 1`. The tie-break order is by candidate id.
pub fn reduce_emas(inst: &EmasInstance) -> Result<(MarginMatrix, TieBreakOrder), GeneratorError> {
    if !inst.is_simple() {
        return Err(GeneratorError::NotSimple);
    }
    let n = inst.vertex_count() + 1;
    let m = inst.edges().len() as i64;
    let mut margins = MarginMatrix::zeros(n);
    for (i, &(u, v)) in inst.edges().iter().enumerate() {
        let label = i as i64 + 1;
        if i == inst.designated() {
            margins.set_pair(u + 1, 0, m - label + 1);
            margins.set_pair(0, v + 1, m + 1);
        } else {
            margins.set_pair(u + 1, v + 1, m - label + 1);
        }
    }
    Ok((margins, TieBreakOrder::identity(n)))
}

/// Random instance with `n` vertices and `edges` edges drawn uniformly from
/// all ordered pairs (self-loops and repeats included), one of them designated.
pub fn random_emas_instance(n: usize, edges: usize, seed: u64) -> EmasInstance {
    assert!(n > 0 && edges > 0, "instance needs a vertex and an edge");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let list: Vec<(u32, u32)> = (0..edges)
        .map(|_| (rng.random_range(0..n as u32), rng.random_range(0..n as u32)))
        .collect();
    let designated = rng.random_range(0..edges);
    EmasInstance::new(n, list, designated).expect("endpoints drawn in range")
}

/// Counts edges per unordered pair; used by tests to check simplicity.
pub fn pair_multiplicities(edges: &[(u32, u32)]) -> HashMap<(u32, u32), usize> {
    let mut counts = HashMap::new();
    for &(u, v) in edges {
        *counts.entry((u.min(v), u.max(v))).or_insert(0) += 1;
    }
    counts
}
