//! Parallel Schulze winner determination on the vertex-centric engine.
//!
//! Every round of the driver runs preprocessing, forward-backward
//! propagation and postprocessing until no vertex is left undecided. The
//! propagation phase computes, for every vertex, the smallest undecided
//! vertex that reaches it (`s`) and the smallest undecided vertex it reaches
//! (`t`), together with widest-path widths to and from those vertices.

use rayon::prelude::*;
use thiserror::Error;

use crate::pregel::{
    Combiner, Context, Engine, EngineConfig, EngineError, Graph, Inbox, RunStats, VertexId, VertexProgram,
};
use crate::tournament::{borda_id_order, invert_permutation, CandidateId, WeightedTournament};

/// Stands in for an unset `s` or `t`; larger than every vertex id.
pub const INFINITE_ID: VertexId = VertexId::MAX;
/// Stands in for the width of the empty path; larger than every margin.
pub const INFINITE_WIDTH: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchulzeError {
    #[error("tournament has no candidates")]
    Empty,
    #[error("k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("postprocessing finalized no vertex in round {0}")]
    Stalled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Winner,
    Loser,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchulzeVertexState {
    pub id: VertexId,
    pub status: Status,
    pub s: VertexId,
    pub ws: u64,
    pub t: VertexId,
    pub wt: u64,
    pub scc: Option<VertexId>,
}

impl SchulzeVertexState {
    fn new(id: VertexId, status: Status) -> Self {
        SchulzeVertexState {
            id,
            status,
            s: INFINITE_ID,
            ws: 0,
            t: INFINITE_ID,
            wt: 0,
            scc: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PropMessage {
    pub direction: Direction,
    pub v: VertexId,
    pub w: u64,
}

/// Per direction, keeps the smallest `v` and, among equal `v`, the largest `w`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PropCombiner;

impl Combiner for PropCombiner {
    type Message = PropMessage;

    fn kinds(&self) -> usize {
        2
    }

    fn kind(&self, msg: &PropMessage) -> usize {
        match msg.direction {
            Direction::Forward => 0,
            Direction::Backward => 1,
        }
    }

    fn combine(&self, a: PropMessage, b: PropMessage) -> PropMessage {
        let key = |m: &PropMessage| (m.direction, m.v, std::cmp::Reverse(m.w));
        if key(&b) < key(&a) {
            b
        } else {
            a
        }
    }
}

/// Update of `(s, ws)` by one received `(v, w)`. Returns
/// whether the pair changed.
pub fn absorb(s: &mut VertexId, ws: &mut u64, v: VertexId, w: u64) -> bool {
    if v < *s {
        *s = v;
        *ws = w;
        true
    } else if v == *s && w > *ws {
        *ws = w;
        true
    } else {
        false
    }
}

/// Builds the engine graph for `t`, renaming candidate `c` to `new_id_of[c]`.
pub fn engine_graph(t: &WeightedTournament, new_id_of: Option<&[CandidateId]>) -> Graph {
    Graph::from_edge_fn(t.candidate_count(), |emit| {
        for e in t.edges() {
            match new_id_of {
                Some(map) => emit(map[e.from as usize], map[e.to as usize], e.weight),
                None => emit(e.from, e.to, e.weight),
            }
        }
    })
}

/// A vertex starts as a loser iff its heaviest incoming edge outweighs its
/// heaviest outgoing edge.
pub fn initialise(graph: &Graph) -> Vec<SchulzeVertexState> {
    graph
        .max_in_out_weights()
        .into_par_iter()
        .enumerate()
        .map(|(v, (max_in, max_out))| {
            let status = if max_in > max_out {
                Status::Loser
            } else {
                Status::Unknown
            };
            SchulzeVertexState::new(v as VertexId, status)
        })
        .collect()
}

/// Resets `s`/`t` and returns the messages undecided vertices send to their
/// neighbours. Each vertex gathers what it would receive, so the inbox is
/// filled without contention.
pub fn preprocess(states: &mut [SchulzeVertexState], graph: &Graph) -> Inbox<PropMessage> {
    states.par_iter_mut().for_each(|st| {
        st.scc = None;
        if st.status == Status::Unknown {
            st.s = st.id;
            st.t = st.id;
            st.ws = INFINITE_WIDTH;
            st.wt = INFINITE_WIDTH;
        } else {
            st.s = INFINITE_ID;
            st.t = INFINITE_ID;
            st.ws = 0;
            st.wt = 0;
        }
    });
    let unknown: Vec<bool> = states.par_iter().map(|st| st.status == Status::Unknown).collect();
    let combiner = PropCombiner;
    let mut inbox = Inbox::new(graph.vertex_count(), combiner.kinds());
    inbox.par_vertex_slots_mut().enumerate().for_each(|(v, slots)| {
        let v = v as VertexId;
        let best = |edges: &mut dyn Iterator<Item = (VertexId, u64)>, direction| {
            edges
                .filter(|&(u, w)| w > 0 && unknown[u as usize])
                .map(|(u, w)| PropMessage { direction, v: u, w })
                .reduce(|a, b| combiner.combine(a, b))
        };
        slots[0] = best(&mut graph.in_edges(v), Direction::Forward);
        slots[1] = best(&mut graph.out_edges(v), Direction::Backward);
    });
    inbox
}

/// Vertex program for forward-backward propagation.
///
/// When only the width grows, edges no heavier than the previous width are
/// skipped: the neighbour already received exactly that message.
#[derive(Debug, Clone, Copy, Default)]
pub struct Propagation;

impl VertexProgram for Propagation {
    type State = SchulzeVertexState;
    type Message = PropMessage;

    fn compute<C>(&self, st: &mut SchulzeVertexState, inbox: &[Option<PropMessage>], ctx: &mut Context<'_, C>) -> bool
    where
        C: Combiner<Message = PropMessage>,
    {
        if let Some(m) = inbox[0] {
            let (old_s, old_ws) = (st.s, st.ws);
            if absorb(&mut st.s, &mut st.ws, m.v, m.w) {
                let (s, ws) = (st.s, st.ws);
                let floor = if s == old_s { old_ws } else { 0 };
                ctx.send_along_out_edges(|_, w| {
                    (w > floor).then_some(PropMessage {
                        direction: Direction::Forward,
                        v: s,
                        w: ws.min(w),
                    })
                });
            }
        }
        if let Some(m) = inbox[1] {
            let (old_t, old_wt) = (st.t, st.wt);
            if absorb(&mut st.t, &mut st.wt, m.v, m.w) {
                let (t, wt) = (st.t, st.wt);
                let floor = if t == old_t { old_wt } else { 0 };
                ctx.send_along_in_edges(|_, w| {
                    (w > floor).then_some(PropMessage {
                        direction: Direction::Backward,
                        v: t,
                        w: wt.min(w),
                    })
                });
            }
        }
        true
    }
}

pub fn propagate(
    engine: &Engine,
    graph: &Graph,
    states: &mut [SchulzeVertexState],
    inbox: Inbox<PropMessage>,
) -> Result<RunStats, EngineError> {
    engine.run(graph, states, inbox, &Propagation, &PropCombiner)
}

/// [`propagate`] with a callback at every superstep barrier.
pub fn propagate_observed<O>(
    engine: &Engine,
    graph: &Graph,
    states: &mut [SchulzeVertexState],
    inbox: Inbox<PropMessage>,
    observer: O,
) -> Result<RunStats, EngineError>
where
    O: FnMut(usize, &[SchulzeVertexState]),
{
    engine.run_observed(graph, states, inbox, &Propagation, &PropCombiner, observer)
}

/// What an in-neighbour reports about its `(s, t)` pair; several different
/// pairs collapse to `Mixed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeighborPair {
    Same(VertexId, VertexId),
    Mixed,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PairCombiner;

impl Combiner for PairCombiner {
    type Message = NeighborPair;

    fn combine(&self, a: NeighborPair, b: NeighborPair) -> NeighborPair {
        if a == b {
            a
        } else {
            NeighborPair::Mixed
        }
    }
}

struct PairState {
    s: VertexId,
    t: VertexId,
    differs: bool,
}

struct PairExchange;

impl VertexProgram for PairExchange {
    type State = PairState;
    type Message = NeighborPair;

    fn compute<C>(&self, st: &mut PairState, inbox: &[Option<NeighborPair>], ctx: &mut Context<'_, C>) -> bool
    where
        C: Combiner<Message = NeighborPair>,
    {
        if ctx.superstep() == 0 {
            let pair = NeighborPair::Same(st.s, st.t);
            ctx.send_along_out_edges(|_, w| (w > 0).then_some(pair));
        } else if let Some(received) = inbox[0] {
            st.differs = received != NeighborPair::Same(st.s, st.t);
        }
        true
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostprocessReport {
    /// Vertices whose status became final in this call.
    pub finalized: usize,
    /// Labels of SCCs that lost as a whole because an edge enters them.
    pub dominated_sccs: Vec<VertexId>,
    pub exchange: RunStats,
}

/// Applies loser requests to vertices that are still undecided.
fn apply_losers(states: &mut [SchulzeVertexState], requests: &[bool]) -> usize {
    states
        .par_iter_mut()
        .zip(requests.par_iter())
        .filter(|(st, &req)| req && st.status == Status::Unknown)
        .map(|(st, _)| st.status = Status::Loser)
        .count()
}

/// Marks at least one vertex as winner or loser, in three phases separated
/// by barriers.
pub fn postprocess(
    engine: &Engine,
    graph: &Graph,
    states: &mut [SchulzeVertexState],
) -> Result<PostprocessReport, EngineError> {
    let n = states.len();
    let mut report = PostprocessReport::default();

    // P1: compare each vertex with its s and t.
    let requests: Vec<(bool, VertexId)> = engine.install(|| {
        states
            .par_iter_mut()
            .map(|st| {
                let mut self_loses = false;
                let mut other = INFINITE_ID;
                if st.s < st.t {
                    self_loses = true;
                } else if st.s > st.t {
                    other = st.t;
                } else if st.s != INFINITE_ID {
                    st.scc = Some(st.s);
                    if st.ws > st.wt {
                        self_loses = true;
                    } else if st.ws < st.wt {
                        other = st.s;
                    }
                }
                (self_loses, other)
            })
            .collect()
    });
    let mut losers = vec![false; n];
    for (v, &(self_loses, other)) in requests.iter().enumerate() {
        if self_loses {
            losers[v] = true;
        }
        if other != INFINITE_ID {
            losers[other as usize] = true;
        }
    }
    drop(requests);
    report.finalized += engine.install(|| apply_losers(states, &losers));

    // P2: compare each vertex with its in-neighbours.
    let mut pairs: Vec<PairState> = states
        .iter()
        .map(|st| PairState {
            s: st.s,
            t: st.t,
            differs: false,
        })
        .collect();
    report.exchange = engine.run(graph, &mut pairs, Inbox::new(n, 1), &PairExchange, &PairCombiner)?;
    let mut dominated = vec![false; n];
    losers.fill(false);
    for (v, p) in pairs.iter().enumerate() {
        if !p.differs {
            continue;
        }
        if p.s == p.t {
            if p.s != INFINITE_ID {
                dominated[p.s as usize] = true;
            }
        } else {
            losers[v] = true;
        }
    }
    drop(pairs);
    report.dominated_sccs = (0..n as VertexId).filter(|&l| dominated[l as usize]).collect();
    engine.install(|| {
        losers
            .par_iter_mut()
            .zip(states.par_iter())
            .for_each(|(l, st)| *l |= st.scc.is_some_and(|c| dominated[c as usize]));
    });
    report.finalized += engine.install(|| apply_losers(states, &losers));

    // P3: undecided SCC representatives win.
    report.finalized += engine.install(|| {
        states
            .par_iter_mut()
            .filter(|st| st.status == Status::Unknown && st.scc == Some(st.id))
            .map(|st| st.status = Status::Winner)
            .count()
    });
    Ok(report)
}

/// Zeroes every edge that enters one of the `labels` SCCs from outside.
/// Returns the number of edges whose weight changed.
pub fn prune_dominated_scc(graph: &mut Graph, states: &[SchulzeVertexState], labels: &[VertexId]) -> usize {
    if labels.is_empty() {
        return 0;
    }
    let mut is_dominated = vec![false; states.len()];
    for &l in labels {
        is_dominated[l as usize] = true;
    }
    let mut zeroed = Vec::new();
    for st in states {
        let Some(label) = st.scc.filter(|&l| is_dominated[l as usize]) else {
            continue;
        };
        for (u, w) in graph.in_edges(st.id) {
            if w > 0 && states[u as usize].scc != Some(label) {
                zeroed.push((u, st.id));
            }
        }
    }
    for &(u, v) in &zeroed {
        graph.set_weight(u, v, 0);
    }
    zeroed.len()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchulzeConfig {
    pub engine: EngineConfig,
    /// Renumber candidates by descending Borda score before running.
    pub relabel_by_borda: bool,
    /// Zero the edges entering SCCs that lost as a whole.
    pub prune_dominated: bool,
}

impl SchulzeConfig {
    pub fn with_threads(threads: usize) -> Self {
        SchulzeConfig {
            engine: EngineConfig::with_threads(threads),
            ..SchulzeConfig::default()
        }
    }
}

impl Default for SchulzeConfig {
    fn default() -> Self {
        SchulzeConfig {
            engine: EngineConfig::default(),
            relabel_by_borda: true,
            prune_dominated: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchulzeOutcome {
    /// Winners in ascending original id order.
    pub winners: Vec<CandidateId>,
    /// Rounds of the preprocess/propagate/postprocess loop.
    pub iterations: usize,
    /// Propagation supersteps summed over all rounds.
    pub supersteps: usize,
    pub messages_sent: u64,
    /// Vertices left undecided by initialisation.
    pub undecided_after_init: usize,
    pub finalized_per_iteration: Vec<usize>,
    /// Final vertex states, indexed by internal (possibly relabeled) id.
    pub states: Vec<SchulzeVertexState>,
    /// `relabel[internal] = original`.
    pub relabel: Vec<CandidateId>,
    pub pruned_edges: usize,
}

pub fn run_schulze(t: &WeightedTournament, config: &SchulzeConfig) -> Result<SchulzeOutcome, SchulzeError> {
    let m = t.candidate_count();
    if m == 0 {
        return Err(SchulzeError::Empty);
    }
    let engine = Engine::new(config.engine.clone())?;
    let relabel: Vec<CandidateId> = if config.relabel_by_borda {
        engine.install(|| borda_id_order(t))
    } else {
        (0..m as CandidateId).collect()
    };
    let mut graph = if config.relabel_by_borda {
        engine_graph(t, Some(&invert_permutation(&relabel)))
    } else {
        engine_graph(t, None)
    };

    let mut states = engine.install(|| initialise(&graph));
    let undecided_after_init = states.iter().filter(|s| s.status == Status::Unknown).count();
    let mut outcome = SchulzeOutcome {
        winners: Vec::new(),
        iterations: 0,
        supersteps: 0,
        messages_sent: 0,
        undecided_after_init,
        finalized_per_iteration: Vec::new(),
        states: Vec::new(),
        relabel: Vec::new(),
        pruned_edges: 0,
    };

    let mut undecided = undecided_after_init;
    while undecided > 0 {
        outcome.iterations += 1;
        let inbox = engine.install(|| preprocess(&mut states, &graph));
        let stats = propagate(&engine, &graph, &mut states, inbox)?;
        outcome.supersteps += stats.supersteps;
        outcome.messages_sent += stats.messages_sent;
        let report = postprocess(&engine, &graph, &mut states)?;
        if report.finalized == 0 {
            return Err(SchulzeError::Stalled(outcome.iterations));
        }
        if config.prune_dominated {
            outcome.pruned_edges += prune_dominated_scc(&mut graph, &states, &report.dominated_sccs);
        }
        outcome.finalized_per_iteration.push(report.finalized);
        undecided -= report.finalized;
    }

    outcome.winners = states
        .iter()
        .filter(|s| s.status == Status::Winner)
        .map(|s| relabel[s.id as usize])
        .collect();
    outcome.winners.sort_unstable();
    outcome.states = states;
    outcome.relabel = relabel;
    Ok(outcome)
}

pub fn schulze_winners(t: &WeightedTournament, threads: usize) -> Result<Vec<CandidateId>, SchulzeError> {
    Ok(run_schulze(t, &SchulzeConfig::with_threads(threads))?.winners)
}

/// Peels off winner sets until at least `k` candidates have been emitted or
/// none remain.
pub fn top_k(t: &WeightedTournament, k: usize, threads: usize) -> Result<Vec<Vec<CandidateId>>, SchulzeError> {
    top_k_with(t, k, &SchulzeConfig::with_threads(threads))
}

pub fn top_k_with(
    t: &WeightedTournament,
    k: usize,
    config: &SchulzeConfig,
) -> Result<Vec<Vec<CandidateId>>, SchulzeError> {
    Ok(peel(t, k, config)?.into_iter().map(|o| o.winners).collect())
}

/// One full run per peeled winner set. Each outcome's `winners` use the ids
/// of `t`; its states and relabeling refer to that round's residual tournament.
pub fn peel(t: &WeightedTournament, k: usize, config: &SchulzeConfig) -> Result<Vec<SchulzeOutcome>, SchulzeError> {
    if k == 0 {
        return Err(SchulzeError::InvalidK);
    }
    if t.candidate_count() == 0 {
        return Err(SchulzeError::Empty);
    }
    let mut remaining: Vec<CandidateId> = (0..t.candidate_count() as CandidateId).collect();
    let mut residual = t.clone();
    let mut rounds = Vec::new();
    let mut emitted = 0;
    while emitted < k && !remaining.is_empty() {
        let mut outcome = run_schulze(&residual, config)?;
        let mut won = vec![false; remaining.len()];
        for &c in &outcome.winners {
            won[c as usize] = true;
        }
        let keep: Vec<CandidateId> = (0..remaining.len() as CandidateId)
            .filter(|&c| !won[c as usize])
            .collect();
        outcome.winners = outcome.winners.iter().map(|&c| remaining[c as usize]).collect();
        emitted += outcome.winners.len();
        residual = residual.induced(&keep);
        remaining = keep.iter().map(|&c| remaining[c as usize]).collect();
        rounds.push(outcome);
    }
    Ok(rounds)
}
