//! Single-machine, multi-threaded vertex-centric bulk-synchronous engine.
//!
//! A run proceeds in supersteps. In every superstep each active vertex (one
//! that has not voted to halt, or that received a message) executes the
//! vertex program against its own state and its combined inbox. Messages
//! sent during superstep `k` are combined per `(target, kind)` and become
//! visible only in superstep `k + 1`. The run ends once every vertex has
//! voted to halt and no message is in flight.
//!
//! Vertices are partitioned over worker threads by contiguous id blocks (or a
//! seeded shuffle, for determinism testing). Each worker owns a dense outbox
//! that combines eagerly on send; outboxes are merged at the barrier.

mod graph;

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use graph::{EdgeWeight, Graph, VertexId};

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "SCHULZE_THREADS";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("vertex {from} sent a message to non-neighbor {to} in superstep {superstep}")]
    NonNeighbor {
        superstep: usize,
        from: VertexId,
        to: VertexId,
    },
    #[error("{states} vertex states for a graph with {vertices} vertices")]
    StateCount { states: usize, vertices: usize },
    #[error("initial inbox has shape {got:?}, expected {expected:?}")]
    InboxShape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("no quiescence after {0} supersteps")]
    SuperstepLimit(usize),
    #[error("invalid worker count {0}")]
    Threads(usize),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Merges two messages addressed to the same vertex and of the same kind.
///
/// `combine` must be commutative and associative; the engine relies on that
/// for results that do not depend on scheduling.
pub trait Combiner: Sync {
    type Message: Copy + Send + Sync;

    /// Number of message kinds; the inbox keeps one combined slot per kind.
    fn kinds(&self) -> usize {
        1
    }

    fn kind(&self, _msg: &Self::Message) -> usize {
        0
    }

    fn combine(&self, a: Self::Message, b: Self::Message) -> Self::Message;
}

pub trait VertexProgram: Sync {
    type State: Send;
    type Message: Copy + Send + Sync;

    /// Runs one vertex for one superstep. `inbox` holds one combined slot per
    /// message kind. Returns `true` to vote to halt.
    fn compute<C>(&self, state: &mut Self::State, inbox: &[Option<Self::Message>], ctx: &mut Context<'_, C>) -> bool
    where
        C: Combiner<Message = Self::Message>;
}

/// Dense combined message buffer: one slot per `(vertex, kind)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inbox<M> {
    kinds: usize,
    slots: Vec<Option<M>>,
}

impl<M: Copy> Inbox<M> {
    pub fn new(vertices: usize, kinds: usize) -> Self {
        Inbox {
            kinds,
            slots: vec![None; vertices * kinds],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.slots.len().checked_div(self.kinds).unwrap_or(0)
    }

    pub fn kinds(&self) -> usize {
        self.kinds
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> &[Option<M>] {
        let start = v as usize * self.kinds;
        &self.slots[start..start + self.kinds]
    }

    #[inline]
    pub fn deliver<C: Combiner<Message = M>>(&mut self, to: VertexId, msg: M, combiner: &C) {
        let slot = &mut self.slots[to as usize * self.kinds + combiner.kind(&msg)];
        *slot = Some(match *slot {
            Some(prev) => combiner.combine(prev, msg),
            None => msg,
        });
    }

    /// Per-vertex mutable slot groups, for parallel construction.
    pub fn par_vertex_slots_mut(&mut self) -> rayon::slice::ChunksMut<'_, Option<M>>
    where
        M: Send,
    {
        self.slots.par_chunks_mut(self.kinds.max(1))
    }

    pub fn message_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }
}

/// What a vertex program can see and do during one call.
pub struct Context<'a, C: Combiner> {
    superstep: usize,
    vertex: VertexId,
    graph: &'a Graph,
    combiner: &'a C,
    outbox: &'a mut Inbox<C::Message>,
    sent: &'a mut u64,
    violation: &'a mut Option<EngineError>,
}

impl<'a, C: Combiner> Context<'a, C> {
    pub fn superstep(&self) -> usize {
        self.superstep
    }

    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    pub fn out_edges(&self) -> impl Iterator<Item = (VertexId, EdgeWeight)> + 'a {
        self.graph.out_edges(self.vertex)
    }

    pub fn in_edges(&self) -> impl Iterator<Item = (VertexId, EdgeWeight)> + 'a {
        self.graph.in_edges(self.vertex)
    }

    /// Sends to an arbitrary vertex; only adjacent vertices (either
    /// direction) are accepted.
    pub fn send(&mut self, to: VertexId, msg: C::Message) -> Result<(), EngineError> {
        if (to as usize) < self.graph.vertex_count() && self.graph.is_neighbor(self.vertex, to) {
            self.outbox.deliver(to, msg, self.combiner);
            *self.sent += 1;
            Ok(())
        } else {
            let err = EngineError::NonNeighbor {
                superstep: self.superstep,
                from: self.vertex,
                to,
            };
            self.violation.get_or_insert(err.clone());
            Err(err)
        }
    }

    /// Offers a message to every out-neighbor; `f` may decline with `None`.
    #[inline]
    pub fn send_along_out_edges<F>(&mut self, mut f: F)
    where
        F: FnMut(VertexId, EdgeWeight) -> Option<C::Message>,
    {
        let g = self.graph;
        for (&u, &w) in g.out_neighbors(self.vertex).iter().zip(g.out_weights(self.vertex)) {
            if let Some(msg) = f(u, w) {
                self.outbox.deliver(u, msg, self.combiner);
                *self.sent += 1;
            }
        }
    }

    /// Offers a message to every in-neighbor; `f` may decline with `None`.
    #[inline]
    pub fn send_along_in_edges<F>(&mut self, mut f: F)
    where
        F: FnMut(VertexId, EdgeWeight) -> Option<C::Message>,
    {
        let g = self.graph;
        for (&u, &w) in g.in_neighbors(self.vertex).iter().zip(g.in_weights(self.vertex)) {
            if let Some(msg) = f(u, w) {
                self.outbox.deliver(u, msg, self.combiner);
                *self.sent += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub threads: usize,
    /// Shuffles the vertex-to-worker assignment, per-worker processing order
    /// and outbox merge order. Results must not change.
    pub shuffle_seed: Option<u64>,
    pub max_supersteps: Option<usize>,
}

impl EngineConfig {
    pub fn with_threads(threads: usize) -> Self {
        EngineConfig {
            threads,
            ..EngineConfig::default()
        }
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            threads: default_threads(),
            shuffle_seed: None,
            max_supersteps: None,
        }
    }
}

/// `SCHULZE_THREADS` if set to a positive integer, else the available cores.
pub fn default_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuperstepTrace {
    pub superstep: usize,
    pub active_vertices: usize,
    pub messages_sent: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub supersteps: usize,
    pub messages_sent: u64,
    pub trace: Vec<SuperstepTrace>,
}

impl RunStats {
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "superstep,active_vertices,messages_sent")?;
        for t in &self.trace {
            writeln!(w, "{},{},{}", t.superstep, t.active_vertices, t.messages_sent)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct WorkerReport {
    active: usize,
    sent: u64,
    violation: Option<EngineError>,
}

pub struct Engine {
    config: EngineConfig,
    pool: rayon::ThreadPool,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        if config.threads == 0 {
            return Err(EngineError::Threads(0));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?;
        Ok(Engine { config, pool })
    }

    pub fn with_threads(threads: usize) -> Result<Self, EngineError> {
        Engine::new(EngineConfig::with_threads(threads))
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn threads(&self) -> usize {
        self.config.threads
    }

    /// Runs `f` inside the engine's worker pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Deterministic global reduction over vertex states. `fold` must be
    /// commutative and associative with `identity` as its neutral element.
    pub fn aggregate<S, T, Map, Fold>(&self, states: &[S], identity: T, map: Map, fold: Fold) -> T
    where
        S: Sync,
        T: Clone + Send + Sync,
        Map: Fn(&S) -> T + Sync + Send,
        Fold: Fn(T, T) -> T + Sync + Send,
    {
        self.pool
            .install(|| states.par_iter().map(&map).reduce(|| identity.clone(), &fold))
    }

    pub fn run<P, C>(
        &self,
        graph: &Graph,
        states: &mut [P::State],
        initial: Inbox<C::Message>,
        program: &P,
        combiner: &C,
    ) -> Result<RunStats, EngineError>
    where
        P: VertexProgram<Message = C::Message>,
        C: Combiner,
    {
        self.run_observed(graph, states, initial, program, combiner, |_, _| {})
    }

    /// Like [`Engine::run`], calling `observer(superstep, states)` at every
    /// barrier after the superstep's state updates.
    pub fn run_observed<P, C, O>(
        &self,
        graph: &Graph,
        states: &mut [P::State],
        initial: Inbox<C::Message>,
        program: &P,
        combiner: &C,
        mut observer: O,
    ) -> Result<RunStats, EngineError>
    where
        P: VertexProgram<Message = C::Message>,
        C: Combiner,
        O: FnMut(usize, &[P::State]),
    {
        let n = graph.vertex_count();
        let kinds = combiner.kinds();
        if states.len() != n {
            return Err(EngineError::StateCount {
                states: states.len(),
                vertices: n,
            });
        }
        if (initial.vertex_count(), initial.kinds()) != (n, kinds) && !(n == 0 && initial.slots.is_empty()) {
            return Err(EngineError::InboxShape {
                expected: (n, kinds),
                got: (initial.vertex_count(), initial.kinds()),
            });
        }

        let workers = self.config.threads;
        let mut rng = self.config.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
        let (visit_order, worker_of) = partition(n, workers, rng.as_mut());
        let mut merge_order: Vec<usize> = (0..workers).collect();

        let mut inbox = initial;
        let mut outboxes: Vec<Inbox<C::Message>> = (0..workers).map(|_| Inbox::new(n, kinds)).collect();
        let mut halted = vec![false; n];
        let mut stats = RunStats::default();
        let mut superstep = 0usize;

        loop {
            if let Some(limit) = self.config.max_supersteps {
                if superstep >= limit {
                    return Err(EngineError::SuperstepLimit(limit));
                }
            }

            let mut refs: Vec<Option<(&mut P::State, &mut bool)>> =
                states.iter_mut().zip(halted.iter_mut()).map(Some).collect();
            let mut buckets: Vec<Vec<(VertexId, &mut P::State, &mut bool)>> =
                (0..workers).map(|_| Vec::with_capacity(n / workers + 1)).collect();
            for &v in &visit_order {
                let (s, h) = refs[v as usize].take().expect("each vertex assigned once");
                buckets[worker_of[v as usize]].push((v, s, h));
            }
            drop(refs);

            let inbox_ref = &inbox;
            let reports: Vec<WorkerReport> = self.pool.install(|| {
                buckets
                    .into_par_iter()
                    .zip(outboxes.par_iter_mut())
                    .map(|(bucket, outbox)| {
                        let mut report = WorkerReport::default();
                        for (v, state, halted) in bucket {
                            let msgs = inbox_ref.get(v);
                            if *halted && msgs.iter().all(Option::is_none) {
                                continue;
                            }
                            report.active += 1;
                            let mut ctx = Context {
                                superstep,
                                vertex: v,
                                graph,
                                combiner,
                                outbox: &mut *outbox,
                                sent: &mut report.sent,
                                violation: &mut report.violation,
                            };
                            *halted = program.compute(state, msgs, &mut ctx);
                        }
                        report
                    })
                    .collect()
            });

            if let Some(err) = reports
                .iter()
                .filter_map(|r| r.violation.clone())
                .min_by_key(|e| match e {
                    EngineError::NonNeighbor { from, .. } => *from,
                    _ => VertexId::MAX,
                })
            {
                return Err(err);
            }

            let sent: u64 = reports.iter().map(|r| r.sent).sum();
            stats.trace.push(SuperstepTrace {
                superstep,
                active_vertices: reports.iter().map(|r| r.active).sum(),
                messages_sent: sent,
            });
            stats.messages_sent += sent;

            if let Some(rng) = rng.as_mut() {
                merge_order.shuffle(rng);
            }
            self.pool.install(|| {
                merge_outboxes(&mut inbox, &outboxes, &merge_order, combiner);
                outboxes.par_iter_mut().for_each(|o| o.slots.fill(None));
            });

            superstep += 1;
            observer(superstep - 1, states);

            if sent == 0 && halted.iter().all(|&h| h) {
                break;
            }
        }
        stats.supersteps = superstep;
        Ok(stats)
    }
}

const MERGE_CHUNK: usize = 4096;

fn merge_outboxes<C: Combiner>(
    inbox: &mut Inbox<C::Message>,
    outboxes: &[Inbox<C::Message>],
    order: &[usize],
    combiner: &C,
) {
    let kinds = inbox.kinds.max(1);
    inbox
        .slots
        .par_chunks_mut(MERGE_CHUNK * kinds)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let base = ci * MERGE_CHUNK * kinds;
            chunk.fill(None);
            for &w in order {
                let src = &outboxes[w].slots[base..base + chunk.len()];
                for (dst, msg) in chunk.iter_mut().zip(src) {
                    if let Some(msg) = *msg {
                        *dst = Some(match *dst {
                            Some(prev) => combiner.combine(prev, msg),
                            None => msg,
                        });
                    }
                }
            }
        });
}

/// Returns the vertex visit order and the owning worker of every vertex.
fn partition(n: usize, workers: usize, rng: Option<&mut ChaCha8Rng>) -> (Vec<VertexId>, Vec<usize>) {
    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    if let Some(rng) = rng {
        order.shuffle(rng);
    }
    let mut worker_of = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        // contiguous blocks of the (possibly shuffled) order
        worker_of[v as usize] = pos * workers / n.max(1);
    }
    (order, worker_of)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct MinCombiner;
    impl Combiner for MinCombiner {
        type Message = u32;
        fn combine(&self, a: u32, b: u32) -> u32 {
            a.min(b)
        }
    }

    /// Each vertex tracks the smallest id that reaches it along out-edges.
    struct MinFlood;
    impl VertexProgram for MinFlood {
        type State = u32;
        type Message = u32;
        fn compute<C: Combiner<Message = u32>>(
            &self,
            state: &mut u32,
            inbox: &[Option<u32>],
            ctx: &mut Context<'_, C>,
        ) -> bool {
            let changed = match inbox[0] {
                Some(v) if v < *state => {
                    *state = v;
                    true
                }
                _ => ctx.superstep() == 0,
            };
            if changed {
                let value = *state;
                ctx.send_along_out_edges(|_, _| Some(value));
            }
            true
        }
    }

    struct HaltNow;
    impl VertexProgram for HaltNow {
        type State = u32;
        type Message = u32;
        fn compute<C: Combiner<Message = u32>>(&self, _: &mut u32, _: &[Option<u32>], _: &mut Context<'_, C>) -> bool {
            true
        }
    }

    fn path(n: u32) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        Graph::from_edges(n as usize, &edges)
    }

    #[test]
    fn edgeless_graph_halts_after_one_superstep() {
        let g = Graph::from_edges(3, &[]);
        let mut states = vec![7, 8, 9];
        let stats = Engine::with_threads(2)
            .unwrap()
            .run(&g, &mut states, Inbox::new(3, 1), &HaltNow, &MinCombiner)
            .unwrap();
        assert_eq!(stats.supersteps, 1);
        assert_eq!(states, vec![7, 8, 9]);
    }

    #[test]
    fn min_flood_on_a_path_takes_five_supersteps() {
        let g = path(5);
        // sequential oracle: forward BFS from vertex 0 reaches everyone
        for threads in [1, 2, 3] {
            let mut states: Vec<u32> = (0..5).collect();
            let stats = Engine::with_threads(threads)
                .unwrap()
                .run(&g, &mut states, Inbox::new(5, 1), &MinFlood, &MinCombiner)
                .unwrap();
            assert_eq!(states, vec![0; 5]);
            assert_eq!(stats.supersteps, 5);
            assert_eq!(stats.trace.len(), 5);
            assert_eq!(stats.trace[0].active_vertices, 5);
            assert_eq!(stats.trace[0].messages_sent, 4);
        }
    }

    struct Rogue;
    impl VertexProgram for Rogue {
        type State = u32;
        type Message = u32;
        fn compute<C: Combiner<Message = u32>>(
            &self,
            _: &mut u32,
            _: &[Option<u32>],
            ctx: &mut Context<'_, C>,
        ) -> bool {
            if ctx.vertex() == 0 {
                let _ = ctx.send(2, 1);
            }
            true
        }
    }

    #[test]
    fn messages_to_non_neighbors_are_rejected() {
        let g = path(3);
        let mut states = vec![0; 3];
        let err = Engine::with_threads(1)
            .unwrap()
            .run(&g, &mut states, Inbox::new(3, 1), &Rogue, &MinCombiner)
            .unwrap_err();
        assert_eq!(
            err,
            EngineError::NonNeighbor {
                superstep: 0,
                from: 0,
                to: 2
            }
        );
    }

    #[test]
    fn shape_mismatches_are_errors() {
        let g = path(3);
        let engine = Engine::with_threads(1).unwrap();
        let mut short = vec![0; 2];
        assert!(matches!(
            engine.run(&g, &mut short, Inbox::new(3, 1), &HaltNow, &MinCombiner),
            Err(EngineError::StateCount { .. })
        ));
        let mut states = vec![0; 3];
        assert!(matches!(
            engine.run(&g, &mut states, Inbox::new(2, 1), &HaltNow, &MinCombiner),
            Err(EngineError::InboxShape { .. })
        ));
        assert_eq!(Engine::with_threads(0).err(), Some(EngineError::Threads(0)));
    }

    /// Never halts; the superstep limit must catch it.
    struct Spin;
    impl VertexProgram for Spin {
        type State = u32;
        type Message = u32;
        fn compute<C: Combiner<Message = u32>>(&self, _: &mut u32, _: &[Option<u32>], _: &mut Context<'_, C>) -> bool {
            false
        }
    }

    #[test]
    fn superstep_limit_is_enforced() {
        let engine = Engine::new(EngineConfig {
            threads: 1,
            shuffle_seed: None,
            max_supersteps: Some(4),
        })
        .unwrap();
        let mut states = vec![0; 2];
        let err = engine
            .run(&path(2), &mut states, Inbox::new(2, 1), &Spin, &MinCombiner)
            .unwrap_err();
        assert_eq!(err, EngineError::SuperstepLimit(4));
    }

    #[test]
    fn initial_messages_are_seen_in_superstep_zero() {
        let g = path(3);
        let mut inbox = Inbox::new(3, 1);
        inbox.deliver(2, 5, &MinCombiner);
        inbox.deliver(2, 3, &MinCombiner);
        assert_eq!(inbox.get(2), &[Some(3)]);
        let mut states = vec![10, 10, 10];
        struct Take;
        impl VertexProgram for Take {
            type State = u32;
            type Message = u32;
            fn compute<C: Combiner<Message = u32>>(
                &self,
                s: &mut u32,
                inbox: &[Option<u32>],
                _: &mut Context<'_, C>,
            ) -> bool {
                if let Some(v) = inbox[0] {
                    *s = v;
                }
                true
            }
        }
        Engine::with_threads(1)
            .unwrap()
            .run(&g, &mut states, inbox, &Take, &MinCombiner)
            .unwrap();
        assert_eq!(states, vec![10, 10, 3]);
    }

    #[test]
    fn aggregate_matches_sequential_fold() {
        let engine = Engine::with_threads(4).unwrap();
        let states: Vec<u64> = (0..1000).map(|i| (i * 7919) % 1013).collect();
        let max = engine.aggregate(&states, 0u64, |&s| s, u64::max);
        assert_eq!(max, *states.iter().max().unwrap());
        let odd = engine.aggregate(&states, 0usize, |&s| (s % 2) as usize, |a, b| a + b);
        assert_eq!(odd, states.iter().filter(|&&s| s % 2 == 1).count());
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let g = path(3);
        let mut states: Vec<u32> = (0..3).collect();
        let stats = Engine::with_threads(1)
            .unwrap()
            .run(&g, &mut states, Inbox::new(3, 1), &MinFlood, &MinCombiner)
            .unwrap();
        let mut buf = Vec::new();
        stats.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("superstep,active_vertices,messages_sent\n0,3,2\n"));
        assert_eq!(text.lines().count(), stats.supersteps + 1);
    }
}
