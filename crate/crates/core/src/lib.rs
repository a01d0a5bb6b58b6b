//! Schulze winner determination on weighted tournament graphs.
//!
//! The crate is organised around a generic vertex-centric engine
//! ([`pregel`]) and the Schulze vertex programs built on it
//! ([`schulze`]). Sequential reference rules live in [`oracles`], and
//! [`generators`] and [`ingest`] provide inputs.

pub mod generators;
pub mod ingest;
pub mod oracles;
pub mod pregel;
pub mod schulze;
pub mod tournament;

pub use tournament::{
    borda_id_order, build_tournament, dominance_graph, majority_margins, CandidateDirectory, CandidateId,
    DominanceGraph, Edge, MarginMatrix, PreferenceProfile, WeakOrder, Weight, WeightedTournament,
};
