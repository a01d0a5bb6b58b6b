//! Sequential reference rules: widest paths and the Schulze method, ranked
//! pairs under a fixed tie-breaking order, the Schwartz set and greedy
//! edge-maximal acyclic subgraphs.
//!
//! These are deliberately simple, single-threaded (apart from the pivot rows
//! of Floyd–Warshall) and independent of the vertex-centric code they check.

mod emas;
mod ranked_pairs;
mod schwartz;
mod widest;

use thiserror::Error;

use crate::tournament::{CandidateId, TournamentError};

pub use emas::{emas, EmasInstance, EmasOutcome};
pub use ranked_pairs::{ranked_pairs, PairDecision, RankedPairsOutcome, TieBreakOrder};
pub use schwartz::{schwartz_set, strongly_connected_components};
pub use widest::{schulze_ranking, schulze_winners_seq, widest_paths, wp_geq, wp_gt, WidestPathMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("source and destination are both {0}")]
    SameEndpoints(CandidateId),
    #[error("candidate {id} out of range for {m} candidates")]
    OutOfRange { id: CandidateId, m: usize },
    #[error("Schulze relation is not a weak order at ({a},{b})")]
    NotWeakOrder { a: CandidateId, b: CandidateId },
    #[error("tie-breaking order is not a permutation of {0} candidates")]
    InvalidTieBreak(usize),
    #[error("no candidates")]
    Empty,
    #[error("kept pairs do not induce a total order")]
    RankingNotTotal,
    #[error("designated edge index {index} outside {edges} edges")]
    DesignatedEdgeMissing { index: usize, edges: usize },
    #[error(transparent)]
    Margins(#[from] TournamentError),
}
