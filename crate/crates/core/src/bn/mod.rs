//! Structure learning over daily category counts.
//!
//! Each node is modelled as linear-Gaussian in its parents. A family's score
//! is the maximized Gaussian log-likelihood minus `(k/2)·ln N` with
//! `k = |parents| + 2`, and a network's BIC is the sum over families. The
//! search is greedy hill climbing over single-edge additions, removals and
//! reversals.

mod dag;
pub mod export;
mod score;
mod search;
mod table;

pub use dag::{Dag, Move, MoveKind, MAX_NODES};
pub use score::{bic_score, family_bic, FamilyScore, ScoreReport, VARIANCE_FLOOR};
pub use search::{
    hill_climb, hill_climb_with, improvement_threshold, HillClimbOptions, SearchStep, SearchTrace,
    MIN_IMPROVEMENT,
};
pub use table::{build_count_table, to_edge_list, CountTable, DataMatrix};

use crate::data::TimeSlot;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BnError {
    #[error("no posts for slot `{slot}` in the analysis window")]
    EmptyWindow { slot: TimeSlot },
    #[error("count tables are only built for named slots, got `{0}`")]
    UnassignedSlot(TimeSlot),
    #[error("family needs at least {needed} rows, table has {got}")]
    InsufficientRows { needed: usize, got: usize },
    #[error("node {0} out of range")]
    UnknownNode(usize),
    #[error("child {0} cannot be its own parent")]
    SelfParent(usize),
    #[error("edge {parent} -> {child} would create a cycle")]
    Cycle { parent: usize, child: usize },
    #[error("graph has {got} nodes, data has {expected} columns")]
    NodeCountMismatch { expected: usize, got: usize },
    #[error("invalid data matrix: {0}")]
    InvalidData(String),
}
