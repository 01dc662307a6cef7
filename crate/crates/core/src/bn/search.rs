use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dag::mask_nodes;
use super::{family_bic, BnError, Dag, DataMatrix, FamilyScore, Move, MoveKind, ScoreReport};
use crate::Execution;

/// Relative score tolerance. A move must raise the score by more than
/// [`improvement_threshold`], and gains closer than that to each other are
/// ties. Score-equivalent moves otherwise differ only by rounding noise.
pub const MIN_IMPROVEMENT: f64 = 1e-9;

/// Smallest gain that counts as an improvement at `score`.
pub fn improvement_threshold(score: f64) -> f64 {
    MIN_IMPROVEMENT * score.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HillClimbOptions {
    pub max_iters: usize,
    pub exec: Execution,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        HillClimbOptions {
            max_iters: 10_000,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    #[serde(rename = "move")]
    pub mv: Move,
    pub score_before: f64,
    pub score_after: f64,
}

impl SearchStep {
    pub fn delta(&self) -> f64 {
        self.score_after - self.score_before
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial_graph: Dag,
    pub final_graph: Dag,
    pub iterations: Vec<SearchStep>,
    pub final_score: ScoreReport,
    /// True when the search stopped because no move improved the score,
    /// false when it ran out of iterations.
    pub converged: bool,
}

/// Memo of family scores keyed by `(child, parent mask)`.
struct FamilyCache<'a> {
    data: &'a DataMatrix,
    scores: HashMap<(usize, u32), FamilyScore>,
}

impl<'a> FamilyCache<'a> {
    fn new(data: &'a DataMatrix) -> Self {
        FamilyCache {
            data,
            scores: HashMap::new(),
        }
    }

    /// Scores all missing keys, in parallel when `exec` allows.
    fn fill(&mut self, keys: &[(usize, u32)], exec: Execution) -> Result<(), BnError> {
        let mut missing: Vec<(usize, u32)> = keys
            .iter()
            .copied()
            .filter(|k| !self.scores.contains_key(k))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let data = self.data;
        let results = exec.map(missing.len(), |i| {
            let (child, mask) = missing[i];
            family_bic(data, child, &mask_nodes(mask))
        });
        for (key, res) in missing.into_iter().zip(results) {
            self.scores.insert(key, res?);
        }
        Ok(())
    }

    fn score(&self, child: usize, mask: u32) -> f64 {
        self.scores[&(child, mask)].score
    }

    fn report(&self, dag: &Dag) -> ScoreReport {
        let families: Vec<FamilyScore> = (0..dag.n_nodes())
            .map(|v| self.scores[&(v, dag.parent_mask(v))].clone())
            .collect();
        ScoreReport::from_families(&families, self.data.n_rows())
    }
}

/// Families whose parent sets change under `mv`, with their new masks.
fn changed_families(dag: &Dag, mv: Move) -> [Option<(usize, u32)>; 2] {
    let (p, c) = (mv.parent, mv.child);
    let mc = dag.parent_mask(c);
    match mv.kind {
        MoveKind::Add => [Some((c, mc | 1 << p)), None],
        MoveKind::Remove => [Some((c, mc & !(1 << p))), None],
        MoveKind::Reverse => [
            Some((c, mc & !(1 << p))),
            Some((p, dag.parent_mask(p) | 1 << c)),
        ],
    }
}

pub fn hill_climb(
    data: &DataMatrix,
    init: &Dag,
    max_iters: usize,
) -> Result<(Dag, SearchTrace), BnError> {
    hill_climb_with(
        data,
        init,
        HillClimbOptions {
            max_iters,
            ..HillClimbOptions::default()
        },
    )
}

/// Greedy search from `init`: each iteration scores every legal addition,
/// removal and reversal, applies the one with the largest gain (earliest in
/// [`Move`] order on ties) and stops when no gain exceeds
/// [`improvement_threshold`] or after `max_iters` moves. Only the one or two
/// families a move touches are rescored.
pub fn hill_climb_with(
    data: &DataMatrix,
    init: &Dag,
    options: HillClimbOptions,
) -> Result<(Dag, SearchTrace), BnError> {
    if init.n_nodes() != data.n_vars() {
        return Err(BnError::NodeCountMismatch {
            expected: data.n_vars(),
            got: init.n_nodes(),
        });
    }
    let mut cache = FamilyCache::new(data);
    let mut dag = init.clone();
    let initial_keys: Vec<_> = (0..dag.n_nodes())
        .map(|v| (v, dag.parent_mask(v)))
        .collect();
    cache.fill(&initial_keys, options.exec)?;
    let mut current = cache.report(&dag).total_bic;
    let mut iterations = Vec::new();
    let mut converged = false;

    while iterations.len() < options.max_iters {
        let moves = dag.legal_moves();
        let keys: Vec<_> = moves
            .iter()
            .flat_map(|&m| changed_families(&dag, m))
            .flatten()
            .collect();
        cache.fill(&keys, options.exec)?;

        let tol = improvement_threshold(current);
        let mut best: Option<(Move, f64)> = None;
        for &mv in &moves {
            let delta: f64 = changed_families(&dag, mv)
                .into_iter()
                .flatten()
                .map(|(v, mask)| cache.score(v, mask) - cache.score(v, dag.parent_mask(v)))
                .sum();
            if delta > tol && best.is_none_or(|(_, d)| delta > d + tol) {
                best = Some((mv, delta));
            }
        }
        let Some((mv, _)) = best else {
            converged = true;
            break;
        };
        dag = dag.apply(mv).expect("enumerated moves are legal");
        let after = cache.report(&dag).total_bic;
        iterations.push(SearchStep {
            mv,
            score_before: current,
            score_after: after,
        });
        current = after;
    }

    let trace = SearchTrace {
        initial_graph: init.clone(),
        final_graph: dag.clone(),
        final_score: cache.report(&dag),
        iterations,
        converged,
    };
    Ok((dag, trace))
}
