use serde::{Deserialize, Serialize};

use super::{
    first_argmax, has_duplicates, jitter_duplicates, Bandwidth, KdeError, DUPLICATE_JITTER_M,
};
use crate::geo::PlanarPoint;
use crate::Execution;

/// Smallest sample accepted by [`select_bandwidth`].
pub const MIN_SELECTION_POINTS: usize = 10;

/// Outcome of leave-one-out likelihood cross-validation over a bandwidth grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSelection {
    pub candidates: Vec<Bandwidth>,
    /// Mean leave-one-out log-density per candidate.
    pub scores: Vec<f64>,
    pub chosen: Bandwidth,
    pub chosen_index: usize,
    /// Set when the winner sits on either end of the grid.
    pub clamped: bool,
}

pub fn select_bandwidth(
    points: &[PlanarPoint],
    candidates: &[Bandwidth],
) -> Result<BandwidthSelection, KdeError> {
    select_bandwidth_with(points, candidates, Execution::default())
}

/// Scores each candidate `h` by `(1/n) Σ log f₋ᵢ(pᵢ)`, where `f₋ᵢ` is the
/// estimate built without point `i`, and keeps the first maximizer.
///
/// Coincident points would let the score grow without bound as `h → 0`, so
/// any left in the sample are jittered by up to 5 m using their index as key.
/// Callers with record ids should jitter beforehand with
/// [`jitter_duplicates`](super::jitter_duplicates).
pub fn select_bandwidth_with(
    points: &[PlanarPoint],
    candidates: &[Bandwidth],
    exec: Execution,
) -> Result<BandwidthSelection, KdeError> {
    if points.len() < MIN_SELECTION_POINTS {
        return Err(KdeError::TooFewPoints {
            needed: MIN_SELECTION_POINTS,
            got: points.len(),
        });
    }
    if candidates.len() < 2 {
        return Err(KdeError::InvalidCandidates(
            "need at least 2 candidates".into(),
        ));
    }
    if candidates
        .windows(2)
        .any(|w| w[1].meters() <= w[0].meters())
    {
        return Err(KdeError::InvalidCandidates(
            "candidates must be strictly increasing".into(),
        ));
    }
    if points.iter().all(|p| p == &points[0]) {
        return Err(KdeError::DegenerateSample);
    }

    let jittered;
    let sample = if has_duplicates(points) {
        let keys: Vec<String> = (0..points.len()).map(|i| i.to_string()).collect();
        jittered = jitter_duplicates(points, &keys, DUPLICATE_JITTER_M, 0);
        &jittered[..]
    } else {
        points
    };

    let per_point = loo_log_densities(sample, candidates, exec);
    let n = sample.len() as f64;
    let scores: Vec<f64> = (0..candidates.len())
        .map(|c| per_point.iter().map(|row| row[c]).sum::<f64>() / n)
        .collect();

    let chosen_index = first_argmax(&scores).ok_or(KdeError::DegenerateSample)?;
    Ok(BandwidthSelection {
        candidates: candidates.to_vec(),
        chosen: candidates[chosen_index],
        clamped: chosen_index == 0 || chosen_index + 1 == candidates.len(),
        chosen_index,
        scores,
    })
}

/// For every point `i`, the leave-one-out log-density at `pᵢ` under each
/// candidate. Uses log-sum-exp anchored at the nearest neighbour so tiny
/// bandwidths never underflow to `-inf`.
fn loo_log_densities(
    points: &[PlanarPoint],
    candidates: &[Bandwidth],
    exec: Execution,
) -> Vec<Vec<f64>> {
    let n = points.len();
    let log_norms: Vec<f64> = candidates
        .iter()
        .map(|h| ((n - 1) as f64 * 2.0 * std::f64::consts::PI * h.meters() * h.meters()).ln())
        .collect();

    exec.map(n, |i| {
        let pi = &points[i];
        let d2: Vec<f64> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, pj)| pi.distance_sq(pj))
            .collect();
        let nearest = d2.iter().copied().fold(f64::INFINITY, f64::min);
        candidates
            .iter()
            .zip(&log_norms)
            .map(|(h, log_norm)| {
                let inv_two_h2 = 0.5 / (h.meters() * h.meters());
                let tail: f64 = d2
                    .iter()
                    .map(|&d| (-(d - nearest) * inv_two_h2).exp())
                    .sum();
                -nearest * inv_two_h2 + tail.ln() - log_norm
            })
            .collect()
    })
}
