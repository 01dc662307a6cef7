use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{DensityField, KdeError};
use crate::geo::PlanarPoint;

pub const DEFAULT_HOTSPOT_QUANTILE: f64 = 0.95;

/// A 4-connected group of cells at or above the extraction threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotSpot {
    /// 1-based, by descending peak density.
    pub rank: usize,
    /// Density-weighted mean of member cell centers.
    pub centroid: PlanarPoint,
    pub latitude: f64,
    pub longitude: f64,
    pub peak_density: f64,
    pub threshold: f64,
    /// Row-major cell indices into the field.
    pub member_cells: Vec<usize>,
    /// Share of the field's total density inside the component.
    pub mass: f64,
}

/// Nearest-rank `quantile` of the strictly positive values.
fn positive_quantile(values: &[f64], quantile: f64) -> Option<f64> {
    let mut positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    if positive.is_empty() {
        return None;
    }
    positive.sort_by(f64::total_cmp);
    let rank = (quantile * positive.len() as f64).ceil() as usize;
    Some(positive[rank.clamp(1, positive.len()) - 1])
}

/// Thresholds the field at the given quantile of its positive cells and
/// returns the connected components, highest peak first.
pub fn extract_hotspots(field: &DensityField, quantile: f64) -> Result<Vec<HotSpot>, KdeError> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(KdeError::InvalidQuantile(quantile));
    }
    let Some(threshold) = positive_quantile(&field.values, quantile) else {
        return Ok(Vec::new());
    };
    let total: f64 = field.values.iter().sum();
    let (nx, ny) = (field.nx, field.ny);
    let above = |i: usize| field.values[i] >= threshold;

    let mut visited = vec![false; field.values.len()];
    let mut spots = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..field.values.len() {
        if visited[start] || !above(start) {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (col, row) = (i % nx, i / nx);
            let mut visit = |j: usize| {
                if !visited[j] && above(j) {
                    visited[j] = true;
                    queue.push_back(j);
                }
            };
            if col > 0 {
                visit(i - 1);
            }
            if col + 1 < nx {
                visit(i + 1);
            }
            if row > 0 {
                visit(i - nx);
            }
            if row + 1 < ny {
                visit(i + nx);
            }
        }
        members.sort_unstable();

        let (mut wx, mut wy, mut w, mut peak) = (0.0, 0.0, 0.0, f64::MIN);
        for &i in &members {
            let v = field.values[i];
            let c = field.cell_center(i);
            wx += v * c.x;
            wy += v * c.y;
            w += v;
            peak = peak.max(v);
        }
        let centroid = PlanarPoint::new(wx / w, wy / w);
        let (latitude, longitude) = field.frame.unproject(centroid);
        spots.push(HotSpot {
            rank: 0,
            centroid,
            latitude,
            longitude,
            peak_density: peak,
            threshold,
            member_cells: members,
            mass: w / total,
        });
    }
    // Stable: equal peaks keep discovery (row-major) order.
    spots.sort_by(|a, b| b.peak_density.total_cmp(&a.peak_density));
    for (k, s) in spots.iter_mut().enumerate() {
        s.rank = k + 1;
    }
    Ok(spots)
}
