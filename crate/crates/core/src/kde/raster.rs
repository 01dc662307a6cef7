use serde::{Deserialize, Serialize};

use super::{kernel_sum, normalization, Bandwidth, KdeError};
use crate::data::{FoodCategory, TimeSlot};
use crate::geo::{LocalFrame, PlanarPoint};
use crate::Execution;

pub const MAX_GRID_CELLS: u64 = 10_000_000;

/// Padding around the sample bounding box, in bandwidths.
const PAD_BANDWIDTHS: f64 = 4.0;

/// A rasterized density surface in a local frame.
///
/// `values` is row-major with row 0 at the *south* edge: cell `(col, row)`
/// has its center at `(x_min + (col + ½)·cell, y_min + (row + ½)·cell)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub frame: LocalFrame,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub y_min: f64,
    pub values: Vec<f64>,
    pub bandwidth: Bandwidth,
    /// `None` when all categories were pooled.
    pub category: Option<FoodCategory>,
    pub slot: Option<TimeSlot>,
    pub n_points: usize,
}

impl DensityField {
    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.nx + col]
    }

    pub fn cell_center(&self, index: usize) -> PlanarPoint {
        let (col, row) = (index % self.nx, index / self.nx);
        PlanarPoint::new(
            self.x_min + (col as f64 + 0.5) * self.cell_size,
            self.y_min + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Integral of the surface over the grid (`Σ values · cell²`).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_size * self.cell_size
    }

    pub fn argmax(&self) -> usize {
        super::first_argmax(&self.values).expect("non-empty grid")
    }

    pub fn with_labels(mut self, slot: Option<TimeSlot>, category: Option<FoodCategory>) -> Self {
        self.slot = slot;
        self.category = category;
        self
    }
}

pub fn rasterize(
    points: &[PlanarPoint],
    h: Bandwidth,
    frame: LocalFrame,
    cell_size: f64,
) -> Result<DensityField, KdeError> {
    rasterize_with(points, h, frame, cell_size, Execution::default())
}

/// Evaluates the estimate at every cell center of a grid covering the sample
/// bounding box padded by `4h`. Rows are computed independently, so the
/// execution mode does not affect the values.
pub fn rasterize_with(
    points: &[PlanarPoint],
    h: Bandwidth,
    frame: LocalFrame,
    cell_size: f64,
    exec: Execution,
) -> Result<DensityField, KdeError> {
    if points.is_empty() {
        return Err(KdeError::EmptySample);
    }
    let hm = h.meters();
    if !(cell_size.is_finite() && cell_size > 0.0 && cell_size <= hm / 2.0) {
        return Err(KdeError::CellTooCoarse {
            cell_size,
            bandwidth: hm,
        });
    }

    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let pad = PAD_BANDWIDTHS * hm;
    let x_min = x0 - pad;
    let y_min = y0 - pad;
    let nx = ((x1 + pad - x_min) / cell_size).ceil().max(1.0);
    let ny = ((y1 + pad - y_min) / cell_size).ceil().max(1.0);
    let cells = nx * ny;
    if cells > MAX_GRID_CELLS as f64 {
        return Err(KdeError::GridTooLarge {
            cells: cells as u64,
            limit: MAX_GRID_CELLS,
        });
    }
    let (nx, ny) = (nx as usize, ny as usize);

    let norm = normalization(points.len(), hm);
    let inv_two_h2 = 0.5 / (hm * hm);
    let rows = exec.map(ny, |row| {
        let y = y_min + (row as f64 + 0.5) * cell_size;
        (0..nx)
            .map(|col| {
                let q = PlanarPoint::new(x_min + (col as f64 + 0.5) * cell_size, y);
                norm * kernel_sum(points, inv_two_h2, &q)
            })
            .collect::<Vec<f64>>()
    });

    Ok(DensityField {
        frame,
        cell_size,
        nx,
        ny,
        x_min,
        y_min,
        values: rows.concat(),
        bandwidth: h,
        category: None,
        slot: None,
        n_points: points.len(),
    })
}
