//! Isotropic bivariate Gaussian kernel density estimation in a local metric frame.
//!
//! For a sample `p_1..p_n` and bandwidth `h` (meters) the estimate at `q` is
//!
//! ```text
//! f(q) = 1 / (n 2π h²) · Σ exp(-|q - p_i|² / (2h²))
//! ```
//!
//! i.e. the product of two univariate Gaussian kernels with a shared scale,
//! so densities are per square meter.

mod bandwidth;
pub mod export;
mod hotspot;
mod raster;

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geo::PlanarPoint;

pub use bandwidth::{select_bandwidth, select_bandwidth_with, BandwidthSelection};
pub use hotspot::{extract_hotspots, HotSpot, DEFAULT_HOTSPOT_QUANTILE};
pub use raster::{rasterize, rasterize_with, DensityField, MAX_GRID_CELLS};

/// Radius of the deterministic jitter applied to coincident points, meters.
pub const DUPLICATE_JITTER_M: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KdeError {
    #[error("bandwidth must be finite and > 0, got {0}")]
    InvalidBandwidth(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("bandwidth selection needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all sample points coincide")]
    DegenerateSample,
    #[error("invalid candidate grid: {0}")]
    InvalidCandidates(String),
    #[error(
        "cell size {cell_size} m must be positive and at most half the bandwidth ({bandwidth} m)"
    )]
    CellTooCoarse { cell_size: f64, bandwidth: f64 },
    #[error("raster would have {cells} cells (limit {limit})")]
    GridTooLarge { cells: u64, limit: u64 },
    #[error("quantile must lie in (0, 1), got {0}")]
    InvalidQuantile(f64),
}

/// Kernel scale `h` in meters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(meters: f64) -> Result<Bandwidth, KdeError> {
        if meters.is_finite() && meters > 0.0 {
            Ok(Bandwidth(meters))
        } else {
            Err(KdeError::InvalidBandwidth(meters))
        }
    }

    pub fn meters(self) -> f64 {
        self.0
    }

    /// `count` bandwidths spaced evenly in log between `min` and `max` inclusive.
    pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<Bandwidth>, KdeError> {
        let lo = Bandwidth::new(min)?;
        let hi = Bandwidth::new(max)?;
        if count < 2 || hi.0 <= lo.0 {
            return Err(KdeError::InvalidCandidates(format!(
                "need count >= 2 and min < max, got {min}:{max}:{count}"
            )));
        }
        let (a, b) = (lo.0.ln(), hi.0.ln());
        let step = (b - a) / (count - 1) as f64;
        let mut grid: Vec<Bandwidth> = (0..count)
            .map(|i| Bandwidth((a + step * i as f64).exp()))
            .collect();
        // Pin the endpoints exactly.
        grid[0] = lo;
        grid[count - 1] = hi;
        Ok(grid)
    }

    /// Default selection grid: 32 log-spaced candidates from 10 m to 2 km.
    pub fn default_grid() -> Vec<Bandwidth> {
        Bandwidth::log_grid(10.0, 2000.0, 32).expect("static grid is valid")
    }
}

impl TryFrom<f64> for Bandwidth {
    type Error = KdeError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Bandwidth::new(value)
    }
}

impl From<Bandwidth> for f64 {
    fn from(b: Bandwidth) -> f64 {
        b.0
    }
}

/// Standard normal density.
pub fn gaussian_kernel_1d(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Density normalization `1 / (n 2π h²)`.
fn normalization(n: usize, h: f64) -> f64 {
    1.0 / (n as f64 * 2.0 * PI * h * h)
}

/// Unnormalized kernel sum at `query`.
#[inline]
fn kernel_sum(points: &[PlanarPoint], inv_two_h2: f64, query: &PlanarPoint) -> f64 {
    points
        .iter()
        .map(|p| (-p.distance_sq(query) * inv_two_h2).exp())
        .sum()
}

/// Density (per m²) of the sample at `query`.
pub fn kde_at(points: &[PlanarPoint], h: Bandwidth, query: PlanarPoint) -> Result<f64, KdeError> {
    if points.is_empty() {
        return Err(KdeError::EmptySample);
    }
    let hm = h.meters();
    Ok(normalization(points.len(), hm) * kernel_sum(points, 0.5 / (hm * hm), &query))
}

fn key_seed(seed: u64, key: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(key.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Moves every point that shares its exact coordinates with another point by a
/// uniform offset inside a disc of `radius` meters. Offsets depend only on
/// `seed` and the point's key, so results are reproducible.
pub fn jitter_duplicates<K: AsRef<str>>(
    points: &[PlanarPoint],
    keys: &[K],
    radius: f64,
    seed: u64,
) -> Vec<PlanarPoint> {
    assert_eq!(points.len(), keys.len(), "one key per point");
    let mut multiplicity: HashMap<(u64, u64), usize> = HashMap::new();
    for p in points {
        *multiplicity
            .entry((p.x.to_bits(), p.y.to_bits()))
            .or_default() += 1;
    }
    points
        .iter()
        .zip(keys)
        .map(|(p, key)| {
            if multiplicity[&(p.x.to_bits(), p.y.to_bits())] < 2 {
                return *p;
            }
            let mut rng = ChaCha20Rng::seed_from_u64(key_seed(seed, key.as_ref()));
            let r = radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            PlanarPoint::new(p.x + r * theta.cos(), p.y + r * theta.sin())
        })
        .collect()
}

fn has_duplicates(points: &[PlanarPoint]) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(points.len());
    !points
        .iter()
        .all(|p| seen.insert((p.x.to_bits(), p.y.to_bits())))
}

/// Index of the first maximum; NaN never wins.
pub(crate) fn first_argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}
