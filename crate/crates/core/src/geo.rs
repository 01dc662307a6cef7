//! Local equirectangular frame so distances and bandwidths are in meters.

use serde::{Deserialize, Serialize};

/// Mean Earth radius (IUGG), meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Maximum extent of a frame, in meters, in either direction.
pub const MAX_SPAN_M: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("no points to build a frame from")]
    EmptyInput,
    #[error("points span {span_m:.0} m, more than the {max_m:.0} m a local frame supports")]
    SpanTooLarge { span_m: f64, max_m: f64 },
    #[error("({latitude}, {longitude}) lies outside the frame's validity span")]
    OutOfSpan { latitude: f64, longitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin_latitude: f64,
    pub origin_longitude: f64,
    pub meters_per_degree_lat: f64,
    pub meters_per_degree_lon: f64,
}

/// Meters east (`x`) and north (`y`) of a frame origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }

    pub fn distance_sq(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

fn meters_per_degree() -> f64 {
    EARTH_RADIUS_M * std::f64::consts::PI / 180.0
}

impl LocalFrame {
    /// Frame centered on `(lat, lon)`.
    pub fn centered_at(latitude: f64, longitude: f64) -> LocalFrame {
        let m = meters_per_degree();
        LocalFrame {
            origin_latitude: latitude,
            origin_longitude: longitude,
            meters_per_degree_lat: m,
            meters_per_degree_lon: m * latitude.to_radians().cos(),
        }
    }

    pub fn project(&self, latitude: f64, longitude: f64) -> Result<PlanarPoint, GeoError> {
        let p = PlanarPoint {
            x: (longitude - self.origin_longitude) * self.meters_per_degree_lon,
            y: (latitude - self.origin_latitude) * self.meters_per_degree_lat,
        };
        if p.x.abs() > MAX_SPAN_M || p.y.abs() > MAX_SPAN_M || !p.x.is_finite() || !p.y.is_finite()
        {
            return Err(GeoError::OutOfSpan {
                latitude,
                longitude,
            });
        }
        Ok(p)
    }

    /// Inverse of [`project`](Self::project), returning `(lat, lon)`.
    pub fn unproject(&self, point: PlanarPoint) -> (f64, f64) {
        (
            self.origin_latitude + point.y / self.meters_per_degree_lat,
            self.origin_longitude + point.x / self.meters_per_degree_lon,
        )
    }
}

/// Frame whose origin is the centroid of `points` (`(lat, lon)` pairs).
pub fn make_frame(points: &[(f64, f64)]) -> Result<LocalFrame, GeoError> {
    if points.is_empty() {
        return Err(GeoError::EmptyInput);
    }
    let n = points.len() as f64;
    let (mut lat_sum, mut lon_sum) = (0.0, 0.0);
    let (mut lat_min, mut lat_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lon_min, mut lon_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(lat, lon) in points {
        lat_sum += lat;
        lon_sum += lon;
        lat_min = lat_min.min(lat);
        lat_max = lat_max.max(lat);
        lon_min = lon_min.min(lon);
        lon_max = lon_max.max(lon);
    }
    let frame = LocalFrame::centered_at(lat_sum / n, lon_sum / n);
    let span_m = ((lat_max - lat_min) * frame.meters_per_degree_lat)
        .max((lon_max - lon_min) * frame.meters_per_degree_lon);
    if span_m > MAX_SPAN_M {
        return Err(GeoError::SpanTooLarge {
            span_m,
            max_m: MAX_SPAN_M,
        });
    }
    Ok(frame)
}

/// Great-circle distance on the mean-radius sphere, meters.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    const TIMES_SQUARE: (f64, f64) = (40.7580, -73.9855);

    #[test]
    fn single_point_frame() {
        let f = make_frame(&[TIMES_SQUARE]).unwrap();
        assert_eq!((f.origin_latitude, f.origin_longitude), TIMES_SQUARE);
        let p = f.project(TIMES_SQUARE.0, TIMES_SQUARE.1).unwrap();
        assert_eq!(p, PlanarPoint::new(0.0, 0.0));
    }

    #[test]
    fn symmetric_pair_centers_at_midpoint() {
        let f = make_frame(&[(40.70, -74.00), (40.80, -73.90)]).unwrap();
        assert_relative_eq!(f.origin_latitude, 40.75, epsilon = 1e-12);
        assert_relative_eq!(f.origin_longitude, -73.95, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(make_frame(&[]), Err(GeoError::EmptyInput));
        assert!(matches!(
            make_frame(&[(40.0, -74.0), (41.0, -74.0)]),
            Err(GeoError::SpanTooLarge { .. })
        ));
        let f = LocalFrame::centered_at(40.0, -74.0);
        assert!(matches!(
            f.project(42.0, -74.0),
            Err(GeoError::OutOfSpan { .. })
        ));
    }

    #[test]
    fn scale_factors_against_haversine() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let cloud: Vec<_> = (0..200)
            .map(|_| {
                (
                    40.66 + 0.2 * rng.random::<f64>(),
                    -74.05 + 0.2 * rng.random::<f64>(),
                )
            })
            .collect();
        let f = make_frame(&cloud).unwrap();
        assert!((f.meters_per_degree_lat / 111_320.0 - 1.0).abs() < 0.01);
        // Oracle: east-west arc of 0.001 degree at the origin latitude.
        let oracle = haversine_m(f.origin_latitude, 0.0, f.origin_latitude, 0.001) / 0.001;
        assert_relative_eq!(f.meters_per_degree_lon, oracle, max_relative = 1e-6);
        let expected = 111_320.0 * 40.76f64.to_radians().cos();
        assert!((f.meters_per_degree_lon / expected - 1.0).abs() < 0.01);
        assert!((f.meters_per_degree_lon - 84_300.0).abs() / 84_300.0 < 0.01);
    }

    #[test]
    fn due_north() {
        let f = LocalFrame::centered_at(TIMES_SQUARE.0, TIMES_SQUARE.1);
        let p = f.project(TIMES_SQUARE.0 + 0.01, TIMES_SQUARE.1).unwrap();
        assert_eq!(p.x, 0.0);
        let oracle = haversine_m(
            TIMES_SQUARE.0,
            TIMES_SQUARE.1,
            TIMES_SQUARE.0 + 0.01,
            TIMES_SQUARE.1,
        );
        assert!((p.y - oracle).abs() / oracle < 0.005);
        assert!((p.y - 1113.2).abs() / 1113.2 < 0.005);
    }

    #[test]
    fn planar_distance_matches_haversine_for_manhattan_pairs() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let f = LocalFrame::centered_at(40.79, -73.965);
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        while checked < 1000 {
            let a = (
                40.70 + 0.18 * rng.random::<f64>(),
                -74.02 + 0.11 * rng.random::<f64>(),
            );
            let b = (
                40.70 + 0.18 * rng.random::<f64>(),
                -74.02 + 0.11 * rng.random::<f64>(),
            );
            let h = haversine_m(a.0, a.1, b.0, b.1);
            if h < 100.0 {
                continue;
            }
            let d = f
                .project(a.0, a.1)
                .unwrap()
                .distance(&f.project(b.0, b.1).unwrap());
            worst = worst.max((d - h).abs() / h);
            checked += 1;
        }
        assert!(worst < 0.002, "worst relative error {worst}");
    }
}
