//! ESRI ASCII grids, raster sidecars and GeoJSON hot spots.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use super::{DensityField, HotSpot};
use crate::data::{FoodCategory, TimeSlot};
use crate::geo::LocalFrame;

pub const NODATA_VALUE: i32 = -9999;

/// Renders the field as an ESRI ASCII grid in local-frame meters. Rows are
/// written north to south as the format requires.
pub fn to_esri_ascii(field: &DensityField) -> String {
    let mut out = String::with_capacity(field.values.len() * 24 + 128);
    writeln!(out, "ncols {}", field.nx).unwrap();
    writeln!(out, "nrows {}", field.ny).unwrap();
    writeln!(out, "xllcorner {}", field.x_min).unwrap();
    writeln!(out, "yllcorner {}", field.y_min).unwrap();
    writeln!(out, "cellsize {}", field.cell_size).unwrap();
    writeln!(out, "NODATA_value {NODATA_VALUE}").unwrap();
    for row in (0..field.ny).rev() {
        let line = &field.values[row * field.nx..(row + 1) * field.nx];
        for (k, v) in line.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{v:e}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct RasterMetadata<'a> {
    category: Option<FoodCategory>,
    slot: Option<TimeSlot>,
    bandwidth_m: f64,
    n_points: usize,
    cell_size_m: f64,
    units: &'static str,
    crs: &'static str,
    frame: &'a LocalFrame,
}

/// JSON sidecar describing how to interpret an `.asc` grid.
pub fn raster_metadata_json(field: &DensityField) -> String {
    let meta = RasterMetadata {
        category: field.category,
        slot: field.slot,
        bandwidth_m: field.bandwidth.meters(),
        n_points: field.n_points,
        cell_size_m: field.cell_size,
        units: "density per square meter",
        crs: "local equirectangular frame, meters east/north of origin",
        frame: &field.frame,
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    s.push('\n');
    s
}

/// GeoJSON `FeatureCollection` with one point per hot spot. `names`, when
/// given, is parallel to `spots`.
pub fn hotspots_geojson(
    spots: &[HotSpot],
    slot: Option<TimeSlot>,
    category: Option<FoodCategory>,
    names: Option<&[String]>,
) -> String {
    let features: Vec<Value> = spots
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut props = json!({
                "rank": s.rank,
                "peak_density": s.peak_density,
                "mass": s.mass,
                "n_cells": s.member_cells.len(),
                "category": category.map(|c| c.key()).unwrap_or("all"),
                "slot": slot.map(|s| s.key()),
            });
            if let Some(name) = names.and_then(|n| n.get(k)) {
                props["name"] = json!(name);
            }
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [s.longitude, s.latitude] },
                "properties": props,
            })
        })
        .collect();
    let doc = json!({ "type": "FeatureCollection", "features": features });
    let mut s = serde_json::to_string_pretty(&doc).expect("geojson serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::PlanarPoint;
    use crate::kde::{extract_hotspots, rasterize, Bandwidth};

    fn field() -> DensityField {
        let pts = [PlanarPoint::new(0.0, 0.0), PlanarPoint::new(300.0, 80.0)];
        rasterize(
            &pts,
            Bandwidth::new(50.0).unwrap(),
            LocalFrame::centered_at(40.7, -74.0),
            25.0,
        )
        .unwrap()
        .with_labels(Some(TimeSlot::Lunch), Some(FoodCategory::HotWings))
    }

    #[test]
    fn ascii_grid_layout() {
        let f = field();
        let text = to_esri_ascii(&f);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("ncols {}", f.nx));
        assert_eq!(lines[1], format!("nrows {}", f.ny));
        assert!(lines[2].starts_with("xllcorner "));
        assert!(lines[3].starts_with("yllcorner "));
        assert_eq!(lines[4], "cellsize 25");
        assert_eq!(lines[5], "NODATA_value -9999");
        assert_eq!(lines.len(), 6 + f.ny);
        assert!(!text.contains('\r'));
        // First data line is the northernmost row.
        let first: Vec<f64> = lines[6].split(' ').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), f.nx);
        for (col, v) in first.iter().enumerate() {
            assert_eq!(*v, f.value(col, f.ny - 1));
        }
        let xll: f64 = lines[2]["xllcorner ".len()..].parse().unwrap();
        assert_eq!(xll, f.x_min);
    }

    #[test]
    fn sidecar_and_geojson() {
        let f = field();
        let meta: Value = serde_json::from_str(&raster_metadata_json(&f)).unwrap();
        assert_eq!(meta["category"], "hot_wings");
        assert_eq!(meta["slot"], "lunch");
        assert_eq!(meta["bandwidth_m"], 50.0);
        assert_eq!(meta["n_points"], 2);
        assert_eq!(meta["frame"]["origin_latitude"], 40.7);

        let spots = extract_hotspots(&f, 0.95).unwrap();
        let names: Vec<String> = spots.iter().map(|s| format!("spot {}", s.rank)).collect();
        let gj: Value =
            serde_json::from_str(&hotspots_geojson(&spots, f.slot, f.category, Some(&names)))
                .unwrap();
        assert_eq!(gj["type"], "FeatureCollection");
        let feats = gj["features"].as_array().unwrap();
        assert_eq!(feats.len(), spots.len());
        assert_eq!(feats[0]["geometry"]["type"], "Point");
        assert_eq!(feats[0]["geometry"]["coordinates"][0], spots[0].longitude);
        assert_eq!(feats[0]["properties"]["rank"], 1);
        assert_eq!(feats[0]["properties"]["name"], "spot 1");
        assert_eq!(feats[0]["properties"]["slot"], "lunch");
    }
}
