//! Neighbourhood names for labelling hot spots.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geo::haversine_m;

/// Hot spots farther than this from every place get a coordinate label.
pub const DEFAULT_MAX_DISTANCE_M: f64 = 1500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Place {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
}

const MANHATTAN: [(&str, f64, f64); 16] = [
    ("Lower East Side", 40.7150, -73.9843),
    ("Chinatown", 40.7158, -73.9970),
    ("East Village", 40.7265, -73.9815),
    ("Hell's Kitchen", 40.7638, -73.9918),
    ("Midtown", 40.7549, -73.9840),
    ("Greenwich Village", 40.7336, -74.0027),
    ("SoHo", 40.7233, -74.0030),
    ("Financial District", 40.7075, -74.0113),
    ("Upper West Side", 40.7870, -73.9754),
    ("Upper East Side", 40.7736, -73.9566),
    ("Harlem", 40.8116, -73.9465),
    ("Chelsea", 40.7465, -74.0014),
    ("Tribeca", 40.7163, -74.0086),
    ("Murray Hill", 40.7479, -73.9757),
    ("Gramercy", 40.7368, -73.9845),
    ("Washington Heights", 40.8417, -73.9394),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Gazetteer {
    places: Vec<Place>,
    max_distance_m: f64,
}

impl Default for Gazetteer {
    fn default() -> Self {
        Gazetteer::manhattan()
    }
}

impl Gazetteer {
    pub fn new(places: Vec<Place>, max_distance_m: f64) -> Gazetteer {
        Gazetteer {
            places,
            max_distance_m,
        }
    }

    /// Built-in centroids of common Manhattan neighbourhoods.
    pub fn manhattan() -> Gazetteer {
        let places = MANHATTAN
            .iter()
            .map(|&(name, latitude, longitude)| Place {
                name: name.to_string(),
                latitude,
                longitude,
            })
            .collect();
        Gazetteer::new(places, DEFAULT_MAX_DISTANCE_M)
    }

    /// Reads a CSV with `name,latitude,longitude` columns.
    pub fn from_csv(path: &Path) -> Result<Gazetteer, csv::Error> {
        let mut reader = csv::Reader::from_path(path)?;
        let places = reader.deserialize().collect::<Result<Vec<Place>, _>>()?;
        Ok(Gazetteer::new(places, DEFAULT_MAX_DISTANCE_M))
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    /// Closest place within range; the first listed wins exact ties.
    pub fn nearest(&self, latitude: f64, longitude: f64) -> Option<&Place> {
        self.places
            .iter()
            .map(|p| (p, haversine_m(latitude, longitude, p.latitude, p.longitude)))
            .filter(|(_, d)| *d <= self.max_distance_m)
            .fold(None, |best: Option<(&Place, f64)>, (p, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((p, d)),
            })
            .map(|(p, _)| p)
    }

    pub fn label(&self, latitude: f64, longitude: f64) -> String {
        match self.nearest(latitude, longitude) {
            Some(p) => p.name.clone(),
            None => format!("hotspot@{latitude:.4},{longitude:.4}"),
        }
    }
}
