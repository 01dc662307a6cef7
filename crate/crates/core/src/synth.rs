//! Seeded synthetic datasets with known ground truth.
//!
//! All randomness comes from one `ChaCha20Rng` seeded with
//! `SynthSpec::seed` (via `SeedableRng::seed_from_u64`), consumed in a fixed
//! order: businesses first, then days in ascending order, slots in
//! breakfast/lunch/dinner/unassigned order within each day. Identical specs
//! therefore produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Days, FixedOffset, NaiveDate, NaiveTime, TimeZone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::bn::{CountTable, Dag};
use crate::data::{derive_hashtag, FoodCategory, TimeSlot, MAX_POSTS_PER_BUSINESS, WINDOW_DAYS};
use crate::geo::LocalFrame;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Expected posts per day in each part of the day.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotRates {
    pub breakfast: f64,
    pub lunch: f64,
    pub dinner: f64,
    #[serde(default)]
    pub unassigned: f64,
}

impl SlotRates {
    pub fn uniform(rate: f64) -> SlotRates {
        SlotRates {
            breakfast: rate,
            lunch: rate,
            dinner: rate,
            unassigned: 0.0,
        }
    }

    pub fn get(&self, slot: TimeSlot) -> f64 {
        match slot {
            TimeSlot::Breakfast => self.breakfast,
            TimeSlot::Lunch => self.lunch,
            TimeSlot::Dinner => self.dinner,
            TimeSlot::Unassigned => self.unassigned,
        }
    }
}

/// An isotropic Gaussian cloud of posts around a center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub latitude: f64,
    pub longitude: f64,
    pub sigma_m: f64,
    /// Category shares; must sum to 1. Missing categories get 0.
    pub category_mix: BTreeMap<FoodCategory, f64>,
    pub posts_per_day: SlotRates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeParams {
    pub intercept: f64,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub parent: FoodCategory,
    pub child: FoodCategory,
    pub weight: f64,
}

/// Linear-Gaussian structural model for daily category counts:
/// `x_c = intercept_c + Σ w·x_parent + noise_sd_c·z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDag {
    pub edges: Vec<WeightedEdge>,
    pub default_node: NodeParams,
    #[serde(default)]
    pub nodes: BTreeMap<FoodCategory, NodeParams>,
}

impl PlantedDag {
    pub fn dag(&self) -> Result<Dag, SynthError> {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.parent.index(), e.child.index()))
            .collect();
        Dag::from_edges(FoodCategory::COUNT, &edges)
            .map_err(|e| SynthError::InvalidSpec(format!("planted graph: {e}")))
    }

    pub fn node(&self, c: FoodCategory) -> NodeParams {
        self.nodes.get(&c).copied().unwrap_or(self.default_node)
    }

    /// Chain over the canonical category order with one weight for every link.
    pub fn chain(weight: f64, node: NodeParams) -> PlantedDag {
        PlantedDag {
            edges: FoodCategory::ALL
                .windows(2)
                .map(|w| WeightedEdge {
                    parent: w[0],
                    child: w[1],
                    weight,
                })
                .collect(),
            default_node: node,
            nodes: BTreeMap::new(),
        }
    }

    /// Draws one latent vector in topological order.
    pub fn sample_latent<R: Rng + ?Sized>(
        &self,
        order: &[usize],
        rng: &mut R,
    ) -> [f64; FoodCategory::COUNT] {
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        let mut x = [0.0; FoodCategory::COUNT];
        for &v in order {
            let cat = FoodCategory::ALL[v];
            let p = self.node(cat);
            let mut value = p.intercept + p.noise_sd * std.sample(rng);
            for e in self.edges.iter().filter(|e| e.child == cat) {
                value += e.weight * x[e.parent.index()];
            }
            x[v] = value;
        }
        x
    }

    /// A table of `n_days` rounded, zero-truncated draws with its latents.
    pub fn sample_table(
        &self,
        slot: TimeSlot,
        start: NaiveDate,
        n_days: u32,
        seed: u64,
    ) -> Result<(CountTable, Vec<[f64; 8]>), SynthError> {
        let order = self.dag()?.topological_order().expect("validated acyclic");
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut dates = Vec::with_capacity(n_days as usize);
        let mut counts = Vec::with_capacity(n_days as usize);
        let mut latents = Vec::with_capacity(n_days as usize);
        for d in 0..n_days {
            let x = self.sample_latent(&order, &mut rng);
            dates.push(start + Days::new(u64::from(d)));
            counts.push(x.map(round_count));
            latents.push(x);
        }
        Ok((
            CountTable {
                slot,
                dates,
                counts,
            },
            latents,
        ))
    }
}

fn round_count(x: f64) -> u32 {
    x.round().max(0.0) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub reference_date: NaiveDate,
    pub n_days: u32,
    pub n_businesses: usize,
    /// Offset written into every timestamp.
    #[serde(default = "default_offset")]
    pub utc_offset_minutes: i32,
    /// Leave post coordinates blank so they inherit the venue location.
    #[serde(default)]
    pub venue_anchored: bool,
    pub clusters: Vec<ClusterSpec>,
    #[serde(default)]
    pub planted_dag: Option<PlantedDag>,
}

fn default_offset() -> i32 {
    -240
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<SynthSpec, SynthError> {
        serde_json::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.n_days == 0 || self.n_days > WINDOW_DAYS {
            return bad(format!(
                "n_days must be in 1..={WINDOW_DAYS}, got {}",
                self.n_days
            ));
        }
        if self.clusters.is_empty() {
            return bad("at least one cluster is required".into());
        }
        if self.n_businesses < self.clusters.len() {
            return bad("need at least one business per cluster".into());
        }
        if self.utc_offset_minutes.abs() >= 24 * 60 {
            return bad("utc offset out of range".into());
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if !(c.sigma_m.is_finite() && c.sigma_m > 0.0) {
                return bad(format!("cluster {i}: sigma must be > 0"));
            }
            if !(-85.0..=85.0).contains(&c.latitude) || !(-180.0..=180.0).contains(&c.longitude) {
                return bad(format!("cluster {i}: center out of range"));
            }
            let total: f64 = c.category_mix.values().sum();
            if c.category_mix
                .values()
                .any(|w| !(w.is_finite() && *w >= 0.0))
                || (total - 1.0).abs() > 1e-6
            {
                return bad(format!(
                    "cluster {i}: category mix must be non-negative and sum to 1, sums to {total}"
                ));
            }
            let r = c.posts_per_day;
            if [r.breakfast, r.lunch, r.dinner, r.unassigned]
                .iter()
                .any(|v| !(v.is_finite() && *v >= 0.0))
            {
                return bad(format!("cluster {i}: rates must be finite and >= 0"));
            }
        }
        if let Some(planted) = &self.planted_dag {
            planted.dag()?;
            let nodes = std::iter::once(&planted.default_node).chain(planted.nodes.values());
            if nodes
                .into_iter()
                .any(|p| !(p.noise_sd.is_finite() && p.noise_sd >= 0.0 && p.intercept.is_finite()))
            {
                return bad("planted node parameters must be finite with noise_sd >= 0".into());
            }
            if planted.edges.iter().any(|e| !e.weight.is_finite()) {
                return bad("planted edge weights must be finite".into());
            }
        }
        Ok(())
    }

    pub fn start_date(&self) -> NaiveDate {
        self.reference_date - Days::new(u64::from(self.n_days - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub counts: [u32; FoodCategory::COUNT],
    /// Untruncated draws from the planted model, when one was used.
    pub latent: Option<[f64; FoodCategory::COUNT]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTruth {
    pub name: Option<String>,
    pub latitude: f64,
    pub longitude: f64,
    pub sigma_m: f64,
    pub posts: usize,
}

/// Ground truth written next to the generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub reference_date: NaiveDate,
    pub n_days: u32,
    pub businesses_emitted: usize,
    pub businesses_with_posts: usize,
    pub total_posts: usize,
    pub posts_by_slot: BTreeMap<TimeSlot, BTreeMap<FoodCategory, usize>>,
    pub clusters: Vec<ClusterTruth>,
    pub planted_dag: Option<PlantedDag>,
    pub planted_edges: Vec<(FoodCategory, FoodCategory)>,
    pub daily: BTreeMap<TimeSlot, Vec<DailyRecord>>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub businesses_csv: String,
    pub posts_csv: String,
    pub manifest: Manifest,
}

impl SynthOutput {
    /// Writes `businesses.csv`, `posts.csv` and `manifest.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SynthError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| SynthError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, body) in [
            ("businesses.csv", &self.businesses_csv),
            ("posts.csv", &self.posts_csv),
            ("manifest.json", &self.manifest.to_json()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(&path))?;
        }
        Ok(())
    }
}

const SLOT_MINUTES: [(TimeSlot, u32, u32); 4] = [
    (TimeSlot::Breakfast, 5 * 60, 12 * 60),
    (TimeSlot::Lunch, 12 * 60, 18 * 60),
    (TimeSlot::Dinner, 18 * 60, 26 * 60),
    (TimeSlot::Unassigned, 2 * 60, 5 * 60),
];

const ADJECTIVES: [&str; 10] = [
    "Golden", "Little", "Blue", "Corner", "Lucky", "Urban", "Old Town", "Happy", "Red Door",
    "Midnight",
];

fn venue_noun(c: FoodCategory) -> &'static str {
    match c {
        FoodCategory::Ramen => "Ramen House",
        FoodCategory::Sushi => "Sushi Bar",
        FoodCategory::Waffles => "Waffle Shop",
        FoodCategory::Burgers => "Burger Joint",
        FoodCategory::HotWings => "Wing Spot",
        FoodCategory::Nachos => "Nacho Cantina",
        FoodCategory::Bagels => "Bagel Bakery",
        FoodCategory::Pizza => "Pizza Parlor",
    }
}

struct Venue {
    id: String,
    cluster: usize,
    posts: usize,
}

/// Offsets a center by a planar displacement in meters.
fn displace(frame: &LocalFrame, dx: f64, dy: f64) -> (f64, f64) {
    frame.unproject(crate::geo::PlanarPoint::new(dx, dy))
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return rng.random_range(0..weights.len());
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights
        .iter()
        .rposition(|w| *w > 0.0)
        .expect("positive weight exists")
}

pub fn generate(spec: &SynthSpec) -> Result<SynthOutput, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let frames: Vec<LocalFrame> = spec
        .clusters
        .iter()
        .map(|c| LocalFrame::centered_at(c.latitude, c.longitude))
        .collect();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    // Businesses: round-robin over clusters.
    let mut venues = Vec::with_capacity(spec.n_businesses);
    let mut businesses_csv = String::from("id,name,latitude,longitude,categories,rating\n");
    for k in 0..spec.n_businesses {
        let ci = k % spec.clusters.len();
        let cluster = &spec.clusters[ci];
        let sigma = cluster.sigma_m;
        let (lat, lon) = displace(
            &frames[ci],
            sigma * unit.sample(&mut rng),
            sigma * unit.sample(&mut rng),
        );
        let mix: Vec<f64> = FoodCategory::ALL
            .iter()
            .map(|c| cluster.category_mix.get(c).copied().unwrap_or(0.0))
            .collect();
        let main = FoodCategory::ALL[pick_weighted(&mix, &mut rng)];
        let mut cats = vec![main];
        if rng.random::<f64>() < 0.3 {
            cats.push(FoodCategory::ALL[pick_weighted(&mix, &mut rng)]);
        }
        cats.sort();
        cats.dedup();
        let adjective = ADJECTIVES[rng.random_range(0..ADJECTIVES.len())];
        let name = format!("{adjective} {} {}", venue_noun(main), k + 1);
        debug_assert!(derive_hashtag(&name).is_ok());
        let rating = f64::from(rng.random_range(30u32..=50)) / 10.0;
        let id = format!("b{:04}", k + 1);
        let lat = (lat * 1e7).round() / 1e7;
        let lon = (lon * 1e7).round() / 1e7;
        let cat_list: Vec<&str> = cats.iter().map(|c| c.key()).collect();
        writeln!(
            businesses_csv,
            "{id},{name},{lat:.7},{lon:.7},{},{rating:.1}",
            cat_list.join("|")
        )
        .unwrap();
        venues.push(Venue {
            id,
            cluster: ci,
            posts: 0,
        });
    }

    let offset = FixedOffset::east_opt(spec.utc_offset_minutes * 60).expect("validated offset");
    let planted_order = match &spec.planted_dag {
        Some(p) => Some(p.dag()?.topological_order().expect("acyclic")),
        None => None,
    };

    let mut posts_csv = String::from("id,business_id,timestamp,latitude,longitude,category\n");
    let mut post_no = 0usize;
    let mut posts_by_slot: BTreeMap<TimeSlot, BTreeMap<FoodCategory, usize>> = BTreeMap::new();
    let mut daily: BTreeMap<TimeSlot, Vec<DailyRecord>> = BTreeMap::new();
    let mut cluster_posts = vec![0usize; spec.clusters.len()];

    for d in 0..spec.n_days {
        let date = spec.start_date() + Days::new(u64::from(d));
        for (slot, start_min, end_min) in SLOT_MINUTES {
            // Posts for this day and slot as (cluster, category).
            let mut draws: Vec<(usize, FoodCategory)> = Vec::new();
            let mut latent = None;
            match (&spec.planted_dag, &planted_order, slot.is_named()) {
                (Some(planted), Some(order), true) => {
                    let x = planted.sample_latent(order, &mut rng);
                    for cat in FoodCategory::ALL {
                        let weights: Vec<f64> = spec
                            .clusters
                            .iter()
                            .map(|c| {
                                c.posts_per_day.get(slot)
                                    * c.category_mix.get(&cat).copied().unwrap_or(0.0)
                            })
                            .collect();
                        for _ in 0..round_count(x[cat.index()]) {
                            draws.push((pick_weighted(&weights, &mut rng), cat));
                        }
                    }
                    latent = Some(x);
                }
                _ => {
                    for (ci, cluster) in spec.clusters.iter().enumerate() {
                        for cat in FoodCategory::ALL {
                            let lambda = cluster.posts_per_day.get(slot)
                                * cluster.category_mix.get(&cat).copied().unwrap_or(0.0);
                            if lambda <= 0.0 {
                                continue;
                            }
                            let n = Poisson::new(lambda)
                                .expect("positive rate")
                                .sample(&mut rng) as usize;
                            draws.extend(std::iter::repeat_n((ci, cat), n));
                        }
                    }
                }
            }

            let mut counts = [0u32; FoodCategory::COUNT];
            for (ci, cat) in draws {
                let open: Vec<usize> = venues
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.cluster == ci && v.posts < MAX_POSTS_PER_BUSINESS)
                    .map(|(i, _)| i)
                    .collect();
                if open.is_empty() {
                    return Err(SynthError::InvalidSpec(format!(
                        "cluster {ci} ran out of venue capacity ({MAX_POSTS_PER_BUSINESS} posts each); add businesses"
                    )));
                }
                let vi = open[rng.random_range(0..open.len())];
                venues[vi].posts += 1;

                let minute = rng.random_range(start_min..end_min);
                let second = rng.random_range(0..60u32);
                let (day, minute) = if minute >= 24 * 60 {
                    (date + Days::new(1), minute - 24 * 60)
                } else {
                    (date, minute)
                };
                let local = day.and_time(
                    NaiveTime::from_hms_opt(minute / 60, minute % 60, second).expect("valid time"),
                );
                let ts = offset
                    .from_local_datetime(&local)
                    .single()
                    .expect("fixed offset");

                let sigma = spec.clusters[ci].sigma_m;
                let (dx, dy) = (sigma * unit.sample(&mut rng), sigma * unit.sample(&mut rng));
                post_no += 1;
                let id = format!("p{post_no:07}");
                let venue_id = &venues[vi].id;
                let stamp = ts.to_rfc3339();
                if spec.venue_anchored {
                    writeln!(posts_csv, "{id},{venue_id},{stamp},,,{}", cat.key()).unwrap();
                } else {
                    let (lat, lon) = displace(&frames[ci], dx, dy);
                    writeln!(
                        posts_csv,
                        "{id},{venue_id},{stamp},{lat:.7},{lon:.7},{}",
                        cat.key()
                    )
                    .unwrap();
                }

                counts[cat.index()] += 1;
                cluster_posts[ci] += 1;
                *posts_by_slot
                    .entry(slot)
                    .or_default()
                    .entry(cat)
                    .or_default() += 1;
            }
            if slot.is_named() {
                daily.entry(slot).or_default().push(DailyRecord {
                    date,
                    counts,
                    latent,
                });
            }
        }
    }

    let planted_edges = spec
        .planted_dag
        .as_ref()
        .map(|p| p.edges.iter().map(|e| (e.parent, e.child)).collect())
        .unwrap_or_default();
    let manifest = Manifest {
        seed: spec.seed,
        reference_date: spec.reference_date,
        n_days: spec.n_days,
        businesses_emitted: venues.len(),
        businesses_with_posts: venues.iter().filter(|v| v.posts > 0).count(),
        total_posts: post_no,
        posts_by_slot,
        clusters: spec
            .clusters
            .iter()
            .zip(&cluster_posts)
            .map(|(c, &posts)| ClusterTruth {
                name: c.name.clone(),
                latitude: c.latitude,
                longitude: c.longitude,
                sigma_m: c.sigma_m,
                posts,
            })
            .collect(),
        planted_dag: spec.planted_dag.clone(),
        planted_edges,
        daily,
    };
    Ok(SynthOutput {
        businesses_csv,
        posts_csv,
        manifest,
    })
}
