use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use csv::StringRecord;
use sha2::{Digest, Sha256};

use super::{
    activity_day, derive_hashtag, BusinessRecord, DataError, Dataset, FoodCategory, PostRecord,
    Provenance,
};

/// Default length of the trailing analysis window.
pub const WINDOW_DAYS: u32 = 365;
/// Default number of most recent posts kept per business.
pub const MAX_POSTS_PER_BUSINESS: usize = 300;

const BUSINESS_COLUMNS: [&str; 6] = [
    "id",
    "name",
    "latitude",
    "longitude",
    "categories",
    "rating",
];
const POST_COLUMNS: [&str; 6] = [
    "id",
    "business_id",
    "timestamp",
    "latitude",
    "longitude",
    "category",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub window_days: u32,
    pub max_posts_per_business: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            window_days: WINDOW_DAYS,
            max_posts_per_business: MAX_POSTS_PER_BUSINESS,
        }
    }
}

/// Loads and filters a dataset with the default 365-day window and 300-post cap.
pub fn load_dataset(
    posts_path: &Path,
    businesses_path: &Path,
    reference_date: NaiveDate,
) -> Result<Dataset, DataError> {
    load_dataset_with(
        posts_path,
        businesses_path,
        reference_date,
        LoadOptions::default(),
    )
}

/// Loads both CSV files and applies, in order: the recency window (by
/// activity day), the per-business cap keeping the most recent posts, and
/// removal of businesses left without posts. Unassigned-slot posts are kept.
pub fn load_dataset_with(
    posts_path: &Path,
    businesses_path: &Path,
    reference_date: NaiveDate,
    options: LoadOptions,
) -> Result<Dataset, DataError> {
    let business_bytes = read_file(businesses_path)?;
    let post_bytes = read_file(posts_path)?;
    let business_file = businesses_path.display().to_string();
    let post_file = posts_path.display().to_string();

    let mut businesses = parse_businesses(&business_bytes, &business_file)?;
    let posts = parse_posts(&post_bytes, &post_file, &businesses)?;

    let mut dataset = Dataset {
        reference_date,
        window_days: options.window_days,
        provenance: Provenance {
            posts_sha256: sha256_hex(&post_bytes),
            businesses_sha256: sha256_hex(&business_bytes),
        },
        businesses: BTreeMap::new(),
        posts: Vec::new(),
    };

    let recent: Vec<PostRecord> = posts
        .into_iter()
        .filter(|p| dataset.contains_day(p.day))
        .collect();
    let posts = cap_per_business(recent, options.max_posts_per_business);

    let active: HashSet<&str> = posts.iter().map(|p| p.business_id.as_str()).collect();
    businesses.retain(|id, _| active.contains(id.as_str()));
    dataset.businesses = businesses;
    dataset.posts = posts;
    Ok(dataset)
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Keeps the `cap` most recent posts of every business; ties on the instant
/// are broken by post id. Surviving posts keep their file order.
fn cap_per_business(posts: Vec<PostRecord>, cap: usize) -> Vec<PostRecord> {
    let mut by_business: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, p) in posts.iter().enumerate() {
        by_business
            .entry(p.business_id.as_str())
            .or_default()
            .push(i);
    }
    let mut keep = vec![false; posts.len()];
    for mut idx in by_business.into_values() {
        idx.sort_by(|&a, &b| {
            posts[b]
                .timestamp
                .cmp(&posts[a].timestamp)
                .then_with(|| posts[a].id.cmp(&posts[b].id))
        });
        for &i in idx.iter().take(cap) {
            keep[i] = true;
        }
    }
    posts
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Column positions resolved from the header row.
struct Columns {
    index: HashMap<&'static str, usize>,
}

impl Columns {
    fn resolve(
        headers: &StringRecord,
        expected: &[&'static str],
        file: &str,
    ) -> Result<Columns, DataError> {
        let mut index = HashMap::new();
        for &name in expected {
            let pos = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| DataError::Parse {
                    file: file.to_string(),
                    line: 1,
                    message: format!("missing column `{name}` (expected {})", expected.join(",")),
                })?;
            index.insert(name, pos);
        }
        Ok(Columns { index })
    }

    fn get<'r>(&self, record: &'r StringRecord, name: &str) -> &'r str {
        record.get(self.index[name]).unwrap_or("").trim()
    }
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes)
}

fn csv_error(file: &str, err: csv::Error) -> DataError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    DataError::Parse {
        file: file.to_string(),
        line,
        message: err.to_string(),
    }
}

fn is_blank(bytes: &[u8]) -> bool {
    bytes.iter().all(u8::is_ascii_whitespace)
}

fn parse_coordinate(text: &str, what: &str, file: &str, line: u64) -> Result<f64, DataError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::Parse {
            file: file.to_string(),
            line,
            message: format!("invalid {what} `{text}`"),
        })
}

fn check_range(lat: f64, lon: f64, file: &str, line: u64) -> Result<(), DataError> {
    if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
        Ok(())
    } else {
        Err(DataError::InvalidCoordinate {
            file: file.to_string(),
            line,
            latitude: lat,
            longitude: lon,
        })
    }
}

fn parse_businesses(
    bytes: &[u8],
    file: &str,
) -> Result<BTreeMap<String, BusinessRecord>, DataError> {
    let mut out = BTreeMap::new();
    if is_blank(bytes) {
        return Ok(out);
    }
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(|e| csv_error(file, e))?.clone();
    let cols = Columns::resolve(&headers, &BUSINESS_COLUMNS, file)?;

    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| DataError::Parse {
            file: file.to_string(),
            line,
            message,
        };

        let id = cols.get(&record, "id");
        if id.is_empty() {
            return Err(parse_err("empty business id".into()));
        }
        let name = cols.get(&record, "name");
        let hashtag = derive_hashtag(name)
            .map_err(|_| parse_err(format!("business `{id}` has an empty name")))?;
        let latitude = parse_coordinate(cols.get(&record, "latitude"), "latitude", file, line)?;
        let longitude = parse_coordinate(cols.get(&record, "longitude"), "longitude", file, line)?;
        check_range(latitude, longitude, file, line)?;

        let mut categories = Vec::new();
        for part in cols.get(&record, "categories").split('|') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            categories.push(part.parse::<FoodCategory>().map_err(parse_err)?);
        }
        categories.sort();
        categories.dedup();

        let rating_text = cols.get(&record, "rating");
        let rating = if rating_text.is_empty() {
            None
        } else {
            let r = rating_text
                .parse::<f64>()
                .ok()
                .filter(|r| (0.0..=5.0).contains(r))
                .ok_or_else(|| parse_err(format!("rating `{rating_text}` not in [0, 5]")))?;
            Some(r)
        };

        let record = BusinessRecord {
            id: id.to_string(),
            name: name.to_string(),
            hashtag,
            latitude,
            longitude,
            categories,
            rating,
        };
        if out.insert(id.to_string(), record).is_some() {
            return Err(parse_err(format!("duplicate business id `{id}`")));
        }
    }
    Ok(out)
}

fn parse_posts(
    bytes: &[u8],
    file: &str,
    businesses: &BTreeMap<String, BusinessRecord>,
) -> Result<Vec<PostRecord>, DataError> {
    let mut out = Vec::new();
    if is_blank(bytes) {
        return Ok(out);
    }
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(|e| csv_error(file, e))?.clone();
    let cols = Columns::resolve(&headers, &POST_COLUMNS, file)?;

    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| DataError::Parse {
            file: file.to_string(),
            line,
            message,
        };

        let id = cols.get(&record, "id");
        if id.is_empty() {
            return Err(parse_err("empty post id".into()));
        }
        let business_id = cols.get(&record, "business_id");
        let business = businesses
            .get(business_id)
            .ok_or_else(|| DataError::DanglingReference {
                file: file.to_string(),
                line,
                business_id: business_id.to_string(),
            })?;
        let ts_text = cols.get(&record, "timestamp");
        let timestamp = DateTime::parse_from_rfc3339(ts_text)
            .map_err(|e| parse_err(format!("invalid RFC 3339 timestamp `{ts_text}`: {e}")))?;

        let lat_text = cols.get(&record, "latitude");
        let lon_text = cols.get(&record, "longitude");
        let (latitude, longitude, location_inherited) =
            match (lat_text.is_empty(), lon_text.is_empty()) {
                (true, true) => (business.latitude, business.longitude, true),
                (false, false) => {
                    let lat = parse_coordinate(lat_text, "latitude", file, line)?;
                    let lon = parse_coordinate(lon_text, "longitude", file, line)?;
                    check_range(lat, lon, file, line)?;
                    (lat, lon, false)
                }
                _ => {
                    return Err(parse_err(
                        "latitude and longitude must both be set or both be blank".into(),
                    ))
                }
            };
        let category = cols
            .get(&record, "category")
            .parse::<FoodCategory>()
            .map_err(parse_err)?;
        let (slot, day) = activity_day(timestamp.naive_local());

        out.push(PostRecord {
            id: id.to_string(),
            business_id: business_id.to_string(),
            timestamp,
            latitude,
            longitude,
            location_inherited,
            category,
            slot,
            day,
        });
    }
    Ok(out)
}
