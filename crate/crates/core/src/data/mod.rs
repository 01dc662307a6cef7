//! Domain types, ingestion and time-slot stratification.

mod hashtag;
mod load;
mod slot;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};

pub use hashtag::derive_hashtag;
pub use load::{load_dataset, load_dataset_with, LoadOptions, MAX_POSTS_PER_BUSINESS, WINDOW_DAYS};
pub use slot::{activity_day, assign_time_slot, stratify, SlotPartition};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("name is empty after normalization")]
    EmptyName,
    #[error("{file}: line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },
    #[error("{file}: line {line}: post references unknown business `{business_id}`")]
    DanglingReference {
        file: String,
        line: u64,
        business_id: String,
    },
    #[error("{file}: line {line}: coordinate ({latitude}, {longitude}) out of range")]
    InvalidCoordinate {
        file: String,
        line: u64,
        latitude: f64,
        longitude: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The eight food categories, in the canonical column order used by every
/// count matrix and raster in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoodCategory {
    Ramen,
    Sushi,
    Waffles,
    Burgers,
    HotWings,
    Nachos,
    Bagels,
    Pizza,
}

impl FoodCategory {
    pub const COUNT: usize = 8;

    pub const ALL: [FoodCategory; 8] = [
        FoodCategory::Ramen,
        FoodCategory::Sushi,
        FoodCategory::Waffles,
        FoodCategory::Burgers,
        FoodCategory::HotWings,
        FoodCategory::Nachos,
        FoodCategory::Bagels,
        FoodCategory::Pizza,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<FoodCategory> {
        Self::ALL.get(index).copied()
    }

    /// Snake-case identifier used in files (`hot_wings`).
    pub fn key(self) -> &'static str {
        match self {
            FoodCategory::Ramen => "ramen",
            FoodCategory::Sushi => "sushi",
            FoodCategory::Waffles => "waffles",
            FoodCategory::Burgers => "burgers",
            FoodCategory::HotWings => "hot_wings",
            FoodCategory::Nachos => "nachos",
            FoodCategory::Bagels => "bagels",
            FoodCategory::Pizza => "pizza",
        }
    }

    /// Human-readable label (`Hot Wings`).
    pub fn label(self) -> &'static str {
        match self {
            FoodCategory::Ramen => "Ramen",
            FoodCategory::Sushi => "Sushi",
            FoodCategory::Waffles => "Waffles",
            FoodCategory::Burgers => "Burgers",
            FoodCategory::HotWings => "Hot Wings",
            FoodCategory::Nachos => "Nachos",
            FoodCategory::Bagels => "Bagels",
            FoodCategory::Pizza => "Pizza",
        }
    }
}

impl fmt::Display for FoodCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FoodCategory {
    type Err = String;

    /// Accepts the snake-case key and, leniently, any spelling that matches it
    /// after lowercasing and dropping non-alphanumerics (`HotWings`, `Hot Wings`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squashed: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        FoodCategory::ALL
            .into_iter()
            .find(|c| c.key().replace('_', "") == squashed)
            .ok_or_else(|| format!("unknown food category `{s}`"))
    }
}

/// Part of the day a post belongs to. Intervals are half-open; `Dinner`
/// wraps past midnight and 02:00-05:00 is left `Unassigned`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSlot {
    Breakfast,
    Lunch,
    Dinner,
    Unassigned,
}

impl TimeSlot {
    pub const NAMED: [TimeSlot; 3] = [TimeSlot::Breakfast, TimeSlot::Lunch, TimeSlot::Dinner];

    pub fn key(self) -> &'static str {
        match self {
            TimeSlot::Breakfast => "breakfast",
            TimeSlot::Lunch => "lunch",
            TimeSlot::Dinner => "dinner",
            TimeSlot::Unassigned => "unassigned",
        }
    }

    /// Clock range in the `5am-12noon` style.
    pub fn clock_range(self) -> &'static str {
        match self {
            TimeSlot::Breakfast => "5am-12noon",
            TimeSlot::Lunch => "12noon-6pm",
            TimeSlot::Dinner => "6pm-2am",
            TimeSlot::Unassigned => "2am-5am",
        }
    }

    pub fn is_named(self) -> bool {
        self != TimeSlot::Unassigned
    }
}

impl fmt::Display for TimeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for TimeSlot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "breakfast" => Ok(TimeSlot::Breakfast),
            "lunch" => Ok(TimeSlot::Lunch),
            "dinner" => Ok(TimeSlot::Dinner),
            "unassigned" => Ok(TimeSlot::Unassigned),
            other => Err(format!("unknown time slot `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusinessRecord {
    pub id: String,
    pub name: String,
    pub hashtag: String,
    pub latitude: f64,
    pub longitude: f64,
    pub categories: Vec<FoodCategory>,
    pub rating: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    pub business_id: String,
    /// Instant with the poster's UTC offset; the wall clock in that offset
    /// decides the time slot.
    pub timestamp: DateTime<FixedOffset>,
    pub latitude: f64,
    pub longitude: f64,
    /// True when the row had no coordinates and the venue location was used.
    pub location_inherited: bool,
    pub category: FoodCategory,
    pub slot: TimeSlot,
    /// Calendar day the post counts toward (previous day for 00:00-02:00 dinner posts).
    pub day: NaiveDate,
}

impl PostRecord {
    pub fn is_unassigned(&self) -> bool {
        self.slot == TimeSlot::Unassigned
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub posts_sha256: String,
    pub businesses_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub reference_date: NaiveDate,
    /// Length of the trailing analysis window ending at `reference_date`.
    pub window_days: u32,
    pub provenance: Provenance,
    pub businesses: BTreeMap<String, BusinessRecord>,
    pub posts: Vec<PostRecord>,
}

impl Dataset {
    /// First calendar day inside the analysis window.
    pub fn window_start(&self) -> NaiveDate {
        self.reference_date - chrono::Days::new(u64::from(self.window_days.saturating_sub(1)))
    }

    /// Calendar days of the analysis window in ascending order.
    pub fn window_dates(&self) -> Vec<NaiveDate> {
        let start = self.window_start();
        (0..self.window_days)
            .map(|i| start + chrono::Days::new(u64::from(i)))
            .collect()
    }

    pub fn contains_day(&self, day: NaiveDate) -> bool {
        self.window_days > 0 && day >= self.window_start() && day <= self.reference_date
    }

    /// Post counts indexed `[slot][category]` with slots in `TimeSlot` order.
    pub fn counts_by_slot(&self) -> [[usize; FoodCategory::COUNT]; 4] {
        let mut counts = [[0usize; FoodCategory::COUNT]; 4];
        for p in &self.posts {
            counts[p.slot as usize][p.category.index()] += 1;
        }
        counts
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Dataset> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_stable() {
        let keys: Vec<_> = FoodCategory::ALL.iter().map(|c| c.key()).collect();
        assert_eq!(
            keys,
            [
                "ramen",
                "sushi",
                "waffles",
                "burgers",
                "hot_wings",
                "nachos",
                "bagels",
                "pizza"
            ]
        );
        for (i, c) in FoodCategory::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(FoodCategory::from_index(i), Some(*c));
        }
        assert_eq!(FoodCategory::from_index(8), None);
    }

    #[test]
    fn category_parsing() {
        assert_eq!(
            "hot_wings".parse::<FoodCategory>(),
            Ok(FoodCategory::HotWings)
        );
        assert_eq!(
            "Hot Wings".parse::<FoodCategory>(),
            Ok(FoodCategory::HotWings)
        );
        assert_eq!("PIZZA".parse::<FoodCategory>(), Ok(FoodCategory::Pizza));
        assert!("tacos".parse::<FoodCategory>().is_err());
        assert_eq!(
            serde_json::to_string(&FoodCategory::HotWings).unwrap(),
            "\"hot_wings\""
        );
    }

    #[test]
    fn window_has_requested_length() {
        let ds = Dataset {
            reference_date: NaiveDate::from_ymd_opt(2019, 5, 31).unwrap(),
            window_days: 365,
            provenance: Provenance {
                posts_sha256: String::new(),
                businesses_sha256: String::new(),
            },
            businesses: BTreeMap::new(),
            posts: vec![],
        };
        let days = ds.window_dates();
        assert_eq!(days.len(), 365);
        assert_eq!(days[364], ds.reference_date);
        assert_eq!(days[0], NaiveDate::from_ymd_opt(2018, 6, 1).unwrap());
        assert!(!ds.contains_day(NaiveDate::from_ymd_opt(2018, 5, 31).unwrap()));
        assert!(ds.contains_day(days[0]));
    }
}
