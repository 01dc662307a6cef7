use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{BnError, Dag};
use crate::data::{Dataset, FoodCategory, TimeSlot};

/// Column-major matrix of observations; one column per network node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl DataMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<DataMatrix, BnError> {
        if names.len() != columns.len() {
            return Err(BnError::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.len() > super::MAX_NODES {
            return Err(BnError::InvalidData(format!(
                "more than {} columns",
                super::MAX_NODES
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(BnError::InvalidData("columns differ in length".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(BnError::InvalidData("non-finite value".into()));
        }
        Ok(DataMatrix {
            names,
            columns,
            n_rows,
        })
    }

    /// Builds a matrix from rows, naming columns `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DataMatrix, BnError> {
        let n_vars = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_vars) {
            return Err(BnError::InvalidData("rows differ in length".into()));
        }
        let columns = (0..n_vars)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        DataMatrix::new((0..n_vars).map(|j| format!("x{j}")).collect(), columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Same data with rows reordered by `order`.
    pub fn permute_rows(&self, order: &[usize]) -> DataMatrix {
        let columns = self
            .columns
            .iter()
            .map(|c| order.iter().map(|&i| c[i]).collect())
            .collect();
        DataMatrix {
            names: self.names.clone(),
            columns,
            n_rows: order.len(),
        }
    }
}

/// Posts per day and category for one time slot; the training data for
/// structure learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub slot: TimeSlot,
    pub dates: Vec<NaiveDate>,
    /// One row per date, columns in canonical category order.
    pub counts: Vec<[u32; FoodCategory::COUNT]>,
}

impl CountTable {
    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn column(&self, category: FoodCategory) -> Vec<u32> {
        self.counts.iter().map(|r| r[category.index()]).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().map(|&c| u64::from(c)).sum()
    }

    pub fn to_matrix(&self) -> DataMatrix {
        let names = FoodCategory::ALL
            .iter()
            .map(|c| c.key().to_string())
            .collect();
        let columns = FoodCategory::ALL
            .iter()
            .map(|c| {
                self.counts
                    .iter()
                    .map(|r| f64::from(r[c.index()]))
                    .collect()
            })
            .collect();
        DataMatrix::new(names, columns).expect("count table is a valid matrix")
    }
}

/// One row per day of the dataset's window, zero rows included. Dinner posts
/// from 00:00-02:00 count toward the previous day.
pub fn build_count_table(dataset: &Dataset, slot: TimeSlot) -> Result<CountTable, BnError> {
    if !slot.is_named() {
        return Err(BnError::UnassignedSlot(slot));
    }
    let dates = dataset.window_dates();
    let row_of: HashMap<NaiveDate, usize> =
        dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let mut counts = vec![[0u32; FoodCategory::COUNT]; dates.len()];
    let mut any = false;
    for post in dataset.posts.iter().filter(|p| p.slot == slot) {
        if let Some(&row) = row_of.get(&post.day) {
            counts[row][post.category.index()] += 1;
            any = true;
        }
    }
    if !any {
        return Err(BnError::EmptyWindow { slot });
    }
    Ok(CountTable {
        slot,
        dates,
        counts,
    })
}

/// Edges of an 8-node category graph as `(parent, child)`, sorted by the
/// canonical category order.
pub fn to_edge_list(dag: &Dag) -> Result<Vec<(FoodCategory, FoodCategory)>, BnError> {
    if dag.n_nodes() != FoodCategory::COUNT {
        return Err(BnError::NodeCountMismatch {
            expected: FoodCategory::COUNT,
            got: dag.n_nodes(),
        });
    }
    Ok(dag
        .edges()
        .into_iter()
        .map(|(p, c)| {
            (
                FoodCategory::from_index(p).expect("node < 8"),
                FoodCategory::from_index(c).expect("node < 8"),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{PostRecord, Provenance};
    use chrono::{DateTime, Days};
    use std::collections::BTreeMap;

    fn dataset(posts: &[(&str, FoodCategory)]) -> Dataset {
        let posts = posts
            .iter()
            .enumerate()
            .map(|(i, (ts, cat))| {
                let timestamp = DateTime::parse_from_rfc3339(ts).unwrap();
                let (slot, day) = crate::data::activity_day(timestamp.naive_local());
                PostRecord {
                    id: format!("p{i}"),
                    business_id: "b".into(),
                    timestamp,
                    latitude: 40.7,
                    longitude: -74.0,
                    location_inherited: true,
                    category: *cat,
                    slot,
                    day,
                }
            })
            .collect();
        Dataset {
            reference_date: NaiveDate::from_ymd_opt(2019, 5, 31).unwrap(),
            window_days: 365,
            provenance: Provenance {
                posts_sha256: String::new(),
                businesses_sha256: String::new(),
            },
            businesses: BTreeMap::new(),
            posts,
        }
    }

    #[test]
    fn direct_counting() {
        let ds = dataset(&[
            ("2019-05-10T19:00:00-04:00", FoodCategory::Burgers),
            ("2019-05-10T19:10:00-04:00", FoodCategory::Burgers),
            ("2019-05-10T19:20:00-04:00", FoodCategory::Burgers),
        ]);
        let t = build_count_table(&ds, TimeSlot::Dinner).unwrap();
        assert_eq!(t.n_rows(), 365);
        let row = t
            .dates
            .iter()
            .position(|d| *d == NaiveDate::from_ymd_opt(2019, 5, 10).unwrap())
            .unwrap();
        assert_eq!(t.counts[row], [0, 0, 0, 3, 0, 0, 0, 0]);
        assert_eq!(t.total(), 3);
        assert_eq!(
            build_count_table(&ds, TimeSlot::Lunch),
            Err(BnError::EmptyWindow {
                slot: TimeSlot::Lunch
            })
        );
        assert_eq!(
            build_count_table(&ds, TimeSlot::Unassigned),
            Err(BnError::UnassignedSlot(TimeSlot::Unassigned))
        );
    }

    #[test]
    fn after_midnight_goes_to_previous_day() {
        let ds = dataset(&[("2019-05-11T01:30:00-04:00", FoodCategory::Pizza)]);
        let t = build_count_table(&ds, TimeSlot::Dinner).unwrap();
        let row = t
            .dates
            .iter()
            .position(|d| *d == NaiveDate::from_ymd_opt(2019, 5, 10).unwrap())
            .unwrap();
        assert_eq!(t.counts[row][FoodCategory::Pizza.index()], 1);
        assert_eq!(t.total(), 1);
    }

    #[test]
    fn sparse_year_still_has_365_rows() {
        // Hand-built fixture: one breakfast post on every 30th day of the window.
        let start = NaiveDate::from_ymd_opt(2019, 5, 31).unwrap() - Days::new(364);
        let stamps: Vec<String> = (0..365)
            .step_by(30)
            .map(|k| format!("{}T08:00:00-04:00", start + Days::new(k)))
            .collect();
        let posts: Vec<(&str, FoodCategory)> = stamps
            .iter()
            .map(|s| (s.as_str(), FoodCategory::Bagels))
            .collect();
        let t = build_count_table(&dataset(&posts), TimeSlot::Breakfast).unwrap();
        assert_eq!(t.n_rows(), 365);
        assert_eq!(t.total(), 13);
        assert_eq!(t.dates[0], start);
        let m = t.to_matrix();
        assert_eq!(m.n_vars(), 8);
        assert_eq!(m.column(FoodCategory::Bagels.index())[0], 1.0);
    }

    #[test]
    fn star_edge_list() {
        let burgers = FoodCategory::Burgers.index();
        let edges: Vec<_> = (0..8)
            .filter(|&c| c != burgers)
            .map(|c| (burgers, c))
            .collect();
        let dag = Dag::from_edges(8, &edges).unwrap();
        let list = to_edge_list(&dag).unwrap();
        assert_eq!(list.len(), 7);
        assert!(list.iter().all(|(p, _)| *p == FoodCategory::Burgers));
        assert_eq!(list[0], (FoodCategory::Burgers, FoodCategory::Ramen));
        assert!(to_edge_list(&Dag::empty(8)).unwrap().is_empty());
        assert!(to_edge_list(&Dag::empty(3)).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(DataMatrix::new(vec!["a".into()], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(DataMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0], vec![2.0, 3.0]]
        )
        .is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.column(1), [2.0, 4.0]);
        assert_eq!(m.permute_rows(&[1, 0]).column(0), [3.0, 1.0]);
    }
}
