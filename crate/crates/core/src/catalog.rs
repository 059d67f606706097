//! Schema statistics: the table layout and per-column statistics from which
//! all analytic selectivities are derived.
//!
//! No row data is stored. Every selectivity estimate assumes values are
//! uniformly distributed over `[min, max]` (ordered kinds) or over the
//! `distinct` count (equality predicates). Dates are held internally as
//! integer day offsets from 1970-01-01 so range selectivity reduces to the
//! numeric case.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column payload kinds understood by the statistics catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Integer,
    Decimal,
    Date,
    Categorical,
}

impl ColumnKind {
    /// Ordered kinds carry a `[min, max]` domain and admit range predicates.
    pub fn is_ordered(self) -> bool {
        !matches!(self, ColumnKind::Categorical)
    }
}

/// Statistics for one column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub name: String,
    pub kind: ColumnKind,
    pub distinct_count: u64,
    /// Domain endpoints for ordered kinds. Dates are stored as day offsets
    /// from 1970-01-01.
    domain: Option<(f64, f64)>,
    /// Category labels, when known. A categorical column may omit them
    /// (e.g. free text); such a column cannot carry predicates because
    /// values cannot be validated against it.
    pub categories: Option<Vec<String>>,
}

impl ColumnStats {
    /// Ordered column (integer, decimal or date with pre-computed offsets).
    pub fn ordered(
        name: impl Into<String>,
        kind: ColumnKind,
        distinct_count: u64,
        min: f64,
        max: f64,
    ) -> Result<Self> {
        let stats = ColumnStats {
            name: name.into(),
            kind,
            distinct_count,
            domain: Some((min, max)),
            categories: None,
        };
        stats.validate()?;
        Ok(stats)
    }

    /// Date column with ISO-8601 endpoints.
    pub fn date(
        name: impl Into<String>,
        distinct_count: u64,
        min: &str,
        max: &str,
    ) -> Result<Self> {
        let lo = parse_date_literal(min)? as f64;
        let hi = parse_date_literal(max)? as f64;
        Self::ordered(name, ColumnKind::Date, distinct_count, lo, hi)
    }

    /// Categorical column with a known label set; `distinct_count` is the
    /// number of labels.
    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Result<Self> {
        let stats = ColumnStats {
            name: name.into(),
            kind: ColumnKind::Categorical,
            distinct_count: categories.len() as u64,
            domain: None,
            categories: Some(categories),
        };
        stats.validate()?;
        Ok(stats)
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        self.domain
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Validation("column name must be non-empty".into()));
        }
        if self.distinct_count < 1 {
            return Err(Error::Validation(format!(
                "column `{}`: distinct count must be >= 1",
                self.name
            )));
        }
        match self.kind {
            ColumnKind::Categorical => {
                if self.domain.is_some() {
                    return Err(Error::Validation(format!(
                        "column `{}`: categorical columns carry no min/max",
                        self.name
                    )));
                }
                if let Some(categories) = &self.categories {
                    if categories.len() as u64 != self.distinct_count {
                        return Err(Error::Validation(format!(
                            "column `{}`: distinct count {} != {} categories",
                            self.name,
                            self.distinct_count,
                            categories.len()
                        )));
                    }
                    if categories.is_empty() {
                        return Err(Error::Validation(format!(
                            "column `{}`: empty category list",
                            self.name
                        )));
                    }
                }
            }
            _ => {
                if self.categories.is_some() {
                    return Err(Error::Validation(format!(
                        "column `{}`: only categorical columns carry categories",
                        self.name
                    )));
                }
                let (lo, hi) = self.domain.ok_or_else(|| {
                    Error::Validation(format!(
                        "column `{}`: ordered columns require min and max",
                        self.name
                    ))
                })?;
                if !(lo <= hi) {
                    return Err(Error::Validation(format!(
                        "column `{}`: min {lo} exceeds max {hi}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A single table's schema with statistics. The column order is fixed and
/// defines the position `j` used everywhere: selectivity matrix columns,
/// index bitlist positions and action ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub table_name: String,
    pub row_count: u64,
    columns: Vec<ColumnStats>,
}

impl Catalog {
    pub fn new(
        table_name: impl Into<String>,
        row_count: u64,
        columns: Vec<ColumnStats>,
    ) -> Result<Self> {
        if row_count < 1 {
            return Err(Error::Validation("row count must be >= 1".into()));
        }
        if columns.is_empty() {
            return Err(Error::Validation("catalog needs at least one column".into()));
        }
        let mut seen = HashSet::new();
        for column in &columns {
            column.validate()?;
            if !seen.insert(column.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate column name `{}`",
                    column.name
                )));
            }
        }
        Ok(Catalog {
            table_name: table_name.into(),
            row_count,
            columns,
        })
    }

    /// Number of columns `m`.
    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnStats] {
        &self.columns
    }

    pub fn column(&self, position: usize) -> &ColumnStats {
        &self.columns[position]
    }

    /// Position `j` of a column by name.
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    }

    /// Restriction of the catalog to the named columns, preserving catalog
    /// order. Useful for desk-scale experiments over a column subset.
    pub fn project(&self, names: &[&str]) -> Result<Catalog> {
        let mut wanted = HashSet::new();
        for name in names {
            self.column_index(name)?;
            wanted.insert(*name);
        }
        let columns = self
            .columns
            .iter()
            .filter(|c| wanted.contains(c.name.as_str()))
            .cloned()
            .collect();
        Catalog::new(self.table_name.clone(), self.row_count, columns)
    }
}

/// Load and validate a catalog from its JSON file format.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    let text = fs::read_to_string(path.as_ref())?;
    let file: CatalogFile =
        serde_json::from_str(&text).map_err(|e| Error::parse("catalog file", e))?;
    file.try_into()
}

pub(crate) const DATE_EPOCH: &str = "1970-01-01";

/// Parse an ISO-8601 date into its day offset from 1970-01-01.
pub(crate) fn parse_date_literal(text: &str) -> Result<i64> {
    let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|e| Error::parse(&format!("date literal `{text}`"), e))?;
    let epoch = NaiveDate::parse_from_str(DATE_EPOCH, "%Y-%m-%d").expect("fixed epoch");
    Ok(date.signed_duration_since(epoch).num_days())
}

/// Format a day offset back into an ISO-8601 date string.
pub(crate) fn format_date_offset(offset: i64) -> String {
    let epoch = NaiveDate::parse_from_str(DATE_EPOCH, "%Y-%m-%d").expect("fixed epoch");
    let date = epoch
        .checked_add_signed(chrono::Duration::days(offset))
        .expect("date offset in range");
    date.format("%Y-%m-%d").to_string()
}

#[derive(Deserialize, Serialize)]
struct CatalogFile {
    table: String,
    row_count: u64,
    columns: Vec<ColumnFile>,
}

#[derive(Deserialize, Serialize)]
struct ColumnFile {
    name: String,
    kind: ColumnKind,
    distinct: u64,
    #[serde(default)]
    min: Option<serde_json::Value>,
    #[serde(default)]
    max: Option<serde_json::Value>,
    #[serde(default)]
    categories: Option<Vec<String>>,
}

fn bound_offset(kind: ColumnKind, name: &str, value: &serde_json::Value) -> Result<f64> {
    match (kind, value) {
        (ColumnKind::Date, serde_json::Value::String(s)) => Ok(parse_date_literal(s)? as f64),
        (ColumnKind::Integer | ColumnKind::Decimal, serde_json::Value::Number(n)) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("column `{name}`: non-finite bound"))),
        _ => Err(Error::Parse(format!(
            "column `{name}`: bound {value} does not match kind"
        ))),
    }
}

impl TryFrom<CatalogFile> for Catalog {
    type Error = Error;

    fn try_from(file: CatalogFile) -> Result<Catalog> {
        let mut columns = Vec::with_capacity(file.columns.len());
        for col in file.columns {
            let domain = match col.kind {
                ColumnKind::Categorical => None,
                kind => {
                    let min = col.min.as_ref().ok_or_else(|| {
                        Error::Validation(format!("column `{}`: missing min", col.name))
                    })?;
                    let max = col.max.as_ref().ok_or_else(|| {
                        Error::Validation(format!("column `{}`: missing max", col.name))
                    })?;
                    Some((
                        bound_offset(kind, &col.name, min)?,
                        bound_offset(kind, &col.name, max)?,
                    ))
                }
            };
            let stats = ColumnStats {
                name: col.name,
                kind: col.kind,
                distinct_count: col.distinct,
                domain,
                categories: col.categories,
            };
            columns.push(stats);
        }
        Catalog::new(file.table, file.row_count, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent day counter: walks the Gregorian calendar one month at a
    /// time, never touching chrono. Used to cross-check the day-offset
    /// arithmetic the selectivity model relies on.
    fn brute_force_days_between(from: (i32, u32, u32), to: (i32, u32, u32)) -> i64 {
        fn is_leap(year: i32) -> bool {
            (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
        }
        fn days_in_month(year: i32, month: u32) -> u32 {
            match month {
                1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
                4 | 6 | 9 | 11 => 30,
                2 if is_leap(year) => 29,
                2 => 28,
                _ => unreachable!(),
            }
        }
        fn days_from_year_zero(y: i32, m: u32, d: u32) -> i64 {
            let mut days = 0i64;
            for year in 0..y {
                days += if is_leap(year) { 366 } else { 365 };
            }
            for month in 1..m {
                days += days_in_month(y, month) as i64;
            }
            days + d as i64 - 1
        }
        days_from_year_zero(to.0, to.1, to.2) - days_from_year_zero(from.0, from.1, from.2)
    }

    #[test]
    fn date_offsets_match_brute_force_count() {
        // The values the shipdate selectivity example depends on.
        assert_eq!(brute_force_days_between((1992, 1, 1), (1994, 1, 1)), 731);
        assert_eq!(brute_force_days_between((1992, 1, 1), (1998, 12, 1)), 2526);
        assert_eq!(
            parse_date_literal("1994-01-01").unwrap() - parse_date_literal("1992-01-01").unwrap(),
            731
        );
        assert_eq!(
            parse_date_literal("1998-12-01").unwrap() - parse_date_literal("1992-01-01").unwrap(),
            2526
        );
        // Spot-check absolute offsets from the epoch as well.
        assert_eq!(
            parse_date_literal("1992-01-01").unwrap(),
            brute_force_days_between((1970, 1, 1), (1992, 1, 1))
        );
        assert_eq!(parse_date_literal("1970-01-01").unwrap(), 0);
    }

    #[test]
    fn date_offset_round_trips() {
        for text in ["1970-01-01", "1992-02-29", "1998-12-01", "2024-07-15"] {
            let offset = parse_date_literal(text).unwrap();
            assert_eq!(format_date_offset(offset), text);
        }
    }

    fn fixture_path() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/lineitem_sf1.json")
    }

    #[test]
    fn loads_lineitem_fixture() {
        let catalog = load_catalog(fixture_path()).unwrap();
        assert_eq!(catalog.column_count(), 16);
        assert_eq!(catalog.row_count, 6_001_215);
        assert_eq!(catalog.table_name, "lineitem");
        assert_eq!(catalog.column_index("l_orderkey").unwrap(), 0);
        assert_eq!(catalog.column_index("l_comment").unwrap(), 15);
    }

    #[test]
    fn load_is_deterministic() {
        let a = load_catalog(fixture_path()).unwrap();
        let b = load_catalog(fixture_path()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn column_index_round_trips() {
        let catalog = load_catalog(fixture_path()).unwrap();
        for (j, column) in catalog.columns().iter().enumerate() {
            assert_eq!(catalog.column_index(&column.name).unwrap(), j);
        }
    }

    #[test]
    fn unknown_column_is_not_found() {
        let catalog = load_catalog(fixture_path()).unwrap();
        assert!(matches!(
            catalog.column_index("no_such_column"),
            Err(Error::ColumnNotFound(_))
        ));
    }

    #[test]
    fn single_column_catalog_is_valid() {
        let catalog = Catalog::new(
            "t",
            10,
            vec![ColumnStats::ordered("a", ColumnKind::Integer, 10, 0.0, 9.0).unwrap()],
        )
        .unwrap();
        assert_eq!(catalog.column_count(), 1);
    }

    #[test]
    fn duplicate_column_names_rejected() {
        let cols = vec![
            ColumnStats::ordered("a", ColumnKind::Integer, 10, 0.0, 9.0).unwrap(),
            ColumnStats::ordered("a", ColumnKind::Integer, 5, 0.0, 4.0).unwrap(),
        ];
        assert!(matches!(
            Catalog::new("t", 10, cols),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn duplicate_names_rejected_from_file() {
        let text = r#"{"table":"t","row_count":5,"columns":[
            {"name":"a","kind":"integer","distinct":2,"min":0,"max":1,"categories":null},
            {"name":"a","kind":"integer","distinct":2,"min":0,"max":1,"categories":null}]}"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.json");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load_catalog(&path), Err(Error::Validation(_))));
    }

    #[test]
    fn invalid_stats_rejected() {
        assert!(ColumnStats::ordered("a", ColumnKind::Integer, 0, 0.0, 9.0).is_err());
        assert!(ColumnStats::ordered("a", ColumnKind::Integer, 3, 9.0, 0.0).is_err());
        assert!(ColumnStats::categorical("a", vec![]).is_err());
    }

    #[test]
    fn malformed_file_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(load_catalog(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn project_preserves_order() {
        let catalog = load_catalog(fixture_path()).unwrap();
        let projected = catalog.project(&["l_discount", "l_orderkey"]).unwrap();
        assert_eq!(projected.column(0).name, "l_orderkey");
        assert_eq!(projected.column(1).name, "l_discount");
        assert_eq!(projected.row_count, catalog.row_count);
        assert!(catalog.project(&["nope"]).is_err());
    }
}
