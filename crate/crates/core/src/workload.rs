//! Conjunctive selection workloads and their selectivity encoding.
//!
//! A query is a conjunction of single-column predicates (`=` or `<`), one
//! predicate per column at most, mirroring the matrix encoding: one cell per
//! (query, column). Selectivity follows the convention that 1.0 means "no
//! predicate on this column" (or a predicate that excludes nothing), so
//! untouched columns look maximally unattractive to index.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{format_date_offset, parse_date_literal, Catalog, ColumnKind, ColumnStats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateOp {
    Eq,
    Lt,
}

/// A predicate literal as it appears in the JSON format: numbers for
/// integer/decimal columns, strings for dates (ISO-8601) and categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl std::fmt::Display for Literal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Literal::Number(n) => write!(f, "{n}"),
            Literal::Text(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub column: String,
    pub op: PredicateOp,
    pub value: Literal,
}

impl Predicate {
    pub fn eq(column: impl Into<String>, value: Literal) -> Self {
        Predicate {
            column: column.into(),
            op: PredicateOp::Eq,
            value,
        }
    }

    pub fn lt(column: impl Into<String>, value: Literal) -> Self {
        Predicate {
            column: column.into(),
            op: PredicateOp::Lt,
            value,
        }
    }

    /// Numeric view of the literal against the column's kind (dates become
    /// day offsets). Errors when the literal shape does not fit the kind.
    pub(crate) fn scalar_for(&self, stats: &ColumnStats) -> Result<f64> {
        match (stats.kind, &self.value) {
            (ColumnKind::Integer | ColumnKind::Decimal, Literal::Number(n)) => Ok(*n),
            (ColumnKind::Date, Literal::Text(s)) => Ok(parse_date_literal(s)? as f64),
            _ => Err(Error::Validation(format!(
                "predicate on `{}`: literal {} does not match column kind",
                self.column, self.value
            ))),
        }
    }

    fn validate(&self, stats: &ColumnStats) -> Result<()> {
        match self.op {
            PredicateOp::Lt => {
                if !stats.kind.is_ordered() {
                    return Err(Error::Validation(format!(
                        "predicate on `{}`: `<` requires an ordered column",
                        self.column
                    )));
                }
                // Out-of-domain cut points are legal; selectivity clamps them.
                self.scalar_for(stats)?;
            }
            PredicateOp::Eq => match stats.kind {
                ColumnKind::Categorical => {
                    let Literal::Text(text) = &self.value else {
                        return Err(Error::Validation(format!(
                            "predicate on `{}`: equality on a categorical column needs a string",
                            self.column
                        )));
                    };
                    let Some(categories) = &stats.categories else {
                        return Err(Error::Validation(format!(
                            "predicate on `{}`: category labels are unknown",
                            self.column
                        )));
                    };
                    if !categories.iter().any(|c| c == text) {
                        return Err(Error::Validation(format!(
                            "predicate on `{}`: `{text}` is not a known category",
                            self.column
                        )));
                    }
                }
                _ => {
                    let value = self.scalar_for(stats)?;
                    let (lo, hi) = stats.domain().expect("ordered column has a domain");
                    if value < lo || value > hi {
                        return Err(Error::Validation(format!(
                            "predicate on `{}`: equality value {value} outside [{lo}, {hi}]",
                            self.column
                        )));
                    }
                }
            },
        }
        Ok(())
    }
}

/// A conjunctive `SELECT count(*)` query: a non-empty set of predicates,
/// at most one per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub predicates: Vec<Predicate>,
}

impl Query {
    pub fn predicate_on<'q>(&'q self, column_name: &str) -> Option<&'q Predicate> {
        self.predicates.iter().find(|p| p.column == column_name)
    }

    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        if self.predicates.is_empty() {
            return Err(Error::Validation("query has no predicates".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for predicate in &self.predicates {
            let position = catalog.column_index(&predicate.column)?;
            if !seen.insert(position) {
                return Err(Error::Validation(format!(
                    "query has multiple predicates on `{}`",
                    predicate.column
                )));
            }
            predicate.validate(catalog.column(position))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub queries: Vec<Query>,
}

impl Workload {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        if self.queries.is_empty() {
            return Err(Error::Validation("workload has no queries".into()));
        }
        for query in &self.queries {
            query.validate(catalog)?;
        }
        Ok(())
    }

    /// Column positions carrying at least one predicate, ascending.
    pub fn used_columns(&self, catalog: &Catalog) -> Result<Vec<usize>> {
        let mut used = std::collections::BTreeSet::new();
        for query in &self.queries {
            for predicate in &query.predicates {
                used.insert(catalog.column_index(&predicate.column)?);
            }
        }
        Ok(used.into_iter().collect())
    }
}

/// Fraction of rows query `query` retains on column `column_pos` under the
/// uniform-statistics model:
///
/// * no predicate on the column: 1
/// * equality: `1 / distinct_count`
/// * range `< v` over `[lo, hi]`: `clamp((v - lo) / (hi - lo), 0, 1)`,
///   with `hi == lo` treated as 1.
///
/// The query must already be validated against the catalog.
pub fn selectivity(query: &Query, column_pos: usize, catalog: &Catalog) -> f64 {
    let stats = catalog.column(column_pos);
    let Some(predicate) = query.predicate_on(&stats.name) else {
        return 1.0;
    };
    match predicate.op {
        PredicateOp::Eq => 1.0 / stats.distinct_count as f64,
        PredicateOp::Lt => {
            let value = predicate
                .scalar_for(stats)
                .expect("validated predicate literal");
            let (lo, hi) = stats.domain().expect("ordered column has a domain");
            if hi == lo {
                return 1.0;
            }
            ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
        }
    }
}

/// The workload-characteristics half of the learner input: an `n x m` grid
/// of per-(query, column) selectivities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectivityMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl SelectivityMatrix {
    pub fn query_count(&self) -> usize {
        self.n
    }

    pub fn column_count(&self) -> usize {
        self.m
    }

    pub fn get(&self, query: usize, column: usize) -> f64 {
        self.values[query * self.m + column]
    }

    pub fn row(&self, query: usize) -> &[f64] {
        &self.values[query * self.m..(query + 1) * self.m]
    }

    /// True when no query in the workload selects on the column.
    pub fn column_is_all_ones(&self, column: usize) -> bool {
        (0..self.n).all(|i| self.get(i, column) == 1.0)
    }
}

/// Build the selectivity matrix for a workload. Validates the workload
/// against the catalog first.
pub fn build_matrix(workload: &Workload, catalog: &Catalog) -> Result<SelectivityMatrix> {
    workload.validate(catalog)?;
    let n = workload.len();
    let m = catalog.column_count();
    let mut values = Vec::with_capacity(n * m);
    for query in &workload.queries {
        for j in 0..m {
            values.push(selectivity(query, j, catalog));
        }
    }
    Ok(SelectivityMatrix { n, m, values })
}

/// Knobs for the random workload generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorProfile {
    /// Candidate columns predicates may land on.
    pub columns: Vec<String>,
    /// Inclusive range for the number of predicates per query.
    pub predicates_min: usize,
    pub predicates_max: usize,
    /// Probability that a predicate on an ordered column is an equality
    /// (otherwise a range). Categorical columns always get equalities.
    pub eq_probability: f64,
}

impl GeneratorProfile {
    /// Default profile: every predicate-eligible column, 4-6 predicates per
    /// query, even split between equality and range.
    pub fn over_catalog(catalog: &Catalog) -> Self {
        let columns = catalog
            .columns()
            .iter()
            .filter(|c| c.kind.is_ordered() || c.categories.is_some())
            .map(|c| c.name.clone())
            .collect::<Vec<_>>();
        let max = 6.min(columns.len().max(1));
        GeneratorProfile {
            columns,
            predicates_min: 4.min(max),
            predicates_max: max,
            eq_probability: 0.5,
        }
    }

    pub fn with_predicate_range(mut self, min: usize, max: usize) -> Self {
        self.predicates_min = min;
        self.predicates_max = max;
        self
    }

    /// Resolve candidate columns to positions and check feasibility.
    fn candidate_positions(&self, catalog: &Catalog) -> Result<Vec<usize>> {
        if self.columns.is_empty() {
            return Err(Error::ProfileInfeasible("empty candidate column set".into()));
        }
        if self.predicates_min < 1 || self.predicates_min > self.predicates_max {
            return Err(Error::ProfileInfeasible(format!(
                "bad predicate count range {}..={}",
                self.predicates_min, self.predicates_max
            )));
        }
        if !(0.0..=1.0).contains(&self.eq_probability) {
            return Err(Error::ProfileInfeasible(format!(
                "eq probability {} outside [0, 1]",
                self.eq_probability
            )));
        }
        let mut positions = Vec::with_capacity(self.columns.len());
        for name in &self.columns {
            let j = catalog.column_index(name)?;
            let stats = catalog.column(j);
            if stats.kind == ColumnKind::Categorical && stats.categories.is_none() {
                return Err(Error::ProfileInfeasible(format!(
                    "column `{name}` has no known categories to draw from"
                )));
            }
            if positions.contains(&j) {
                return Err(Error::ProfileInfeasible(format!(
                    "duplicate candidate column `{name}`"
                )));
            }
            positions.push(j);
        }
        if self.predicates_max > positions.len() {
            return Err(Error::ProfileInfeasible(format!(
                "up to {} predicates requested but only {} candidate columns",
                self.predicates_max,
                positions.len()
            )));
        }
        Ok(positions)
    }
}

/// Generate `n` random conjunctive queries. Fully deterministic given the
/// seed: the same `(catalog, n, profile, seed)` reproduces the same workload
/// across runs and platforms.
pub fn generate_workload(
    catalog: &Catalog,
    n: usize,
    profile: &GeneratorProfile,
    seed: u64,
) -> Result<Workload> {
    if n < 1 {
        return Err(Error::Validation("workload needs at least one query".into()));
    }
    let candidates = profile.candidate_positions(catalog)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(n);
    for _ in 0..n {
        let count = rng.random_range(profile.predicates_min..=profile.predicates_max);
        // Partial Fisher-Yates over a scratch copy: the first `count` slots
        // end up holding distinct candidate positions.
        let mut pool = candidates.clone();
        let mut predicates = Vec::with_capacity(count);
        for slot in 0..count {
            let pick = rng.random_range(slot..pool.len());
            pool.swap(slot, pick);
            let stats = catalog.column(pool[slot]);
            predicates.push(random_predicate(stats, profile.eq_probability, &mut rng));
        }
        queries.push(Query { predicates });
    }
    let workload = Workload { queries };
    workload.validate(catalog)?;
    Ok(workload)
}

fn random_predicate(stats: &ColumnStats, eq_probability: f64, rng: &mut ChaCha8Rng) -> Predicate {
    let eq = match stats.kind {
        ColumnKind::Categorical => true,
        _ => rng.random_bool(eq_probability),
    };
    if eq {
        Predicate::eq(stats.name.clone(), random_eq_literal(stats, rng))
    } else {
        Predicate::lt(stats.name.clone(), random_lt_literal(stats, rng))
    }
}

/// Equality values come from a uniform grid of `distinct_count` points over
/// the domain (the analytic stand-in for "actually occurring values").
fn random_eq_literal(stats: &ColumnStats, rng: &mut ChaCha8Rng) -> Literal {
    if let Some(categories) = &stats.categories {
        let pick = rng.random_range(0..categories.len());
        return Literal::Text(categories[pick].clone());
    }
    let (lo, hi) = stats.domain().expect("ordered column has a domain");
    let distinct = stats.distinct_count;
    let value = if distinct <= 1 {
        lo
    } else {
        let step = rng.random_range(0..distinct) as f64;
        lo + step * (hi - lo) / (distinct - 1) as f64
    };
    finish_numeric_literal(stats, value)
}

/// Range cut points are drawn uniformly from the open interval `(lo, hi)`.
fn random_lt_literal(stats: &ColumnStats, rng: &mut ChaCha8Rng) -> Literal {
    let (lo, hi) = stats.domain().expect("ordered column has a domain");
    let value = lo + rng.random::<f64>() * (hi - lo);
    finish_numeric_literal(stats, value)
}

fn finish_numeric_literal(stats: &ColumnStats, value: f64) -> Literal {
    let (lo, hi) = stats.domain().expect("ordered column has a domain");
    match stats.kind {
        ColumnKind::Integer => Literal::Number(value.round().clamp(lo, hi)),
        ColumnKind::Decimal => Literal::Number(value),
        ColumnKind::Date => {
            Literal::Text(format_date_offset(value.round().clamp(lo, hi) as i64))
        }
        ColumnKind::Categorical => unreachable!("categorical literals drawn from categories"),
    }
}

/// Read a workload from its JSON file format. Validation against a catalog
/// happens at use time, not here.
pub fn parse_workload(path: impl AsRef<Path>) -> Result<Workload> {
    let text = fs::read_to_string(path.as_ref())?;
    serde_json::from_str(&text).map_err(|e| Error::parse("workload file", e))
}

/// Write a workload as JSON. `parse_workload(write_workload(w)) == w`.
pub fn write_workload(workload: &Workload, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(workload)
        .map_err(|e| Error::parse("workload serialization", e))?;
    fs::write(path.as_ref(), text)?;
    Ok(())
}

/// Render a query as SQL for the live connector:
/// `SELECT count(*) FROM <table> WHERE c1 = v1 AND c2 < v2 ...`
pub fn render_sql(query: &Query, catalog: &Catalog) -> String {
    let clauses = query
        .predicates
        .iter()
        .map(|p| {
            let op = match p.op {
                PredicateOp::Eq => "=",
                PredicateOp::Lt => "<",
            };
            format!("{} {} {}", p.column, op, sql_literal(&p.value))
        })
        .collect::<Vec<_>>()
        .join(" AND ");
    format!(
        "SELECT count(*) FROM {} WHERE {}",
        catalog.table_name, clauses
    )
}

fn sql_literal(value: &Literal) -> String {
    match value {
        Literal::Number(n) => {
            if n.fract() == 0.0 && n.abs() < 9e15 {
                format!("{}", *n as i64)
            } else {
                format!("{n}")
            }
        }
        Literal::Text(s) => format!("'{}'", s.replace('\'', "''")),
    }
}
