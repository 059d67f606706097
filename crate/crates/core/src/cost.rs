//! Analytic what-if costing: how expensive a workload would be under a
//! hypothetical index configuration, without touching a database.
//!
//! The model charges a full scan of `N` rows per query unless an index on a
//! predicated column is available, in which case the cheapest usable index
//! costs `log2(N) + F * Sel * N` (B-tree descent plus a penalized fetch per
//! retained row), still clamped by the full-scan cost. One index serves a
//! query; there is no index intersection. Costs are dimensionless units.

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::workload::{selectivity, Query, Workload};

/// An index configuration: one bit per catalog column, plus the budget `k`
/// of indexes the advisor may create.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexConfig {
    bits: Vec<bool>,
    pub k: usize,
}

impl IndexConfig {
    /// No indexes; the episode's initial configuration.
    pub fn empty(column_count: usize, k: usize) -> Self {
        IndexConfig {
            bits: vec![false; column_count],
            k,
        }
    }

    /// Every column indexed (the IndexedAll comparison point). The budget is
    /// widened to the column count.
    pub fn all(column_count: usize) -> Self {
        IndexConfig {
            bits: vec![true; column_count],
            k: column_count,
        }
    }

    /// Configuration with the given positions set; rejects positions out of
    /// range and more than `k` indexes.
    pub fn from_positions(column_count: usize, k: usize, positions: &[usize]) -> Result<Self> {
        let mut config = IndexConfig::empty(column_count, k);
        for &j in positions {
            if j >= column_count {
                return Err(Error::Validation(format!(
                    "index position {j} out of range for {column_count} columns"
                )));
            }
            config.bits[j] = true;
        }
        if config.count_ones() > k {
            return Err(Error::Validation(format!(
                "{} indexes exceed the budget k={k}",
                config.count_ones()
            )));
        }
        Ok(config)
    }

    pub fn column_count(&self) -> usize {
        self.bits.len()
    }

    pub fn is_set(&self, position: usize) -> bool {
        self.bits[position]
    }

    pub fn set(&mut self, position: usize) {
        self.bits[position] = true;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Set positions, ascending.
    pub fn positions(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }

    /// The raw bitlist; also the lexicographic tie-break key used by the
    /// oracle.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

pub const DEFAULT_FETCH_PENALTY: f64 = 2.0;

/// The pure analytic cost model. Stateless; safe for unrestricted parallel
/// use.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticCostModel {
    /// Per-row fetch penalty `F` on the index path.
    pub fetch_penalty: f64,
}

impl Default for AnalyticCostModel {
    fn default() -> Self {
        AnalyticCostModel {
            fetch_penalty: DEFAULT_FETCH_PENALTY,
        }
    }
}

impl AnalyticCostModel {
    /// Cost of one query given the set of indexed column positions:
    /// `N` when no indexed column carries a predicate, otherwise
    /// `min(N, min_j(log2(N) + F * Sel(Q, C_j) * N))` over usable indexes.
    pub fn query_cost(&self, query: &Query, indexed: &[usize], catalog: &Catalog) -> f64 {
        let n_rows = catalog.row_count as f64;
        let mut best = n_rows;
        for &j in indexed {
            let stats = catalog.column(j);
            if query.predicate_on(&stats.name).is_none() {
                continue;
            }
            let sel = selectivity(query, j, catalog);
            let index_path = n_rows.log2() + self.fetch_penalty * sel * n_rows;
            if index_path < best {
                best = index_path;
            }
        }
        best
    }

    /// Total workload cost: sum of per-query costs.
    pub fn workload_cost(&self, workload: &Workload, config: &IndexConfig, catalog: &Catalog) -> f64 {
        let indexed = config.positions();
        workload
            .queries
            .iter()
            .map(|q| self.query_cost(q, &indexed, catalog))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    Analytic,
    Live,
}

/// A source of workload costs under hypothetical configurations. The
/// analytic model implements it purely; the live connector implements it
/// against a real database. Cost units from different providers are not
/// comparable.
pub trait CostProvider: Send + Sync {
    fn capability(&self) -> Capability;

    /// One cost per query, in workload order.
    fn query_costs(
        &self,
        workload: &Workload,
        config: &IndexConfig,
        catalog: &Catalog,
    ) -> Result<Vec<f64>>;

    fn workload_cost(
        &self,
        workload: &Workload,
        config: &IndexConfig,
        catalog: &Catalog,
    ) -> Result<f64> {
        Ok(self.query_costs(workload, config, catalog)?.iter().sum())
    }
}

impl CostProvider for AnalyticCostModel {
    fn capability(&self) -> Capability {
        Capability::Analytic
    }

    fn query_costs(
        &self,
        workload: &Workload,
        config: &IndexConfig,
        catalog: &Catalog,
    ) -> Result<Vec<f64>> {
        let indexed = config.positions();
        Ok(workload
            .queries
            .iter()
            .map(|q| self.query_cost(q, &indexed, catalog))
            .collect())
    }
}

/// Per-query costs under the three comparison configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub no_index: f64,
    pub indexed_all: f64,
    pub configured: f64,
}

/// The evaluation report: one row per query plus totals, mirroring the
/// NoIndex / IndexedAll / configured comparison layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub per_query: Vec<CostRow>,
    pub totals: CostRow,
}

impl CostReport {
    /// CSV rendering: `query,no_index,indexed_all,configured` with a final
    /// `total` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("query,no_index,indexed_all,configured\n");
        for (i, row) in self.per_query.iter().enumerate() {
            out.push_str(&format!(
                "Q{},{},{},{}\n",
                i + 1,
                row.no_index,
                row.indexed_all,
                row.configured
            ));
        }
        out.push_str(&format!(
            "total,{},{},{}\n",
            self.totals.no_index, self.totals.indexed_all, self.totals.configured
        ));
        out
    }
}

/// Build the report for a workload under `config`, with NoIndex and
/// IndexedAll columns for comparison.
pub fn cost_report(
    workload: &Workload,
    config: &IndexConfig,
    catalog: &Catalog,
    provider: &dyn CostProvider,
) -> Result<CostReport> {
    let m = catalog.column_count();
    let none = provider.query_costs(workload, &IndexConfig::empty(m, config.k), catalog)?;
    let all = provider.query_costs(workload, &IndexConfig::all(m), catalog)?;
    let configured = provider.query_costs(workload, config, catalog)?;
    let per_query: Vec<CostRow> = none
        .iter()
        .zip(&all)
        .zip(&configured)
        .map(|((&no_index, &indexed_all), &configured)| CostRow {
            no_index,
            indexed_all,
            configured,
        })
        .collect();
    let totals = CostRow {
        no_index: none.iter().sum(),
        indexed_all: all.iter().sum(),
        configured: configured.iter().sum(),
    };
    Ok(CostReport { per_query, totals })
}
