//! The episodic index-selection environment.
//!
//! An episode starts from the empty configuration and adds one index per
//! step until the budget `k` is exhausted (or no legal action remains). The
//! observation is the flattened selectivity matrix, padded to a fixed number
//! of query rows, concatenated with the per-column `hasIndex` bitlist. A
//! column counts as "has index" when it is indexed or when no query selects
//! on it, which steers the policy away from pointless indexes.

use crate::catalog::Catalog;
use crate::cost::{CostProvider, IndexConfig};
use crate::error::{Error, Result};
use crate::workload::{build_matrix, SelectivityMatrix, Workload};

/// A create-index action on column `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub column: usize,
}

/// One recorded step: configuration before, action, configuration after,
/// and the reward earned.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub prev_config: IndexConfig,
    pub action: Action,
    pub next_config: IndexConfig,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvConfig {
    /// Index budget per episode.
    pub k: usize,
    /// Fixed number of query rows in the encoding; shorter workloads are
    /// padded with all-ones rows (a query that selects nothing is inert).
    pub n_fixed: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { k: 3, n_fixed: 5 }
    }
}

/// Episode state, frozen at reset except for the growing configuration.
#[derive(Debug, Clone)]
pub struct EnvState {
    pub matrix: SelectivityMatrix,
    pub config: IndexConfig,
    pub steps_taken: usize,
    /// `cost(empty)` for this episode's workload; the reward baseline.
    pub baseline_cost: f64,
}

/// Outcome of one environment step.
#[derive(Debug, Clone)]
pub struct Step {
    pub reward: f64,
    pub done: bool,
    pub transition: Transition,
}

/// The reward of a configuration with workload cost `cost_l` against the
/// no-index baseline `cost_empty`: `max(cost_empty / cost_l - 1, 0)`.
/// A configuration that does not lower the cost earns zero.
pub fn reward_fn(cost_empty: f64, cost_l: f64) -> Result<f64> {
    if cost_l <= 0.0 {
        return Err(Error::InvalidCost(cost_l));
    }
    Ok((cost_empty / cost_l - 1.0).max(0.0))
}

/// A single-episode environment. One instance is single-threaded; run many
/// independent instances for parallel evaluation.
pub struct Environment<'a> {
    catalog: &'a Catalog,
    provider: &'a dyn CostProvider,
    cfg: EnvConfig,
    workload: Option<Workload>,
    state: Option<EnvState>,
}

impl<'a> Environment<'a> {
    pub fn new(catalog: &'a Catalog, provider: &'a dyn CostProvider, cfg: EnvConfig) -> Result<Self> {
        let m = catalog.column_count();
        if cfg.k < 1 || cfg.k > m {
            return Err(Error::Config(format!(
                "index budget k={} must lie in [1, {m}]",
                cfg.k
            )));
        }
        if cfg.n_fixed < 1 {
            return Err(Error::Config("n_fixed must be >= 1".into()));
        }
        Ok(Environment {
            catalog,
            provider,
            cfg,
            workload: None,
            state: None,
        })
    }

    pub fn config(&self) -> EnvConfig {
        self.cfg
    }

    pub fn column_count(&self) -> usize {
        self.catalog.column_count()
    }

    /// Length of the observation vector: `n_fixed * m + m`.
    pub fn encoding_len(&self) -> usize {
        self.cfg.n_fixed * self.column_count() + self.column_count()
    }

    /// Start an episode: empty configuration, zero steps, baseline cost
    /// computed once.
    pub fn reset(&mut self, workload: &Workload) -> Result<&EnvState> {
        if workload.len() > self.cfg.n_fixed {
            return Err(Error::WorkloadTooLarge {
                queries: workload.len(),
                n_fixed: self.cfg.n_fixed,
            });
        }
        let matrix = build_matrix(workload, self.catalog)?;
        let m = self.catalog.column_count();
        let empty = IndexConfig::empty(m, self.cfg.k);
        let baseline_cost = self
            .provider
            .workload_cost(workload, &empty, self.catalog)?;
        self.workload = Some(workload.clone());
        self.state = Some(EnvState {
            matrix,
            config: empty,
            steps_taken: 0,
            baseline_cost,
        });
        Ok(self.state.as_ref().unwrap())
    }

    pub fn state(&self) -> &EnvState {
        self.state.as_ref().expect("environment not reset")
    }

    /// The `hasIndex` list: 1 where the column is indexed or untouched by
    /// every query in the workload.
    fn has_index_bits(&self) -> Vec<bool> {
        let state = self.state();
        (0..self.column_count())
            .map(|j| state.config.is_set(j) || state.matrix.column_is_all_ones(j))
            .collect()
    }

    /// Flat observation: the row-major selectivity matrix padded with
    /// all-ones rows up to `n_fixed`, followed by the `hasIndex` list.
    /// Every entry lies in [0, 1].
    pub fn encode(&self) -> Vec<f64> {
        let state = self.state();
        let m = self.column_count();
        let mut out = Vec::with_capacity(self.encoding_len());
        for i in 0..self.cfg.n_fixed {
            if i < state.matrix.query_count() {
                out.extend_from_slice(state.matrix.row(i));
            } else {
                out.extend(std::iter::repeat(1.0).take(m));
            }
        }
        out.extend(self.has_index_bits().iter().map(|&b| b as u8 as f64));
        out
    }

    /// Permitted actions: exactly the columns whose `hasIndex` entry is 0.
    pub fn action_mask(&self) -> Vec<bool> {
        self.has_index_bits().iter().map(|&b| !b).collect()
    }

    /// True when the episode can take no further step.
    pub fn done(&self) -> bool {
        let state = self.state();
        state.steps_taken >= self.cfg.k || self.action_mask().iter().all(|&a| !a)
    }

    /// Create an index on `action.column`. The caller must consult
    /// `action_mask` first; stepping on a masked column is an agent bug and
    /// returns an error.
    pub fn step(&mut self, action: Action) -> Result<Step> {
        if action.column >= self.column_count() {
            return Err(Error::IllegalAction {
                column: action.column,
            });
        }
        if self.done() {
            return Err(Error::IllegalAction {
                column: action.column,
            });
        }
        if !self.action_mask()[action.column] {
            return Err(Error::IllegalAction {
                column: action.column,
            });
        }
        let workload = self.workload.as_ref().expect("environment not reset");
        let state = self.state.as_ref().unwrap();
        let prev_config = state.config.clone();
        let mut next_config = prev_config.clone();
        next_config.set(action.column);
        let cost = self
            .provider
            .workload_cost(workload, &next_config, self.catalog)?;
        let reward = reward_fn(state.baseline_cost, cost)?;

        let state = self.state.as_mut().unwrap();
        state.config = next_config.clone();
        state.steps_taken += 1;
        let transition = Transition {
            prev_config,
            action,
            next_config,
            reward,
        };
        Ok(Step {
            reward,
            done: self.done(),
            transition,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_catalog;
    use crate::cost::AnalyticCostModel;
    use crate::workload::parse_workload;

    fn lineitem() -> Catalog {
        load_catalog(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("../../fixtures/lineitem_sf1.json"),
        )
        .unwrap()
    }

    fn w1() -> Workload {
        parse_workload(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/w1.json"),
        )
        .unwrap()
    }

    #[test]
    fn reward_formula_cases() {
        assert_eq!(reward_fn(100.0, 50.0).unwrap(), 1.0);
        assert_eq!(reward_fn(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(reward_fn(100.0, 200.0).unwrap(), 0.0);
        assert!(matches!(reward_fn(100.0, 0.0), Err(Error::InvalidCost(_))));
        assert!(matches!(reward_fn(100.0, -5.0), Err(Error::InvalidCost(_))));
    }

    #[test]
    fn reset_starts_from_empty_config() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        let state = env.reset(&w1()).unwrap();
        assert_eq!(state.steps_taken, 0);
        assert_eq!(state.config.count_ones(), 0);
        assert_eq!(state.baseline_cost, 5.0 * catalog.row_count as f64);
    }

    #[test]
    fn reset_rejects_oversized_workloads() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        let mut big = w1();
        big.queries.push(big.queries[0].clone());
        assert!(matches!(
            env.reset(&big),
            Err(Error::WorkloadTooLarge { queries: 6, n_fixed: 5 })
        ));
    }

    #[test]
    fn reset_is_deterministic() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        let a = env.reset(&w1()).unwrap().clone();
        let b = env.reset(&w1()).unwrap().clone();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.config, b.config);
        assert_eq!(a.baseline_cost, b.baseline_cost);
    }

    #[test]
    fn encoding_has_fixed_length_and_unit_range() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        env.reset(&w1()).unwrap();
        let encoded = env.encode();
        assert_eq!(encoded.len(), 5 * 16 + 16);
        assert!(encoded.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn untouched_columns_read_as_indexed() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        env.reset(&w1()).unwrap();
        let encoded = env.encode();
        let comment = catalog.column_index("l_comment").unwrap();
        assert_eq!(encoded[5 * 16 + comment], 1.0);
        // But its config bit stays clear.
        assert!(!env.state().config.is_set(comment));
    }

    #[test]
    fn short_workloads_pad_with_ones() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        let mut small = w1();
        small.queries.truncate(3);
        env.reset(&small).unwrap();
        let encoded = env.encode();
        for row in 3..5 {
            for j in 0..16 {
                assert_eq!(encoded[row * 16 + j], 1.0);
            }
        }
    }

    #[test]
    fn mask_tracks_used_unindexed_columns() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        env.reset(&w1()).unwrap();
        let mask = env.action_mask();
        let used = w1().used_columns(&catalog).unwrap();
        for j in 0..16 {
            assert_eq!(mask[j], used.contains(&j), "column {j}");
        }
        // After indexing a column it leaves the mask.
        let j = used[0];
        env.step(Action { column: j }).unwrap();
        assert!(!env.action_mask()[j]);
    }

    #[test]
    fn episode_runs_k_steps_and_stops() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        env.reset(&w1()).unwrap();
        let used = w1().used_columns(&catalog).unwrap();
        let first = env.step(Action { column: used[0] }).unwrap();
        assert!(!first.done);
        assert_eq!(first.transition.next_config.count_ones(), 1);
        let second = env.step(Action { column: used[1] }).unwrap();
        assert!(!second.done);
        let third = env.step(Action { column: used[2] }).unwrap();
        assert!(third.done);
        assert_eq!(env.state().steps_taken, 3);
        // Stepping past the end is illegal.
        assert!(matches!(
            env.step(Action { column: used[3] }),
            Err(Error::IllegalAction { .. })
        ));
    }

    #[test]
    fn stepping_on_masked_column_errors() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        env.reset(&w1()).unwrap();
        let used = w1().used_columns(&catalog).unwrap();
        env.step(Action { column: used[0] }).unwrap();
        assert!(matches!(
            env.step(Action { column: used[0] }),
            Err(Error::IllegalAction { .. })
        ));
        let comment = catalog.column_index("l_comment").unwrap();
        env.reset(&w1()).unwrap();
        assert!(matches!(
            env.step(Action { column: comment }),
            Err(Error::IllegalAction { .. })
        ));
    }

    #[test]
    fn episode_terminates_early_when_no_action_remains() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        // Workload touching two columns with k=3: done after two steps.
        let workload = Workload {
            queries: vec![Query {
                predicates: vec![
                    crate::workload::Predicate::lt(
                        "l_orderkey",
                        crate::workload::Literal::Number(100000.0),
                    ),
                    crate::workload::Predicate::eq(
                        "l_linenumber",
                        crate::workload::Literal::Number(1.0),
                    ),
                ],
            }],
        };
        env.reset(&workload).unwrap();
        let a = catalog.column_index("l_orderkey").unwrap();
        let b = catalog.column_index("l_linenumber").unwrap();
        env.step(Action { column: a }).unwrap();
        let last = env.step(Action { column: b }).unwrap();
        assert!(last.done);
        assert_eq!(env.state().steps_taken, 2);
    }

    #[test]
    fn rewards_are_non_decreasing_within_episode() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        let mut env = Environment::new(&catalog, &model, EnvConfig::default()).unwrap();
        env.reset(&w1()).unwrap();
        let used = w1().used_columns(&catalog).unwrap();
        let mut previous = 0.0;
        for &j in used.iter().take(3) {
            let step = env.step(Action { column: j }).unwrap();
            assert!(step.reward >= previous);
            previous = step.reward;
        }
    }

    use crate::workload::Query;

    #[test]
    fn bad_env_config_rejected() {
        let catalog = lineitem();
        let model = AnalyticCostModel::default();
        assert!(Environment::new(&catalog, &model, EnvConfig { k: 0, n_fixed: 5 }).is_err());
        assert!(Environment::new(&catalog, &model, EnvConfig { k: 17, n_fixed: 5 }).is_err());
        assert!(Environment::new(&catalog, &model, EnvConfig { k: 3, n_fixed: 0 }).is_err());
    }
}
