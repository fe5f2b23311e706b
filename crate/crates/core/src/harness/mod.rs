//! Experiment orchestration: grid expansion, replicated runs, aggregation
//! and persistence.

mod config;
mod persist;
pub mod stats;
mod summary;

pub use config::{run_seed, stable_hash, ExperimentConfig, ParamCell, RunCell};
pub use persist::{
    persist, read_results, write_eccentricity_csv, write_rounds_csv, write_summary, ECCENTRICITY_FILE,
    ECCENTRICITY_HEADER, FAILURES_FILE, ROUNDS_FILE, ROUNDS_HEADER, SUMMARY_FILE,
};
pub use summary::{
    compare_strategies, summarize, CellSummary, ComparisonReport, Metric, PairTest, StrategyStats, StrategySummary,
    Summary, ECCENTRICITY_BURN_IN, MIN_REPLICATIONS, SIGNIFICANCE,
};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_round, RoundUpdate};
use crate::error::{Error, Result};
use crate::metrics::{record_round_metrics, MetricsRecord};
use crate::state::{SimParams, SimulationState};

/// A fully resolved, standalone-reproducible run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub run_id: usize,
    pub cell: RunCell,
    pub replication: usize,
    pub seed: u64,
    pub params: SimParams,
    pub eccentricity: bool,
    /// Test hook: poison an idea state after this many rounds.
    #[serde(skip)]
    #[doc(hidden)]
    pub inject_nan_after: Option<usize>,
}

impl RunSpec {
    /// A single run outside any grid.
    pub fn single(params: SimParams, eccentricity: bool) -> Self {
        let cell = RunCell {
            strategy: params.strategy,
            params: ParamCell::new(params.h, params.a, params.weight_init),
        };
        Self { run_id: 0, cell, replication: 0, seed: params.seed, params, eccentricity, inject_nan_after: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EccentricityRecord {
    /// 0-based round in which the opinion was generated.
    pub round: usize,
    pub opinion_id: usize,
    pub author: usize,
    pub eccentricity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: usize,
    pub cell: RunCell,
    pub seed: u64,
    pub rounds: Vec<MetricsRecord>,
    pub max_modularity: f64,
    pub max_community_std: f64,
    pub eccentricities: Option<Vec<EccentricityRecord>>,
}

impl RunResult {
    /// Builds a result, deriving the maxima from the per-round series.
    pub fn from_rounds(
        run_id: usize,
        cell: RunCell,
        seed: u64,
        rounds: Vec<MetricsRecord>,
        eccentricities: Option<Vec<EccentricityRecord>>,
    ) -> Self {
        let max_of = |f: fn(&MetricsRecord) -> f64| rounds.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let max_modularity = max_of(|r| r.modularity);
        let max_community_std = max_of(|r| r.community_std);
        Self { run_id, cell, seed, rounds, max_modularity, max_community_std, eccentricities }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub run_id: usize,
    pub cell: RunCell,
    pub seed: u64,
    pub message: String,
}

/// `|cells| x replications` specs, numbered in grid order.
pub fn expand_grid(config: &ExperimentConfig) -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for cell in config.run_cells() {
        for replication in 0..config.replications {
            let seed = run_seed(config.master_seed, &cell, replication);
            specs.push(RunSpec {
                run_id: specs.len(),
                cell,
                replication,
                seed,
                params: config.cell_params(&cell, seed),
                eccentricity: config.eccentricity,
                inject_nan_after: None,
            });
        }
    }
    specs
}

fn check_finite(state: &SimulationState, record: &MetricsRecord, round: usize) -> Result<()> {
    if let Some(agent) = state.agents.iter().find(|a| !a.idea_state.is_finite()) {
        return Err(Error::NonFinite { what: format!("idea state of agent {}", agent.id), round });
    }
    if let Some((i, j, _)) = state.weights.iter().find(|(_, _, w)| !w.is_finite()) {
        return Err(Error::NonFinite { what: format!("weight w[{i}][{j}]"), round });
    }
    if !record.is_finite() {
        return Err(Error::NonFinite { what: "round metrics".into(), round });
    }
    Ok(())
}

/// Runs one simulation to completion, recording metrics after every round.
pub fn execute(spec: &RunSpec) -> Result<RunResult> {
    execute_observed(spec, |_, _, _| {})
}

/// Like [`execute`], calling `observe` with the post-round state, its metrics
/// and the round's update before the finiteness check.
pub fn execute_observed(
    spec: &RunSpec,
    mut observe: impl FnMut(&SimulationState, &MetricsRecord, &RoundUpdate),
) -> Result<RunResult> {
    let mut state = SimulationState::init(spec.params.clone())?;
    let rounds = spec.params.rounds();
    let mut records = Vec::with_capacity(rounds);
    let mut eccentricities = spec.eccentricity.then(Vec::new);
    for round in 1..=rounds {
        let update = run_round(&mut state, spec.eccentricity);
        if spec.inject_nan_after == Some(round) {
            state.agents[0].idea_state[0] = f64::NAN;
        }
        let record = record_round_metrics(&state);
        observe(&state, &record, &update);
        check_finite(&state, &record, round)?;
        if let Some(out) = eccentricities.as_mut() {
            for &(opinion_id, ecc) in &update.eccentricities {
                if !ecc.is_finite() {
                    return Err(Error::NonFinite { what: format!("eccentricity of opinion {opinion_id}"), round });
                }
                let opinion = &state.opinion_log[opinion_id];
                out.push(EccentricityRecord { round: opinion.round, opinion_id, author: opinion.author, eccentricity: ecc });
            }
        }
        records.push(record);
    }
    Ok(RunResult::from_rounds(spec.run_id, spec.cell, spec.seed, records, eccentricities))
}

/// Outcome of a batch of runs, ordered by run id.
#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub results: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
}

/// Executes specs on a pool of `workers` threads. Failures are isolated per run.
pub fn run_all(specs: &[RunSpec], workers: usize) -> Result<SweepOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParam { name: "workers", reason: e.to_string() })?;
    let total = specs.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let outcomes: Vec<std::result::Result<RunResult, RunFailure>> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                let outcome = execute(spec).map_err(|e| RunFailure {
                    run_id: spec.run_id,
                    cell: spec.cell,
                    seed: spec.seed,
                    message: e.to_string(),
                });
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                match &outcome {
                    Ok(r) => info!(
                        "[{n}/{total}] run {} {} done: max modularity {:.4}",
                        spec.run_id,
                        spec.cell.key(),
                        r.max_modularity
                    ),
                    Err(f) => warn!("[{n}/{total}] run {} {} failed: {}", spec.run_id, spec.cell.key(), f.message),
                }
                outcome
            })
            .collect()
    });
    let mut out = SweepOutcome::default();
    for o in outcomes {
        match o {
            Ok(r) => out.results.push(r),
            Err(f) => out.failures.push(f),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Strategy;

    fn tiny() -> ExperimentConfig {
        let params = SimParams { n: 12, total_opinions: 300, recommendation_size: 5, ..SimParams::default() };
        ExperimentConfig { replications: 2, params, eccentricity: true, ..ExperimentConfig::desk() }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(expand_grid(&ExperimentConfig::paper_network()).len(), 360);
        assert_eq!(expand_grid(&ExperimentConfig::paper_eccentricity()).len(), 72);
        assert_eq!(expand_grid(&ExperimentConfig::desk()).len(), 120);
    }

    #[test]
    fn seeds_are_deterministic_and_position_free() {
        let a = expand_grid(&tiny());
        let b = expand_grid(&tiny());
        assert_eq!(a, b);
        let mut wider = tiny();
        wider.homophily_novelty.insert(0, (0.1, 0.1));
        let c = expand_grid(&wider);
        for spec in &a {
            let same = c.iter().find(|s| s.cell == spec.cell && s.replication == spec.replication).unwrap();
            assert_eq!(same.seed, spec.seed);
        }
        let mut seeds: Vec<u64> = a.iter().map(|s| s.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), a.len());
    }

    #[test]
    fn execute_records_every_round() {
        let spec = &expand_grid(&tiny())[0];
        let r = execute(spec).unwrap();
        assert_eq!(r.rounds.len(), 3);
        assert_eq!(r.rounds.iter().map(|m| m.round).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(r.max_modularity, r.rounds.iter().map(|m| m.modularity).fold(f64::MIN, f64::max));
        assert_eq!(r.eccentricities.as_ref().unwrap().len(), 300);
        assert_eq!(execute(spec).unwrap(), r);
    }

    #[test]
    fn injected_nan_fails_only_that_run() {
        let mut specs = expand_grid(&tiny());
        specs.truncate(3);
        specs[1].inject_nan_after = Some(2);
        let out = run_all(&specs, 2).unwrap();
        assert_eq!(out.results.len(), 2);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].run_id, 1);
        assert!(out.failures[0].message.contains("non-finite"), "{}", out.failures[0].message);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut specs = expand_grid(&tiny());
        specs.retain(|s| s.cell.strategy == Strategy::NOU || s.cell.strategy == Strategy::SC);
        let one = run_all(&specs, 1).unwrap();
        let four = run_all(&specs, 4).unwrap();
        assert_eq!(one.results, four.results);
    }
}
