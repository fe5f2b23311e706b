//! Per-cell aggregation and strategy comparisons.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::stats::{iqr, mann_whitney_less, median, quantile};
use super::{ParamCell, RunResult};
use crate::error::{Error, Result};
use crate::state::Strategy;

/// Opinions from earlier rounds are excluded from pooled eccentricities.
pub const ECCENTRICITY_BURN_IN: usize = 5;

/// Runs per strategy required before p-values are reported.
pub const MIN_REPLICATIONS: usize = 3;

pub const SIGNIFICANCE: f64 = 0.05;

const OPINION_STRATEGIES: [Strategy; 2] = [Strategy::NO, Strategy::FO];
const BASELINES: [Strategy; 4] = [Strategy::SC, Strategy::NU, Strategy::FU, Strategy::NOU];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MaxModularity,
    MaxCommunityStd,
    Eccentricity,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::MaxModularity, Metric::MaxCommunityStd, Metric::Eccentricity];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::MaxModularity => "max_modularity",
            Metric::MaxCommunityStd => "max_community_std",
            Metric::Eccentricity => "eccentricity",
        }
    }

    /// Opinion recommendation is expected to lower network metrics and raise eccentricity.
    pub fn opinion_strategies_lower(self) -> bool {
        !matches!(self, Metric::Eccentricity)
    }

    /// Sample contributed by one run; `None` if the run did not record it.
    pub fn sample(self, run: &RunResult) -> Option<Vec<f64>> {
        match self {
            Metric::MaxModularity => Some(vec![run.max_modularity]),
            Metric::MaxCommunityStd => Some(vec![run.max_community_std]),
            Metric::Eccentricity => run.eccentricities.as_ref().map(|e| {
                e.iter().filter(|r| r.round >= ECCENTRICITY_BURN_IN).map(|r| r.eccentricity).collect()
            }),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub strategy: Strategy,
    pub runs: usize,
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

/// One-sided test of an opinion strategy against a baseline in the
/// hypothesized direction of `metric`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub opinion: Strategy,
    pub baseline: Strategy,
    /// `less` when the opinion strategy is hypothesized lower, else `greater`.
    pub alternative: String,
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

impl PairTest {
    pub fn significant(&self) -> bool {
        self.p < SIGNIFICANCE
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub cell: ParamCell,
    pub metric: Metric,
    pub strategies: Vec<StrategyStats>,
    pub tests: Vec<PairTest>,
    pub underpowered: bool,
}

impl ComparisonReport {
    pub fn stats(&self, s: Strategy) -> Option<&StrategyStats> {
        self.strategies.iter().find(|x| x.strategy == s)
    }

    pub fn test(&self, opinion: Strategy, baseline: Strategy) -> Option<&PairTest> {
        self.tests.iter().find(|t| t.opinion == opinion && t.baseline == baseline)
    }
}

fn cell_samples(results: &[RunResult], metric: Metric, cell: &ParamCell, strategy: Strategy) -> Option<(usize, Vec<f64>)> {
    let mut runs: Vec<&RunResult> =
        results.iter().filter(|r| r.cell.strategy == strategy && r.cell.params.same(cell)).collect();
    runs.sort_by_key(|r| r.run_id);
    let mut pooled = Vec::new();
    let mut count = 0;
    for run in runs {
        pooled.extend(metric.sample(run)?);
        count += 1;
    }
    (count > 0).then_some((count, pooled))
}

/// Medians, IQRs and one-sided rank-sum tests of NO/FO against each baseline.
///
/// Errors when fewer than two strategies have data in `cell`. Any strategy
/// with fewer than [`MIN_REPLICATIONS`] runs marks the report underpowered
/// and suppresses p-values.
pub fn compare_strategies(results: &[RunResult], metric: Metric, cell: &ParamCell) -> Result<ComparisonReport> {
    let mut samples = Vec::new();
    for s in Strategy::ALL {
        if let Some((runs, values)) = cell_samples(results, metric, cell, s) {
            if !values.is_empty() {
                samples.push((s, runs, values));
            }
        }
    }
    if samples.len() < 2 {
        return Err(Error::Comparison(format!(
            "{metric} in cell {} needs at least two strategies with data, found {}",
            cell.key(),
            samples.len()
        )));
    }
    let strategies: Vec<StrategyStats> = samples
        .iter()
        .map(|(s, runs, v)| StrategyStats {
            strategy: *s,
            runs: *runs,
            count: v.len(),
            median: median(v).expect("non-empty"),
            q1: quantile(v, 0.25).expect("non-empty"),
            q3: quantile(v, 0.75).expect("non-empty"),
            iqr: iqr(v).expect("non-empty"),
        })
        .collect();
    let underpowered = samples.iter().any(|(_, runs, _)| *runs < MIN_REPLICATIONS);
    let mut tests = Vec::new();
    if !underpowered {
        let lower = metric.opinion_strategies_lower();
        let find = |s: Strategy| samples.iter().find(|x| x.0 == s).map(|x| &x.2);
        for opinion in OPINION_STRATEGIES {
            for baseline in BASELINES {
                let (Some(o), Some(b)) = (find(opinion), find(baseline)) else { continue };
                let mw = if lower { mann_whitney_less(o, b) } else { mann_whitney_less(b, o) }.expect("non-empty");
                tests.push(PairTest {
                    opinion,
                    baseline,
                    alternative: if lower { "less" } else { "greater" }.to_string(),
                    u: mw.u,
                    p: mw.p_less,
                    exact: mw.exact,
                });
            }
        }
    }
    Ok(ComparisonReport { cell: *cell, metric, strategies, tests, underpowered })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EccentricityQuantiles {
    pub count: usize,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub runs: usize,
    pub max_modularity: SummaryStat,
    pub max_community_std: SummaryStat,
    pub eccentricity: Option<EccentricityQuantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(flatten)]
    pub cell: ParamCell,
    pub strategies: Vec<StrategySummary>,
    pub underpowered: bool,
    pub max_modularity_tests: Vec<PairTest>,
    pub max_community_std_tests: Vec<PairTest>,
    pub eccentricity_tests: Vec<PairTest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn cell(&self, cell: &ParamCell) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.cell.same(cell))
    }
}

fn stat(v: &[f64]) -> SummaryStat {
    SummaryStat {
        median: median(v).expect("non-empty"),
        q1: quantile(v, 0.25).expect("non-empty"),
        q3: quantile(v, 0.75).expect("non-empty"),
        iqr: iqr(v).expect("non-empty"),
    }
}

/// Aggregates runs by parameter cell. Depends only on the set of results.
pub fn summarize(results: &[RunResult]) -> Summary {
    let mut results: Vec<RunResult> = results.to_vec();
    results.sort_by_key(|r| r.run_id);
    let mut cells: Vec<ParamCell> = Vec::new();
    for r in &results {
        if !cells.iter().any(|c| c.same(&r.cell.params)) {
            cells.push(r.cell.params);
        }
    }
    cells.sort_by_key(ParamCell::sort_key);

    let cells = cells
        .into_iter()
        .map(|cell| {
            let mut strategies = Vec::new();
            let mut underpowered = false;
            for s in Strategy::ALL {
                let runs: Vec<&RunResult> =
                    results.iter().filter(|r| r.cell.strategy == s && r.cell.params.same(&cell)).collect();
                if runs.is_empty() {
                    continue;
                }
                underpowered |= runs.len() < MIN_REPLICATIONS;
                let q: Vec<f64> = runs.iter().map(|r| r.max_modularity).collect();
                let sd: Vec<f64> = runs.iter().map(|r| r.max_community_std).collect();
                let ecc = cell_samples(&results, Metric::Eccentricity, &cell, s)
                    .filter(|(_, v)| !v.is_empty())
                    .map(|(_, v)| EccentricityQuantiles {
                        count: v.len(),
                        q05: quantile(&v, 0.05).expect("non-empty"),
                        q25: quantile(&v, 0.25).expect("non-empty"),
                        median: median(&v).expect("non-empty"),
                        q75: quantile(&v, 0.75).expect("non-empty"),
                        q95: quantile(&v, 0.95).expect("non-empty"),
                    });
                strategies.push(StrategySummary {
                    strategy: s,
                    runs: runs.len(),
                    max_modularity: stat(&q),
                    max_community_std: stat(&sd),
                    eccentricity: ecc,
                });
            }
            let tests = |m: Metric| compare_strategies(&results, m, &cell).map(|r| r.tests).unwrap_or_default();
            CellSummary {
                cell,
                strategies,
                underpowered,
                max_modularity_tests: tests(Metric::MaxModularity),
                max_community_std_tests: tests(Metric::MaxCommunityStd),
                eccentricity_tests: tests(Metric::Eccentricity),
            }
        })
        .collect();
    Summary { runs: results.len(), cells }
}
