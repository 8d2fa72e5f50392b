use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BranchSummary, Scenario, ScenarioConfig, TrialResult};
use crate::error::Result;

/// Identifies how trial streams are derived, for run manifests.
pub const RNG_ID: &str = "rand_chacha::ChaCha8Rng seed_from_u64(seed), stream = trial index";

/// z-score of the reported two-sided 95% intervals.
const Z_95: f64 = 1.959_963_984_540_054;

/// The RNG for trial `trial` of a run seeded with `seed`. Streams do not
/// depend on which worker runs the trial or in which order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Frequency of one outcome with a Wilson score interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStat {
    pub outcome: String,
    pub count: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: u64,
    pub outcomes: Vec<OutcomeStat>,
    pub collapsed_trials: u64,
    pub collapse_time_mean: Option<f64>,
    pub collapse_time_median: Option<f64>,
    pub total_hits: u64,
    pub mean_hits: f64,
    pub total_jump_events: u64,
    pub trials_with_jumps: u64,
    pub total_manifestation_events: u64,
    pub pointer_agreement_all: bool,
    /// Every timeline entry of every trial shows the weak anomaly.
    pub weak_anomaly_throughout: bool,
    pub strong_anomaly_throughout: bool,
    pub total_unmeasured_hits: Option<u64>,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub seed: u64,
    pub rng: String,
    pub results: Vec<TrialResult>,
    pub aggregate: Aggregate,
}

/// Run `cfg.trials` independent trials in parallel.
pub fn monte_carlo(scenario: Scenario, cfg: &ScenarioConfig) -> Result<Summary> {
    monte_carlo_with(scenario, cfg, Execution::Parallel)
}

pub fn monte_carlo_with(
    scenario: Scenario,
    cfg: &ScenarioConfig,
    execution: Execution,
) -> Result<Summary> {
    let results = map_trials(scenario, cfg, execution, |r| r)?;
    Ok(Summary {
        scenario,
        seed: cfg.seed,
        rng: RNG_ID.to_string(),
        aggregate: Aggregate::from_results(&results),
        results,
    })
}

/// Run every trial and reduce each result with `f` as soon as it is done,
/// so large runs need not keep full hit logs and timelines in memory.
/// Output is in trial order whatever the execution mode.
pub fn map_trials<T, F>(
    scenario: Scenario,
    cfg: &ScenarioConfig,
    execution: Execution,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(TrialResult) -> T + Sync,
{
    cfg.validate()?;
    let run = |trial: u64| -> Result<T> {
        let mut rng = trial_rng(cfg.seed, trial);
        let mut r = scenario.run_trial(cfg, &mut rng)?;
        r.trial = trial;
        Ok(f(r))
    };
    match execution {
        Execution::Sequential => (0..cfg.trials).map(run).collect(),
        Execution::Parallel => (0..cfg.trials).into_par_iter().map(run).collect(),
    }
}

/// Per-trial fields kept in summaries. Hit logs and timelines are left to
/// the JSON-lines event log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialDigest {
    pub trial: u64,
    pub outcome: Option<String>,
    pub collapse_time: Option<f64>,
    pub hits: u64,
    pub jump_events: u64,
    pub manifestation_events: u64,
    pub pointer_agreement: bool,
    pub counter_value: Option<u32>,
    pub unmeasured_hits: Option<u64>,
    pub timeline_entries: usize,
    pub weak_anomaly_throughout: bool,
    pub strong_anomaly_throughout: bool,
    pub final_state_summary: Vec<BranchSummary>,
}

impl From<&TrialResult> for TrialDigest {
    fn from(r: &TrialResult) -> Self {
        TrialDigest {
            trial: r.trial,
            outcome: r.outcome.clone(),
            collapse_time: r.collapse_time,
            hits: r.hits,
            jump_events: r.jump_events,
            manifestation_events: r.manifestation_events,
            pointer_agreement: r.pointer_agreement,
            counter_value: r.counter_value,
            unmeasured_hits: r.unmeasured_hits,
            timeline_entries: r.anomaly_timeline.len(),
            weak_anomaly_throughout: r.anomaly_timeline.iter().all(|e| e.report.weak_anomaly),
            strong_anomaly_throughout: r.anomaly_timeline.iter().all(|e| e.report.strong_anomaly),
            final_state_summary: r.final_state_summary.clone(),
        }
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub(crate) fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl Aggregate {
    pub fn from_results(results: &[TrialResult]) -> Self {
        let digests: Vec<TrialDigest> = results.iter().map(TrialDigest::from).collect();
        Self::from_digests(&digests)
    }

    pub fn from_digests(results: &[TrialDigest]) -> Self {
        let trials = results.len() as u64;
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for r in results {
            if let Some(o) = &r.outcome {
                *counts.entry(o.as_str()).or_default() += 1;
            }
        }
        let outcomes = counts
            .into_iter()
            .map(|(outcome, count)| {
                let (ci_low, ci_high) = wilson(count, trials, Z_95);
                OutcomeStat {
                    outcome: outcome.to_string(),
                    count,
                    frequency: count as f64 / trials as f64,
                    ci_low,
                    ci_high,
                }
            })
            .collect();

        let mut times: Vec<f64> = results.iter().filter_map(|r| r.collapse_time).collect();
        times.sort_by(f64::total_cmp);
        let collapse_time_mean =
            (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
        let collapse_time_median = (!times.is_empty()).then(|| {
            let m = times.len() / 2;
            if times.len() % 2 == 1 {
                times[m]
            } else {
                0.5 * (times[m - 1] + times[m])
            }
        });

        let total_hits: u64 = results.iter().map(|r| r.hits).sum();
        let unmeasured: Vec<u64> = results.iter().filter_map(|r| r.unmeasured_hits).collect();
        Aggregate {
            trials,
            outcomes,
            collapsed_trials: times.len() as u64,
            collapse_time_mean,
            collapse_time_median,
            total_hits,
            mean_hits: total_hits as f64 / trials.max(1) as f64,
            total_jump_events: results.iter().map(|r| r.jump_events).sum(),
            trials_with_jumps: results.iter().filter(|r| r.jump_events > 0).count() as u64,
            total_manifestation_events: results.iter().map(|r| r.manifestation_events).sum(),
            pointer_agreement_all: results.iter().all(|r| r.pointer_agreement),
            weak_anomaly_throughout: results.iter().all(|r| r.weak_anomaly_throughout),
            strong_anomaly_throughout: results.iter().all(|r| r.strong_anomaly_throughout),
            total_unmeasured_hits: (!unmeasured.is_empty()).then(|| unmeasured.iter().sum()),
            confidence: 0.95,
        }
    }

    pub fn outcome(&self, name: &str) -> Option<&OutcomeStat> {
        self.outcomes.iter().find(|o| o.outcome == name)
    }
}
