//! Seeded experiments: single-marble collapse, the counting anomaly and its
//! persistence under hits, measurement chains, and the two-particle
//! action-at-a-distance setup, with a Monte Carlo driver over them.

mod aaad;
mod chain;
mod config;
mod counting;
mod lattice_demo;
mod monte_carlo;
mod persistence;
mod single;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grw::HitRecord;
use crate::semantics::AnomalyReport;

pub use aaad::{entangled_pair, run_action_at_a_distance};
pub use chain::run_measurement_chain;
pub use config::{ChainOrder, ScenarioConfig, DEFAULT_A_SQ};
pub use counting::{anomaly_sweep, run_counting_anomaly, CountingRow};
pub use lattice_demo::{run_lattice_demo, LatticeDemoConfig, LatticeDemoResult};
pub use monte_carlo::{
    map_trials, monte_carlo, monte_carlo_with, trial_rng, Aggregate, Execution, OutcomeStat,
    Summary, TrialDigest, RNG_ID,
};
pub use persistence::{persistence_params, run_gb_persistence, SCHMIDT_CHECK_MAX_MARBLES};
pub use single::run_single_marble_collapse;

/// Safety cap on hits per trial phase for scenarios that run to collapse.
pub const MAX_HITS_PER_PHASE: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedReport {
    pub time: f64,
    pub report: AnomalyReport,
}

/// Squared mass of one named configuration class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub branch: String,
    pub mass: f64,
    pub log_mass: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub event_log: Vec<HitRecord>,
    pub final_state_summary: Vec<BranchSummary>,
    pub anomaly_timeline: Vec<TimedReport>,
    /// Settled record configurations in which the counter disagrees with
    /// the individual records.
    pub manifestation_events: u64,
    pub pointer_agreement: bool,
    /// The scenario's headline result (final region, counter reading, ...).
    pub outcome: Option<String>,
    pub collapse_time: Option<f64>,
    /// Changes of the effectively collapsed branch after a first collapse.
    pub jump_events: u64,
    pub hits: u64,
    /// Final counter reading, for measurement chains.
    pub counter_value: Option<u32>,
    /// Hits during the no-measurement control window (action at a distance).
    pub unmeasured_hits: Option<u64>,
}

impl TrialResult {
    pub(crate) fn record(&mut self, keep: bool, rec: HitRecord) {
        self.hits += 1;
        if keep {
            self.event_log.push(rec);
        }
    }
}

/// The stochastic scenarios that can be run under [`monte_carlo`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SingleMarble,
    GbPersistence,
    MeasureChain,
    Aaad,
}

impl Scenario {
    pub fn run_trial<R: Rng + ?Sized>(
        &self,
        cfg: &ScenarioConfig,
        rng: &mut R,
    ) -> Result<TrialResult> {
        match self {
            Scenario::SingleMarble => run_single_marble_collapse(cfg, rng),
            Scenario::GbPersistence => run_gb_persistence(cfg, rng),
            Scenario::MeasureChain => run_measurement_chain(cfg, rng),
            Scenario::Aaad => run_action_at_a_distance(cfg, rng),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SingleMarble => "single-marble",
            Scenario::GbPersistence => "gb-persistence",
            Scenario::MeasureChain => "measure-chain",
            Scenario::Aaad => "aaad",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Scenario::SingleMarble,
            Scenario::GbPersistence,
            Scenario::MeasureChain,
            Scenario::Aaad,
        ]
        .into_iter()
        .find(|sc| sc.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown scenario {s:?}")))
    }
}
