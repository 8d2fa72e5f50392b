use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grw::GrwParams;
use crate::semantics::FuzzyConfig;
use crate::state::DEFAULT_DENSE_LIMIT;

pub const DEFAULT_A_SQ: f64 = 0.95;

/// Which apparatus is coupled first in a measurement chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainOrder {
    /// Per-marble apparatuses, then the counter.
    #[default]
    #[serde(alias = "individual")]
    IndividualFirst,
    /// The counter, then the per-marble apparatuses.
    #[serde(alias = "collective")]
    CollectiveFirst,
}

impl FromStr for ChainOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "individual" | "individual-first" => Ok(ChainOrder::IndividualFirst),
            "collective" | "collective-first" => Ok(ChainOrder::CollectiveFirst),
            other => Err(Error::invalid(format!(
                "order must be individual or collective, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for ChainOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainOrder::IndividualFirst => "individual-first",
            ChainOrder::CollectiveFirst => "collective-first",
        })
    }
}

/// Everything a scenario run depends on besides its RNG stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_marbles: usize,
    /// Initial `|a|²`, the squared amplitude for "in the box".
    pub a_sq: f64,
    pub fuzzy: FuzzyConfig,
    pub grw: GrwParams,
    /// Simulated time window in seconds.
    pub duration: f64,
    pub trials: u64,
    pub seed: u64,
    pub order: ChainOrder,
    pub dense_limit: usize,
    /// Particles in each measuring apparatus, counter and observer.
    pub apparatus_particles: f64,
    /// Add an observer memory that forms a judgement of the count.
    pub with_observer: bool,
    /// Keep per-trial hit logs in the results.
    pub keep_event_log: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let grw = GrwParams::default();
        ScenarioConfig {
            n_marbles: 10,
            a_sq: DEFAULT_A_SQ,
            fuzzy: FuzzyConfig::default(),
            apparatus_particles: grw.particles_per_marble,
            grw,
            duration: 1e-6,
            trials: 1000,
            seed: 0,
            order: ChainOrder::IndividualFirst,
            dense_limit: DEFAULT_DENSE_LIMIT,
            with_observer: false,
            keep_event_log: true,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n_marbles < 1 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !(self.a_sq > 0.0 && self.a_sq <= 1.0) {
            return Err(Error::invalid(format!(
                "a_sq must lie in (0, 1], got {}",
                self.a_sq
            )));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(
                "duration must be a finite non-negative time",
            ));
        }
        if !(self.apparatus_particles > 0.0 && self.apparatus_particles.is_finite()) {
            return Err(Error::invalid("apparatus_particles must be > 0"));
        }
        self.fuzzy.validate()?;
        self.grw.validate()
    }
}
