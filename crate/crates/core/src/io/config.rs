//! Sectioned configuration files.
//!
//! ```toml
//! [run]
//! trials = 1000
//! seed = 42
//!
//! [scenario]
//! n_marbles = 10
//! a_sq = 0.95
//! order = "collective-first"
//!
//! [fuzzy]
//! p = 0.1
//!
//! [grw]
//! lambda_hit = 1e-15
//! epsilon_floor = 1e-12
//! ```
//!
//! Every key is optional. Missing keys take their defaults and command-line
//! overrides win over the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grw::{
    derived_epsilon, CenterSampling, WidthConvention, DEFAULT_EPSILON_FLOOR,
    DEFAULT_REGION_SEPARATION_CM,
};
use crate::scenarios::{ChainOrder, LatticeDemoConfig, ScenarioConfig};
use crate::semantics::FuzzyConfig;

/// Grid of an anomaly-threshold sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub a_sq: Vec<f64>,
    pub p: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            n: (1..=60).collect(),
            a_sq: vec![0.9, 0.95, 0.99],
            p: vec![0.05, 0.1, 0.2],
        }
    }
}

/// Everything a run reads from its configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub lattice: LatticeDemoConfig,
    pub sweep: SweepGrid,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.lattice.validate()?;
        if self.sweep.n.contains(&0) {
            return Err(Error::invalid("sweep n values must be at least 1"));
        }
        for &a in &self.sweep.a_sq {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid(format!(
                    "sweep a_sq must lie in (0, 1], got {a}"
                )));
            }
        }
        for &p in &self.sweep.p {
            FuzzyConfig::new(p)?;
        }
        Ok(())
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub a_sq: Option<f64>,
    pub epsilon: Option<f64>,
    pub order: Option<ChainOrder>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileRun {
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_marbles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<ChainOrder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense_limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    apparatus_particles: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    with_observer: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    keep_event_log: Option<bool>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileFuzzy {
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_all: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileGrw {
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_jump: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width_convention: Option<WidthConvention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    particles_per_marble: Option<f64>,
    /// Explicit leakage; when absent it is derived from the geometry.
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_leak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region_separation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_collapse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center_sampling: Option<CenterSampling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    localization_ceiling: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileLattice {
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bump_std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_jump: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileSweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_sq: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    run: FileRun,
    scenario: FileScenario,
    fuzzy: FileFuzzy,
    grw: FileGrw,
    lattice: FileLattice,
    sweep: FileSweep,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl FileConfig {
    fn resolve(self, o: &Overrides) -> RunConfig {
        let mut cfg = RunConfig::default();

        let s = &mut cfg.scenario;
        set(&mut s.trials, self.run.trials);
        set(&mut s.seed, self.run.seed);
        set(&mut s.n_marbles, self.scenario.n_marbles);
        set(&mut s.a_sq, self.scenario.a_sq);
        set(&mut s.duration, self.scenario.duration);
        set(&mut s.order, self.scenario.order);
        set(&mut s.dense_limit, self.scenario.dense_limit);
        set(
            &mut s.apparatus_particles,
            self.scenario.apparatus_particles,
        );
        set(&mut s.with_observer, self.scenario.with_observer);
        set(&mut s.keep_event_log, self.scenario.keep_event_log);
        set(&mut s.fuzzy.p, self.fuzzy.p);
        s.fuzzy.p_all = self.fuzzy.p_all;

        let g = &mut s.grw;
        set(&mut g.lambda_hit, self.grw.lambda_hit);
        set(&mut g.sigma_jump, self.grw.sigma_jump);
        set(&mut g.width_convention, self.grw.width_convention);
        set(&mut g.particles_per_marble, self.grw.particles_per_marble);
        set(&mut g.eta_collapse, self.grw.eta_collapse);
        set(&mut g.center_sampling, self.grw.center_sampling);
        g.localization_ceiling = self.grw.localization_ceiling;
        g.epsilon_leak = self.grw.epsilon_leak.unwrap_or_else(|| {
            derived_epsilon(
                self.grw
                    .region_separation
                    .unwrap_or(DEFAULT_REGION_SEPARATION_CM),
                g.sigma_jump,
                self.grw.epsilon_floor.unwrap_or(DEFAULT_EPSILON_FLOOR),
            )
        });

        set(&mut s.trials, o.trials);
        set(&mut s.seed, o.seed);
        set(&mut s.n_marbles, o.n);
        set(&mut s.a_sq, o.a_sq);
        set(&mut s.fuzzy.p, o.p);
        set(&mut s.grw.epsilon_leak, o.epsilon);
        set(&mut s.order, o.order);

        let l = &mut cfg.lattice;
        set(&mut l.points, self.lattice.points);
        set(&mut l.dx, self.lattice.dx);
        set(&mut l.separation, self.lattice.separation);
        set(&mut l.bump_std, self.lattice.bump_std);
        set(&mut l.mass, self.lattice.mass);
        set(&mut l.dt, self.lattice.dt);
        set(&mut l.steps, self.lattice.steps);
        set(&mut l.hits, self.lattice.hits);
        set(&mut l.sigma_jump, self.lattice.sigma_jump);

        set(&mut cfg.sweep.n, self.sweep.n);
        set(&mut cfg.sweep.a_sq, self.sweep.a_sq);
        set(&mut cfg.sweep.p, self.sweep.p);
        if let Some(p) = o.p {
            cfg.sweep.p = vec![p];
        }
        if let Some(a) = o.a_sq {
            cfg.sweep.a_sq = vec![a];
        }
        if let Some(n) = o.n {
            cfg.sweep.n = vec![n];
        }
        cfg
    }

    fn from_resolved(cfg: &RunConfig) -> Self {
        let s = &cfg.scenario;
        let g = &s.grw;
        let l = &cfg.lattice;
        FileConfig {
            run: FileRun {
                trials: Some(s.trials),
                seed: Some(s.seed),
            },
            scenario: FileScenario {
                n_marbles: Some(s.n_marbles),
                a_sq: Some(s.a_sq),
                duration: Some(s.duration),
                order: Some(s.order),
                dense_limit: Some(s.dense_limit),
                apparatus_particles: Some(s.apparatus_particles),
                with_observer: Some(s.with_observer),
                keep_event_log: Some(s.keep_event_log),
            },
            fuzzy: FileFuzzy {
                p: Some(s.fuzzy.p),
                p_all: s.fuzzy.p_all,
            },
            grw: FileGrw {
                lambda_hit: Some(g.lambda_hit),
                sigma_jump: Some(g.sigma_jump),
                width_convention: Some(g.width_convention),
                particles_per_marble: Some(g.particles_per_marble),
                epsilon_leak: Some(g.epsilon_leak),
                region_separation: None,
                epsilon_floor: None,
                eta_collapse: Some(g.eta_collapse),
                center_sampling: Some(g.center_sampling),
                localization_ceiling: g.localization_ceiling,
            },
            lattice: FileLattice {
                points: Some(l.points),
                dx: Some(l.dx),
                separation: Some(l.separation),
                bump_std: Some(l.bump_std),
                mass: Some(l.mass),
                dt: Some(l.dt),
                steps: Some(l.steps),
                hits: Some(l.hits),
                sigma_jump: Some(l.sigma_jump),
            },
            sweep: FileSweep {
                n: Some(cfg.sweep.n.clone()),
                a_sq: Some(cfg.sweep.a_sq.clone()),
                p: Some(cfg.sweep.p.clone()),
            },
        }
    }
}

/// Resolve configuration text plus overrides into a validated config.
pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<RunConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let cfg = file.resolve(overrides);
    cfg.validate()?;
    Ok(cfg)
}

/// Read `path` (or start from defaults when `None`) and apply overrides.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

/// The fully resolved configuration in file form; parses back to `cfg`.
pub fn to_toml(cfg: &RunConfig) -> Result<String> {
    toml::to_string(&FileConfig::from_resolved(cfg)).map_err(|e| Error::Serialize(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config_str("", &Overrides::default()).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.scenario.a_sq, 0.95);
        assert_eq!(cfg.scenario.fuzzy.p, 0.1);
        assert_eq!(cfg.scenario.grw.lambda_hit, 1e-15);
        assert_eq!(cfg.scenario.grw.sigma_jump, 1e-5);
        assert_eq!(cfg.scenario.grw.particles_per_marble, 6e23);
        assert_eq!(cfg.scenario.grw.epsilon_leak, 1e-12);
    }

    #[test]
    fn flags_beat_the_file() {
        let text = "[scenario]\nn_marbles = 45\n[fuzzy]\np = 0.2\n";
        let o = Overrides {
            n: Some(10),
            ..Default::default()
        };
        let cfg = parse_config_str(text, &o).unwrap();
        assert_eq!(cfg.scenario.n_marbles, 10);
        assert_eq!(cfg.scenario.fuzzy.p, 0.2);
    }

    #[test]
    fn out_of_range_p_names_the_invariant() {
        let o = Overrides {
            p: Some(0.6),
            ..Default::default()
        };
        let err = parse_config_str("", &o).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("p must lie in (0, 0.5)"));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let err = parse_config_str("[grw]\nlamda = 1.0\n", &Overrides::default()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn epsilon_follows_the_geometry_unless_given() {
        let text = "[grw]\nsigma_jump = 1.0\nregion_separation = 2.0\n";
        let cfg = parse_config_str(text, &Overrides::default()).unwrap();
        assert!((cfg.scenario.grw.epsilon_leak - (-1.0f64).exp()).abs() < 1e-15);
        let cfg = parse_config_str("[grw]\nepsilon_leak = 0.001\n", &Overrides::default()).unwrap();
        assert_eq!(cfg.scenario.grw.epsilon_leak, 1e-3);
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.scenario.order = ChainOrder::CollectiveFirst;
        cfg.scenario.fuzzy.p_all = Some(0.3);
        cfg.scenario.grw.localization_ceiling = Some(0.97);
        cfg.lattice.steps = 7;
        let text = to_toml(&cfg).unwrap();
        assert_eq!(parse_config_str(&text, &Overrides::default()).unwrap(), cfg);
    }

    #[test]
    fn missing_file_reports_its_path() {
        let err = parse_config(
            Some(Path::new("/no/such/dir/run.toml")),
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/no/such/dir/run.toml"));
    }
}
