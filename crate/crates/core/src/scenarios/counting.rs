use serde::{Deserialize, Serialize};

use super::ScenarioConfig;
use crate::error::Result;
use crate::semantics::{enumeration_check, AnomalyReport, FuzzyConfig};
use crate::state::ProductState;

/// `n` independent marbles at `|a|²` each, judged by the enumeration check.
pub fn run_counting_anomaly(cfg: &ScenarioConfig) -> Result<AnomalyReport> {
    cfg.fuzzy.validate()?;
    let state = ProductState::uniform(cfg.n_marbles, cfg.a_sq)?;
    enumeration_check(&state, &cfg.fuzzy)
}

/// One row of an anomaly-threshold table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub n: usize,
    pub a_sq: f64,
    pub p: f64,
    pub joint_mass: f64,
    pub weak: bool,
    pub strong: bool,
}

impl CountingRow {
    pub fn from_report(n: usize, a_sq: f64, p: f64, report: &AnomalyReport) -> Self {
        CountingRow {
            n,
            a_sq,
            p,
            joint_mass: report.joint_mass,
            weak: report.weak_anomaly,
            strong: report.strong_anomaly,
        }
    }
}

/// The counting anomaly over the grid `ns × a_sqs × ps`, in that nesting
/// order. `base` supplies everything else (notably `p_all`).
pub fn anomaly_sweep(
    base: &ScenarioConfig,
    ns: &[usize],
    a_sqs: &[f64],
    ps: &[f64],
) -> Result<Vec<CountingRow>> {
    let mut rows = Vec::with_capacity(ns.len() * a_sqs.len() * ps.len());
    for &n in ns {
        for &a_sq in a_sqs {
            for &p in ps {
                let cfg = ScenarioConfig {
                    n_marbles: n,
                    a_sq,
                    fuzzy: FuzzyConfig { p, ..base.fuzzy },
                    ..base.clone()
                };
                let report = run_counting_anomaly(&cfg)?;
                rows.push(CountingRow::from_report(n, a_sq, p, &report));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(n: usize) -> AnomalyReport {
        run_counting_anomaly(&ScenarioConfig {
            n_marbles: n,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn thresholds_at_the_default_mass() {
        let two = report(2);
        assert!(!two.weak_anomaly);
        assert!((two.joint_mass - 0.9025).abs() < 1e-12);
        let three = report(3);
        assert!(three.weak_anomaly && !three.strong_anomaly);
        assert!((three.joint_mass - 0.857375).abs() < 1e-12);
        assert!(!report(44).strong_anomaly);
        assert!(report(45).strong_anomaly);
    }

    #[test]
    fn sweep_nests_n_then_mass_then_p() {
        let rows =
            anomaly_sweep(&ScenarioConfig::default(), &[2, 3], &[0.95], &[0.1, 0.2]).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.p)).collect();
        assert_eq!(keys, vec![(2, 0.1), (2, 0.2), (3, 0.1), (3, 0.2)]);
        // at p = 0.2 three marbles at 0.857 jointly still pass
        assert!(!rows[3].weak);
    }

    #[test]
    fn invalid_p_is_rejected() {
        let err = anomaly_sweep(&ScenarioConfig::default(), &[2], &[0.95], &[0.6]).unwrap_err();
        assert!(err.to_string().contains("p must lie in (0, 0.5)"));
    }
}
