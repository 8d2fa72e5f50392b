use rand::Rng;

use super::{BranchSummary, ScenarioConfig, TimedReport, TrialResult};
use crate::error::Result;
use crate::grw::{apply_marble_hit, sample_next_hit, GrwParams};
use crate::semantics::{enumeration_check, AnomalyReport};
use crate::state::{Label, ProductState, RANK_ONE_TOLERANCE};

/// Largest marble count for which product form is re-checked through a
/// dense Schmidt decomposition after every hit.
pub const SCHMIDT_CHECK_MAX_MARBLES: usize = 8;

/// Hit dynamics used by the persistence run. Unless configured otherwise a
/// marble never localizes beyond its initial `|a|²`: the starting state is
/// taken to be as collapsed as the dynamics ever gets.
pub fn persistence_params(cfg: &ScenarioConfig) -> GrwParams {
    let mut params = cfg.grw.clone();
    if params.localization_ceiling.is_none() && cfg.a_sq > 0.5 && cfg.a_sq < 1.0 {
        params.localization_ceiling = Some(cfg.a_sq);
    }
    params
}

/// `n` marbles at `|a|²` each, hit (marbles only) for `cfg.duration`
/// seconds. After every hit the conjunction "each marble lies in its
/// dominant region" is re-judged and appended to the timeline.
pub fn run_gb_persistence<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<TrialResult> {
    let params = persistence_params(cfg);
    let n = cfg.n_marbles;
    let mut state = ProductState::uniform(n, cfg.a_sq)?;
    let mut result = TrialResult {
        pointer_agreement: true,
        ..Default::default()
    };
    let mut report = enumeration_check(&state, &cfg.fuzzy)?;
    let mut dominant = report.assignment.clone();
    result.anomaly_timeline.push(TimedReport {
        time: 0.0,
        report: report.clone(),
    });

    let counts = vec![params.particles_per_marble; n];
    let mut now = 0.0;
    while let Some((t, marble)) = sample_next_hit(rng, &params, &counts, now) {
        if t > cfg.duration {
            break;
        }
        now = t;
        let (next, rec) = apply_marble_hit(&state, marble, rng, &params, now)?;
        state = next;
        result.record(cfg.keep_event_log, rec);
        if n <= SCHMIDT_CHECK_MAX_MARBLES {
            assert_product_form(&state)?;
        }

        report = enumeration_check(&state, &cfg.fuzzy)?;
        if report.assignment[marble] != dominant[marble] {
            result.jump_events += 1;
        }
        dominant.clone_from(&report.assignment);
        result.anomaly_timeline.push(TimedReport {
            time: now,
            report: report.clone(),
        });
    }

    result.outcome = Some(anomaly_label(&report).to_string());
    result.final_state_summary = summarize(&state, &report)?;
    Ok(result)
}

fn anomaly_label(report: &AnomalyReport) -> &'static str {
    if report.strong_anomaly {
        "strong"
    } else if report.weak_anomaly {
        "weak"
    } else {
        "none"
    }
}

fn summarize(state: &ProductState, report: &AnomalyReport) -> Result<Vec<BranchSummary>> {
    let name = report
        .assignment
        .iter()
        .enumerate()
        .map(|(i, l)| format!("m{}={l}", i + 1))
        .collect::<Vec<_>>()
        .join(",");
    let mut rows = vec![BranchSummary {
        branch: name,
        mass: report.joint_mass,
        log_mass: report.log_joint_mass,
    }];
    let in_all: Vec<_> = (0..state.len()).map(|i| (i, Label::In)).collect();
    let log_mass = state.joint_log_mass(&in_all)?;
    rows.push(BranchSummary {
        branch: "all in".into(),
        mass: log_mass.exp(),
        log_mass,
    });
    Ok(rows)
}

fn assert_product_form(state: &ProductState) -> Result<()> {
    let dense = state.expand()?;
    for cut in 1..state.len() {
        let left: Vec<usize> = (0..cut).collect();
        let check = dense.schmidt_rank_one_check(&left)?;
        assert!(
            check.deviation < RANK_ONE_TOLERANCE,
            "hit dynamics broke product form across cut {cut}: {}",
            check.deviation
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n: usize, a_sq: f64, duration: f64) -> ScenarioConfig {
        ScenarioConfig {
            n_marbles: n,
            a_sq,
            duration,
            keep_event_log: false,
            ..Default::default()
        }
    }

    #[test]
    fn zero_duration_keeps_only_the_initial_report() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = run_gb_persistence(&cfg(45, 0.95, 0.0), &mut rng).unwrap();
        assert_eq!(r.anomaly_timeline.len(), 1);
        assert_eq!(r.anomaly_timeline[0].time, 0.0);
        assert!(r.anomaly_timeline[0].report.strong_anomaly);
    }

    #[test]
    fn strong_anomaly_survives_every_hit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = run_gb_persistence(&cfg(45, 0.95, 1e-9), &mut rng).unwrap();
        assert!(r.hits > 10);
        assert_eq!(r.anomaly_timeline.len() as u64, r.hits + 1);
        assert!(r.anomaly_timeline.iter().all(|e| e.report.strong_anomaly));
        assert_eq!(r.outcome.as_deref(), Some("strong"));
    }

    #[test]
    fn eigenstates_never_show_an_anomaly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = run_gb_persistence(&cfg(45, 1.0, 1e-10), &mut rng).unwrap();
        assert!(r.anomaly_timeline.iter().all(|e| !e.report.weak_anomaly));
        assert!(r
            .anomaly_timeline
            .iter()
            .all(|e| (e.report.joint_mass - 1.0).abs() < 1e-12));
    }

    #[test]
    fn small_runs_pass_the_product_form_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = run_gb_persistence(&cfg(6, 0.7, 1e-9), &mut rng).unwrap();
        assert!(r.hits > 0);
    }

    #[test]
    fn explicit_ceiling_is_respected() {
        let mut c = cfg(3, 0.95, 0.0);
        c.grw.localization_ceiling = Some(0.99);
        assert_eq!(persistence_params(&c).localization_ceiling, Some(0.99));
        c.grw.localization_ceiling = None;
        assert_eq!(persistence_params(&c).localization_ceiling, Some(0.95));
        c.a_sq = 0.3;
        assert_eq!(persistence_params(&c).localization_ceiling, None);
    }
}
