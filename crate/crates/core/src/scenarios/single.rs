use rand::Rng;

use super::{BranchSummary, ScenarioConfig, TimedReport, TrialResult};
use crate::error::{Error, Result};
use crate::grw::{apply_marble_hit, sample_next_hit};
use crate::semantics::enumeration_check;
use crate::state::{Label, ProductState};

/// One marble starting with `|a|² = cfg.a_sq`, hit for `cfg.duration`
/// seconds. Records the first time a region holds `eta_collapse` of the
/// mass, and every later flip of the dominant region.
pub fn run_single_marble_collapse<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<TrialResult> {
    if cfg.n_marbles != 1 {
        return Err(Error::invalid("single-marble collapse needs n = 1"));
    }
    let params = &cfg.grw;
    let mut state = ProductState::uniform(1, cfg.a_sq)?;
    let mut result = TrialResult {
        pointer_agreement: true,
        ..Default::default()
    };
    result.anomaly_timeline.push(TimedReport {
        time: 0.0,
        report: enumeration_check(&state, &cfg.fuzzy)?,
    });

    let counts = [params.particles_per_marble];
    let mut now = 0.0;
    let mut settled: Option<Label> = None;
    let initial = state.marble(0)?;
    if initial.mass(initial.dominant_region()) >= params.eta_collapse {
        result.collapse_time = Some(0.0);
        settled = Some(initial.dominant_region());
    }
    while let Some((t, _)) = sample_next_hit(rng, params, &counts, now) {
        if t > cfg.duration {
            break;
        }
        now = t;
        let (next, rec) = apply_marble_hit(&state, 0, rng, params, now)?;
        state = next;
        result.record(cfg.keep_event_log, rec);

        let factor = state.marble(0)?;
        let region = factor.dominant_region();
        if factor.mass(region) >= params.eta_collapse {
            match settled {
                None => result.collapse_time = Some(now),
                Some(prev) if prev != region => result.jump_events += 1,
                Some(_) => {}
            }
            settled = Some(region);
        }
    }

    let factor = state.marble(0)?;
    let region = factor.dominant_region();
    result.outcome = Some(region.to_string());
    result.final_state_summary = Label::REGIONS
        .iter()
        .map(|&l| BranchSummary {
            branch: format!("m1={l}"),
            mass: factor.mass(l),
            log_mass: factor.log_mass(l),
        })
        .collect();
    result.anomaly_timeline.push(TimedReport {
        time: now,
        report: enumeration_check(&state, &cfg.fuzzy)?,
    });
    Ok(result)
}
