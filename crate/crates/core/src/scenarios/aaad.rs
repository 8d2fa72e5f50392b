use rand::Rng;

use super::{BranchSummary, ScenarioConfig, TimedReport, TrialResult, MAX_HITS_PER_PHASE};
use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::grw::{apply_sparse_hit_in_place, effective_collapse_status, sample_next_hit};
use crate::semantics::enumeration_check;
use crate::state::{Label, SparseState, Subsystem, SubsystemKind};

/// `a|in⟩_L|in⟩_R + b|out⟩_L|out⟩_R` with `|a|² = cfg.a_sq`.
pub fn entangled_pair(a_sq: f64) -> Result<SparseState> {
    let particle = |index, name: &str| Subsystem {
        name: name.into(),
        kind: SubsystemKind::Marble { index },
        particles: 1.0,
    };
    SparseState::from_pairs(
        vec![particle(0, "L"), particle(1, "R")],
        [
            (vec![Label::In, Label::In], Amplitude::from_mass(a_sq)),
            (
                vec![Label::Out, Label::Out],
                Amplitude::from_mass(1.0 - a_sq),
            ),
        ],
    )
}

/// Two entangled single particles. For `cfg.duration` seconds nothing but
/// the two particles can be hit; then an apparatus measures L and hits run
/// until the pair and the apparatus are effectively collapsed. The outcome
/// is R's final region.
pub fn run_action_at_a_distance<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<TrialResult> {
    let params = &cfg.grw;
    let mut state = entangled_pair(cfg.a_sq)?;
    let mut result = TrialResult {
        pointer_agreement: true,
        ..Default::default()
    };
    result.anomaly_timeline.push(TimedReport {
        time: 0.0,
        report: enumeration_check(&state, &cfg.fuzzy)?,
    });

    let mut now = 0.0;
    let mut unmeasured = 0u64;
    let bare: Vec<f64> = state.roster().iter().map(|s| s.particles).collect();
    while let Some((t, target)) = sample_next_hit(rng, params, &bare, now) {
        if t > cfg.duration {
            break;
        }
        now = t;
        unmeasured += 1;
        let rec = apply_sparse_hit_in_place(&mut state, target, rng, params, now)?;
        result.record(cfg.keep_event_log, rec);
    }
    result.unmeasured_hits = Some(unmeasured);
    now = cfg.duration;

    state = state.append_ready(Subsystem {
        name: "M_L".into(),
        kind: SubsystemKind::Apparatus { target: 0 },
        particles: cfg.apparatus_particles,
    })?;
    state = state.relabel(2, |c| match c.get(0) {
        Label::In => Label::RecordIn,
        _ => Label::RecordOut,
    })?;
    result.anomaly_timeline.push(TimedReport {
        time: now,
        report: enumeration_check(&state, &cfg.fuzzy)?,
    });

    let group = [0, 1, 2];
    let counts: Vec<f64> = state.roster().iter().map(|s| s.particles).collect();
    let mut hits = 0;
    let branch = loop {
        if let Some(b) = effective_collapse_status(&state, &group, params.eta_collapse)? {
            break b;
        }
        if hits == MAX_HITS_PER_PHASE {
            return Err(Error::Capacity {
                what: "hits before effective collapse",
                requested: hits + 1,
                limit: MAX_HITS_PER_PHASE,
            });
        }
        let (t, target) =
            sample_next_hit(rng, params, &counts, now).ok_or(Error::DegenerateState)?;
        hits += 1;
        now = t;
        let rec = apply_sparse_hit_in_place(&mut state, target, rng, params, now)?;
        result.record(cfg.keep_event_log, rec);
    };
    result.collapse_time = Some(now);
    result.pointer_agreement =
        (branch.labels[0] == Label::In) == (branch.labels[2] == Label::RecordIn);
    result.outcome = Some(format!("R={}", branch.labels[1]));
    result.anomaly_timeline.push(TimedReport {
        time: now,
        report: enumeration_check(&state, &cfg.fuzzy)?,
    });
    let total = state.log_total_mass();
    result.final_state_summary = state
        .terms()
        .map(|(c, a)| BranchSummary {
            branch: state.format_configuration(c),
            mass: (a.log_norm_sqr() - total).exp(),
            log_mass: a.log_norm_sqr() - total,
        })
        .collect();
    Ok(result)
}
