use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::params::{CenterSampling, GrwParams};
use crate::amplitude::log_add_exp;
use crate::error::{Error, Result};
use crate::state::{Label, ProductState, SparseState, TwoRegionMarble};

/// Where a hit was centered: a discrete region label, or a lattice coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HitCenter {
    Region(Label),
    Position(f64),
}

/// One line of a trial's event log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    /// Seconds since the start of the trial.
    pub time: f64,
    pub target_subsystem: usize,
    pub center_region: HitCenter,
    /// Largest label mass of the hit subsystem before the hit.
    pub pre_dominant_mass: f64,
    pub post_dominant_mass: f64,
}

/// Draw the next hit of a Poisson process in which subsystem `k` carries
/// `particle_counts[k]` particles, each hit at `params.lambda_hit`.
///
/// Returns the absolute hit time and the index of the hit subsystem, or
/// `None` when there is nothing to hit.
pub fn sample_next_hit<R: Rng + ?Sized>(
    rng: &mut R,
    params: &GrwParams,
    particle_counts: &[f64],
    now: f64,
) -> Option<(f64, usize)> {
    let total: f64 = particle_counts.iter().filter(|c| **c > 0.0).sum();
    if total <= 0.0 || total.is_nan() {
        return None;
    }
    let rate = params.lambda_hit * total;
    let wait = Exp::new(rate).ok()?.sample(rng);
    let subsystem = if particle_counts.len() == 1 {
        0
    } else {
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = particle_counts.len() - 1;
        for (i, &c) in particle_counts.iter().enumerate() {
            if c <= 0.0 {
                continue;
            }
            acc += c;
            if u < acc {
                chosen = i;
                break;
            }
        }
        chosen
    };
    Some((now + wait, subsystem))
}

/// Pick an index with probability proportional to `exp(log_weights[i])`,
/// using a single uniform draw.
pub(crate) fn sample_log_weighted<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(max > f64::NEG_INFINITY, "no positive weight to sample from");
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Center weights for labels with log masses `log_masses` (normalized).
fn center_log_weights(log_masses: &[f64], params: &GrwParams) -> Vec<f64> {
    match params.center_sampling {
        CenterSampling::Exact => log_masses.to_vec(),
        CenterSampling::LeakageCorrected => {
            let ln_eps = params.epsilon_leak.ln();
            log_masses
                .iter()
                .map(|&m| {
                    if m == f64::NEG_INFINITY {
                        return m;
                    }
                    // ln(1 − e^m), stable near m = 0
                    let rest = if m > -std::f64::consts::LN_2 {
                        (-m.exp_m1()).ln()
                    } else {
                        (-m.exp()).ln_1p()
                    };
                    log_add_exp(m, ln_eps + rest)
                })
                .collect()
        }
    }
}

/// A hit on one particle of `marble`, acting on the whole marble: the
/// factor's disfavored region loses a factor `epsilon_leak` of squared mass
/// and the factor is renormalized. Other factors are untouched.
pub fn apply_marble_hit<R: Rng + ?Sized>(
    state: &ProductState,
    marble: usize,
    rng: &mut R,
    params: &GrwParams,
    now: f64,
) -> Result<(ProductState, HitRecord)> {
    let factor = state.marble(marble)?;
    let log_masses = [factor.log_mass(Label::In), factor.log_mass(Label::Out)];
    let weights = center_log_weights(&log_masses, params);
    let center = Label::REGIONS[sample_log_weighted(rng, &weights)];
    let other = center.opposite().expect("regions have opposites");

    let half_ln_eps = 0.5 * params.epsilon_leak.ln();
    let id = factor.marble_id;
    let oriented = |kept, leaked| {
        if center == Label::In {
            TwoRegionMarble::new(id, kept, leaked)
        } else {
            TwoRegionMarble::new(id, leaked, kept)
        }
    };
    let kept = factor.amplitude(center);
    let leaked = factor.amplitude(other).scale_log(half_ln_eps);
    let mut post = oriented(kept, leaked)?;

    if let Some(ceiling) = params.localization_ceiling {
        // the tail never drops below 1 − ceiling, and a hit never grows it
        let floor = (1.0 - ceiling).min(factor.mass(other));
        if floor > 0.0 && post.mass(other) < floor {
            let leaked = leaked.scale_log(0.5 * (floor.ln() - leaked.log_norm_sqr()));
            let kept = kept.scale_log(0.5 * ((1.0 - floor).ln() - kept.log_norm_sqr()));
            post = oriented(kept, leaked)?;
        }
    }

    let record = HitRecord {
        time: now,
        target_subsystem: marble,
        center_region: HitCenter::Region(center),
        pre_dominant_mass: factor.mass(Label::In).max(factor.mass(Label::Out)),
        post_dominant_mass: post.mass(Label::In).max(post.mass(Label::Out)),
    };
    let mut next = state.clone();
    next.replace(marble, post);
    Ok((next, record))
}

/// A hit on `subsystem` of a sparse state. The center label is drawn by its
/// branch mass; every term carrying a different label of that subsystem
/// loses a factor `epsilon_leak` of squared mass; the state is renormalized.
///
/// All distinct labels of a subsystem are treated as mutually distant.
pub fn apply_sparse_hit<R: Rng + ?Sized>(
    state: &SparseState,
    subsystem: usize,
    rng: &mut R,
    params: &GrwParams,
    now: f64,
) -> Result<(SparseState, HitRecord)> {
    let mut next = state.clone();
    let record = apply_sparse_hit_in_place(&mut next, subsystem, rng, params, now)?;
    Ok((next, record))
}

/// [`apply_sparse_hit`] updating `state` in place.
pub fn apply_sparse_hit_in_place<R: Rng + ?Sized>(
    state: &mut SparseState,
    subsystem: usize,
    rng: &mut R,
    params: &GrwParams,
    now: f64,
) -> Result<HitRecord> {
    let marginals = state.marginal_log_masses(subsystem)?;
    if marginals.is_empty() {
        return Err(Error::DegenerateState);
    }
    let total = state.log_total_mass();
    let log_masses: Vec<f64> = marginals.iter().map(|(_, m)| m - total).collect();
    let weights = center_log_weights(&log_masses, params);
    let center = marginals[sample_log_weighted(rng, &weights)].0;

    state.damp_others_in_place(subsystem, center, 0.5 * params.epsilon_leak.ln())?;

    let pre = log_masses
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let post = state
        .marginal_log_masses(subsystem)?
        .iter()
        .map(|(_, m)| *m)
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    Ok(HitRecord {
        time: now,
        target_subsystem: subsystem,
        center_region: HitCenter::Region(center),
        pre_dominant_mass: pre,
        post_dominant_mass: post,
    })
}
