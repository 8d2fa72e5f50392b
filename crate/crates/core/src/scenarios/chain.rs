use rand::Rng;

use super::{
    BranchSummary, ChainOrder, ScenarioConfig, TimedReport, TrialResult, MAX_HITS_PER_PHASE,
};
use crate::error::{Error, Result};
use crate::grw::{
    apply_sparse_hit_in_place, effective_collapse_status, sample_next_hit, DominantBranch,
};
use crate::semantics::enumeration_check;
use crate::state::{Configuration, Label, ProductState, SparseState, Subsystem, SubsystemKind};

/// Marbles measured one by one by apparatuses `M1..Mn` and as a whole by a
/// counter `M` reading `O=k`, with an optional observer judging the count.
///
/// Couplings are instantaneous. Between the two coupling stages, and after
/// the last one, hits run until the whole roster is effectively collapsed.
/// `cfg.duration` is not used.
pub fn run_measurement_chain<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<TrialResult> {
    let n = cfg.n_marbles;
    let mut state = ProductState::uniform(n, cfg.a_sq)?
        .expand_with_limit(cfg.dense_limit, cfg.grw.particles_per_marble)?;
    let mut chain = Chain {
        cfg,
        n,
        now: 0.0,
        settled: None,
        result: TrialResult {
            pointer_agreement: true,
            ..Default::default()
        },
    };
    chain.judge(&state)?;

    match cfg.order {
        ChainOrder::IndividualFirst => {
            state = couple_apparatuses(&state, n, cfg.apparatus_particles)?;
            chain.judge(&state)?;
            chain.run_to_collapse(&mut state, rng)?;
            state = couple_counter(&state, n, cfg)?;
        }
        ChainOrder::CollectiveFirst => {
            state = couple_counter(&state, n, cfg)?;
            chain.judge(&state)?;
            chain.run_to_collapse(&mut state, rng)?;
            state = couple_apparatuses(&state, n, cfg.apparatus_particles)?;
        }
    }
    chain.judge(&state)?;
    chain.run_to_collapse(&mut state, rng)?;
    chain.judge(&state)?;
    chain.finish(&state)
}

fn couple_apparatuses(state: &SparseState, n: usize, particles: f64) -> Result<SparseState> {
    let targets = (0..n)
        .map(|i| {
            state
                .marble_position(i)
                .ok_or_else(|| Error::shape(format!("no marble {i} in the roster")))
        })
        .collect::<Result<Vec<_>>>()?;
    let apparatuses = targets
        .iter()
        .enumerate()
        .map(|(i, &target)| Subsystem {
            name: format!("M{}", i + 1),
            kind: SubsystemKind::Apparatus { target },
            particles,
        })
        .collect();
    state.append_coupled(apparatuses, |c| {
        targets
            .iter()
            .map(|&t| {
                if c.get(t) == Label::In {
                    Label::RecordIn
                } else {
                    Label::RecordOut
                }
            })
            .collect()
    })
}

fn couple_counter(state: &SparseState, n: usize, cfg: &ScenarioConfig) -> Result<SparseState> {
    let marbles: Vec<usize> = (0..n).filter_map(|i| state.marble_position(i)).collect();
    let count =
        |c: &Configuration| marbles.iter().filter(|&&m| c.get(m) == Label::In).count() as u32;
    let mut added = vec![Subsystem {
        name: "M".into(),
        kind: SubsystemKind::Counter { n: n as u32 },
        particles: cfg.apparatus_particles,
    }];
    if cfg.with_observer {
        // the observer reads the counter, so it records the same number
        added.push(Subsystem {
            name: "observer".into(),
            kind: SubsystemKind::Observer { n: n as u32 },
            particles: cfg.apparatus_particles,
        });
    }
    let observer = cfg.with_observer;
    state.append_coupled(added, |c| {
        let k = count(c);
        if observer {
            vec![Label::Count(k), Label::Judged(k)]
        } else {
            vec![Label::Count(k)]
        }
    })
}

struct Chain<'a> {
    cfg: &'a ScenarioConfig,
    n: usize,
    now: f64,
    /// Marble labels of the last effectively collapsed configuration.
    settled: Option<Vec<Label>>,
    result: TrialResult,
}

impl Chain<'_> {
    fn judge(&mut self, state: &SparseState) -> Result<()> {
        let report = enumeration_check(state, &self.cfg.fuzzy)?;
        self.result.anomaly_timeline.push(TimedReport {
            time: self.now,
            report,
        });
        Ok(())
    }

    fn run_to_collapse<R: Rng + ?Sized>(
        &mut self,
        state: &mut SparseState,
        rng: &mut R,
    ) -> Result<()> {
        let params = &self.cfg.grw;
        let group: Vec<usize> = (0..state.roster().len()).collect();
        let counts: Vec<f64> = state.roster().iter().map(|s| s.particles).collect();
        let mut hits = 0;
        while !self.inspect(state, &group)? {
            if hits == MAX_HITS_PER_PHASE {
                return Err(Error::Capacity {
                    what: "hits before effective collapse",
                    requested: hits + 1,
                    limit: MAX_HITS_PER_PHASE,
                });
            }
            let (t, target) =
                sample_next_hit(rng, params, &counts, self.now).ok_or(Error::DegenerateState)?;
            hits += 1;
            self.now = t;
            let rec = apply_sparse_hit_in_place(state, target, rng, params, t)?;
            self.result.record(self.cfg.keep_event_log, rec);
        }
        Ok(())
    }

    /// Examine the state at an instant; returns whether it is effectively
    /// collapsed and, if so, audits the settled records.
    fn inspect(&mut self, state: &SparseState, group: &[usize]) -> Result<bool> {
        let Some(branch) = effective_collapse_status(state, group, self.cfg.grw.eta_collapse)?
        else {
            return Ok(false);
        };
        if self.result.collapse_time.is_none() {
            self.result.collapse_time = Some(self.now);
        }
        let marbles: Vec<Label> = (0..self.n)
            .map(|i| state.marble_position(i).map(|p| branch.labels[p]))
            .collect::<Option<_>>()
            .ok_or(Error::DegenerateState)?;
        if let Some(prev) = &self.settled {
            if *prev != marbles {
                self.result.jump_events += 1;
            }
        }
        self.settled = Some(marbles);
        self.audit(state, &branch);
        Ok(true)
    }

    fn audit(&mut self, state: &SparseState, branch: &DominantBranch) {
        let roster = state.roster();
        let mut counter = None;
        let mut records_in = 0u32;
        let mut records = 0;
        let mut agree = true;
        for (pos, sub) in roster.iter().enumerate() {
            let label = branch.labels[pos];
            match sub.kind {
                SubsystemKind::Apparatus { target } => {
                    records += 1;
                    let marble = branch.labels[target];
                    records_in += (label == Label::RecordIn) as u32;
                    agree &= (marble == Label::In) == (label == Label::RecordIn);
                }
                SubsystemKind::Counter { .. } => {
                    if let Label::Count(k) = label {
                        counter = Some(k);
                        let actual = roster
                            .iter()
                            .zip(&branch.labels)
                            .filter(|(s, l)| {
                                matches!(s.kind, SubsystemKind::Marble { .. }) && **l == Label::In
                            })
                            .count() as u32;
                        agree &= k == actual;
                    }
                }
                SubsystemKind::Observer { .. } => {
                    if let (Label::Judged(j), Some(k)) = (label, counter) {
                        agree &= j == k;
                    }
                }
                SubsystemKind::Marble { .. } => {}
            }
        }
        self.result.pointer_agreement &= agree;
        if let Some(k) = counter {
            if records == self.n && k != records_in {
                self.result.manifestation_events += 1;
            }
        }
    }

    fn finish(mut self, state: &SparseState) -> Result<TrialResult> {
        let group: Vec<usize> = (0..state.roster().len()).collect();
        let branch = effective_collapse_status(state, &group, self.cfg.grw.eta_collapse)?
            .ok_or(Error::DegenerateState)?;
        let counter = state
            .roster()
            .iter()
            .position(|s| matches!(s.kind, SubsystemKind::Counter { .. }))
            .ok_or(Error::DegenerateState)?;
        let value = match branch.labels[counter] {
            Label::Count(k) => k,
            _ => return Err(Error::DegenerateState),
        };
        self.result.counter_value = Some(value);
        self.result.outcome = Some(format!("O={value}"));
        let total = state.log_total_mass();
        self.result.final_state_summary = state
            .group_log_masses(&group)?
            .into_iter()
            .map(|(labels, m)| (labels, m - total))
            .filter(|(_, m)| *m > (1.0 - self.cfg.grw.eta_collapse).ln() - 1e-12)
            .map(|(labels, log_mass)| BranchSummary {
                branch: state.format_configuration(&Configuration(labels)),
                mass: log_mass.exp(),
                log_mass,
            })
            .collect();
        Ok(self.result)
    }
}
