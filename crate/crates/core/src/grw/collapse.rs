use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::state::{Label, SparseState};

/// A configuration class, restricted to a group of subsystems, that holds
/// at least the collapse threshold of squared mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominantBranch {
    pub subsystems: Vec<usize>,
    pub labels: Vec<Label>,
    pub mass: f64,
}

impl DominantBranch {
    pub fn label_of(&self, subsystem: usize) -> Option<Label> {
        self.subsystems
            .iter()
            .position(|&s| s == subsystem)
            .map(|i| self.labels[i])
    }
}

/// The class of `subsystem_group` labels carrying mass `≥ eta`, if any.
///
/// Masses are taken relative to the state's total, so a slightly
/// unnormalized state still reports sensible fractions.
pub fn effective_collapse_status(
    state: &SparseState,
    subsystem_group: &[usize],
    eta: f64,
) -> Result<Option<DominantBranch>> {
    let total = state.log_total_mass();
    let ln_eta = eta.ln();
    let whole_roster = subsystem_group.len() == state.roster().len()
        && subsystem_group.iter().enumerate().all(|(i, &s)| i == s);
    if whole_roster {
        // classes are single terms
        return Ok(state.dominant_term().and_then(|(c, a)| {
            let m = a.log_norm_sqr() - total;
            (m >= ln_eta).then(|| DominantBranch {
                subsystems: subsystem_group.to_vec(),
                labels: c.0.clone(),
                mass: m.exp(),
            })
        }));
    }
    let classes = state.group_log_masses(subsystem_group)?;
    Ok(classes
        .into_iter()
        .find(|(_, m)| m - total >= ln_eta)
        .map(|(labels, m)| DominantBranch {
            subsystems: subsystem_group.to_vec(),
            labels,
            mass: (m - total).exp(),
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Amplitude;
    use crate::state::Subsystem;

    fn marble_with(mass_in: f64, mass_out: f64) -> SparseState {
        SparseState::from_pairs(
            vec![Subsystem::marble(0, 1.0)],
            [
                (vec![Label::In], Amplitude::from_mass(mass_in)),
                (vec![Label::Out], Amplitude::from_mass(mass_out)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn dominant_branch_above_threshold() {
        let s = marble_with(0.9999999, 1e-7);
        let b = effective_collapse_status(&s, &[0], 1.0 - 1e-6)
            .unwrap()
            .unwrap();
        assert_eq!(b.labels, vec![Label::In]);
        assert_eq!(b.label_of(0), Some(Label::In));
        assert_eq!(b.label_of(1), None);
    }

    #[test]
    fn balanced_superposition_has_no_dominant_branch() {
        let s = marble_with(0.5, 0.5);
        assert!(effective_collapse_status(&s, &[0], 1.0 - 1e-6)
            .unwrap()
            .is_none());
    }
}
