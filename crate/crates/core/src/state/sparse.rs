use std::collections::BTreeMap;
use std::fmt;

use super::label::{Configuration, Label, Subsystem, SubsystemKind};
use crate::amplitude::{log_sum_exp, Amplitude};
use crate::error::{Error, Result};

/// Tolerance on total squared mass for states that must be normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A superposition over labelled configurations of an ordered roster of
/// subsystems. Terms with exactly zero amplitude are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    roster: Vec<Subsystem>,
    terms: BTreeMap<Configuration, Amplitude>,
}

impl SparseState {
    /// Build a state from explicit terms; zero amplitudes are dropped.
    /// The result is not normalized.
    pub fn from_terms(
        roster: Vec<Subsystem>,
        terms: BTreeMap<Configuration, Amplitude>,
    ) -> Result<Self> {
        for config in terms.keys() {
            check_configuration(&roster, config)?;
        }
        let terms = terms.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        Ok(SparseState { roster, terms })
    }

    /// Like [`SparseState::from_terms`], from `(labels, amplitude)` pairs.
    /// Repeated configurations are summed.
    pub fn from_pairs<I>(roster: Vec<Subsystem>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Label>, Amplitude)>,
    {
        let mut terms: BTreeMap<Configuration, Amplitude> = BTreeMap::new();
        for (labels, amp) in pairs {
            let entry = terms
                .entry(Configuration(labels))
                .or_insert(Amplitude::ZERO);
            *entry = *entry + amp;
        }
        Self::from_terms(roster, terms)
    }

    pub fn roster(&self) -> &[Subsystem] {
        &self.roster
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Configuration, &Amplitude)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, config: &Configuration) -> Amplitude {
        self.terms.get(config).copied().unwrap_or(Amplitude::ZERO)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn subsystem(&self, index: usize) -> Result<&Subsystem> {
        self.roster.get(index).ok_or_else(|| {
            Error::shape(format!(
                "no subsystem {index} in roster of {}",
                self.roster.len()
            ))
        })
    }

    /// Roster position of the subsystem with the given name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.roster.iter().position(|s| s.name == name)
    }

    /// Roster position of marble number `index`.
    pub fn marble_position(&self, index: usize) -> Option<usize> {
        self.roster
            .iter()
            .position(|s| s.kind == SubsystemKind::Marble { index })
    }

    pub fn marble_count(&self) -> usize {
        self.roster
            .iter()
            .filter(|s| matches!(s.kind, SubsystemKind::Marble { .. }))
            .count()
    }

    pub fn log_total_mass(&self) -> f64 {
        log_sum_exp(self.terms.values().map(Amplitude::log_norm_sqr))
    }

    pub fn total_mass(&self) -> f64 {
        self.log_total_mass().exp()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                mass: self.total_mass(),
            })
        }
    }

    /// Rescale to unit total squared mass. Relative weights are untouched.
    pub fn normalize(&self) -> Result<SparseState> {
        let total = self.log_total_mass();
        if total == f64::NEG_INFINITY {
            return Err(Error::DegenerateState);
        }
        Ok(self.map_amplitudes(|_, a| a.scale_log(-0.5 * total)))
    }

    /// `ln` of the squared mass of the configurations satisfying `predicate`.
    pub fn branch_log_mass<F>(&self, predicate: F) -> f64
    where
        F: Fn(&Configuration) -> bool,
    {
        log_sum_exp(
            self.terms
                .iter()
                .filter(|(c, _)| predicate(c))
                .map(|(_, a)| a.log_norm_sqr()),
        )
    }

    pub fn branch_mass<F>(&self, predicate: F) -> f64
    where
        F: Fn(&Configuration) -> bool,
    {
        self.branch_log_mass(predicate).exp()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &SparseState) -> Result<Amplitude> {
        if self.roster != other.roster {
            return Err(Error::shape(
                "inner product of states over different rosters",
            ));
        }
        Ok(self
            .terms
            .iter()
            .filter_map(|(c, a)| other.terms.get(c).map(|b| a.conj() * *b))
            .sum())
    }

    /// Per-label `ln` mass of one subsystem, in alphabet order, for labels
    /// that occur in the support.
    pub fn marginal_log_masses(&self, subsystem: usize) -> Result<Vec<(Label, f64)>> {
        let alphabet = self.subsystem(subsystem)?.kind.alphabet();
        let slot = |l: Label| {
            alphabet
                .iter()
                .position(|&a| a == l)
                .expect("labels are checked on entry")
        };
        let mut max = vec![f64::NEG_INFINITY; alphabet.len()];
        for (c, a) in &self.terms {
            let k = slot(c.get(subsystem));
            max[k] = max[k].max(a.log_norm_sqr());
        }
        let mut sum = vec![0.0; alphabet.len()];
        for (c, a) in &self.terms {
            let k = slot(c.get(subsystem));
            sum[k] += (a.log_norm_sqr() - max[k]).exp();
        }
        Ok(alphabet
            .into_iter()
            .enumerate()
            .filter(|&(k, _)| max[k] > f64::NEG_INFINITY)
            .map(|(k, l)| (l, max[k] + sum[k].ln()))
            .collect())
    }

    /// Masses of the configuration classes obtained by restricting to
    /// `group`, keyed by the restricted labels.
    pub fn group_log_masses(&self, group: &[usize]) -> Result<BTreeMap<Vec<Label>, f64>> {
        for &s in group {
            self.subsystem(s)?;
        }
        let mut buckets: BTreeMap<Vec<Label>, Vec<f64>> = BTreeMap::new();
        for (c, a) in &self.terms {
            let key = group.iter().map(|&s| c.get(s)).collect();
            buckets.entry(key).or_default().push(a.log_norm_sqr());
        }
        Ok(buckets
            .into_iter()
            .map(|(k, v)| (k, log_sum_exp(v)))
            .collect())
    }

    /// The single configuration carrying the most squared mass.
    pub fn dominant_term(&self) -> Option<(&Configuration, Amplitude)> {
        self.terms
            .iter()
            .max_by(|a, b| a.1.log_magnitude().total_cmp(&b.1.log_magnitude()))
            .map(|(c, a)| (c, *a))
    }

    /// Tensor on a new pointer subsystem in its ready state.
    pub fn append_ready(&self, subsystem: Subsystem) -> Result<SparseState> {
        let ready = subsystem.kind.ready_label().ok_or_else(|| {
            Error::shape(format!(
                "{} has no ready state to append in",
                subsystem.name
            ))
        })?;
        if let SubsystemKind::Apparatus { target } = subsystem.kind {
            self.subsystem(target)?;
        }
        let mut roster = self.roster.clone();
        roster.push(subsystem);
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| {
                let mut labels = c.0.clone();
                labels.push(ready);
                (Configuration(labels), *a)
            })
            .collect();
        Ok(SparseState { roster, terms })
    }

    /// Tensor on freshly prepared pointers and couple them in one step: each
    /// term's new labels are `f(configuration)`, one per added subsystem.
    ///
    /// Equivalent to [`SparseState::append_ready`] followed by
    /// [`SparseState::relabel`] for every added pointer. The new labels
    /// depend only on the old configuration, so no terms can merge.
    pub fn append_coupled<F>(&self, added: Vec<Subsystem>, f: F) -> Result<SparseState>
    where
        F: Fn(&Configuration) -> Vec<Label>,
    {
        for sub in &added {
            if sub.kind.ready_label().is_none() {
                return Err(Error::shape(format!("{} is not a pointer", sub.name)));
            }
            if let SubsystemKind::Apparatus { target } = sub.kind {
                self.subsystem(target)?;
            }
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, a) in &self.terms {
            let extra = f(c);
            if extra.len() != added.len() {
                return Err(Error::shape("coupling produced the wrong number of labels"));
            }
            for (sub, &label) in added.iter().zip(&extra) {
                if !sub.kind.admits(label) {
                    return Err(Error::shape(format!(
                        "label {label} not in the alphabet of {}",
                        sub.name
                    )));
                }
            }
            let mut labels = Vec::with_capacity(c.0.len() + extra.len());
            labels.extend_from_slice(&c.0);
            labels.extend(extra);
            terms.push((Configuration(labels), *a));
        }
        let mut roster = self.roster.clone();
        roster.extend(added);
        Ok(SparseState {
            roster,
            terms: terms.into_iter().collect(),
        })
    }

    /// Set `subsystem`'s label in every term to `f(configuration)`.
    ///
    /// This is the unitary premeasurement coupling when the subsystem starts
    /// in a ready state; a relabeling that merges two terms is rejected.
    pub fn relabel<F>(&self, subsystem: usize, f: F) -> Result<SparseState>
    where
        F: Fn(&Configuration) -> Label,
    {
        let kind = self.subsystem(subsystem)?.kind;
        let mut terms = BTreeMap::new();
        for (c, a) in &self.terms {
            let label = f(c);
            if !kind.admits(label) {
                return Err(Error::shape(format!(
                    "label {label} not in the alphabet of {}",
                    self.roster[subsystem].name
                )));
            }
            let mut labels = c.0.clone();
            labels[subsystem] = label;
            if terms.insert(Configuration(labels), *a).is_some() {
                return Err(Error::shape(
                    "relabeling merges distinct terms (not unitary)",
                ));
            }
        }
        Ok(SparseState {
            roster: self.roster.clone(),
            terms,
        })
    }

    /// Multiply the amplitude of every term whose `subsystem` label is not
    /// `keep` by `exp(log_factor)`, then renormalize, without reallocating.
    pub(crate) fn damp_others_in_place(
        &mut self,
        subsystem: usize,
        keep: Label,
        log_factor: f64,
    ) -> Result<()> {
        for (c, a) in self.terms.iter_mut() {
            if c.get(subsystem) != keep {
                *a = a.scale_log(log_factor);
            }
        }
        let total = self.log_total_mass();
        if total == f64::NEG_INFINITY {
            return Err(Error::DegenerateState);
        }
        for a in self.terms.values_mut() {
            *a = a.scale_log(-0.5 * total);
        }
        Ok(())
    }

    pub(crate) fn map_amplitudes<F>(&self, f: F) -> SparseState
    where
        F: Fn(&Configuration, Amplitude) -> Amplitude,
    {
        SparseState {
            roster: self.roster.clone(),
            terms: self
                .terms
                .iter()
                .map(|(c, a)| (c.clone(), f(c, *a)))
                .collect(),
        }
    }

    /// Squared masses of every term, in configuration order.
    pub fn masses(&self) -> Vec<(Configuration, f64)> {
        self.terms
            .iter()
            .map(|(c, a)| (c.clone(), a.norm_sqr()))
            .collect()
    }

    /// One line per term: `name=label,... | log_mag phase`, sorted by configuration.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub(crate) fn format_configuration(&self, config: &Configuration) -> String {
        self.roster
            .iter()
            .zip(config.labels())
            .map(|(s, l)| format!("{}={}", s.name, l))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, a) in &self.terms {
            writeln!(f, "{} | {}", self.format_configuration(c), a)?;
        }
        Ok(())
    }
}

fn check_configuration(roster: &[Subsystem], config: &Configuration) -> Result<()> {
    if config.0.len() != roster.len() {
        return Err(Error::shape(format!(
            "configuration has {} labels for {} subsystems",
            config.0.len(),
            roster.len()
        )));
    }
    for (s, &l) in roster.iter().zip(config.labels()) {
        if !s.kind.admits(l) {
            return Err(Error::shape(format!(
                "label {l} not in the alphabet of {}",
                s.name
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ProductState;

    fn one_marble(pairs: &[(Label, Amplitude)]) -> SparseState {
        SparseState::from_pairs(
            vec![Subsystem::marble(0, 1.0)],
            pairs.iter().map(|&(l, a)| (vec![l], a)),
        )
        .unwrap()
    }

    #[test]
    fn normalize_leaves_normalized_state_alone() {
        let s = one_marble(&[
            (Label::In, Amplitude::from_real(0.6)),
            (Label::Out, Amplitude::from_real(0.8)),
        ]);
        let n = s.normalize().unwrap();
        for ((_, a), (_, b)) in s.terms().zip(n.terms()) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_equal_weights() {
        let s = one_marble(&[(Label::In, Amplitude::ONE), (Label::Out, Amplitude::ONE)]);
        let n = s.normalize().unwrap();
        for (_, a) in n.terms() {
            assert!((a.to_complex().re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_deep_tails_without_underflow() {
        let tiny = Amplitude::from_log_polar(-1000.0, 0.0);
        let s = one_marble(&[(Label::In, tiny), (Label::Out, tiny)]);
        assert_eq!(s.total_mass(), 0.0);
        let n = s.normalize().unwrap();
        assert!((n.total_mass() - 1.0).abs() < 1e-12);
        for (_, a) in n.terms() {
            assert!((a.log_magnitude() + 0.5 * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_all_zero_is_degenerate() {
        let s = one_marble(&[(Label::In, Amplitude::ZERO)]);
        assert!(s.is_empty());
        assert!(matches!(s.normalize(), Err(Error::DegenerateState)));
    }

    #[test]
    fn branch_mass_extremes() {
        let s = ProductState::uniform(4, 0.8).unwrap().expand().unwrap();
        assert!((s.branch_mass(|_| true) - 1.0).abs() < 1e-12);
        assert_eq!(s.branch_mass(|_| false), 0.0);
    }

    #[test]
    fn inner_product_rejects_roster_mismatch() {
        let a = ProductState::uniform(2, 0.5).unwrap().expand().unwrap();
        let b = ProductState::uniform(3, 0.5).unwrap().expand().unwrap();
        assert!(matches!(a.inner_product(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn inner_product_of_orthogonal_basis_states_is_zero() {
        let a = one_marble(&[(Label::In, Amplitude::ONE)]);
        let b = one_marble(&[(Label::Out, Amplitude::ONE)]);
        assert!(a.inner_product(&b).unwrap().is_zero());
        assert!((a.inner_product(&a).unwrap().norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn labels_outside_alphabet_are_rejected() {
        let r = SparseState::from_pairs(
            vec![Subsystem::marble(0, 1.0)],
            [(vec![Label::Ready], Amplitude::ONE)],
        );
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn one_step_coupling_matches_append_then_relabel() {
        let s = ProductState::uniform(3, 0.7).unwrap().expand().unwrap();
        let pointer = |i: usize| Subsystem {
            name: format!("M{}", i + 1),
            kind: SubsystemKind::Apparatus { target: i },
            particles: 1.0,
        };
        let record = |l: Label| {
            if l == Label::In {
                Label::RecordIn
            } else {
                Label::RecordOut
            }
        };
        let mut stepwise = s.clone();
        for i in 0..3 {
            stepwise = stepwise.append_ready(pointer(i)).unwrap();
            stepwise = stepwise.relabel(3 + i, |c| record(c.get(i))).unwrap();
        }
        let at_once = s
            .append_coupled((0..3).map(pointer).collect(), |c| {
                (0..3).map(|i| record(c.get(i))).collect()
            })
            .unwrap();
        assert_eq!(at_once, stepwise);
        assert!(s
            .append_coupled(vec![Subsystem::marble(5, 1.0)], |_| vec![Label::In])
            .is_err());
        assert!(s
            .append_coupled(vec![pointer(0)], |_| vec![Label::Count(1)])
            .is_err());
    }

    #[test]
    fn relabel_copying_a_region_into_a_ready_pointer() {
        let s = ProductState::uniform(1, 0.9).unwrap().expand().unwrap();
        let s = s
            .append_ready(Subsystem {
                name: "M1".into(),
                kind: SubsystemKind::Apparatus { target: 0 },
                particles: 1.0,
            })
            .unwrap();
        let s = s
            .relabel(1, |c| {
                if c.get(0) == Label::In {
                    Label::RecordIn
                } else {
                    Label::RecordOut
                }
            })
            .unwrap();
        let agree = s.branch_mass(|c| (c.get(0) == Label::In) == (c.get(1) == Label::RecordIn));
        assert!((agree - 1.0).abs() < 1e-12);
        let bare = ProductState::uniform(1, 0.9).unwrap().expand().unwrap();
        assert!(bare.relabel(0, |_| Label::In).is_err());
    }

    #[test]
    fn text_form_is_sorted_and_stable() {
        let s = ProductState::uniform(2, 0.5).unwrap().expand().unwrap();
        let text = s.to_text();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("m1=in,m2=in | "));
        assert!(lines[3].starts_with("m1=out,m2=out | "));
        assert_eq!(text, s.clone().to_text());
    }
}
