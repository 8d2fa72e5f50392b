//! Fuzzy-link semantics: reading "in the region" off squared-amplitude mass.
//!
//! A proposition about one or several particles holds when the mass of the
//! matching configurations is at least `1 − p`, its negation holds when the
//! mass is at most `p`, and it is indeterminate in between. Because
//! `p < 0.5` the two cases never overlap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Interval, LatticeWavefunction};
use crate::state::{Label, ProductState, SparseState};

pub const DEFAULT_P: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyConfig {
    /// Threshold for single-particle propositions.
    pub p: f64,
    /// Separate threshold for conjunctions, when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_all: Option<f64>,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig {
            p: DEFAULT_P,
            p_all: None,
        }
    }
}

fn check_threshold(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must lie in (0, 0.5), got {value}"
        )))
    }
}

impl FuzzyConfig {
    pub fn new(p: f64) -> Result<Self> {
        let cfg = FuzzyConfig { p, p_all: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dual(p: f64, p_all: f64) -> Result<Self> {
        let cfg = FuzzyConfig {
            p,
            p_all: Some(p_all),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_threshold("p", self.p)?;
        if let Some(p_all) = self.p_all {
            check_threshold("p_all", p_all)?;
        }
        Ok(())
    }

    /// Threshold applied to multi-particle conjunctions.
    pub fn conjunction_p(&self) -> f64 {
        self.p_all.unwrap_or(self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Holds,
    ComplementHolds,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub mass: f64,
    pub log_mass: f64,
}

impl Verdict {
    pub fn from_log_mass(log_mass: f64, p: f64) -> Self {
        let mass = log_mass.exp();
        let kind = if mass >= 1.0 - p {
            VerdictKind::Holds
        } else if mass <= p {
            VerdictKind::ComplementHolds
        } else {
            VerdictKind::Indeterminate
        };
        Verdict {
            kind,
            mass,
            log_mass,
        }
    }

    pub fn from_mass(mass: f64, p: f64) -> Self {
        Self::from_log_mass(mass.ln(), p)
    }

    pub fn holds(&self) -> bool {
        self.kind == VerdictKind::Holds
    }

    pub fn complement_holds(&self) -> bool {
        self.kind == VerdictKind::ComplementHolds
    }
}

/// Single-particle verdict on the mass found in a region.
pub fn posr_verdict(mass_in_region: f64, config: &FuzzyConfig) -> Verdict {
    debug_assert!((0.0..=1.0 + 1e-9).contains(&mass_in_region));
    Verdict::from_mass(mass_in_region, config.p)
}

/// States whose marbles' region masses can be queried.
pub trait RegionMasses {
    fn marble_count(&self) -> usize;

    /// `ln` mass of marble `marble` lying in `region`.
    fn marble_log_mass(&self, marble: usize, region: Label) -> Result<f64>;

    /// `ln` mass of the configuration class fixing each listed marble's region.
    fn joint_log_mass(&self, assignment: &[(usize, Label)]) -> Result<f64>;

    /// Verdicts are only defined for normalized states.
    fn check_normalized(&self) -> Result<()>;
}

impl RegionMasses for ProductState {
    fn marble_count(&self) -> usize {
        self.len()
    }

    fn marble_log_mass(&self, marble: usize, region: Label) -> Result<f64> {
        Ok(self.marble(marble)?.log_mass(region))
    }

    fn joint_log_mass(&self, assignment: &[(usize, Label)]) -> Result<f64> {
        ProductState::joint_log_mass(self, assignment)
    }

    fn check_normalized(&self) -> Result<()> {
        Ok(())
    }
}

impl RegionMasses for SparseState {
    fn marble_count(&self) -> usize {
        SparseState::marble_count(self)
    }

    fn marble_log_mass(&self, marble: usize, region: Label) -> Result<f64> {
        self.joint_log_mass(&[(marble, region)])
    }

    fn joint_log_mass(&self, assignment: &[(usize, Label)]) -> Result<f64> {
        let positions = assignment
            .iter()
            .map(|&(m, region)| {
                self.marble_position(m)
                    .map(|pos| (pos, region))
                    .ok_or_else(|| Error::shape(format!("no marble {m} in the roster")))
            })
            .collect::<Result<Vec<_>>>()?;
        let total = self.log_total_mass();
        Ok(self.branch_log_mass(|c| positions.iter().all(|&(pos, l)| c.get(pos) == l)) - total)
    }

    fn check_normalized(&self) -> Result<()> {
        self.require_normalized()
    }
}

/// Verdict on "each listed marble lies in its assigned region".
pub fn conjunction_verdict<S: RegionMasses + ?Sized>(
    state: &S,
    assignment: &[(usize, Label)],
    config: &FuzzyConfig,
) -> Result<Verdict> {
    state.check_normalized()?;
    let p = if assignment.len() > 1 {
        config.conjunction_p()
    } else {
        config.p
    };
    Ok(Verdict::from_log_mass(state.joint_log_mass(assignment)?, p))
}

/// Per-marble verdicts set against the verdict on their conjunction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    /// Region asserted for each marble, in marble order.
    pub assignment: Vec<Label>,
    pub per_marble: Vec<Verdict>,
    pub conjunction: Verdict,
    /// Every conjunct holds, the conjunction does not.
    pub weak_anomaly: bool,
    /// Every conjunct holds, the conjunction's negation holds.
    pub strong_anomaly: bool,
    pub joint_mass: f64,
    pub log_joint_mass: f64,
}

/// Check the enumeration principle against the conjunction that asserts,
/// for every marble, its currently dominant region.
pub fn enumeration_check<S: RegionMasses + ?Sized>(
    state: &S,
    config: &FuzzyConfig,
) -> Result<AnomalyReport> {
    let assignment = (0..state.marble_count())
        .map(|m| {
            let lin = state.marble_log_mass(m, Label::In)?;
            let lout = state.marble_log_mass(m, Label::Out)?;
            Ok((m, if lin >= lout { Label::In } else { Label::Out }))
        })
        .collect::<Result<Vec<_>>>()?;
    enumeration_check_for(state, &assignment, config)
}

/// Check the enumeration principle for an explicit per-marble assignment.
pub fn enumeration_check_for<S: RegionMasses + ?Sized>(
    state: &S,
    assignment: &[(usize, Label)],
    config: &FuzzyConfig,
) -> Result<AnomalyReport> {
    state.check_normalized()?;
    let per_marble = assignment
        .iter()
        .map(|&(m, region)| {
            Ok(Verdict::from_log_mass(
                state.marble_log_mass(m, region)?,
                config.p,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let conjunction = conjunction_verdict(state, assignment, config)?;
    let all_hold = per_marble.iter().all(Verdict::holds);
    Ok(AnomalyReport {
        assignment: assignment.iter().map(|&(_, l)| l).collect(),
        weak_anomaly: all_hold && !conjunction.holds(),
        strong_anomaly: all_hold && conjunction.complement_holds(),
        joint_mass: conjunction.mass,
        log_joint_mass: conjunction.log_mass,
        per_marble,
        conjunction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualThresholdReport {
    /// `(1 − p)ⁿ ≥ 1 − p_all`: marbles that each pass also pass jointly.
    pub consistent: bool,
    /// `|a|² < 1 − p`: the per-marble threshold is too strict for any marble
    /// to count as in the box.
    pub forced_no_marble_in_box: bool,
    /// Largest `p` keeping `n` marbles consistent at this `p_all`.
    pub max_consistent_p: f64,
}

/// Largest per-marble threshold with `(1 − p)ⁿ ≥ 1 − p_all`.
pub fn max_consistent_p(n: u32, p_all: f64) -> f64 {
    -((1.0 - p_all).ln() / n as f64).exp_m1()
}

pub fn dual_threshold_check(n: u32, p: f64, p_all: f64, a_sq: f64) -> Result<DualThresholdReport> {
    check_threshold("p", p)?;
    check_threshold("p_all", p_all)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(DualThresholdReport {
        consistent: n as f64 * (1.0 - p).ln() >= (1.0 - p_all).ln(),
        forced_no_marble_in_box: a_sq < 1.0 - p,
        max_consistent_p: max_consistent_p(n, p_all),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub in_delta: Verdict,
    pub in_delta_prime: Verdict,
    pub in_intersection: Verdict,
    /// In Δ and in Δ′ both hold, in Δ ∩ Δ′ does not.
    pub violation: bool,
}

pub fn property_intersection_check(
    psi: &LatticeWavefunction,
    delta: Interval,
    delta_prime: Interval,
    config: &FuzzyConfig,
) -> Result<IntersectionReport> {
    let (lo, hi) = psi.extent();
    for iv in [delta, delta_prime] {
        if iv.hi <= lo || iv.lo > hi || iv.lo >= iv.hi {
            return Err(Error::shape(format!(
                "interval [{}, {}) does not meet the grid [{lo}, {hi}]",
                iv.lo, iv.hi
            )));
        }
    }
    let verdict = |iv: Interval| posr_verdict(psi.region_mass(iv).min(1.0), config);
    let in_delta = verdict(delta);
    let in_delta_prime = verdict(delta_prime);
    let in_intersection = verdict(delta.intersect(&delta_prime));
    Ok(IntersectionReport {
        violation: in_delta.holds() && in_delta_prime.holds() && !in_intersection.holds(),
        in_delta,
        in_delta_prime,
        in_intersection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Amplitude;
    use crate::state::TwoRegionMarble;

    fn p(p: f64) -> FuzzyConfig {
        FuzzyConfig::new(p).unwrap()
    }

    #[test]
    fn posr_threshold_cases() {
        assert_eq!(posr_verdict(1.0, &p(0.3)).kind, VerdictKind::Holds);
        assert_eq!(posr_verdict(0.5, &p(0.1)).kind, VerdictKind::Indeterminate);
        assert_eq!(posr_verdict(0.95, &p(0.1)).kind, VerdictKind::Holds);
        assert_eq!(
            posr_verdict(0.05, &p(0.1)).kind,
            VerdictKind::ComplementHolds
        );
        assert_eq!(
            posr_verdict(0.0, &p(0.1)).kind,
            VerdictKind::ComplementHolds
        );
    }

    #[test]
    fn thresholds_outside_open_half_interval_are_rejected() {
        let err = FuzzyConfig::new(0.6).unwrap_err().to_string();
        assert!(err.contains("p must lie in (0, 0.5)"), "{err}");
        assert!(FuzzyConfig::new(0.5).is_err());
        assert!(FuzzyConfig::new(0.0).is_err());
        assert!(FuzzyConfig::dual(0.1, 0.7).is_err());
    }

    #[test]
    fn single_conjunct_matches_posr() {
        let ps = ProductState::uniform(3, 0.93).unwrap();
        let v = conjunction_verdict(&ps, &[(1, Label::In)], &p(0.1)).unwrap();
        let direct = posr_verdict(0.93, &p(0.1));
        assert_eq!(v.kind, direct.kind);
        assert!((v.mass - direct.mass).abs() < 1e-12);
    }

    #[test]
    fn forty_five_marbles_all_in_is_false() {
        let ps = ProductState::uniform(45, 0.95).unwrap();
        let all_in: Vec<_> = (0..45).map(|i| (i, Label::In)).collect();
        let v = conjunction_verdict(&ps, &all_in, &p(0.1)).unwrap();
        assert_eq!(v.kind, VerdictKind::ComplementHolds);
        assert!((v.mass - 0.95f64.powi(45)).abs() < 1e-12);
    }

    #[test]
    fn swapped_first_marble_keeps_the_conjunction_false() {
        // marble 1 jumped out with |d|² = |a|²
        let mut marbles = vec![TwoRegionMarble::with_mass_in(0, 0.05).unwrap()];
        marbles.extend((1..45).map(|i| TwoRegionMarble::with_mass_in(i, 0.95).unwrap()));
        let ps = ProductState::new(marbles);
        let mut assignment = vec![(0, Label::Out)];
        assignment.extend((1..45).map(|i| (i, Label::In)));
        let v = conjunction_verdict(&ps, &assignment, &p(0.1)).unwrap();
        assert_eq!(v.kind, VerdictKind::ComplementHolds);
        let report = enumeration_check(&ps, &p(0.1)).unwrap();
        assert_eq!(report.assignment[0], Label::Out);
        assert!(report.strong_anomaly);
    }

    #[test]
    fn anomaly_thresholds_in_n() {
        let cfg = p(0.1);
        let at = |n| enumeration_check(&ProductState::uniform(n, 0.95).unwrap(), &cfg).unwrap();
        let two = at(2);
        assert!(!two.weak_anomaly && !two.strong_anomaly);
        let three = at(3);
        assert!(three.weak_anomaly && !three.strong_anomaly);
        let many = at(45);
        assert!(many.weak_anomaly && many.strong_anomaly);
        assert!(!at(44).strong_anomaly);
    }

    #[test]
    fn unknown_marble_is_a_shape_error() {
        let s = ProductState::uniform(2, 0.9).unwrap().expand().unwrap();
        assert!(matches!(
            conjunction_verdict(&s, &[(5, Label::In)], &p(0.1)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn unnormalized_sparse_state_is_refused() {
        let s = crate::state::SparseState::from_pairs(
            vec![crate::state::Subsystem::marble(0, 1.0)],
            [(vec![Label::In], Amplitude::from_mass(2.0))],
        )
        .unwrap();
        assert!(matches!(
            conjunction_verdict(&s, &[(0, Label::In)], &p(0.1)),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn dual_threshold_cases() {
        assert!(dual_threshold_check(1, 0.2, 0.2, 0.9).unwrap().consistent);
        let r = dual_threshold_check(50, 0.01, 0.4, 0.95).unwrap();
        assert!(r.consistent);
        // at p = 0.01 a marble at 0.95 no longer counts as in the box
        assert!(r.forced_no_marble_in_box);
        assert!(
            !dual_threshold_check(2, 0.05, 0.4, 0.95)
                .unwrap()
                .forced_no_marble_in_box
        );
        assert!(
            !dual_threshold_check(50, 0.011, 0.4, 0.95)
                .unwrap()
                .consistent
        );

        let n = 100;
        let p_max = max_consistent_p(n, 0.4);
        assert!(p_max < 0.05);
        let forced = dual_threshold_check(n, p_max * (1.0 - 1e-9), 0.4, 0.95).unwrap();
        assert!(forced.consistent);
        assert!(forced.forced_no_marble_in_box);
    }

    fn three_bins(masses: [f64; 3]) -> LatticeWavefunction {
        // nine cells of width 1, three per bin
        let amps = masses
            .iter()
            .flat_map(|m| std::iter::repeat_n(Amplitude::from_mass(m / 3.0), 3))
            .collect();
        LatticeWavefunction::new(amps, 1.0, 0.0).unwrap()
    }

    #[test]
    fn property_intersection_violation_depends_on_p() {
        let psi = three_bins([0.06, 0.88, 0.06]);
        let delta = Interval::new(-0.5, 5.5);
        let delta_prime = Interval::new(2.5, 8.5);
        let r = property_intersection_check(&psi, delta, delta_prime, &p(0.1)).unwrap();
        assert!((r.in_delta.mass - 0.94).abs() < 1e-12);
        assert!((r.in_delta_prime.mass - 0.94).abs() < 1e-12);
        assert!((r.in_intersection.mass - 0.88).abs() < 1e-12);
        assert!(r.violation);
        let r = property_intersection_check(&psi, delta, delta_prime, &p(0.49)).unwrap();
        assert!(!r.violation);
    }

    #[test]
    fn fully_contained_state_never_violates() {
        let psi = three_bins([0.0, 1.0, 0.0]);
        let r = property_intersection_check(
            &psi,
            Interval::new(-0.5, 5.5),
            Interval::new(2.5, 8.5),
            &p(0.1),
        )
        .unwrap();
        assert!(!r.violation);
        assert!(r.in_intersection.holds());
    }
}
