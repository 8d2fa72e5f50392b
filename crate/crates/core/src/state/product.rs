use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::label::{Configuration, Label, Subsystem};
use super::sparse::SparseState;
use super::DEFAULT_DENSE_LIMIT;
use crate::amplitude::{log_add_exp, Amplitude};
use crate::error::{Error, Result};

/// One marble's factor `a|in⟩ + b|out⟩`, kept normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRegionMarble {
    amp_in: Amplitude,
    amp_out: Amplitude,
    pub marble_id: usize,
}

impl TwoRegionMarble {
    /// Build a normalized factor from arbitrary (not all-zero) amplitudes.
    pub fn new(marble_id: usize, amp_in: Amplitude, amp_out: Amplitude) -> Result<Self> {
        let total = log_add_exp(amp_in.log_norm_sqr(), amp_out.log_norm_sqr());
        if total == f64::NEG_INFINITY {
            return Err(Error::DegenerateState);
        }
        let shift = -0.5 * total;
        Ok(TwoRegionMarble {
            amp_in: amp_in.scale_log(shift),
            amp_out: amp_out.scale_log(shift),
            marble_id,
        })
    }

    /// Real positive factor with `|a|² = mass_in`.
    pub fn with_mass_in(marble_id: usize, mass_in: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mass_in) {
            return Err(Error::invalid(format!(
                "|a|² must lie in [0, 1], got {mass_in}"
            )));
        }
        Self::new(
            marble_id,
            Amplitude::from_mass(mass_in),
            Amplitude::from_mass(1.0 - mass_in),
        )
    }

    pub fn amp_in(&self) -> Amplitude {
        self.amp_in
    }

    pub fn amp_out(&self) -> Amplitude {
        self.amp_out
    }

    pub fn amplitude(&self, region: Label) -> Amplitude {
        match region {
            Label::In => self.amp_in,
            Label::Out => self.amp_out,
            other => panic!("{other} is not a marble region"),
        }
    }

    pub fn log_mass(&self, region: Label) -> f64 {
        self.amplitude(region).log_norm_sqr()
    }

    pub fn mass(&self, region: Label) -> f64 {
        self.log_mass(region).exp()
    }

    /// Region holding the larger share of the squared amplitude (ties go to `In`).
    pub fn dominant_region(&self) -> Label {
        if self.amp_in.log_magnitude() >= self.amp_out.log_magnitude() {
            Label::In
        } else {
            Label::Out
        }
    }
}

/// A factorized state of non-interacting marbles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    marbles: Vec<TwoRegionMarble>,
}

impl ProductState {
    pub fn new(marbles: Vec<TwoRegionMarble>) -> Self {
        ProductState { marbles }
    }

    /// `n` identical factors with `|a|² = mass_in`.
    pub fn uniform(n: usize, mass_in: f64) -> Result<Self> {
        let marbles = (0..n)
            .map(|i| TwoRegionMarble::with_mass_in(i, mass_in))
            .collect::<Result<_>>()?;
        Ok(ProductState { marbles })
    }

    pub fn len(&self) -> usize {
        self.marbles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marbles.is_empty()
    }

    pub fn marbles(&self) -> &[TwoRegionMarble] {
        &self.marbles
    }

    pub fn marble(&self, index: usize) -> Result<&TwoRegionMarble> {
        self.marbles.get(index).ok_or_else(|| {
            Error::shape(format!(
                "no marble {index} in a {}-marble state",
                self.len()
            ))
        })
    }

    pub(crate) fn replace(&mut self, index: usize, factor: TwoRegionMarble) {
        self.marbles[index] = factor;
    }

    /// `ln` of the joint mass of a per-marble region assignment: the sum of
    /// the per-factor log masses.
    pub fn joint_log_mass(&self, assignment: &[(usize, Label)]) -> Result<f64> {
        assignment.iter().try_fold(0.0, |acc, &(i, region)| {
            Ok(acc + self.marble(i)?.log_mass(region))
        })
    }

    /// Expand into the full superposition over all `2ⁿ` configurations,
    /// using the default dense limit.
    pub fn expand(&self) -> Result<SparseState> {
        self.expand_with_limit(DEFAULT_DENSE_LIMIT, 1.0)
    }

    /// Expand with an explicit marble-count limit; every marble subsystem
    /// gets `particles` hittable particles.
    pub fn expand_with_limit(&self, dense_limit: usize, particles: f64) -> Result<SparseState> {
        let n = self.len();
        if n > dense_limit {
            return Err(Error::Capacity {
                what: "marble count for dense expansion",
                requested: n,
                limit: dense_limit,
            });
        }
        let roster: Vec<Subsystem> = (0..n).map(|i| Subsystem::marble(i, particles)).collect();
        let mut terms = BTreeMap::new();
        for bits in 0..(1usize << n) {
            let mut labels = Vec::with_capacity(n);
            let mut amp = Amplitude::ONE;
            for (i, factor) in self.marbles.iter().enumerate() {
                let region = if bits >> (n - 1 - i) & 1 == 0 {
                    Label::In
                } else {
                    Label::Out
                };
                amp = amp * factor.amplitude(region);
                labels.push(region);
            }
            if !amp.is_zero() {
                terms.insert(Configuration(labels), amp);
            }
        }
        SparseState::from_terms(roster, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_is_normalized_on_construction() {
        let m =
            TwoRegionMarble::new(0, Amplitude::from_real(3.0), Amplitude::from_real(4.0)).unwrap();
        assert!((m.mass(Label::In) - 0.36).abs() < 1e-15);
        assert!((m.mass(Label::Out) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn all_zero_factor_is_degenerate() {
        assert!(matches!(
            TwoRegionMarble::new(0, Amplitude::ZERO, Amplitude::ZERO),
            Err(Error::DegenerateState)
        ));
    }

    #[test]
    fn expand_single_marble_copies_the_factor() {
        let ps = ProductState::uniform(1, 0.7).unwrap();
        let s = ps.expand().unwrap();
        assert_eq!(s.len(), 2);
        let m_in = s.branch_mass(|c| c.get(0) == Label::In);
        assert!((m_in - 0.7).abs() < 1e-15);
    }

    #[test]
    fn expand_two_balanced_marbles_gives_quarters() {
        let s = ProductState::uniform(2, 0.5).unwrap().expand().unwrap();
        assert_eq!(s.len(), 4);
        for (_, amp) in s.terms() {
            assert!((amp.norm_sqr() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn expand_three_marbles_all_in_mass() {
        let s = ProductState::uniform(3, 0.95).unwrap().expand().unwrap();
        assert_eq!(s.len(), 8);
        let all_in = s.branch_mass(|c| c.count_in() == 3);
        assert!((all_in - 0.857375).abs() < 1e-12);
    }

    #[test]
    fn expand_refuses_beyond_dense_limit() {
        let ps = ProductState::uniform(5, 0.9).unwrap();
        assert!(matches!(
            ps.expand_with_limit(4, 1.0),
            Err(Error::Capacity {
                requested: 5,
                limit: 4,
                ..
            })
        ));
    }

    #[test]
    fn joint_log_mass_is_product_of_factors() {
        let ps = ProductState::uniform(45, 0.95).unwrap();
        let all_in: Vec<_> = (0..45).map(|i| (i, Label::In)).collect();
        let joint = ps.joint_log_mass(&all_in).unwrap().exp();
        assert!((joint - 0.95f64.powi(45)).abs() < 1e-12);
        assert!(ps.joint_log_mass(&[(45, Label::In)]).is_err());
    }
}
