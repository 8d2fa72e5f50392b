use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::label::Label;
use super::sparse::SparseState;
use crate::error::{Error, Result};

/// Product test below this ratio of the two leading singular values.
pub const RANK_ONE_TOLERANCE: f64 = 1e-10;

/// Largest coefficient matrix (rows × columns) the check will build.
pub const MAX_MATRIX_ENTRIES: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchmidtCheck {
    pub is_product: bool,
    /// Second-largest singular value over the largest.
    pub deviation: f64,
}

impl SparseState {
    /// Decide whether the state factorizes across `left` versus the rest of
    /// the roster, from the singular values of the bipartite coefficient
    /// matrix over the support.
    pub fn schmidt_rank_one_check(&self, left: &[usize]) -> Result<SchmidtCheck> {
        let n = self.roster().len();
        let mut is_left = vec![false; n];
        for &s in left {
            if s >= n {
                return Err(Error::shape(format!("no subsystem {s} in roster of {n}")));
            }
            is_left[s] = true;
        }
        let right: Vec<usize> = (0..n).filter(|&s| !is_left[s]).collect();
        let left: Vec<usize> = (0..n).filter(|&s| is_left[s]).collect();
        if left.is_empty() || right.is_empty() {
            return Err(Error::shape("bipartition must be nonempty on both sides"));
        }
        if self.is_empty() {
            return Err(Error::DegenerateState);
        }

        let mut rows: BTreeMap<Vec<Label>, usize> = BTreeMap::new();
        let mut cols: BTreeMap<Vec<Label>, usize> = BTreeMap::new();
        let mut entries = Vec::with_capacity(self.len());
        let max_log = self
            .terms()
            .map(|(_, a)| a.log_magnitude())
            .fold(f64::NEG_INFINITY, f64::max);
        for (c, a) in self.terms() {
            let lkey: Vec<Label> = left.iter().map(|&s| c.get(s)).collect();
            let rkey: Vec<Label> = right.iter().map(|&s| c.get(s)).collect();
            let next_row = rows.len();
            let r = *rows.entry(lkey).or_insert(next_row);
            let next_col = cols.len();
            let k = *cols.entry(rkey).or_insert(next_col);
            entries.push((r, k, a.scale_log(-max_log).to_complex()));
        }
        let size = rows.len().saturating_mul(cols.len());
        if size > MAX_MATRIX_ENTRIES {
            return Err(Error::Capacity {
                what: "bipartite coefficient matrix entries",
                requested: size,
                limit: MAX_MATRIX_ENTRIES,
            });
        }
        let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
        for (r, k, z) in entries {
            m[(r, k)] = z;
        }
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let deviation = match sv.as_slice() {
            [] => 0.0,
            [_] => 0.0,
            [first, second, ..] => second / first,
        };
        Ok(SchmidtCheck {
            is_product: deviation < RANK_ONE_TOLERANCE,
            deviation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Amplitude;
    use crate::state::{ProductState, Subsystem};

    #[test]
    fn bell_like_pair_is_maximally_entangled() {
        let s = SparseState::from_pairs(
            vec![Subsystem::marble(0, 1.0), Subsystem::marble(1, 1.0)],
            [
                (vec![Label::In, Label::In], Amplitude::from_mass(0.5)),
                (vec![Label::Out, Label::Out], Amplitude::from_mass(0.5)),
            ],
        )
        .unwrap();
        let check = s.schmidt_rank_one_check(&[0]).unwrap();
        assert!(!check.is_product);
        assert!((check.deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expanded_products_factor_on_every_cut() {
        let s = ProductState::uniform(5, 0.83).unwrap().expand().unwrap();
        for mask in 1u32..(1 << 5) - 1 {
            let left: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
            assert!(s.schmidt_rank_one_check(&left).unwrap().is_product);
        }
    }

    #[test]
    fn empty_side_is_rejected() {
        let s = ProductState::uniform(2, 0.5).unwrap().expand().unwrap();
        assert!(s.schmidt_rank_one_check(&[]).is_err());
        assert!(s.schmidt_rank_one_check(&[0, 1]).is_err());
        assert!(s.schmidt_rank_one_check(&[7]).is_err());
    }
}
