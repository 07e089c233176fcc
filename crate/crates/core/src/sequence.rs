//! The doubly-infinite shift sequence, stored as one periodic block.
//!
//! Terms are `a_i = signs[(i-1) mod P] · abs_pattern[(i-1) mod (d-1)]`.
//! A non-periodic sequence can be studied through any finite block of it:
//! the periodic extension agrees with the original on that block, so
//! results are valid for clusters whose construction indices stay inside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftSequence {
    d: usize,
    abs_pattern: Vec<usize>,
    signs: Vec<i8>,
}

impl ShiftSequence {
    pub fn new(d: usize, abs_pattern: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("dimension must be at least 2, got {d}")));
        }
        if abs_pattern.len() != d - 1 {
            return Err(Error::InvalidParams(format!(
                "abs_pattern must have {} entries, got {}",
                d - 1,
                abs_pattern.len()
            )));
        }
        let mut sorted = abs_pattern.clone();
        sorted.sort_unstable();
        if sorted != (1..d).collect::<Vec<_>>() {
            return Err(Error::InvalidParams(format!(
                "abs_pattern must be a permutation of 1..={}, got {abs_pattern:?}",
                d - 1
            )));
        }
        if signs.is_empty() || !signs.len().is_multiple_of(d - 1) {
            return Err(Error::InvalidParams(format!(
                "period {} must be a positive multiple of {}",
                signs.len(),
                d - 1
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidParams("signs must be +1 or -1".into()));
        }
        Ok(ShiftSequence { d, abs_pattern, signs })
    }

    /// Sequence from explicit signed terms `a_1, …, a_P` (e.g. `[1, 2, -1, 2]`).
    pub fn from_terms(d: usize, terms: &[i64]) -> Result<Self> {
        if d < 2 || terms.len() < d - 1 {
            return Err(Error::InvalidParams("need at least d-1 terms".into()));
        }
        let abs_pattern: Vec<usize> = terms[..d - 1].iter().map(|t| t.unsigned_abs() as usize).collect();
        for (i, t) in terms.iter().enumerate() {
            if t.unsigned_abs() as usize != abs_pattern[i % (d - 1)] {
                return Err(Error::InvalidParams(format!(
                    "term a_{} = {t} breaks |a_(i+d-1)| = |a_i|",
                    i + 1
                )));
            }
        }
        let signs = terms.iter().map(|t| if *t > 0 { 1 } else { -1 }).collect();
        ShiftSequence::new(d, abs_pattern, signs)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn period(&self) -> usize {
        self.signs.len()
    }

    pub fn abs_pattern(&self) -> &[usize] {
        &self.abs_pattern
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// The signed term `a_i`.
    pub fn term(&self, i: i64) -> i64 {
        let h = (self.d - 1) as i64;
        let p = self.signs.len() as i64;
        let abs = self.abs_pattern[(i - 1).rem_euclid(h) as usize] as i64;
        let sign = self.signs[(i - 1).rem_euclid(p) as usize] as i64;
        sign * abs
    }

    /// `u_i = sign(a_i) e_{|a_i|}` as `(axis, sign)` with 1-based axis.
    pub fn shift_unit(&self, i: i64) -> (usize, i32) {
        let t = self.term(i);
        (t.unsigned_abs() as usize, if t > 0 { 1 } else { -1 })
    }

    /// Terms `a_1, …, a_P`.
    pub fn terms(&self) -> Vec<i64> {
        (1..=self.period() as i64).map(|i| self.term(i)).collect()
    }

    /// Sequence with `a_{i+d-1} = τ a_i` built from the given initial terms.
    pub fn tau_regular(d: usize, initial: &[i64], tau: i8) -> Result<Self> {
        if initial.len() != d.saturating_sub(1) {
            return Err(Error::InvalidParams(format!("need exactly {} initial terms", d.saturating_sub(1))));
        }
        let mut terms = initial.to_vec();
        if tau < 0 {
            terms.extend(initial.iter().map(|t| -t));
        }
        ShiftSequence::from_terms(d, &terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar() -> ShiftSequence {
        ShiftSequence::new(2, vec![1], vec![1, 1, -1]).unwrap()
    }

    fn spatial() -> ShiftSequence {
        ShiftSequence::new(3, vec![1, 2], vec![1, 1, -1, 1]).unwrap()
    }

    #[test]
    fn terms_follow_the_periodic_block() {
        let s = planar();
        assert_eq!(s.term(3), -1);
        assert_eq!(s.term(0), -1);
        assert_eq!(s.term(-5), s.term(1));
        let t = spatial();
        assert_eq!(t.terms(), vec![1, 2, -1, 2]);
        assert_eq!(t.term(3), -1);
        assert_eq!(t.shift_unit(2), (2, 1));
        assert_eq!(t.shift_unit(3), (1, -1));
        for i in -10..10 {
            assert_eq!(t.shift_unit(i + 4), t.shift_unit(i));
        }
    }

    #[test]
    fn validation() {
        assert!(ShiftSequence::new(1, vec![], vec![1]).is_err());
        assert!(ShiftSequence::new(3, vec![1, 1], vec![1, 1]).is_err());
        assert!(ShiftSequence::new(3, vec![1, 2], vec![1, 1, 1]).is_err());
        assert!(ShiftSequence::new(3, vec![2, 1], vec![1, 0]).is_err());
        assert!(ShiftSequence::from_terms(3, &[1, 2, 2, 1]).is_err());
        assert_eq!(ShiftSequence::from_terms(3, &[1, 2, -1, -2]).unwrap().signs(), &[1, 1, -1, -1]);
    }

    #[test]
    fn tau_regular_sequences() {
        let plus = ShiftSequence::tau_regular(3, &[1, 2], 1).unwrap();
        assert_eq!(plus.terms(), vec![1, 2]);
        let minus = ShiftSequence::tau_regular(3, &[1, 2], -1).unwrap();
        assert_eq!(minus.terms(), vec![1, 2, -1, -2]);
    }
}
