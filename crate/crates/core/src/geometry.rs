//! Vectors with split horizontal/vertical coordinates and the orthogonal
//! maps acting on them.
//!
//! A point of ℝ^d is stored as `d-1` rational horizontal coordinates plus a
//! rational `vlevel`; its last real coordinate is `vlevel · b`. Only `b²`
//! has to be rational, so every squared distance stays in ℚ even when `b`
//! itself is irrational.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::number::Rational;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitVector {
    pub horiz: Vec<Rational>,
    /// Vertical coordinate in units of `b`.
    pub vlevel: Rational,
}

impl SplitVector {
    pub fn new(horiz: Vec<Rational>, vlevel: Rational) -> Self {
        SplitVector { horiz, vlevel }
    }

    pub fn zero(d: usize) -> Self {
        SplitVector {
            horiz: vec![Rational::zero(); d.saturating_sub(1)],
            vlevel: Rational::zero(),
        }
    }

    /// Horizontal basis vector `sign · e_axis` (axis counted from 1).
    pub fn horizontal_unit(d: usize, axis: usize, sign: i32) -> Self {
        let mut v = SplitVector::zero(d);
        v.horiz[axis - 1] = Rational::from(sign as i64);
        v
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.horiz.len() + 1
    }

    /// Coordinates in split form: horizontal entries followed by `vlevel`.
    pub fn coords(&self) -> impl Iterator<Item = &Rational> {
        self.horiz.iter().chain(std::iter::once(&self.vlevel))
    }

    fn from_coords(mut c: Vec<Rational>) -> Self {
        let vlevel = c.pop().unwrap_or_default();
        SplitVector { horiz: c, vlevel }
    }

    pub fn add(&self, other: &SplitVector) -> Result<SplitVector> {
        check_dim(self, other)?;
        Ok(SplitVector {
            horiz: self.horiz.iter().zip(&other.horiz).map(|(a, b)| a + b).collect(),
            vlevel: &self.vlevel + &other.vlevel,
        })
    }

    pub fn sub(&self, other: &SplitVector) -> Result<SplitVector> {
        check_dim(self, other)?;
        Ok(SplitVector {
            horiz: self.horiz.iter().zip(&other.horiz).map(|(a, b)| a - b).collect(),
            vlevel: &self.vlevel - &other.vlevel,
        })
    }

    pub fn scale(&self, k: &Rational) -> SplitVector {
        SplitVector {
            horiz: self.horiz.iter().map(|x| x * k).collect(),
            vlevel: &self.vlevel * k,
        }
    }

    pub fn sq_norm(&self, b_sq: &Rational) -> Rational {
        let h: Rational = self.horiz.iter().map(|x| x.square()).sum();
        h + self.vlevel.square() * b_sq
    }

    pub fn dot(&self, other: &SplitVector, b_sq: &Rational) -> Result<Rational> {
        check_dim(self, other)?;
        let h: Rational = self.horiz.iter().zip(&other.horiz).map(|(a, b)| a * b).sum();
        Ok(h + &self.vlevel * &other.vlevel * b_sq)
    }
}

fn check_dim(x: &SplitVector, y: &SplitVector) -> Result<()> {
    if x.horiz.len() != y.horiz.len() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

impl fmt::Debug for SplitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for h in &self.horiz {
            write!(f, "{h}, ")?;
        }
        write!(f, "v={})", self.vlevel)
    }
}

impl Serialize for SplitVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SplitVector", 2)?;
        st.serialize_field("horiz", &self.horiz)?;
        st.serialize_field("vlevel", &self.vlevel)?;
        st.end()
    }
}

/// `|x.horiz - y.horiz|² + (x.vlevel - y.vlevel)²·b²`.
pub fn sq_dist(x: &SplitVector, y: &SplitVector, b_sq: &Rational) -> Result<Rational> {
    Ok(x.sub(y)?.sq_norm(b_sq))
}

/// A linear isometry written in split coordinates.
///
/// With `W = diag(1, …, 1, b²)` the orthogonality condition reads
/// `Mᵀ W M = W`, which is checked exactly on construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrthoMap {
    matrix: Vec<Vec<Rational>>,
    b_sq: Rational,
}

impl OrthoMap {
    pub fn new(matrix: Vec<Vec<Rational>>, b_sq: Rational) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidParams("orthogonal map must be a square matrix".into()));
        }
        if !b_sq.is_positive() {
            return Err(Error::InvalidParams("b² must be positive".into()));
        }
        let m = OrthoMap { matrix, b_sq };
        if !m.is_orthogonal() {
            return Err(Error::InvalidParams("matrix is not orthogonal".into()));
        }
        Ok(m)
    }

    pub fn identity(d: usize, b_sq: Rational) -> Self {
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        OrthoMap { matrix, b_sq }
    }

    /// Sends horizontal axis `s` to `signs[s] · e_{perm[s]}` (0-based) and
    /// the vertical axis to `vsign · e_d`.
    pub fn signed_permutation(perm: &[usize], signs: &[i32], vsign: i32, b_sq: Rational) -> Result<Self> {
        let h = perm.len();
        if signs.len() != h {
            return Err(Error::DimensionMismatch { expected: h, got: signs.len() });
        }
        let mut seen = vec![false; h];
        for &p in perm {
            if p >= h || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParams("not a permutation".into()));
            }
        }
        let mut m = vec![vec![Rational::zero(); h + 1]; h + 1];
        for s in 0..h {
            m[perm[s]][s] = Rational::from(signs[s].signum() as i64);
        }
        m[h][h] = Rational::from(vsign.signum() as i64);
        OrthoMap::new(m, b_sq)
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn b_sq(&self) -> &Rational {
        &self.b_sq
    }

    fn weight(&self, i: usize) -> Rational {
        if i + 1 == self.dim() {
            self.b_sq.clone()
        } else {
            Rational::one()
        }
    }

    fn is_orthogonal(&self) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let s: Rational = (0..d)
                    .map(|k| &self.matrix[k][i] * &self.matrix[k][j] * self.weight(k))
                    .sum();
                let expect = if i == j { self.weight(i) } else { Rational::zero() };
                if s != expect {
                    return false;
                }
            }
        }
        true
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OrthoMap) -> Result<OrthoMap> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        if self.b_sq != other.b_sq {
            return Err(Error::InvalidParams("maps use different metrics".into()));
        }
        let d = self.dim();
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| &self.matrix[i][k] * &other.matrix[k][j]).sum())
                    .collect()
            })
            .collect();
        Ok(OrthoMap { matrix, b_sq: self.b_sq.clone() })
    }

    /// `W⁻¹ Mᵀ W`.
    pub fn inverse(&self) -> OrthoMap {
        let d = self.dim();
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| &self.matrix[j][i] * self.weight(j) / self.weight(i))
                    .collect()
            })
            .collect();
        OrthoMap { matrix, b_sq: self.b_sq.clone() }
    }

    pub fn apply(&self, x: &SplitVector) -> Result<SplitVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        let c: Vec<&Rational> = x.coords().collect();
        let out = self
            .matrix
            .iter()
            .map(|row| row.iter().zip(&c).map(|(m, v)| m * *v).sum())
            .collect();
        Ok(SplitVector::from_coords(out))
    }

    pub fn is_identity(&self) -> bool {
        *self == OrthoMap::identity(self.dim(), self.b_sq.clone())
    }

    /// Whether the vertical axis is mapped to ±itself.
    pub fn preserves_vertical_axis(&self) -> bool {
        let d = self.dim();
        let last = d - 1;
        (0..last).all(|i| self.matrix[i][last].is_zero() && self.matrix[last][i].is_zero())
            && self.matrix[last][last].abs() == Rational::one()
    }

    pub fn is_signed_permutation(&self) -> bool {
        self.matrix.iter().all(|row| {
            let nonzero: Vec<_> = row.iter().filter(|x| !x.is_zero()).collect();
            nonzero.len() == 1 && nonzero[0].abs() == Rational::one()
        })
    }

    /// Smallest `n ≥ 1` with `Mⁿ = I`, if it is at most `max`.
    pub fn order(&self, max: usize) -> Option<usize> {
        let mut p = self.clone();
        for n in 1..=max {
            if p.is_identity() {
                return Some(n);
            }
            p = p.compose(self).ok()?;
        }
        None
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect())
            .collect()
    }
}

impl fmt::Debug for OrthoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrthoMap{:?}", self.to_strings())
    }
}

impl Serialize for OrthoMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn sq_dist_examples() {
        let x = SplitVector::new(vec![r(0)], r(0));
        assert_eq!(sq_dist(&x, &x, &r(144)).unwrap(), r(0));
        // (1; vlevel 4) with b = 12 sits at height 48.
        let y = SplitVector::new(vec![r(1)], r(4));
        assert_eq!(sq_dist(&x, &y, &r(144)).unwrap(), r(2305));
        // (a, …, a; height b) to the origin gives R².
        let a = r(4);
        let mid = SplitVector::new(vec![a.clone(), a], r(1));
        assert_eq!(sq_dist(&mid, &SplitVector::zero(3), &r(49)).unwrap(), r(81));
        let z = SplitVector::zero(3);
        assert!(matches!(sq_dist(&x, &z, &r(1)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn group_operations() {
        let b_sq = r(49);
        let id = OrthoMap::identity(3, b_sq.clone());
        let swap = OrthoMap::signed_permutation(&[1, 0], &[1, -1], 1, b_sq.clone()).unwrap();
        assert_eq!(id.compose(&swap).unwrap(), swap);
        let refl = OrthoMap::signed_permutation(&[0, 1], &[-1, 1], 1, b_sq.clone()).unwrap();
        assert!(refl.compose(&refl).unwrap().is_identity());
        assert_eq!(refl.order(8), Some(2));
        // e1 -> e2, e2 -> -e1 is a quarter turn.
        assert_eq!(swap.order(8), Some(4));
        assert!(swap.compose(&swap.inverse()).unwrap().is_identity());
        let e1 = SplitVector::horizontal_unit(3, 1, 1);
        assert_eq!(swap.apply(&e1).unwrap(), SplitVector::horizontal_unit(3, 2, 1));
    }

    #[test]
    fn rejects_non_orthogonal() {
        let m = vec![vec![r(1), r(1)], vec![r(0), r(1)]];
        assert!(OrthoMap::new(m, r(4)).is_err());
        // A rotation mixing the vertical axis is orthogonal only under its metric:
        // with b² = 1 the plain rotation by 90° passes.
        let rot = vec![vec![r(0), r(-1)], vec![r(1), r(0)]];
        assert!(OrthoMap::new(rot.clone(), r(1)).is_ok());
        assert!(OrthoMap::new(rot, r(4)).is_err());
    }
}
