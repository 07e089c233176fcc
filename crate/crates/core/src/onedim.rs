//! Point sets on the line: ab-sets and the alternating-gap counterexample.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::number::Rational;

/// Strictly increasing points on the line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineSet {
    points: Vec<Rational>,
}

impl LineSet {
    pub fn new(mut points: Vec<Rational>) -> Result<Self> {
        points.sort();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("points must be distinct".into()));
        }
        Ok(LineSet { points })
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn gaps(&self) -> Vec<Rational> {
        self.points.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    fn from_gaps(start: Rational, gaps: impl IntoIterator<Item = Rational>) -> Self {
        let mut points = vec![start];
        for g in gaps {
            let next = points.last().expect("nonempty") + &g;
            points.push(next);
        }
        LineSet { points }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

impl Serialize for LineSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(s)
    }
}

/// `2n+1` points around the origin whose gaps alternate `a, b`; to the
/// right of the origin the first gap is `a`, to the left it is `b`.
pub fn make_ab_set(a: &Rational, b: &Rational, n: usize) -> Result<LineSet> {
    if !a.is_positive() || a > b {
        return Err(Error::InvalidParams(format!("need 0 < a <= b, got a = {a}, b = {b}")));
    }
    let left: Rational = (0..n).map(|k| if k % 2 == 0 { b.clone() } else { a.clone() }).sum();
    let gaps = (0..2 * n).map(|k| {
        // gap k counted from the left end; gap n is the first one right of 0
        let from_origin = k as i64 - n as i64;
        if from_origin.rem_euclid(2) == 0 {
            a.clone()
        } else {
            b.clone()
        }
    });
    Ok(LineSet::from_gaps(-left, gaps))
}

/// The free gap `ρ + (2R - ρ)(k+1)/(k+3)`.
pub fn free_gap(rho: &Rational, big_r: &Rational, k: usize) -> Rational {
    let two_r = Rational::from(2) * big_r;
    rho + (&two_r - rho) * Rational::new(k as i64 + 1, k as i64 + 3)
}

/// Gaps `ρ, g_0, ρ, g_1, …, ρ, g_{n-1}` from the origin.
pub fn make_1d_counterexample(rho: &Rational, big_r: &Rational, n: usize) -> Result<LineSet> {
    if !rho.is_positive() || *rho >= Rational::from(2) * big_r {
        return Err(Error::InvalidParams(format!("need 0 < rho < 2R, got rho = {rho}, R = {big_r}")));
    }
    let gaps = (0..n).flat_map(|k| [rho.clone(), free_gap(rho, big_r, k)]);
    Ok(LineSet::from_gaps(Rational::zero(), gaps))
}

/// Offsets of the closed `ρ`-ball around point `i`, sorted.
fn offsets(set: &LineSet, i: usize, rho: &Rational) -> Vec<Rational> {
    let c = &set.points[i];
    set.points
        .iter()
        .map(|p| p - c)
        .filter(|o| o.abs() <= *rho)
        .collect()
}

/// Whether all `ρ`-clusters around points at least `ρ` from both ends are
/// equivalent under translation and reflection.
pub fn line_clusters_equal(set: &LineSet, rho: &Rational) -> Result<bool> {
    let (Some(first), Some(last)) = (set.points.first(), set.points.last()) else {
        return Err(Error::InsufficientWindow("empty set".into()));
    };
    let interior: Vec<usize> = (0..set.points.len())
        .filter(|&i| &set.points[i] - rho >= *first && &set.points[i] + rho <= *last)
        .collect();
    let Some(&i0) = interior.first() else {
        return Err(Error::InsufficientWindow(format!("no point lies {rho} away from both ends")));
    };
    let reference = offsets(set, i0, rho);
    let mirrored: Vec<Rational> = reference.iter().rev().map(|o| -o).collect();
    Ok(interior.iter().all(|&i| {
        let o = offsets(set, i, rho);
        o == reference || o == mirrored
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn ab_sets() {
        let s = make_ab_set(&q(1, 1), &q(1, 1), 2).unwrap();
        assert_eq!(s.points(), &[q(-2, 1), q(-1, 1), q(0, 1), q(1, 1), q(2, 1)]);
        let s = make_ab_set(&q(1, 1), &q(3, 1), 4).unwrap();
        assert_eq!(s.points().len(), 9);
        assert!(s.points().contains(&q(0, 1)));
        let g = s.gaps();
        assert!(g.windows(2).all(|w| w[0] != w[1]));
        assert!(line_clusters_equal(&s, &q(3, 1)).unwrap());
        assert!(make_ab_set(&q(2, 1), &q(1, 1), 2).is_err());
    }

    #[test]
    fn counterexample() {
        for rho in [q(1, 1), q(3, 2)] {
            let s = make_1d_counterexample(&rho, &q(1, 1), 8).unwrap();
            assert!(line_clusters_equal(&s, &rho).unwrap());
            assert!(!line_clusters_equal(&s, &q(2, 1)).unwrap());
            let free: Vec<_> = s.gaps().into_iter().skip(1).step_by(2).collect();
            assert!(free.iter().all(|g| *g > rho && *g < q(2, 1)));
        }
        assert!(make_1d_counterexample(&q(2, 1), &q(1, 1), 3).is_err());
    }

    #[test]
    fn json() {
        let s = make_ab_set(&q(1, 2), &q(1, 1), 1).unwrap();
        assert_eq!(s.to_json(), r#"["-1","0","1/2"]"#);
    }
}
