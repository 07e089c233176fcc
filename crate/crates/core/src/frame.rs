//! Integer coordinates for split vectors.
//!
//! A point with horizontal coordinates `X_s / hscale` and vertical
//! coordinate `(V / vscale)·b` is stored as the integer vector
//! `(X_1, …, X_{d-1}, V)`. Inner products are integers scaled by
//! `hscale² · vscale² · den(b²)`, so all comparisons in the hot loops run on
//! `i128` without loss of exactness.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::geometry::SplitVector;
use crate::number::{big_to_i128, big_to_i64, cmp_rational_quad, QuadRadius, RadiusSq, Rational};

const MAX_COORD: i64 = 1 << 31;
const MAX_WEIGHT: i128 = 1 << 56;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    hscale: i64,
    vscale: i64,
    b_sq: Rational,
    wh: i128,
    wv: i128,
}

impl Metric {
    pub fn new(hscale: i64, vscale: i64, b_sq: Rational) -> Result<Self> {
        if hscale <= 0 || vscale <= 0 || !b_sq.is_positive() {
            return Err(Error::InvalidParams("metric scales and b² must be positive".into()));
        }
        let vs = BigInt::from(vscale);
        let hs = BigInt::from(hscale);
        let wh = big_to_i128(&(&vs * &vs * b_sq.denom()))?;
        let wv = big_to_i128(&(b_sq.numer() * &hs * &hs))?;
        if wh > MAX_WEIGHT || wv > MAX_WEIGHT {
            return Err(Error::Overflow("metric weights too large for exact integer arithmetic".into()));
        }
        Ok(Metric { hscale, vscale, b_sq, wh, wv })
    }

    /// Smallest scales representing every vector in `points` exactly.
    pub fn fitting<'a>(b_sq: Rational, points: impl IntoIterator<Item = &'a SplitVector>) -> Result<Self> {
        let mut h = BigInt::one();
        let mut v = BigInt::one();
        for p in points {
            for x in &p.horiz {
                h = h.lcm(x.denom());
            }
            v = v.lcm(p.vlevel.denom());
        }
        Metric::new(big_to_i64(&h)?, big_to_i64(&v)?, b_sq)
    }

    pub fn hscale(&self) -> i64 {
        self.hscale
    }

    pub fn vscale(&self) -> i64 {
        self.vscale
    }

    pub fn b_sq(&self) -> &Rational {
        &self.b_sq
    }

    /// Per-coordinate weights of the integer inner product for dimension `d`.
    pub fn weights(&self, d: usize) -> Vec<i128> {
        let mut w = vec![self.wh; d - 1];
        w.push(self.wv);
        w
    }

    /// The common refinement of two metrics with the same `b²`.
    pub fn join(&self, other: &Metric) -> Result<Metric> {
        if self.b_sq != other.b_sq {
            return Err(Error::InvalidParams("cannot compare point sets with different b²".into()));
        }
        Metric::new(
            self.hscale.lcm(&other.hscale),
            self.vscale.lcm(&other.vscale),
            self.b_sq.clone(),
        )
    }

    pub fn encode(&self, v: &SplitVector) -> Result<Vec<i64>> {
        let mut out = Vec::with_capacity(v.dim());
        let hs = Rational::from(self.hscale);
        for x in &v.horiz {
            out.push(to_coord(&(x * &hs))?);
        }
        out.push(to_coord(&(&v.vlevel * Rational::from(self.vscale)))?);
        Ok(out)
    }

    pub fn decode(&self, c: &[i64]) -> SplitVector {
        let (h, v) = c.split_at(c.len() - 1);
        SplitVector {
            horiz: h.iter().map(|x| Rational::new(*x, self.hscale)).collect(),
            vlevel: Rational::new(v[0], self.vscale),
        }
    }

    /// Integer inner product, scaled by [`Metric::scale`].
    pub fn dot(&self, x: &[i64], y: &[i64]) -> i128 {
        let last = x.len() - 1;
        let h: i128 = x[..last].iter().zip(&y[..last]).map(|(a, b)| *a as i128 * *b as i128).sum();
        h * self.wh + x[last] as i128 * y[last] as i128 * self.wv
    }

    pub fn sq_dist(&self, x: &[i64], y: &[i64]) -> i128 {
        let last = x.len() - 1;
        let h: i128 = x[..last]
            .iter()
            .zip(&y[..last])
            .map(|(a, b)| {
                let t = (*a - *b) as i128;
                t * t
            })
            .sum();
        let t = (x[last] - y[last]) as i128;
        h * self.wh + t * t * self.wv
    }

    /// The factor between integer and real inner products.
    pub fn scale(&self) -> BigInt {
        let hs = BigInt::from(self.hscale);
        let vs = BigInt::from(self.vscale);
        &hs * &hs * &vs * &vs * self.b_sq.denom()
    }

    pub fn to_rational(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), self.scale())
    }

    pub fn from_rational(&self, q: &Rational) -> Option<i128> {
        let s = q * Rational::from(self.scale());
        if s.is_integer() {
            big_to_i128(s.numer()).ok()
        } else {
            None
        }
    }

    /// `⌊ρ² · scale⌋`: an integer squared distance `s` lies in the closed
    /// ball iff `s ≤` this threshold.
    pub fn threshold(&self, rho_sq: &RadiusSq) -> Result<i128> {
        let scale = Rational::from(self.scale());
        match rho_sq {
            RadiusSq::Exact(r) => big_to_i128(&(r * &scale).floor()),
            RadiusSq::Quad(q) => {
                let scaled = QuadRadius::new(&q.u * &scale, &q.v * &scale, q.d.clone())?;
                let guess = scaled.to_f64().floor();
                if !guess.is_finite() || guess.abs() > 1e36 {
                    return Err(Error::Overflow("radius too large".into()));
                }
                let mut t = BigInt::from(guess as i128);
                let admits = |t: &BigInt| {
                    cmp_rational_quad(&Rational::from(t.clone()), &scaled) != std::cmp::Ordering::Greater
                };
                while !admits(&t) {
                    t -= 1;
                }
                while admits(&(&t + 1)) {
                    t += 1;
                }
                big_to_i128(&t)
            }
        }
    }
}

fn to_coord(x: &Rational) -> Result<i64> {
    if !x.is_integer() {
        return Err(Error::InvalidParams(format!("coordinate {x} is not representable in this metric")));
    }
    let n = big_to_i64(x.numer())?;
    if n.abs() > MAX_COORD || x.numer().abs() > BigInt::from(MAX_COORD) {
        return Err(Error::Overflow(format!("coordinate {x} too large")));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_and_dot() {
        let m = Metric::new(2, 1, Rational::new(49, 4)).unwrap();
        let x = SplitVector::new(vec![Rational::new(1, 2), Rational::from(3)], Rational::from(2));
        let c = m.encode(&x).unwrap();
        assert_eq!(c, vec![1, 6, 2]);
        assert_eq!(m.decode(&c), x);
        let sq = m.to_rational(m.dot(&c, &c));
        assert_eq!(sq, x.sq_norm(&Rational::new(49, 4)));
        let odd = SplitVector::new(vec![Rational::new(1, 3), Rational::zero()], Rational::zero());
        assert!(m.encode(&odd).is_err());
    }

    #[test]
    fn thresholds_are_exact() {
        let m = Metric::new(1, 1, Rational::from(144)).unwrap();
        assert_eq!(m.threshold(&RadiusSq::exact(Rational::from(2304))).unwrap(), 2304);
        let q = QuadRadius::square_of_difference(&Rational::from(4), &Rational::from(169), &Rational::from(4)).unwrap();
        assert_eq!(m.threshold(&RadiusSq::Quad(q)).unwrap(), 2304);
        // 4√2 ≈ 5.657
        let r = RadiusSq::Quad(QuadRadius::new(Rational::zero(), Rational::from(4), Rational::from(2)).unwrap());
        assert_eq!(m.threshold(&r).unwrap(), 5);
    }
}
