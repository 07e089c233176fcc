use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::Rational;
use crate::sequence::ShiftSequence;

/// Parameters `(A, a, b, δ)` of an Engel set, optionally with a second
/// layer spacing `b'`.
///
/// `b` enters only through `b²`. With uneven spacing, `b'/b` has to be
/// rational so that heights stay rational multiples of `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngelParams {
    pub seq: ShiftSequence,
    pub a: Rational,
    pub b_sq: Rational,
    pub b_prime_sq: Option<Rational>,
    pub delta: Rational,
}

/// On-disk parameter file. Rationals are strings such as `"5"` or `"1/2"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub d: usize,
    pub abs_pattern: Vec<usize>,
    pub period: usize,
    pub signs: Vec<i8>,
    pub a: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_sq: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime_sq: Option<Rational>,
    pub delta: Rational,
}

impl EngelParams {
    pub fn new(seq: ShiftSequence, a: Rational, b_sq: Rational, delta: Rational) -> Result<Self> {
        let p = EngelParams { seq, a, b_sq, b_prime_sq: None, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn with_uneven_spacing(mut self, b_prime_sq: Rational) -> Result<Self> {
        self.b_prime_sq = Some(b_prime_sq);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !self.delta.is_positive() || self.delta >= self.a {
            return bad(format!("need 0 < delta < a, got delta = {}, a = {}", self.delta, self.a));
        }
        if self.a.square() >= self.b_sq {
            return bad(format!("need a² < b², got a = {}, b² = {}", self.a, self.b_sq));
        }
        if let Some(bp) = &self.b_prime_sq {
            if self.a.square() >= *bp {
                return bad(format!("need a² < b'², got b'² = {bp}"));
            }
            if (bp / &self.b_sq).sqrt_exact().is_none() {
                return bad("b'/b must be rational".into());
            }
        }
        Ok(())
    }

    /// Planar example: `A = (…, 1, 1, -1, …)`, `a = 5`, `b = 12`, `δ = 1`.
    pub fn planar_example() -> Self {
        let seq = ShiftSequence::new(2, vec![1], vec![1, 1, -1]).expect("valid sequence");
        EngelParams::new(seq, 5.into(), 144.into(), 1.into()).expect("valid params")
    }

    /// Spatial example: `A = (…, 1, 2, -1, 2, …)`, `a = 4`, `b = 7`, `δ = 1`.
    pub fn spatial_example() -> Self {
        let seq = ShiftSequence::new(3, vec![1, 2], vec![1, 1, -1, 1]).expect("valid sequence");
        EngelParams::new(seq, 4.into(), 49.into(), 1.into()).expect("valid params")
    }

    /// Same `a`, `b`, `δ` with another sequence.
    pub fn with_sequence(&self, seq: ShiftSequence) -> Result<Self> {
        if seq.d() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: seq.d() });
        }
        Ok(EngelParams { seq, ..self.clone() })
    }

    pub fn d(&self) -> usize {
        self.seq.d()
    }

    /// The Delone type: `r = a` and `R² = b² + (d-1)a²`.
    pub fn r_big_r(&self) -> (Rational, Rational) {
        let r_sq = &self.b_sq + Rational::from((self.d() - 1) as i64) * self.a.square();
        (self.a.clone(), r_sq)
    }

    pub fn big_r_sq(&self) -> Rational {
        self.r_big_r().1
    }

    /// `b'/b`, equal to one for evenly spaced layers.
    pub fn spacing_ratio(&self) -> Rational {
        match &self.b_prime_sq {
            Some(bp) => (bp / &self.b_sq).sqrt_exact().expect("validated"),
            None => Rational::one(),
        }
    }

    pub fn from_file(file: &ParamFile) -> Result<Self> {
        if file.period != file.signs.len() {
            return Err(Error::InvalidParams(format!(
                "period {} does not match {} signs",
                file.period,
                file.signs.len()
            )));
        }
        let seq = ShiftSequence::new(file.d, file.abs_pattern.clone(), file.signs.clone())?;
        let b_sq = match (&file.b, &file.b_sq) {
            (Some(b), None) => b.square(),
            (None, Some(bs)) => bs.clone(),
            (Some(b), Some(bs)) if b.square() == *bs && b.is_positive() => bs.clone(),
            (Some(_), Some(_)) => return Err(Error::InvalidParams("b and b_sq disagree".into())),
            (None, None) => return Err(Error::InvalidParams("one of b or b_sq is required".into())),
        };
        if let Some(b) = &file.b {
            if !b.is_positive() {
                return Err(Error::InvalidParams("b must be positive".into()));
            }
        }
        let b_prime_sq = match (&file.b_prime, &file.b_prime_sq) {
            (Some(bp), None) if bp.is_positive() => Some(bp.square()),
            (None, Some(bps)) => Some(bps.clone()),
            (None, None) => None,
            _ => return Err(Error::InvalidParams("give at most one positive b_prime or b_prime_sq".into())),
        };
        let p = EngelParams { seq, a: file.a.clone(), b_sq, b_prime_sq, delta: file.delta.clone() };
        p.validate()?;
        Ok(p)
    }

    pub fn to_file(&self) -> ParamFile {
        let b = self.b_sq.sqrt_exact();
        ParamFile {
            d: self.d(),
            abs_pattern: self.seq.abs_pattern().to_vec(),
            period: self.seq.period(),
            signs: self.seq.signs().to_vec(),
            a: self.a.clone(),
            b_sq: if b.is_none() { Some(self.b_sq.clone()) } else { None },
            b,
            b_prime: None,
            b_prime_sq: self.b_prime_sq.clone(),
            delta: self.delta.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ParamFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        EngelParams::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delone_type_of_examples() {
        let (r, rr) = EngelParams::planar_example().r_big_r();
        assert_eq!((r, rr), (Rational::from(5), Rational::from(169)));
        let (r, rr) = EngelParams::spatial_example().r_big_r();
        assert_eq!((r, rr), (Rational::from(4), Rational::from(81)));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = EngelParams::spatial_example();
        let back = EngelParams::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);

        let text = r#"{"d":2,"abs_pattern":[1],"period":3,"signs":[1,1,-1],
                       "a":"5","b_sq":"144","delta":"1"}"#;
        assert_eq!(EngelParams::from_json(text).unwrap(), EngelParams::planar_example());

        let zero_delta = text.replace(r#""delta":"1""#, r#""delta":"0""#);
        assert!(EngelParams::from_json(&zero_delta).is_err());
        let flat = text.replace(r#""b_sq":"144""#, r#""b_sq":"25""#);
        assert!(EngelParams::from_json(&flat).is_err());
        let bad_period = text.replace(r#""period":3"#, r#""period":2"#);
        assert!(EngelParams::from_json(&bad_period).is_err());
    }

    #[test]
    fn uneven_spacing_needs_rational_ratio() {
        let p = EngelParams::planar_example();
        assert!(p.clone().with_uneven_spacing(Rational::from(2)).is_err());
        let q = p.with_uneven_spacing(Rational::from(324)).unwrap();
        assert_eq!(q.spacing_ratio(), Rational::new(3, 2));
    }
}
