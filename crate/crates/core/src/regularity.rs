//! Regularity criteria, one-cluster hypotheses, group predictions, parameter
//! synthesis and Delone-type checks for Engel sets.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clusters::{clusters_equivalent, count_classes, representative_cluster};
use crate::construct::{basis_used, layer_origin, layer_vlevel, LayerWindow, Limits};
use crate::error::{Error, Result};
use crate::geometry::{OrthoMap, SplitVector};
use crate::number::{cmp_rational_quad, QuadRadius, RadiusSq, Rational};
use crate::params::EngelParams;
use crate::sequence::ShiftSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityVerdict {
    pub is_regular: bool,
    pub tau: Option<i8>,
}

/// Regular iff `a_{i+d-1} = τ a_i` for all `i`, with `τ = a_d / a_1`.
pub fn is_regular(seq: &ShiftSequence) -> RegularityVerdict {
    let h = (seq.d() - 1) as i64;
    let tau = (seq.term(h + 1) * seq.term(1)).signum() as i8;
    let holds = (1..=seq.period() as i64).all(|i| seq.term(i + h) == tau as i64 * seq.term(i));
    RegularityVerdict { is_regular: holds, tau: holds.then_some(tau) }
}

/// `(2dR - ε)²` as an exact squared radius.
pub fn radius_2dr_minus(d: usize, big_r_sq: &Rational, eps: &Rational) -> Result<RadiusSq> {
    let k = Rational::from(2 * d as i64);
    if eps.is_zero() {
        return Ok(RadiusSq::exact(k.square() * big_r_sq));
    }
    // Squaring loses the sign of 2dR - ε.
    if eps.is_negative() || eps.square() >= k.square() * big_r_sq {
        return Err(Error::Precondition(format!("need 0 < eps < 2dR, got eps = {eps}")));
    }
    match big_r_sq.sqrt_exact() {
        Some(r) => Ok(RadiusSq::exact((k * r - eps).square())),
        None => Ok(RadiusSq::Quad(QuadRadius::square_of_difference(&k, big_r_sq, eps)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub eps: Rational,
    pub checks: Vec<Check>,
    /// Conditions (i)-(iii) all hold.
    pub all_hold: bool,
    /// The strict bound `a² < εb/(d(d-1))` holds as well.
    pub strict_holds: bool,
    /// `2dR - ε` equals `2db` exactly.
    pub boundary: bool,
}

impl HypothesisReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `x · b` as a quadratic number.
fn times_b(params: &EngelParams, x: Rational) -> QuadRadius {
    QuadRadius { u: Rational::zero(), v: x, d: params.b_sq.clone() }
}

/// Hypotheses under which every `(2dR - ε)`-cluster is equivalent.
pub fn onecluster_hypothesis(params: &EngelParams, eps: &Rational) -> Result<HypothesisReport> {
    if !eps.is_positive() {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let d = Rational::from(params.d() as i64);
    let dd1 = Rational::from((params.d() * (params.d() - 1)) as i64);
    let big_r_sq = params.big_r_sq();
    let a = &params.a;

    let i = Check {
        name: "a < b".into(),
        holds: a.square() < params.b_sq,
        lhs: a.to_string(),
        rhs: times_b(params, Rational::one()).to_string(),
    };

    // 2dR - ε < 2db  ⟺  4d²(R² - b²) - ε² < 4dε·b
    let lhs2 = Rational::from(4) * d.square() * (&big_r_sq - &params.b_sq) - eps.square();
    let rhs2 = times_b(params, Rational::from(4) * &d * eps);
    let ord2 = cmp_rational_quad(&lhs2, &rhs2);
    let ii = Check {
        name: "2dR - eps < 2db".into(),
        holds: ord2 == Ordering::Less,
        lhs: QuadRadius { u: -eps.clone(), v: Rational::from(2) * &d, d: big_r_sq.clone() }.to_string(),
        rhs: times_b(params, Rational::from(2) * &d).to_string(),
    };

    // a² ≤ εb/(d(d-1))
    let bound = times_b(params, eps / &dd1);
    let ord3 = cmp_rational_quad(&a.square(), &bound);
    let iii = Check {
        name: "a^2 <= eps*b/(d(d-1))".into(),
        holds: ord3 != Ordering::Greater,
        lhs: a.square().to_string(),
        rhs: bound.to_string(),
    };
    let strict = Check {
        name: "a^2 < eps*b/(d(d-1))".into(),
        holds: ord3 == Ordering::Less,
        lhs: iii.lhs.clone(),
        rhs: iii.rhs.clone(),
    };
    let all_hold = i.holds && ii.holds && iii.holds;
    Ok(HypothesisReport {
        eps: eps.clone(),
        strict_holds: all_hold && strict.holds,
        boundary: ord2 == Ordering::Equal,
        checks: vec![i, ii, iii, strict],
        all_hold,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupPrediction {
    pub k: i64,
    pub p: i64,
    /// `k²R² < b²(k+1)²`, i.e. `2kR < 2b(k+1)`.
    pub applicable: bool,
    /// The sufficient form `a² < 2b²/(k(d-1))`.
    pub sufficient_form: bool,
    /// Horizontal axes (1-based) not used by the shifts around layer `p`.
    pub axes: BTreeSet<usize>,
    pub predicted_order: u64,
    pub generators: Vec<OrthoMap>,
}

/// Symmetry group of the `2kR`-cluster at layer `p`: the hyperoctahedral
/// group on the axes left untouched by the nearby shifts.
pub fn predict_group(params: &EngelParams, k: i64, p: i64) -> Result<GroupPrediction> {
    if k < 1 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let d = params.d();
    let kq = Rational::from(k);
    let applicable = kq.square() * params.big_r_sq() < params.b_sq.clone() * Rational::from(k + 1).square();
    let sufficient_form =
        params.a.square() * kq * Rational::from((d - 1) as i64) < Rational::from(2) * &params.b_sq;
    let used = basis_used(params, p, k);
    let axes: BTreeSet<usize> = (1..d).filter(|s| !used.contains(s)).collect();
    let n = axes.len() as u64;
    let predicted_order = (1..=n).product::<u64>() << n;
    let ident: Vec<usize> = (0..d - 1).collect();
    let mut generators = Vec::new();
    for &s in &axes {
        let mut signs = vec![1; d - 1];
        signs[s - 1] = -1;
        generators.push(OrthoMap::signed_permutation(&ident, &signs, 1, params.b_sq.clone())?);
    }
    let list: Vec<usize> = axes.iter().copied().collect();
    for w in list.windows(2) {
        let mut perm = ident.clone();
        perm.swap(w[0] - 1, w[1] - 1);
        generators.push(OrthoMap::signed_permutation(&perm, &vec![1; d - 1], 1, params.b_sq.clone())?);
    }
    Ok(GroupPrediction { k, p, applicable, sufficient_form, axes, predicted_order, generators })
}

/// `a`, `b²`, `δ` meeting the hypotheses for a prescribed `R²` and `ε`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChosenParameters {
    pub d: usize,
    pub a: Rational,
    pub b_sq: Rational,
    pub delta: Rational,
    pub halvings: u32,
}

impl ChosenParameters {
    pub fn with_sequence(&self, seq: ShiftSequence) -> Result<EngelParams> {
        if seq.d() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: seq.d() });
        }
        EngelParams::new(seq, self.a.clone(), self.b_sq.clone(), self.delta.clone())
    }
}

/// Starts near `a = R/(2√d)` and halves `a` until `a < b`, `2dR - ε < 2db`
/// and `a² < εb/(d(d-1))` hold exactly, where `b² = R² - (d-1)a²`.
pub fn choose_parameters(d: usize, big_r_sq: &Rational, eps: &Rational) -> Result<ChosenParameters> {
    if d < 2 {
        return Err(Error::InvalidParams("dimension must be at least 2".into()));
    }
    if !big_r_sq.is_positive() {
        return Err(Error::Precondition("R² must be positive".into()));
    }
    if !eps.is_positive() {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    radius_2dr_minus(d, big_r_sq, eps)?;
    let h = Rational::from((d - 1) as i64);
    let mut a = (big_r_sq / Rational::from(4 * d as i64)).floor_sqrt_dyadic(8);
    let seq = ShiftSequence::new(d, (1..d).collect(), vec![1; d - 1])?;
    for halvings in 0..200 {
        let b_sq = big_r_sq - &h * a.square();
        if a.is_positive() && b_sq > a.square() {
            let delta = &a / Rational::from(2);
            let params = EngelParams::new(seq.clone(), a.clone(), b_sq.clone(), delta.clone())?;
            if onecluster_hypothesis(&params, eps)?.strict_holds {
                return Ok(ChosenParameters { d, a, b_sq, delta, halvings });
            }
        }
        a = &a / Rational::from(2);
    }
    Err(Error::Precondition("no parameters found".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PackingReport {
    pub holds: bool,
    pub min_sq: Option<Rational>,
    pub bound_sq: Rational,
    pub pair: Option<(SplitVector, SplitVector)>,
}

/// Minimum squared distance between window points, against `4r²`.
pub fn verify_packing(window: &LayerWindow, r_sq: &Rational) -> PackingReport {
    let metric = window.metric();
    let n = window.len();
    let mut best: Option<(i128, usize, usize)> = None;
    let last = window.d() - 1;
    let wv = metric.weights(window.d())[last];
    for i in 0..n {
        let p = window.int_point(i);
        for j in i + 1..n {
            let q = window.int_point(j);
            let dv = (q[last] - p[last]) as i128;
            // Points are stored layer by layer with heights increasing.
            if let Some((b, _, _)) = best {
                if dv * dv * wv > b {
                    break;
                }
            }
            let s = metric.sq_dist(p, q);
            if best.is_none_or(|(b, _, _)| s < b) {
                best = Some((s, i, j));
            }
        }
    }
    let bound_sq = Rational::from(4) * r_sq;
    match best {
        None => PackingReport { holds: true, min_sq: None, bound_sq, pair: None },
        Some((s, i, j)) => {
            let min = metric.to_rational(s);
            let holds = min >= bound_sq;
            PackingReport {
                holds,
                min_sq: Some(min),
                bound_sq,
                pair: (!holds).then(|| (window.point(i), window.point(j))),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringReport {
    pub holds: bool,
    pub samples: usize,
    pub seed: u64,
    pub max_sq: Rational,
    pub big_r_sq: Rational,
    pub worst: Option<SplitVector>,
    pub sharp_point: SplitVector,
    pub sharp_sq: Rational,
    pub sharp_is_tight: bool,
}

const SAMPLE_BITS: u32 = 16;

/// Squared distance from `x` (integer coords in units of `1/(hscale·2^16)`)
/// to the nearest window point in a layer within vertical reach.
fn nearest_sq(window: &LayerWindow, x: &[i64], reach_sq: &Rational, vlevel: &Rational) -> Result<i128> {
    let params = window.params();
    let metric = window.metric();
    let s = 1i64 << SAMPLE_BITS;
    let (lo, hi) = window.layer_range();
    let horiz: Vec<Rational> = x[..x.len() - 1].iter().map(|c| Rational::new(*c, metric.hscale() * s)).collect();
    let reach = Rational::from(reach_sq.ceil_sqrt());
    let w = metric.weights(2);
    let mut best: Option<i128> = None;
    for m in lo..=hi {
        let gap = (layer_vlevel(params, m) - vlevel).square() * &params.b_sq;
        if &gap > reach_sq {
            continue;
        }
        if !window.covers(m, &horiz, &reach) {
            return Err(Error::InsufficientWindow(format!("covering ball clips layer {m}")));
        }
        for i in window.layer_indices(m) {
            let p = window.int_point(i);
            let mut h: i128 = 0;
            for (pc, xc) in p[..p.len() - 1].iter().zip(x) {
                let t = (*pc as i128) * s as i128 - *xc as i128;
                h += t * t;
            }
            let t = p[p.len() - 1] as i128 * s as i128 - x[x.len() - 1] as i128;
            let sq = h * w[0] + t * t * w[1];
            if best.is_none_or(|b| sq < b) {
                best = Some(sq);
            }
        }
    }
    for m in [lo - 1, hi + 1] {
        if (layer_vlevel(params, m) - vlevel).square() * &params.b_sq <= *reach_sq {
            return Err(Error::InsufficientWindow("covering ball leaves the window vertically".into()));
        }
    }
    best.ok_or_else(|| Error::InsufficientWindow("no window layer within reach".into()))
}

/// Seeded covering check plus the exact value at the point
/// `origin(0) + (a,…,a)` at height `b`, midway between `X_0` and `X_1`.
pub fn verify_covering(window: &LayerWindow, big_r_sq: &Rational, n_samples: usize, seed: u64) -> Result<CoveringReport> {
    let params = window.params();
    let metric = window.metric();
    let d = window.d();
    let s = 1i64 << SAMPLE_BITS;
    let scale = Rational::from(metric.scale()) * Rational::from(s).square();
    let to_q = |v: i128| Rational::from(num_bigint::BigInt::from(v)) / &scale;
    let (lo, hi) = window.layer_range();
    // Heights strictly between the middle layer and the one above it.
    let m0 = lo + (hi - lo) / 2;
    if m0 + 1 > hi {
        return Err(Error::InsufficientWindow("covering check needs at least two layers".into()));
    }
    let o = metric.encode(&layer_origin(params, m0))?;
    let v_top = metric.encode(&layer_origin(params, m0 + 1))?[d - 1];
    let cell = (Rational::from(2 * metric.hscale()) * &params.a).numer().clone();
    let cell: i64 = crate::number::big_to_i64(&cell)? * s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max: i128 = 0;
    let mut worst = None;
    for _ in 0..n_samples {
        let mut x: Vec<i64> = (0..d - 1).map(|k| o[k] * s + rng.gen_range(0..cell)).collect();
        x.push(rng.gen_range(o[d - 1] * s..=v_top * s));
        let vlevel = Rational::new(x[d - 1], metric.vscale() * s);
        let sq = nearest_sq(window, &x, big_r_sq, &vlevel)?;
        if sq > max {
            max = sq;
            worst = Some(x);
        }
    }
    let decode = |x: &[i64]| SplitVector {
        horiz: x[..d - 1].iter().map(|c| Rational::new(*c, metric.hscale() * s)).collect(),
        vlevel: Rational::new(x[d - 1], metric.vscale() * s),
    };
    let max_sq = to_q(max);
    // sharp point above origin(0), halfway to X_1
    let base = metric.encode(&layer_origin(params, 0))?;
    let a_int = crate::number::big_to_i64((Rational::from(metric.hscale() * s) * &params.a).numer())?;
    let mut sharp: Vec<i64> = base[..d - 1].iter().map(|c| c * s + a_int).collect();
    sharp.push((base[d - 1] + metric.vscale()) * s);
    let sharp_vlevel = Rational::new(sharp[d - 1], metric.vscale() * s);
    let sharp_sq = to_q(nearest_sq(window, &sharp, big_r_sq, &sharp_vlevel)?);
    Ok(CoveringReport {
        holds: max_sq <= *big_r_sq,
        samples: n_samples,
        seed,
        max_sq,
        big_r_sq: big_r_sq.clone(),
        worst: worst.map(|x| decode(&x)),
        sharp_point: decode(&sharp),
        sharp_is_tight: sharp_sq == *big_r_sq,
        sharp_sq,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnregReport {
    pub is_regular: bool,
    pub n_at_2dr: usize,
    pub consistent: bool,
}

/// Regular iff all `2dR`-clusters are equivalent.
pub fn enreg_check(params: &EngelParams, limits: Limits) -> Result<EnregReport> {
    let d = params.d() as i64;
    let rho_sq = RadiusSq::exact(Rational::from(4 * d * d) * params.big_r_sq());
    let n = count_classes(params, &rho_sq, limits)?.n;
    let is_regular = is_regular(&params.seq).is_regular;
    Ok(EnregReport { is_regular, n_at_2dr: n, consistent: is_regular == (n == 1) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignedSet {
    pub terms: Vec<i64>,
    pub verdict: RegularityVerdict,
    /// `κ` with `u_d = κ u_1`.
    pub kappa: i8,
    pub self_equivalent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoRegularReport {
    pub plus: SignedSet,
    pub minus: SignedSet,
    pub distinct_kappa: bool,
    /// Whether the `2dR`-clusters of the two sets at the origin are equivalent.
    pub clusters_equivalent_at_2dr: bool,
}

fn kappa(seq: &ShiftSequence) -> i8 {
    let (_, s1) = seq.shift_unit(1);
    let (_, sd) = seq.shift_unit(seq.d() as i64);
    (s1 * sd) as i8
}

/// The `τ = +1` and `τ = -1` sets built from the first `d-1` terms of
/// `base`, compared through `κ` and through their `2dR`-clusters.
pub fn two_regular_distinct(base: &EngelParams, limits: Limits) -> Result<TwoRegularReport> {
    let d = base.d();
    let initial: Vec<i64> = (1..d as i64).map(|i| base.seq.term(i)).collect();
    let rho_sq = RadiusSq::exact(Rational::from(4 * (d * d) as i64) * base.big_r_sq());
    let mut sets = Vec::new();
    let mut clusters = Vec::new();
    for tau in [1, -1] {
        let seq = ShiftSequence::tau_regular(d, &initial, tau)?;
        let params = base.with_sequence(seq)?;
        let c = representative_cluster(&params, 0, &rho_sq, 0, limits)?;
        sets.push(SignedSet {
            terms: params.seq.terms(),
            verdict: is_regular(&params.seq),
            kappa: kappa(&params.seq),
            self_equivalent: clusters_equivalent(&c, &c)?.is_some(),
        });
        clusters.push(c);
    }
    let cross = clusters_equivalent(&clusters[0], &clusters[1])?.is_some();
    let minus = sets.pop().expect("two sets");
    let plus = sets.pop().expect("two sets");
    Ok(TwoRegularReport { distinct_kappa: plus.kappa != minus.kappa, plus, minus, clusters_equivalent_at_2dr: cross })
}
