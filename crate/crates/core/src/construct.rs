//! Layer-by-layer construction of Engel sets and finite windows of them.
//!
//! Layer `X_m` is the translate `origin(m) + 2aℤ^{d-1}` at height
//! `vlevel(m)·b`. Going up, `X_{2i+1} = X_{2i} + 2b e_d` and
//! `X_{2i} = X_{2i-1} + 2b e_d + δ u_i`; negative levels run the same
//! recurrences backwards.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::Range;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Metric;
use crate::geometry::SplitVector;
use crate::number::{big_to_i64, common_denominator, RadiusSq, Rational};
use crate::params::EngelParams;
use crate::sequence::ShiftSequence;

pub const DEFAULT_MAX_POINTS: u64 = 1_000_000;
pub const MAX_POINTS_ENV: &str = "ENGELSET_MAX_POINTS";

/// Resource guard for window generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_points: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_points: DEFAULT_MAX_POINTS }
    }
}

impl Limits {
    pub fn new(max_points: u64) -> Self {
        Limits { max_points }
    }

    /// Default limits, overridden by `ENGELSET_MAX_POINTS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_POINTS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Limits::new)
                .map_err(|_| Error::Parse(format!("{MAX_POINTS_ENV} must be a positive integer, got {v:?}"))),
            Err(_) => Ok(Limits::default()),
        }
    }
}

/// `u_i` as a horizontal unit vector.
pub fn shift_unit(seq: &ShiftSequence, i: i64) -> SplitVector {
    let (axis, sign) = seq.shift_unit(i);
    SplitVector::horizontal_unit(seq.d(), axis, sign)
}

/// Horizontal offset of `X_m` in units of `δ`, per axis.
pub fn shift_counts(seq: &ShiftSequence, m: i64) -> Vec<i64> {
    let mut t = vec![0i64; seq.d() - 1];
    // Even levels 2i with 0 < 2i ≤ m add u_i; for m < 0 the levels
    // m < 2i ≤ 0 are undone.
    let (lo, hi, sign) = if m >= 0 { (1, m.div_euclid(2), 1) } else { (m.div_euclid(2) + 1, 0, -1) };
    for i in lo..=hi {
        let (axis, s) = seq.shift_unit(i);
        t[axis - 1] += sign * s as i64;
    }
    t
}

/// Height of `X_m` in units of `b`.
pub fn layer_vlevel(params: &EngelParams, m: i64) -> Rational {
    let lambda = params.spacing_ratio();
    // Steps into odd levels have height 2b, steps into even levels 2b'.
    let count = |lo: i64, hi: i64| -> (i64, i64) {
        // odd and even integers in (lo, hi]
        let odd = |x: i64| (x + 1).div_euclid(2);
        let even = |x: i64| x.div_euclid(2) + 1;
        (odd(hi) - odd(lo), even(hi) - even(lo))
    };
    let (odd, even, sign) = if m >= 0 {
        let (o, e) = count(0, m);
        (o, e, 1)
    } else {
        let (o, e) = count(m, 0);
        (o, e, -1)
    };
    let up = Rational::from(2 * odd) + Rational::from(2 * even) * lambda;
    if sign > 0 {
        up
    } else {
        -up
    }
}

/// The point of `X_m` that the construction carries over from the origin.
pub fn layer_origin(params: &EngelParams, m: i64) -> SplitVector {
    let horiz = shift_counts(&params.seq, m)
        .into_iter()
        .map(|t| Rational::from(t) * &params.delta)
        .collect();
    SplitVector::new(horiz, layer_vlevel(params, m))
}

/// Lattice coordinates of `x` in `X_m`, or an error if `x` is not in that layer.
pub fn layer_index(params: &EngelParams, m: i64, x: &SplitVector) -> Result<Vec<BigInt>> {
    if x.dim() != params.d() {
        return Err(Error::DimensionMismatch { expected: params.d(), got: x.dim() });
    }
    let o = layer_origin(params, m);
    if x.vlevel != o.vlevel {
        return Err(Error::NotOnLayer { layer: m });
    }
    let two_a = Rational::from(2) * &params.a;
    x.horiz
        .iter()
        .zip(&o.horiz)
        .map(|(xs, os)| {
            let n = (xs - os) / &two_a;
            if n.is_integer() {
                Ok(n.numer().clone())
            } else {
                Err(Error::NotOnLayer { layer: m })
            }
        })
        .collect()
}

/// Integer metric shared by every window of `params`.
pub fn params_metric(params: &EngelParams) -> Result<Metric> {
    let h = common_denominator([&params.a, &params.delta]);
    let v = params.spacing_ratio().denom().clone();
    Metric::new(big_to_i64(&h)?, big_to_i64(&v)?, params.b_sq.clone())
}

/// A finite block of layers `m_min..=m_max`, each holding
/// `origin(m) + 2a·n` for `|n_s| ≤ L`.
#[derive(Clone, Debug)]
pub struct LayerWindow {
    params: EngelParams,
    layer_range: (i64, i64),
    lattice_radius: i64,
    origins: Vec<SplitVector>,
    metric: Metric,
    per_layer: usize,
    coords: Vec<i64>,
}

pub fn generate_window(params: &EngelParams, layer_range: (i64, i64), lattice_radius: i64, limits: Limits) -> Result<LayerWindow> {
    let (m_min, m_max) = layer_range;
    if m_min > m_max {
        return Err(Error::Precondition(format!("empty layer range [{m_min}, {m_max}]")));
    }
    if lattice_radius < 0 {
        return Err(Error::Precondition("lattice radius must be non-negative".into()));
    }
    let d = params.d();
    let side = 2 * lattice_radius as u128 + 1;
    let per_layer = side
        .checked_pow((d - 1) as u32)
        .ok_or(Error::ResourceCap { requested: u128::MAX, cap: limits.max_points })?;
    let total = per_layer.saturating_mul((m_max - m_min + 1) as u128);
    if total > limits.max_points as u128 {
        return Err(Error::ResourceCap { requested: total, cap: limits.max_points });
    }
    let metric = params_metric(params)?;
    let step = (Rational::from(2 * metric.hscale()) * &params.a)
        .numer()
        .to_i64()
        .ok_or_else(|| Error::Overflow("lattice step".into()))?;
    let per_layer = per_layer as usize;
    let mut coords = Vec::with_capacity(total as usize * d);
    let mut origins = Vec::new();
    for m in m_min..=m_max {
        let o = layer_origin(params, m);
        let base = metric.encode(&o)?;
        origins.push(o);
        let mut n = vec![-lattice_radius; d - 1];
        for _ in 0..per_layer {
            for s in 0..d - 1 {
                coords.push(base[s] + step * n[s]);
            }
            coords.push(base[d - 1]);
            // odometer, last axis fastest: lexicographic order
            for s in (0..d - 1).rev() {
                if n[s] < lattice_radius {
                    n[s] += 1;
                    break;
                }
                n[s] = -lattice_radius;
            }
        }
    }
    Ok(LayerWindow {
        params: params.clone(),
        layer_range,
        lattice_radius,
        origins,
        metric,
        per_layer,
        coords,
    })
}

impl LayerWindow {
    pub fn params(&self) -> &EngelParams {
        &self.params
    }

    pub fn layer_range(&self) -> (i64, i64) {
        self.layer_range
    }

    pub fn lattice_radius(&self) -> i64 {
        self.lattice_radius
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn d(&self) -> usize {
        self.params.d()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains_layer(&self, m: i64) -> bool {
        self.layer_range.0 <= m && m <= self.layer_range.1
    }

    pub fn origin(&self, m: i64) -> Option<&SplitVector> {
        if self.contains_layer(m) {
            Some(&self.origins[(m - self.layer_range.0) as usize])
        } else {
            None
        }
    }

    pub fn layer_of(&self, idx: usize) -> i64 {
        self.layer_range.0 + (idx / self.per_layer) as i64
    }

    /// Indices of the points of `X_m` inside the window.
    pub fn layer_indices(&self, m: i64) -> Range<usize> {
        if !self.contains_layer(m) {
            return 0..0;
        }
        let k = (m - self.layer_range.0) as usize;
        k * self.per_layer..(k + 1) * self.per_layer
    }

    pub fn int_point(&self, idx: usize) -> &[i64] {
        let d = self.d();
        &self.coords[idx * d..(idx + 1) * d]
    }

    pub fn point(&self, idx: usize) -> SplitVector {
        self.metric.decode(self.int_point(idx))
    }

    pub fn layer_points(&self, m: i64) -> Vec<SplitVector> {
        self.layer_indices(m).map(|i| self.point(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, SplitVector)> + '_ {
        (0..self.len()).map(|i| (self.layer_of(i), self.point(i)))
    }

    /// Layer and index of `x`, if it is a window point.
    pub fn locate(&self, x: &SplitVector) -> Option<(i64, usize)> {
        let (lo, hi) = self.layer_range;
        let m = (lo..=hi).find(|&m| self.origins[(m - lo) as usize].vlevel == x.vlevel)?;
        let n = layer_index(&self.params, m, x).ok()?;
        let side = 2 * self.lattice_radius + 1;
        let mut offset = 0i64;
        for k in n {
            let k = k.to_i64()?;
            if k.abs() > self.lattice_radius {
                return None;
            }
            offset = offset * side + k + self.lattice_radius;
        }
        Some((m, self.layer_indices(m).start + offset as usize))
    }

    /// Whether every point of `X_m` within horizontal distance `radius` of
    /// `center` (per axis) belongs to the window.
    pub fn covers(&self, m: i64, center: &[Rational], radius: &Rational) -> bool {
        let Some(o) = self.origin(m) else { return false };
        let reach = Rational::from(2 * (self.lattice_radius + 1)) * &self.params.a;
        o.horiz
            .iter()
            .zip(center)
            .all(|(os, cs)| os + &reach > cs + radius && os - &reach < cs - radius)
    }

    /// CSV dump with columns `layer, horiz_1..horiz_{d-1}, vlevel`.
    pub fn to_csv(&self) -> String {
        let mut out = csv_header(self.d());
        for (m, p) in self.iter() {
            let _ = write!(out, "{m}");
            for x in &p.horiz {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{}", p.vlevel);
        }
        out
    }
}

pub fn csv_header(d: usize) -> String {
    let mut out = String::from("layer");
    for s in 1..d {
        let _ = write!(out, ",horiz{s}");
    }
    out.push_str(",vlevel\n");
    out
}

/// Window extent guaranteeing that the `ρ`-ball around `origin(p)` lies
/// inside the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowSpec {
    pub layer_range: (i64, i64),
    pub lattice_radius: i64,
}

pub fn required_window(params: &EngelParams, rho_sq: &RadiusSq, p: i64) -> Result<WindowSpec> {
    let b_sq = &params.b_sq;
    let vp = layer_vlevel(params, p);
    let reaches = |m: i64| rho_sq.admits(&((layer_vlevel(params, m) - &vp).square() * b_sq));
    let mut down = 0;
    while reaches(p - down - 1) {
        down += 1;
    }
    let mut up = 0;
    while reaches(p + up + 1) {
        up += 1;
    }
    let k = down.max(up);
    let rho_up = Rational::from(rho_sq.ceil_radius());
    let reach = (rho_up + Rational::from(k) * &params.delta) / (Rational::from(2) * &params.a);
    let lattice_radius = big_to_i64(&reach.ceil())? + 1;
    Ok(WindowSpec { layer_range: (p - down, p + up), lattice_radius })
}

/// The chain point `x_j` attached to `x ∈ X_p`.
pub fn chain_point(params: &EngelParams, p: i64, x: &SplitVector, j: i64) -> Result<SplitVector> {
    layer_index(params, p, x)?;
    let shift = layer_origin(params, p + j).sub(&layer_origin(params, p))?;
    x.add(&shift)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub j: i64,
    pub layer: i64,
    pub point: SplitVector,
    /// `|x_j - x_{j-1}|²`
    pub before_sq: Rational,
    /// `|x_{j+1} - x_j|²`
    pub after_sq: Rational,
    /// Whether `x_j` is the only closest point of its layer to `x_{j-1}` and to `x_{j+1}`.
    pub nearest_unique: bool,
}

/// Squared step lengths along the chain for `j_lo..=j_hi`, with each
/// `x_j` checked by a scan of its layer to be the unique nearest point to
/// both neighbours in the chain.
pub fn chain_profile(params: &EngelParams, p: i64, x: &SplitVector, j_range: (i64, i64), limits: Limits) -> Result<Vec<ChainStep>> {
    let (lo, hi) = j_range;
    if lo > hi {
        return Ok(Vec::new());
    }
    // Work at origin(p); lattice translations carry the result to x.
    layer_index(params, p, x)?;
    let span = lo.abs().max(hi.abs()) + 1;
    let reach = (Rational::from(span) * &params.delta) / (Rational::from(2) * &params.a);
    let lattice_radius = big_to_i64(&reach.ceil())? + 2;
    let window = generate_window(params, (p + lo - 1, p + hi + 1), lattice_radius, limits)?;
    chain_profile_in(&window, p, x, j_range)
}

/// As [`chain_profile`], scanning a caller-supplied window.
pub fn chain_profile_in(window: &LayerWindow, p: i64, x: &SplitVector, j_range: (i64, i64)) -> Result<Vec<ChainStep>> {
    let params = window.params();
    let (lo, hi) = j_range;
    if !window.contains_layer(p + lo - 1) || !window.contains_layer(p + hi + 1) {
        return Err(Error::InsufficientWindow("window lacks layers needed by the chain".into()));
    }
    layer_index(params, p, x)?;
    let base = layer_origin(params, p);
    let translation = x.sub(&base)?;
    let metric = window.metric();
    let b_sq = &params.b_sq;
    let chain: Vec<SplitVector> = (lo - 1..=hi + 1)
        .map(|j| chain_point(params, p, &base, j))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for j in lo..=hi {
        let k = (j - lo + 1) as usize;
        let (prev, cur, next) = (&chain[k - 1], &chain[k], &chain[k + 1]);
        let layer = p + j;
        let mut unique = true;
        for query in [prev, next] {
            let nearest = cur.sub(query)?.sq_norm(b_sq);
            let vertical = (&cur.vlevel - &query.vlevel).square() * b_sq;
            let horiz_reach = Rational::from((&nearest - &vertical).ceil_sqrt());
            if !window.covers(layer, &query.horiz, &horiz_reach) {
                return Err(Error::InsufficientWindow(format!(
                    "window too small to certify the nearest point in layer {layer}"
                )));
            }
            let q = metric.encode(query)?;
            let target = metric.encode(cur)?;
            let mut best = i128::MAX;
            let mut hits = Vec::new();
            for i in window.layer_indices(layer) {
                let s = metric.sq_dist(window.int_point(i), &q);
                if s < best {
                    best = s;
                    hits.clear();
                }
                if s == best {
                    hits.push(i);
                }
            }
            unique &= hits.len() == 1 && window.int_point(hits[0]) == target.as_slice();
        }
        out.push(ChainStep {
            j,
            layer,
            point: cur.add(&translation)?,
            before_sq: cur.sub(prev)?.sq_norm(b_sq),
            after_sq: next.sub(cur)?.sq_norm(b_sq),
            nearest_unique: unique,
        });
    }
    Ok(out)
}

/// Axes `|a_i|` used by the shifted steps among the layers `X_{p-k}..X_{p+k}`.
pub fn basis_used(params: &EngelParams, p: i64, k: i64) -> BTreeSet<usize> {
    ((p - k + 1)..=(p + k))
        .filter(|m| m.rem_euclid(2) == 0)
        .map(|m| params.seq.shift_unit(m.div_euclid(2)).0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn origins_of_examples() {
        let p = EngelParams::planar_example();
        assert_eq!(layer_origin(&p, 0), SplitVector::zero(2));
        let o4 = layer_origin(&p, 4);
        assert_eq!(o4.horiz, vec![r(2)]);
        assert_eq!(o4.vlevel, r(8));
        let s = EngelParams::spatial_example();
        let o4 = layer_origin(&s, 4);
        assert_eq!(o4.horiz, vec![r(1), r(1)]);
        assert_eq!(&o4.vlevel * r(7), r(56));
        assert_eq!(layer_origin(&s, -6).horiz, vec![r(1), r(-2)]);
    }

    #[test]
    fn backward_recurrence_inverts_forward() {
        let s = EngelParams::spatial_example();
        for m in -9..9 {
            let step = layer_origin(&s, m + 1).sub(&layer_origin(&s, m)).unwrap();
            let expect = if (m + 1).rem_euclid(2) == 0 {
                let mut u = shift_unit(&s.seq, (m + 1).div_euclid(2));
                u.vlevel = r(2);
                u
            } else {
                SplitVector::new(vec![r(0), r(0)], r(2))
            };
            assert_eq!(step, expect, "step into layer {}", m + 1);
        }
    }

    #[test]
    fn small_window() {
        let p = EngelParams::planar_example();
        let w = generate_window(&p, (0, 0), 1, Limits::default()).unwrap();
        let xs: Vec<_> = w.layer_points(0).into_iter().map(|v| v.horiz[0].clone()).collect();
        assert_eq!(xs, vec![r(-10), r(0), r(10)]);
        assert_eq!(w.len(), 3);
        let s = EngelParams::spatial_example();
        let w = generate_window(&s, (-2, 3), 2, Limits::default()).unwrap();
        assert_eq!(w.len(), 6 * 25);
        assert!(matches!(
            generate_window(&s, (-2, 3), 2, Limits::new(100)),
            Err(Error::ResourceCap { requested: 150, cap: 100 })
        ));
        assert!(generate_window(&s, (1, 0), 2, Limits::default()).is_err());
    }

    #[test]
    fn window_sizing() {
        let p = EngelParams::planar_example();
        let spec = required_window(&p, &RadiusSq::exact(r(48 * 48)), 0).unwrap();
        assert_eq!(spec.layer_range, (-2, 2));
        let s = EngelParams::spatial_example();
        let spec = required_window(&s, &RadiusSq::exact(r(54 * 54)), 3).unwrap();
        assert_eq!(spec.layer_range, (0, 6));
        let spec = required_window(&s, &RadiusSq::exact(r(13 * 13)), 3).unwrap();
        assert_eq!(spec.layer_range, (3, 3));
    }

    #[test]
    fn chain_points() {
        let p = EngelParams::planar_example();
        let o = SplitVector::zero(2);
        assert_eq!(chain_point(&p, 0, &o, 0).unwrap(), o);
        let x2 = chain_point(&p, 0, &o, 2).unwrap();
        assert_eq!((x2.horiz[0].clone(), x2.vlevel.clone() * r(12)), (r(1), r(48)));
        let s = EngelParams::spatial_example();
        let x4 = chain_point(&s, 0, &SplitVector::zero(3), 4).unwrap();
        assert_eq!(x4.horiz, vec![r(1), r(1)]);
        let off = SplitVector::new(vec![r(3), r(0)], r(0));
        assert!(matches!(chain_point(&s, 0, &off, 1), Err(Error::NotOnLayer { layer: 0 })));
    }

    #[test]
    fn basis_used_examples() {
        let s = EngelParams::spatial_example();
        assert_eq!(basis_used(&s, 0, 1), BTreeSet::from([2]));
        for p in -4..4 {
            assert_eq!(basis_used(&s, p, 2), BTreeSet::from([1, 2]));
        }
        let pl = EngelParams::planar_example();
        assert_eq!(basis_used(&pl, 5, 1), BTreeSet::from([1]));
    }

    #[test]
    fn uneven_spacing_heights() {
        let p = EngelParams::planar_example().with_uneven_spacing(r(324)).unwrap();
        // steps alternate 2b (into odd levels) and 2b' = 3b (into even levels)
        assert_eq!(layer_vlevel(&p, 1), r(2));
        assert_eq!(layer_vlevel(&p, 2), r(5));
        assert_eq!(layer_vlevel(&p, -1), r(-3));
        assert_eq!(layer_vlevel(&p, -2), r(-5));
        let w = generate_window(&p, (-2, 2), 1, Limits::default()).unwrap();
        assert_eq!(w.len(), 15);
    }
}
