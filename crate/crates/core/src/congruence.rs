//! Exact congruence testing for finite point sets in integer coordinates.
//!
//! Both sets are centred at the origin, so a congruence is a linear map.
//! A frame of linearly independent source points is chosen from the
//! smallest norm classes; its images are searched by backtracking over
//! points of equal norm and matching inner products. A spanning frame
//! determines the map, which is then applied to every point. A frame of
//! lower rank determines the correspondence through inner products alone.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::frame::Metric;
use crate::geometry::SplitVector;
use crate::number::{big_to_i128, Rational};

/// A finite point set centred at the origin, in the integer frame of `metric`.
#[derive(Clone, Debug)]
pub struct PointSet {
    metric: Metric,
    d: usize,
    coords: Vec<i64>,
    norms: Vec<i128>,
}

impl PointSet {
    pub fn new(metric: Metric, d: usize, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        let mut coords = Vec::new();
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            coords.extend(p);
        }
        let mut s = PointSet { metric, d, coords, norms: Vec::new() };
        s.norms = (0..s.coords.len() / d).map(|i| s.metric.dot(s.point(i), s.point(i))).collect();
        Ok(s)
    }

    pub fn from_vectors(metric: Metric, d: usize, points: &[SplitVector]) -> Result<Self> {
        let enc = points.iter().map(|p| metric.encode(p)).collect::<Result<Vec<_>>>()?;
        PointSet::new(metric, d, enc)
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn norm(&self, i: usize) -> i128 {
        self.norms[i]
    }

    /// Point indices grouped by norm, smallest classes first.
    fn norm_classes(&self) -> Vec<(i128, Vec<usize>)> {
        let mut by_norm: HashMap<i128, Vec<usize>> = HashMap::new();
        for (i, n) in self.norms.iter().enumerate() {
            by_norm.entry(*n).or_default().push(i);
        }
        let mut classes: Vec<_> = by_norm.into_iter().collect();
        classes.sort_by_key(|(n, v)| (v.len(), *n));
        classes
    }

    /// Independent points taken greedily from the smallest norm classes.
    pub fn frame(&self) -> Vec<usize> {
        let mut ech = Echelon::default();
        let mut out = Vec::new();
        'outer: for (_, class) in self.norm_classes() {
            for i in class {
                if ech.try_add(self.point(i)) {
                    out.push(i);
                    if out.len() == self.d {
                        break 'outer;
                    }
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.frame().len()
    }

    fn sorted_norms(&self) -> Vec<i128> {
        let mut n = self.norms.clone();
        n.sort_unstable();
        n
    }

    fn max_abs(&self) -> i128 {
        self.coords.iter().map(|c| (*c as i128).abs()).max().unwrap_or(0)
    }

    /// The same points in the integer frame of a finer `target` metric.
    pub fn rescale(&self, target: &Metric) -> Result<PointSet> {
        if target == &self.metric {
            return Ok(self.clone());
        }
        let (h, v) = (target.hscale() / self.metric.hscale(), target.vscale() / self.metric.vscale());
        if h * self.metric.hscale() != target.hscale() || v * self.metric.vscale() != target.vscale() {
            return Err(Error::InvalidParams("target metric does not refine this one".into()));
        }
        let d = self.d;
        let pts = (0..self.len()).map(|i| {
            let p = self.point(i);
            p.iter().enumerate().map(|(k, x)| x * if k + 1 == d { v } else { h }).collect()
        });
        PointSet::new(target.clone(), d, pts)
    }

    /// Index of each point, by coordinates.
    pub fn index(&self) -> HashMap<&[i64], usize> {
        (0..self.len()).map(|i| (self.point(i), i)).collect()
    }
}

/// Integer row-echelon basis with gcd-reduced rows.
#[derive(Default)]
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn try_add(&mut self, v: &[i64]) -> bool {
        let mut v: Vec<i128> = v.iter().map(|x| *x as i128).collect();
        for (c, row) in &self.rows {
            if v[*c] != 0 {
                let (a, b) = (row[*c], v[*c]);
                for k in 0..v.len() {
                    v[k] = v[k] * a - row[k] * b;
                }
                let g = v.iter().fold(0i128, |g, x| g.gcd(x));
                if g > 1 {
                    v.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        match v.iter().position(|x| *x != 0) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// A linear map `num / den` acting on integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMap {
    d: usize,
    num: Vec<i128>,
    den: i128,
}

impl IntMap {
    fn from_rational(m: &[Vec<Rational>]) -> Result<Self> {
        let d = m.len();
        let den = m.iter().flatten().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
        let num = m
            .iter()
            .flatten()
            .map(|x| big_to_i128(&(x * Rational::from(den.clone())).floor()))
            .collect::<Result<_>>()?;
        Ok(IntMap { d, num, den: big_to_i128(&den)? })
    }

    /// Map given in split coordinates, expressed in the integer frame of `metric`.
    pub fn from_split(m: &[Vec<Rational>], metric: &Metric) -> Result<Self> {
        let d = m.len();
        let s: Vec<Rational> = (0..d)
            .map(|i| Rational::from(if i + 1 == d { metric.vscale() } else { metric.hscale() }))
            .collect();
        let int: Vec<Vec<Rational>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, x)| x * &s[i] / &s[j]).collect())
            .collect();
        IntMap::from_rational(&int)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn image(&self, p: &[i64]) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.d);
        self.apply(p, &mut out).then_some(out)
    }

    /// The image of `p`, or `None` when it leaves the integer lattice.
    fn apply(&self, p: &[i64], out: &mut Vec<i64>) -> bool {
        out.clear();
        for row in self.num.chunks(self.d) {
            let s: i128 = row.iter().zip(p).map(|(m, x)| m * *x as i128).sum();
            if s % self.den != 0 {
                return false;
            }
            out.push((s / self.den) as i64);
        }
        true
    }

    pub fn to_rational(&self) -> Vec<Vec<Rational>> {
        self.num
            .chunks(self.d)
            .map(|row| row.iter().map(|x| Rational::new(*x, self.den)).collect())
            .collect()
    }

    /// The same map in split coordinates.
    pub fn to_split(&self, metric: &Metric) -> Vec<Vec<Rational>> {
        let s: Vec<Rational> = (0..self.d)
            .map(|i| Rational::from(if i + 1 == self.d { metric.vscale() } else { metric.hscale() }))
            .collect();
        self.to_rational()
            .into_iter()
            .enumerate()
            .map(|(i, row)| row.into_iter().enumerate().map(|(j, x)| x * &s[j] / &s[i]).collect())
            .collect()
    }
}

/// How two sets were matched.
#[derive(Clone, Debug)]
pub enum Congruence {
    /// The sets span the space and `map` carries one onto the other.
    Linear(IntMap),
    /// The sets span a proper subspace; `src_frame[t] ↦ dst_frame[t]`
    /// extends to an isometry carrying one set onto the other.
    Partial { src_frame: Vec<usize>, dst_frame: Vec<usize> },
}

struct Matcher<'a> {
    src: &'a PointSet,
    dst: &'a PointSet,
    frame: Vec<usize>,
    frame_gram: Vec<Vec<i128>>,
    candidates: Vec<Vec<usize>>,
    dst_index: HashSet<&'a [i64]>,
    frame_inv: Option<(Vec<Vec<i128>>, i128)>,
}

impl<'a> Matcher<'a> {
    fn new(src: &'a PointSet, dst: &'a PointSet) -> Result<Option<Self>> {
        if src.d != dst.d || src.len() != dst.len() || src.sorted_norms() != dst.sorted_norms() {
            return Ok(None);
        }
        let frame = src.frame();
        if dst.rank() != frame.len() {
            return Ok(None);
        }
        let m = &src.metric;
        let frame_gram = frame
            .iter()
            .map(|&i| frame.iter().map(|&j| m.dot(src.point(i), src.point(j))).collect())
            .collect();
        let mut by_norm: HashMap<i128, Vec<usize>> = HashMap::new();
        for i in 0..dst.len() {
            by_norm.entry(dst.norm(i)).or_default().push(i);
        }
        let candidates = frame.iter().map(|&i| by_norm.get(&src.norm(i)).cloned().unwrap_or_default()).collect();
        let dst_index = (0..dst.len()).map(|i| dst.point(i)).collect();
        let frame_inv = if frame.len() == src.d {
            let f: Vec<Vec<Rational>> = (0..src.d)
                .map(|r| frame.iter().map(|&i| Rational::from(src.point(i)[r])).collect())
                .collect();
            let inv = IntMap::from_rational(&invert(&f).expect("frame is independent"))?;
            let bound = src.max_abs().max(dst.max_abs()).max(1);
            let max_inv = inv.num.iter().map(|x| x.abs()).max().unwrap_or(0).max(1);
            // |G·F_inv·p| ≤ d³·bound²·max_inv must stay well inside i128.
            let d3 = (src.d as i128).pow(3);
            if bound.checked_mul(bound).and_then(|x| x.checked_mul(max_inv)).and_then(|x| x.checked_mul(d3 * bound)).is_none() {
                return Err(Error::Overflow("coordinates too large for exact matching".into()));
            }
            let rows = inv.num.chunks(src.d).map(|r| r.to_vec()).collect();
            Some((rows, inv.den))
        } else {
            None
        };
        Ok(Some(Matcher { src, dst, frame, frame_gram, candidates, dst_index, frame_inv }))
    }

    /// Calls `found` on each frame image assignment that completes to a
    /// congruence; stops when `found` returns `false`.
    fn run(&self, found: &mut dyn FnMut(Congruence) -> bool) {
        let mut images = Vec::with_capacity(self.frame.len());
        self.extend(&mut images, found);
    }

    fn extend(&self, images: &mut Vec<usize>, found: &mut dyn FnMut(Congruence) -> bool) -> bool {
        let t = images.len();
        if t == self.frame.len() {
            return match self.complete(images) {
                Some(c) => found(c),
                None => true,
            };
        }
        let m = &self.dst.metric;
        for &g in &self.candidates[t] {
            let ok = images
                .iter()
                .enumerate()
                .all(|(s, &h)| m.dot(self.dst.point(g), self.dst.point(h)) == self.frame_gram[t][s]);
            if ok && !images.contains(&g) {
                images.push(g);
                let go_on = self.extend(images, found);
                images.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }

    fn complete(&self, images: &[usize]) -> Option<Congruence> {
        let d = self.src.d;
        match &self.frame_inv {
            Some((inv, den)) => {
                // M = G · F⁻¹ with G holding the image columns.
                let mut num = vec![0i128; d * d];
                for r in 0..d {
                    for c in 0..d {
                        num[r * d + c] = (0..d).map(|k| self.dst.point(images[k])[r] as i128 * inv[k][c]).sum();
                    }
                }
                let g = num.iter().fold(*den, |g, x| g.gcd(x));
                let map = IntMap { d, num: num.iter().map(|x| x / g).collect(), den: den / g };
                let mut buf = Vec::with_capacity(d);
                for i in 0..self.src.len() {
                    if !map.apply(self.src.point(i), &mut buf) || !self.dst_index.contains(buf.as_slice()) {
                        return None;
                    }
                }
                Some(Congruence::Linear(map))
            }
            None => {
                let m = &self.src.metric;
                let key = |set: &PointSet, frame: &[usize], i: usize| -> Vec<i128> {
                    let mut k = vec![set.norm(i)];
                    k.extend(frame.iter().map(|&f| m.dot(set.point(i), set.point(f))));
                    k
                };
                let dst_keys: HashSet<Vec<i128>> = (0..self.dst.len()).map(|i| key(self.dst, images, i)).collect();
                let all = (0..self.src.len()).all(|i| dst_keys.contains(&key(self.src, &self.frame, i)));
                all.then(|| Congruence::Partial { src_frame: self.frame.clone(), dst_frame: images.to_vec() })
            }
        }
    }
}

/// A congruence carrying `src` onto `dst`, if one exists.
pub fn find_congruence(src: &PointSet, dst: &PointSet) -> Result<Option<Congruence>> {
    if src.is_empty() && dst.is_empty() {
        return Ok(Some(Congruence::Linear(identity(src.d))));
    }
    let Some(m) = Matcher::new(src, dst)? else { return Ok(None) };
    let mut out = None;
    m.run(&mut |c| {
        out = Some(c);
        false
    });
    Ok(out)
}

/// All linear isometries preserving a spanning set, or `None` when the set
/// does not span (its stabiliser then acts freely on the complement).
pub fn automorphisms(set: &PointSet) -> Result<Option<Vec<IntMap>>> {
    if set.rank() < set.d {
        return Ok(None);
    }
    let m = Matcher::new(set, set)?.expect("a set matches itself");
    let mut out = Vec::new();
    m.run(&mut |c| {
        if let Congruence::Linear(map) = c {
            out.push(map);
        }
        true
    });
    Ok(Some(out))
}

/// A full matrix in integer coordinates realising a congruence.
pub fn realise(src: &PointSet, dst: &PointSet, c: &Congruence) -> Result<IntMap> {
    match c {
        Congruence::Linear(m) => Ok(m.clone()),
        Congruence::Partial { src_frame, dst_frame } => extend_partial(src, dst, src_frame, dst_frame),
    }
}

/// The point correspondence `src[i] ↦ dst[out[i]]` of a congruence.
pub fn correspondence(src: &PointSet, dst: &PointSet, c: &Congruence) -> Result<Vec<usize>> {
    let lost = || Error::Precondition("congruence does not match the given sets".into());
    match c {
        Congruence::Linear(map) => {
            let index = dst.index();
            (0..src.len())
                .map(|i| map.image(src.point(i)).and_then(|q| index.get(q.as_slice()).copied()).ok_or_else(lost))
                .collect()
        }
        Congruence::Partial { src_frame, dst_frame } => {
            let m = dst.metric();
            let key = |set: &PointSet, frame: &[usize], i: usize| -> Vec<i128> {
                let mut k = vec![set.norm(i)];
                k.extend(frame.iter().map(|&f| m.dot(set.point(i), set.point(f))));
                k
            };
            let index: HashMap<Vec<i128>, usize> = (0..dst.len()).map(|i| (key(dst, dst_frame, i), i)).collect();
            (0..src.len())
                .map(|i| index.get(&key(src, src_frame, i)).copied().ok_or_else(lost))
                .collect()
        }
    }
}

fn identity(d: usize) -> IntMap {
    let mut num = vec![0; d * d];
    for i in 0..d {
        num[i * d + i] = 1;
    }
    IntMap { d, num, den: 1 }
}

/// Extends `f_t ↦ g_t` by matching orthogonal complements, trying each
/// ordering of the coordinate axes on the target side.
fn extend_partial(src: &PointSet, dst: &PointSet, f: &[usize], g: &[usize]) -> Result<IntMap> {
    let d = src.d;
    let w: Vec<Rational> = src.metric.weights(d).into_iter().map(|x| Rational::from(BigInt::from(x))).collect();
    let to_q = |p: &[i64]| -> Vec<Rational> { p.iter().map(|x| Rational::from(*x)).collect() };
    let fs: Vec<_> = f.iter().map(|&i| to_q(src.point(i))).collect();
    let gs: Vec<_> = g.iter().map(|&i| to_q(dst.point(i))).collect();
    let axes: Vec<Vec<Rational>> = (0..d)
        .map(|i| (0..d).map(|j| Rational::from((i == j) as i64)).collect())
        .collect();
    let src_comp = complement(&fs, &axes, &w);
    let mut order: Vec<usize> = (0..d).collect();
    loop {
        let shuffled: Vec<_> = order.iter().map(|&i| axes[i].clone()).collect();
        let dst_comp = complement(&gs, &shuffled, &w);
        let scaled: Option<Vec<Vec<Rational>>> = src_comp
            .iter()
            .zip(&dst_comp)
            .map(|(c, e)| {
                let ratio = wdot(c, c, &w) / wdot(e, e, &w);
                ratio.sqrt_exact().map(|l| e.iter().map(|x| x * &l).collect())
            })
            .collect();
        if let Some(scaled) = scaled {
            let from: Vec<Vec<Rational>> = fs.iter().chain(&src_comp).cloned().collect();
            let to: Vec<Vec<Rational>> = gs.iter().chain(&scaled).cloned().collect();
            let from_cols = transpose(&from);
            let to_cols = transpose(&to);
            let inv = invert(&from_cols).expect("basis");
            return IntMap::from_rational(&mat_mul(&to_cols, &inv));
        }
        if !next_permutation(&mut order) {
            return Err(Error::Unsupported("no rational isometry extends this partial congruence".into()));
        }
    }
}

fn wdot(x: &[Rational], y: &[Rational], w: &[Rational]) -> Rational {
    x.iter().zip(y).zip(w).map(|((a, b), c)| a * b * c).sum()
}

/// Orthogonal basis of the complement of `span(basis)`, built from `extra`.
fn complement(basis: &[Vec<Rational>], extra: &[Vec<Rational>], w: &[Rational]) -> Vec<Vec<Rational>> {
    let d = w.len();
    let mut ortho: Vec<Vec<Rational>> = Vec::new();
    let mut out = Vec::new();
    for (k, v) in basis.iter().chain(extra).enumerate() {
        let mut v = v.clone();
        for o in &ortho {
            let c = wdot(&v, o, w) / wdot(o, o, w);
            for (x, y) in v.iter_mut().zip(o) {
                *x -= &(&c * y);
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            ortho.push(v.clone());
            if k >= basis.len() {
                out.push(v);
            }
        }
        if ortho.len() == d {
            break;
        }
    }
    out
}

fn transpose(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * &r[j]).sum()).collect())
        .collect()
}

/// Inverse of a square rational matrix by Gauss–Jordan elimination.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Rational::from((i == j) as i64)));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let pivot = a[c][c].clone();
        a[c].iter_mut().for_each(|x| *x = &*x / &pivot);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot_row = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &(&f * y);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else { return false };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric() -> Metric {
        Metric::new(1, 1, Rational::from(1)).unwrap()
    }

    fn set(points: &[&[i64]]) -> PointSet {
        PointSet::new(metric(), points[0].len(), points.iter().map(|p| p.to_vec())).unwrap()
    }

    #[test]
    fn square_has_eight_symmetries() {
        let s = set(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]]);
        assert_eq!(automorphisms(&s).unwrap().unwrap().len(), 8);
        let r = set(&[&[2, 0], &[0, 1], &[-2, 0], &[0, -1]]);
        assert_eq!(automorphisms(&r).unwrap().unwrap().len(), 4);
    }

    #[test]
    fn rotated_sets_match() {
        let a = set(&[&[3, 4], &[5, 0], &[0, 0]]);
        let b = set(&[&[4, 3], &[0, 5], &[0, 0]]);
        let c = find_congruence(&a, &b).unwrap().unwrap();
        let m = realise(&a, &b, &c).unwrap();
        let mut out = Vec::new();
        assert!(m.apply(&[3, 4], &mut out));
        assert!(out == vec![4, 3] || out == vec![0, 5]);
        let far = set(&[&[3, 4], &[5, 0], &[1, 0]]);
        assert!(find_congruence(&a, &far).unwrap().is_none());
    }

    #[test]
    fn weighted_metric() {
        // with b² = 4, (1,0) and (0,1) have norms 1 and 4
        let m = Metric::new(1, 1, Rational::from(4)).unwrap();
        let a = PointSet::new(m.clone(), 2, vec![vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(automorphisms(&a).unwrap().unwrap().len(), 2);
        let b = PointSet::new(m, 2, vec![vec![0, 1], vec![-2, 0]]).unwrap();
        assert!(find_congruence(&a, &b).unwrap().is_some());
    }

    #[test]
    fn partial_congruence_extends() {
        let a = set(&[&[1, 2, 0], &[2, -1, 0], &[0, 0, 0]]);
        let b = set(&[&[0, 1, 2], &[0, 2, -1], &[0, 0, 0]]);
        assert!(automorphisms(&a).unwrap().is_none());
        let c = find_congruence(&a, &b).unwrap().unwrap();
        assert!(matches!(c, Congruence::Partial { .. }));
        let m = realise(&a, &b, &c).unwrap();
        let om = crate::geometry::OrthoMap::new(m.to_rational(), Rational::from(1));
        assert!(om.is_ok());
    }

    #[test]
    fn inverse_and_permutations() {
        let m = vec![
            vec![Rational::from(2), Rational::from(1)],
            vec![Rational::from(1), Rational::from(1)],
        ];
        let inv = invert(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), vec![vec![Rational::from(1), Rational::zero()], vec![Rational::zero(), Rational::from(1)]]);
        let mut p = vec![0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 6);
    }
}
