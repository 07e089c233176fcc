//! ρ-clusters, their equivalence and symmetry groups, and class counting.

use std::ops::Range;

use serde::Serialize;

use crate::congruence::{automorphisms, correspondence, find_congruence, realise, Congruence, IntMap, PointSet};
use crate::construct::{generate_window, layer_origin, required_window, LayerWindow, Limits};
use crate::error::{Error, Result};
use crate::frame::Metric;
use crate::geometry::{OrthoMap, SplitVector};
use crate::number::{RadiusSq, Rational};
use crate::params::EngelParams;

/// A centre and the other points of the set within the closed ball around it.
///
/// Points are stored relative to the centre in an integer frame and sorted
/// by squared norm, then coordinates.
#[derive(Clone, Debug)]
pub struct Cluster {
    center: SplitVector,
    center_layer: Option<i64>,
    rho_sq: Option<RadiusSq>,
    set: PointSet,
}

impl Cluster {
    /// Cluster of arbitrary points around `center`, optionally cut to the
    /// closed ball of squared radius `rho_sq`. Copies of the centre are dropped.
    pub fn from_points(center: &SplitVector, points: &[SplitVector], b_sq: &Rational, rho_sq: Option<&RadiusSq>) -> Result<Self> {
        let d = center.dim();
        let mut rel = Vec::new();
        for p in points {
            let r = p.sub(center)?;
            if r.coords().all(|x| x.is_zero()) {
                continue;
            }
            if rho_sq.is_none_or(|rs| rs.admits(&r.sq_norm(b_sq))) {
                rel.push(r);
            }
        }
        let metric = Metric::fitting(b_sq.clone(), &rel)?;
        let enc = rel.iter().map(|p| metric.encode(p)).collect::<Result<Vec<_>>>()?;
        Cluster::from_int(center.clone(), None, rho_sq.cloned(), metric, d, enc)
    }

    fn from_int(center: SplitVector, center_layer: Option<i64>, rho_sq: Option<RadiusSq>, metric: Metric, d: usize, rel: Vec<Vec<i64>>) -> Result<Self> {
        let mut keyed: Vec<(i128, Vec<i64>)> = rel.into_iter().map(|p| (metric.dot(&p, &p), p)).collect();
        keyed.sort_unstable();
        keyed.dedup();
        let set = PointSet::new(metric, d, keyed.into_iter().map(|(_, p)| p))?;
        Ok(Cluster { center, center_layer, rho_sq, set })
    }

    pub fn center(&self) -> &SplitVector {
        &self.center
    }

    pub fn center_layer(&self) -> Option<i64> {
        self.center_layer
    }

    pub fn rho_sq(&self) -> Option<&RadiusSq> {
        self.rho_sq.as_ref()
    }

    pub fn d(&self) -> usize {
        self.set.d()
    }

    /// Number of points other than the centre.
    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn point_set(&self) -> &PointSet {
        &self.set
    }

    pub fn metric(&self) -> &Metric {
        self.set.metric()
    }

    pub fn rel_point(&self, i: usize) -> SplitVector {
        self.metric().decode(self.set.point(i))
    }

    pub fn rel_points(&self) -> Vec<SplitVector> {
        (0..self.len()).map(|i| self.rel_point(i)).collect()
    }

    pub fn sq_norm(&self, i: usize) -> Rational {
        self.metric().to_rational(self.set.norm(i))
    }

    /// Points grouped by squared distance from the centre, nearest first.
    pub fn dist_partition(&self) -> Vec<(Rational, Range<usize>)> {
        let mut out: Vec<(Rational, Range<usize>)> = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            if i == self.len() || self.set.norm(i) != self.set.norm(start) {
                out.push((self.sq_norm(start), start..i));
                start = i;
            }
        }
        out
    }

    pub fn spans(&self) -> bool {
        self.set.rank() == self.d()
    }
}

/// Cluster of `window` around `center` of squared radius `rho_sq`.
pub fn extract_cluster(window: &LayerWindow, center: &SplitVector, rho_sq: &RadiusSq) -> Result<Cluster> {
    let params = window.params();
    let (layer, idx) = window
        .locate(center)
        .ok_or_else(|| Error::InsufficientWindow("centre is not a window point".into()))?;
    let b_sq = &params.b_sq;
    let (lo, hi) = window.layer_range();
    let vertical = |m: i64| (crate::construct::layer_vlevel(params, m) - &center.vlevel).square() * b_sq;
    if rho_sq.admits(&vertical(lo - 1)) || rho_sq.admits(&vertical(hi + 1)) {
        return Err(Error::InsufficientWindow("ball reaches layers outside the window".into()));
    }
    let reach = Rational::from(rho_sq.ceil_radius());
    let metric = window.metric();
    let threshold = metric.threshold(rho_sq)?;
    let c = window.int_point(idx).to_vec();
    let mut rel = Vec::new();
    for m in lo..=hi {
        if !rho_sq.admits(&vertical(m)) {
            continue;
        }
        if !window.covers(m, &center.horiz, &reach) {
            return Err(Error::InsufficientWindow(format!("ball clips the edge of layer {m}")));
        }
        for i in window.layer_indices(m) {
            let p = window.int_point(i);
            if i != idx && metric.sq_dist(p, &c) <= threshold {
                rel.push(p.iter().zip(&c).map(|(x, y)| x - y).collect());
            }
        }
    }
    Cluster::from_int(center.clone(), Some(layer), Some(rho_sq.clone()), metric.clone(), window.d(), rel)
}

/// A congruence between two clusters: `source[i] ↦ target[bijection[i]]`,
/// with the orthogonal map when it could be recovered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsometryWitness {
    pub bijection: Vec<usize>,
    pub map: Option<OrthoMap>,
}

impl IsometryWitness {
    pub fn identity(c: &Cluster) -> Self {
        IsometryWitness {
            bijection: (0..c.len()).collect(),
            map: Some(OrthoMap::identity(c.d(), c.metric().b_sq().clone())),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.bijection.len()];
        for (i, &j) in self.bijection.iter().enumerate() {
            inv[j] = i;
        }
        IsometryWitness { bijection: inv, map: self.map.as_ref().map(OrthoMap::inverse) }
    }

    /// `self` after `first`.
    pub fn after(&self, first: &IsometryWitness) -> Result<Self> {
        if self.bijection.len() != first.bijection.len() {
            return Err(Error::DimensionMismatch { expected: first.bijection.len(), got: self.bijection.len() });
        }
        let bijection = first.bijection.iter().map(|&j| self.bijection[j]).collect();
        let map = match (&self.map, &first.map) {
            (Some(g), Some(f)) => Some(g.compose(f)?),
            _ => None,
        };
        Ok(IsometryWitness { bijection, map })
    }

    /// Exact re-check against both clusters.
    pub fn verify(&self, src: &Cluster, dst: &Cluster) -> Result<bool> {
        let (a, b) = aligned(src, dst)?;
        let n = a.len();
        if b.len() != n || self.bijection.len() != n {
            return Ok(false);
        }
        let mut seen = vec![false; n];
        for &j in &self.bijection {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Ok(false);
            }
        }
        if (0..n).any(|i| a.norm(i) != b.norm(self.bijection[i])) {
            return Ok(false);
        }
        if let Some(map) = &self.map {
            let int = IntMap::from_split(map.matrix(), a.metric())?;
            return Ok((0..n).all(|i| int.image(a.point(i)).as_deref() == Some(b.point(self.bijection[i]))));
        }
        // Inner products with a spanning frame of the source pin each image down.
        let frame = a.frame();
        let images: Vec<usize> = frame.iter().map(|&f| self.bijection[f]).collect();
        if b.rank() != frame.len() {
            return Ok(false);
        }
        let m = a.metric();
        Ok((0..n).all(|i| {
            frame
                .iter()
                .zip(&images)
                .all(|(&f, &g)| m.dot(a.point(i), a.point(f)) == m.dot(b.point(self.bijection[i]), b.point(g)))
        }))
    }
}

/// Both clusters in one integer frame.
fn aligned(c1: &Cluster, c2: &Cluster) -> Result<(PointSet, PointSet)> {
    if c1.d() != c2.d() {
        return Err(Error::DimensionMismatch { expected: c1.d(), got: c2.d() });
    }
    let m = c1.metric().join(c2.metric())?;
    Ok((c1.set.rescale(&m)?, c2.set.rescale(&m)?))
}

fn witness(src: &PointSet, dst: &PointSet, c: &Congruence) -> Result<IsometryWitness> {
    let bijection = correspondence(src, dst, c)?;
    let map = match realise(src, dst, c) {
        Ok(int) => Some(OrthoMap::new(int.to_split(src.metric()), src.metric().b_sq().clone())?),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(IsometryWitness { bijection, map })
}

/// A centre-preserving isometry carrying `c1` onto `c2`, if there is one.
pub fn clusters_equivalent(c1: &Cluster, c2: &Cluster) -> Result<Option<IsometryWitness>> {
    if c1.d() != c2.d() || c1.len() != c2.len() {
        return Ok(None);
    }
    let (a, b) = aligned(c1, c2)?;
    match find_congruence(&a, &b)? {
        Some(c) => witness(&a, &b, &c).map(Some),
        None => Ok(None),
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterGroup {
    Group { order: usize, elements: Vec<IsometryWitness> },
    NonSpanning,
}

impl ClusterGroup {
    pub fn order(&self) -> Option<usize> {
        match self {
            ClusterGroup::Group { order, .. } => Some(*order),
            ClusterGroup::NonSpanning => None,
        }
    }

    pub fn maps(&self) -> Vec<&OrthoMap> {
        match self {
            ClusterGroup::Group { elements, .. } => elements.iter().filter_map(|w| w.map.as_ref()).collect(),
            ClusterGroup::NonSpanning => Vec::new(),
        }
    }
}

/// All isometries fixing the centre and preserving the cluster.
pub fn cluster_group(c: &Cluster) -> Result<ClusterGroup> {
    let Some(maps) = automorphisms(&c.set)? else { return Ok(ClusterGroup::NonSpanning) };
    let elements = maps
        .into_iter()
        .map(|m| witness(&c.set, &c.set, &Congruence::Linear(m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterGroup::Group { order: elements.len(), elements })
}

/// One centre per layer of a vertical period: the origins of `X_0 … X_{2P-1}`.
pub fn layer_representatives(params: &EngelParams) -> Vec<(i64, SplitVector)> {
    (0..2 * params.seq.period() as i64).map(|m| (m, layer_origin(params, m))).collect()
}

/// Cluster of `X` around `origin(m)` in a window sized for `rho_sq`, padded
/// by `padding` extra lattice steps.
pub fn representative_cluster(params: &EngelParams, m: i64, rho_sq: &RadiusSq, padding: i64, limits: Limits) -> Result<Cluster> {
    let spec = required_window(params, rho_sq, m)?;
    let window = generate_window(params, spec.layer_range, spec.lattice_radius + padding, limits)?;
    extract_cluster(&window, &layer_origin(params, m), rho_sq)
}

#[derive(Clone, Debug, Serialize)]
pub struct Representative {
    pub layer: i64,
    pub center: SplitVector,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassWitness {
    pub from: usize,
    pub to: usize,
    pub matrix: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub rho_sq: RadiusSq,
    pub representatives: Vec<Representative>,
    pub class_ids: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub witnesses: Vec<ClassWitness>,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Equivalence classes among `clusters`; each new cluster is compared with
/// the first member of every class found so far.
pub fn classify(clusters: &[Cluster]) -> Result<(Vec<usize>, Vec<Vec<usize>>, Vec<ClassWitness>)> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut ids = Vec::with_capacity(clusters.len());
    let mut witnesses = Vec::new();
    for (i, c) in clusters.iter().enumerate() {
        let mut placed = false;
        for (k, class) in classes.iter_mut().enumerate() {
            if let Some(w) = clusters_equivalent(&clusters[class[0]], c)? {
                witnesses.push(ClassWitness { from: class[0], to: i, matrix: w.map.map(|m| m.to_strings()) });
                class.push(i);
                ids.push(k);
                placed = true;
                break;
            }
        }
        if !placed {
            ids.push(classes.len());
            classes.push(vec![i]);
        }
    }
    Ok((ids, classes, witnesses))
}

/// `N_X(ρ)` over the layer representatives of a periodic set.
pub fn count_classes(params: &EngelParams, rho_sq: &RadiusSq, limits: Limits) -> Result<ClassReport> {
    count_classes_padded(params, rho_sq, 0, limits)
}

pub fn count_classes_padded(params: &EngelParams, rho_sq: &RadiusSq, padding: i64, limits: Limits) -> Result<ClassReport> {
    if !rho_sq.is_positive() {
        return Err(Error::InvalidParams("radius must be positive".into()));
    }
    let reps = layer_representatives(params);
    let clusters = reps
        .iter()
        .map(|(m, _)| representative_cluster(params, *m, rho_sq, padding, limits))
        .collect::<Result<Vec<_>>>()?;
    let (class_ids, classes, witnesses) = classify(&clusters)?;
    Ok(ClassReport {
        rho_sq: rho_sq.clone(),
        representatives: reps
            .into_iter()
            .zip(&clusters)
            .map(|((layer, center), c)| Representative { layer, center, size: c.len() + 1 })
            .collect(),
        n: classes.len(),
        class_ids,
        classes,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn tiny_clusters_are_empty() {
        let p = EngelParams::planar_example();
        let c = representative_cluster(&p, 0, &RadiusSq::exact(r(99)), 0, Limits::default()).unwrap();
        assert!(c.is_empty());
        let c = representative_cluster(&p, 0, &RadiusSq::exact(r(100)), 0, Limits::default()).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn planar_cluster_at_26() {
        let p = EngelParams::planar_example();
        let c = representative_cluster(&p, 0, &RadiusSq::exact(r(676)), 0, Limits::default()).unwrap();
        assert_eq!(c.len(), 9);
        let part = c.dist_partition();
        let (last, range) = part.last().unwrap();
        assert_eq!(*last, r(676));
        assert_eq!(range.len(), 2);
        assert_eq!(cluster_group(&c).unwrap().order(), Some(1));
    }

    #[test]
    fn window_must_cover_the_ball() {
        let p = EngelParams::planar_example();
        let w = generate_window(&p, (-1, 1), 2, Limits::default()).unwrap();
        let rho = RadiusSq::exact(r(48 * 48));
        assert!(matches!(extract_cluster(&w, &SplitVector::zero(2), &rho), Err(Error::InsufficientWindow(_))));
        let w = generate_window(&p, (-2, 2), 3, Limits::default()).unwrap();
        assert!(matches!(extract_cluster(&w, &SplitVector::zero(2), &rho), Err(Error::InsufficientWindow(_))));
        let w = generate_window(&p, (-2, 2), 8, Limits::default()).unwrap();
        assert_eq!(extract_cluster(&w, &SplitVector::zero(2), &rho).unwrap().len(), 26);
    }

    #[test]
    fn witness_algebra() {
        let s = EngelParams::spatial_example();
        let rho = RadiusSq::exact(r(18 * 18));
        let c0 = representative_cluster(&s, 0, &rho, 0, Limits::default()).unwrap();
        let c4 = representative_cluster(&s, 4, &rho, 0, Limits::default()).unwrap();
        let w = clusters_equivalent(&c0, &c4).unwrap().unwrap();
        assert!(w.verify(&c0, &c4).unwrap());
        let inv = w.inverse();
        assert!(inv.verify(&c4, &c0).unwrap());
        let round = inv.after(&w).unwrap();
        assert!(round.verify(&c0, &c0).unwrap());
        let id = IsometryWitness::identity(&c0);
        assert!(id.verify(&c0, &c0).unwrap());
    }

    #[test]
    fn spatial_group_at_18() {
        let s = EngelParams::spatial_example();
        let c = representative_cluster(&s, 0, &RadiusSq::exact(r(324)), 0, Limits::default()).unwrap();
        assert_eq!(c.len(), 36);
        let g = cluster_group(&c).unwrap();
        assert_eq!(g.order(), Some(2));
        let flip = OrthoMap::signed_permutation(&[0, 1], &[-1, 1], 1, r(49)).unwrap();
        assert!(g.maps().contains(&&flip));
    }

    #[test]
    fn generic_points() {
        let b_sq = r(1);
        let pts: Vec<SplitVector> = [(1, 0), (0, 1), (-1, 0), (0, -1), (0, 0)]
            .iter()
            .map(|(x, y)| SplitVector::new(vec![r(*x)], r(*y)))
            .collect();
        let c = Cluster::from_points(&SplitVector::zero(2), &pts, &b_sq, None).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(cluster_group(&c).unwrap().order(), Some(8));
        let line: Vec<SplitVector> = [(1, 0), (-1, 0)].iter().map(|(x, y)| SplitVector::new(vec![r(*x)], r(*y))).collect();
        let l = Cluster::from_points(&SplitVector::zero(2), &line, &b_sq, None).unwrap();
        assert!(matches!(cluster_group(&l).unwrap(), ClusterGroup::NonSpanning));
    }
}
