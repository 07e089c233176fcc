use std::cmp::Ordering;

use engelset::clusters::{clusters_equivalent, extract_cluster, representative_cluster, Cluster, IsometryWitness};
use engelset::congruence::{automorphisms, find_congruence, PointSet};
use engelset::construct::{generate_window, layer_origin, required_window, Limits};
use engelset::frame::Metric;
use engelset::geometry::{sq_dist, OrthoMap, SplitVector};
use engelset::number::{cmp_rational_quad, QuadRadius, RadiusSq, Rational};
use engelset::params::EngelParams;
use engelset::regularity::verify_packing;
use engelset::sequence::ShiftSequence;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..1000, 1i64..60).prop_map(|(n, d)| Rational::new(n, d))
}

fn split_vector(d: usize) -> impl Strategy<Value = SplitVector> {
    proptest::collection::vec(rational(), d).prop_map(|mut v| {
        let last = v.pop().unwrap();
        SplitVector::new(v, last)
    })
}

fn engel_params() -> impl Strategy<Value = EngelParams> {
    (2usize..=3, 1i64..5, 1i64..120, 1i64..4, proptest::collection::vec(prop::bool::ANY, 4)).prop_flat_map(
        |(d, a, extra, periods, bits)| {
            let signs: Vec<i8> = bits.iter().cycle().take((d - 1) * periods as usize).map(|&b| if b { 1 } else { -1 }).collect();
            (1..4 * a).prop_map(move |delta| {
                let seq = ShiftSequence::new(d, (1..d).collect(), signs.clone()).unwrap();
                EngelParams::new(seq, a.into(), (a * a + extra).into(), Rational::new(delta, 4)).unwrap()
            })
        },
    )
}

fn signed_permutation(h: usize) -> impl Strategy<Value = (Vec<usize>, Vec<i32>, i32)> {
    (
        Just((0..h).collect::<Vec<_>>()).prop_shuffle(),
        proptest::collection::vec(prop_oneof![Just(1), Just(-1)], h),
        prop_oneof![Just(1), Just(-1)],
    )
}

fn sorted_rel(c: &Cluster) -> Vec<SplitVector> {
    let mut v = c.rel_points();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn quad_comparison_agrees_with_floats(q in rational(), u in rational(), v in rational(), dd in 1i64..500) {
        let alpha = QuadRadius::new(u, v, Rational::from(dd)).unwrap();
        let (x, y) = (q.to_f64(), alpha.to_f64());
        prop_assume!((x - y).abs() > 1e-6);
        let expect = if x < y { Ordering::Less } else { Ordering::Greater };
        prop_assert_eq!(cmp_rational_quad(&q, &alpha), expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) * &c, &a * &c + &b * &c);
        prop_assert_eq!(&a - &a, Rational::zero());
        prop_assert_eq!(Rational::parse(&a.to_string()).unwrap(), a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a);
        }
    }

    #[test]
    fn ortho_maps_preserve_distances(
        x in split_vector(3),
        y in split_vector(3),
        (perm, signs, vsign) in signed_permutation(2),
        b_sq in 1i64..50,
        rotate in prop::bool::ANY,
    ) {
        let b_sq = Rational::from(b_sq);
        let mut g = OrthoMap::signed_permutation(&perm, &signs, vsign, b_sq.clone()).unwrap();
        if rotate {
            let r = |n| Rational::new(n, 5);
            let rot = vec![
                vec![r(3), r(-4), Rational::zero()],
                vec![r(4), r(3), Rational::zero()],
                vec![Rational::zero(), Rational::zero(), Rational::one()],
            ];
            g = OrthoMap::new(rot, b_sq.clone()).unwrap().compose(&g).unwrap();
        }
        let before = sq_dist(&x, &y, &b_sq).unwrap();
        let after = sq_dist(&g.apply(&x).unwrap(), &g.apply(&y).unwrap(), &b_sq).unwrap();
        prop_assert_eq!(before, after);
        prop_assert_eq!(g.compose(&g.inverse()).unwrap().is_identity(), true);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packing_minimum_is_twice_a(params in engel_params()) {
        let w = generate_window(&params, (-2, 2), 3, Limits::default()).unwrap();
        let report = verify_packing(&w, &params.a.square());
        prop_assert!(report.holds);
        prop_assert_eq!(report.min_sq, Some(params.a.square() * Rational::from(4)));
    }

    #[test]
    fn clusters_are_invariant_under_lattice_and_period(params in engel_params(), m in -4i64..4) {
        let rho = RadiusSq::exact(params.b_sq.clone() * Rational::from(9));
        let spec = required_window(&params, &rho, m).unwrap();
        let w = generate_window(&params, spec.layer_range, spec.lattice_radius + 2, Limits::default()).unwrap();
        let origin = layer_origin(&params, m);
        let mut shifted = origin.clone();
        shifted.horiz[0] += &(Rational::from(2) * &params.a);
        let here = extract_cluster(&w, &origin, &rho).unwrap();
        let there = extract_cluster(&w, &shifted, &rho).unwrap();
        prop_assert_eq!(sorted_rel(&here), sorted_rel(&there));

        let period = 2 * params.seq.period() as i64;
        let later = representative_cluster(&params, m + period, &rho, 0, Limits::default()).unwrap();
        prop_assert_eq!(sorted_rel(&here), sorted_rel(&later));
    }
}

/// Plain Euclidean Gram matrix of small integer points.
fn gram(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    points.iter().map(|x| points.iter().map(|y| x.iter().zip(y).map(|(a, b)| a * b).sum()).collect()).collect()
}

fn count_matches(src: &[Vec<i64>], dst: &[Vec<i64>], stop_at_first: bool) -> usize {
    fn go(i: usize, map: &mut Vec<usize>, used: &mut [bool], gs: &[Vec<i64>], gd: &[Vec<i64>], stop: bool) -> usize {
        let n = used.len();
        if i == n {
            // full check only at the leaves: no pruning
            let ok = (0..n).all(|a| (0..n).all(|b| gs[a][b] == gd[map[a]][map[b]]));
            return ok as usize;
        }
        let mut total = 0;
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                map.push(j);
                total += go(i + 1, map, used, gs, gd, stop);
                map.pop();
                used[j] = false;
                if stop && total > 0 {
                    return total;
                }
            }
        }
        total
    }
    if src.len() != dst.len() {
        return 0;
    }
    go(0, &mut Vec::new(), &mut vec![false; src.len()], &gram(src), &gram(dst), stop_at_first)
}

fn small_set(d: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::btree_set(proptest::collection::vec(-2i64..=2, d), 3..=7).prop_map(|s| {
        s.into_iter().filter(|p| p.iter().any(|&c| c != 0)).collect()
    })
}

fn euclid() -> Metric {
    Metric::new(1, 1, Rational::one()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn gram_search_matches_exhaustive_search(
        (d, src, (perm, signs, vsign)) in (2usize..=3).prop_flat_map(|d| (Just(d), small_set(d), signed_permutation(d - 1))),
        tweak in prop::bool::ANY,
    ) {
        prop_assume!(src.len() >= 2);
        let set = PointSet::new(euclid(), d, src.clone()).unwrap();
        if let Some(auts) = automorphisms(&set).unwrap() {
            prop_assert_eq!(auts.len(), count_matches(&src, &src, false));
        }

        // an isometric copy, reordered, optionally with one point moved
        let h = d - 1;
        let mut dst: Vec<Vec<i64>> = src
            .iter()
            .map(|p| {
                let mut q = vec![0; d];
                for s in 0..h {
                    q[perm[s]] = signs[s] as i64 * p[s];
                }
                q[h] = vsign as i64 * p[h];
                q
            })
            .collect();
        dst.rotate_left(1);
        if tweak {
            dst[0][0] += 7;
        }
        let other = PointSet::new(euclid(), d, dst.clone()).unwrap();
        let expect = count_matches(&src, &dst, true) > 0;
        prop_assert_eq!(find_congruence(&set, &other).unwrap().is_some(), expect);
    }
}

fn spatial_clusters(rho: &str) -> Vec<Cluster> {
    let s = EngelParams::spatial_example();
    let r = RadiusSq::from_radius(&Rational::parse(rho).unwrap());
    (0..8).map(|m| representative_cluster(&s, m, &r, 0, Limits::default()).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_form_an_equivalence(rho in prop_oneof![Just("18"), Just("40"), Just("54")], i in 0usize..8, j in 0usize..8, k in 0usize..8) {
        let cs = spatial_clusters(rho);
        let (a, b, c) = (&cs[i], &cs[j], &cs[k]);
        prop_assert!(IsometryWitness::identity(a).verify(a, a).unwrap());
        prop_assert!(clusters_equivalent(a, a).unwrap().is_some());
        let ab = clusters_equivalent(a, b).unwrap();
        prop_assert_eq!(ab.is_some(), clusters_equivalent(b, a).unwrap().is_some());
        if let Some(w) = &ab {
            prop_assert!(w.verify(a, b).unwrap());
            prop_assert!(w.inverse().verify(b, a).unwrap());
            if let Some(w2) = clusters_equivalent(b, c).unwrap() {
                prop_assert!(w2.after(w).unwrap().verify(a, c).unwrap());
                prop_assert!(clusters_equivalent(a, c).unwrap().is_some());
            }
        }
    }
}
