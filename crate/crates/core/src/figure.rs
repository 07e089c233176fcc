//! SVG scatter plots of a window with highlighted clusters.
//!
//! Planar sets are drawn as they are. Sets in 3-space are projected
//! orthographically onto the plane of the first horizontal axis and the
//! vertical axis. Output depends only on the inputs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::clusters::extract_cluster;
use crate::construct::{generate_window, layer_origin, Limits};
use crate::error::{Error, Result};
use crate::number::{RadiusSq, Rational};
use crate::params::EngelParams;

const PALETTE: [&str; 6] = ["#1f5fbf", "#c8322d", "#2e8b3e", "#8a3fb0", "#d27f12", "#137a7f"];
const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub layers: (i64, i64),
    pub lattice_radius: i64,
    /// One circle family per radius.
    pub radii: Vec<RadiusSq>,
    /// Layers whose origins are used as cluster centres.
    pub centers: Vec<i64>,
}

impl FigureOptions {
    pub fn new(layers: (i64, i64), lattice_radius: i64) -> Self {
        FigureOptions { layers, lattice_radius, radii: Vec::new(), centers: vec![0] }
    }
}

type Pt = (i64, i64);

pub fn render_svg(params: &EngelParams, opts: &FigureOptions, limits: Limits) -> Result<String> {
    let d = params.d();
    if d > 3 {
        return Err(Error::Unsupported(format!("figures are drawn for d = 2 or 3, got d = {d}")));
    }
    let window = generate_window(params, opts.layers, opts.lattice_radius, limits)?;
    let metric = window.metric();
    let b = params.b_sq.to_f64().sqrt();
    let hs = metric.hscale() as f64;
    let vs = metric.vscale() as f64;
    // integer frame coordinates of the projection: first horizontal axis, vertical axis
    let project = |p: &[i64]| -> Pt { (p[0], p[d - 1]) };
    let points: BTreeSet<Pt> = (0..window.len()).map(|i| project(window.int_point(i))).collect();
    let xs = |x: i64| x as f64 / hs;
    let ys = |v: i64| v as f64 / vs * b;
    let (min_x, max_x) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(xs(p.0)), hi.max(xs(p.0))));
    let (min_y, max_y) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(ys(p.1)), hi.max(ys(p.1))));
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let height = ((max_y - min_y) * scale + 2.0 * MARGIN).round();
    let sx = |x: f64| MARGIN + (x - min_x) * scale;
    let sy = |y: f64| MARGIN + (max_y - y) * scale;

    let mut highlighted: Vec<BTreeSet<Pt>> = Vec::new();
    let mut balls = Vec::new();
    for (k, rho) in opts.radii.iter().enumerate() {
        let mut set = BTreeSet::new();
        for &m in &opts.centers {
            let c = layer_origin(params, m);
            let cluster = extract_cluster(&window, &c, rho)?;
            let ci = metric.encode(&c)?;
            set.insert(project(&ci));
            for i in 0..cluster.len() {
                let rel = cluster.point_set().point(i);
                let abs: Vec<i64> = rel.iter().zip(&ci).map(|(r, c)| r + c).collect();
                set.insert(project(&abs));
            }
            balls.push((k, project(&ci), rho.to_f64().sqrt()));
        }
        highlighted.push(set);
    }

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r##"<g id="points" fill="#222">"##);
    for p in &points {
        let _ = writeln!(out, r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="2.5"/>"#, sx(xs(p.0)), sy(ys(p.1)));
    }
    let _ = writeln!(out, "</g>");
    for (k, set) in highlighted.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, r#"<g id="cluster-{k}" fill="{color}" stroke="{color}">"#);
        for p in set {
            let _ = writeln!(out, r#"<circle class="member" cx="{:.2}" cy="{:.2}" r="3.5"/>"#, sx(xs(p.0)), sy(ys(p.1)));
        }
        for (j, c, rho) in &balls {
            if *j == k {
                let _ = writeln!(
                    out,
                    r#"<circle class="ball" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke-width="1.5"/>"#,
                    sx(xs(c.0)),
                    sy(ys(c.1)),
                    rho * scale
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

/// Parses radii given as decimals or fractions.
pub fn radii_from_strings(values: &[&str]) -> Result<Vec<RadiusSq>> {
    values.iter().map(|s| Ok(RadiusSq::from_radius(&Rational::parse(s)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_figure_structure() {
        let p = EngelParams::planar_example();
        let mut opts = FigureOptions::new((-6, 6), 8);
        let plain = render_svg(&p, &opts, Limits::default()).unwrap();
        assert_eq!(plain.matches(r#"class="point""#).count(), 13 * 17);
        assert_eq!(plain.matches(r#"class="ball""#).count(), 0);
        opts.radii = radii_from_strings(&["48", "52"]).unwrap();
        let svg = render_svg(&p, &opts, Limits::default()).unwrap();
        assert_eq!(svg.matches(r#"class="ball""#).count(), 2);
        assert_eq!(svg, render_svg(&p, &opts, Limits::default()).unwrap());
    }

    #[test]
    fn spatial_projection_and_limits() {
        let s = EngelParams::spatial_example();
        let svg = render_svg(&s, &FigureOptions::new((-2, 2), 2), Limits::default()).unwrap();
        // 5 distinct first coordinates per layer after projection
        assert_eq!(svg.matches(r#"class="point""#).count(), 5 * 5);
        let seq = crate::sequence::ShiftSequence::new(4, vec![1, 2, 3], vec![1, 1, 1]).unwrap();
        let p4 = EngelParams::new(seq, 1.into(), 100.into(), Rational::new(1, 2)).unwrap();
        assert!(matches!(render_svg(&p4, &FigureOptions::new((0, 0), 1), Limits::default()), Err(Error::Unsupported(_))));
    }
}
