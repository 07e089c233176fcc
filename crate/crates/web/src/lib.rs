//! Browser bindings: draw a set, count cluster classes, compute a cluster group.
//!
//! `source` is `"planar"`, `"spatial"` or the text of a JSON parameter file.
//! Radii are decimal strings such as `"48"` or `"40.28"`.

use engelset::clusters::{cluster_group as group_of, count_classes as count, representative_cluster};
use engelset::figure::{radii_from_strings, render_svg, FigureOptions};
use engelset::{EngelParams, Limits, RadiusSq, Rational};
use serde_json::json;
use wasm_bindgen::prelude::*;

// Browsers have no environment; keep windows modest.
const MAX_POINTS: u64 = 2_000_000;

fn params(source: &str) -> Result<EngelParams, String> {
    match source.trim() {
        "planar" => Ok(EngelParams::planar_example()),
        "spatial" => Ok(EngelParams::spatial_example()),
        text => EngelParams::from_json(text).map_err(|e| e.to_string()),
    }
}

fn radius(rho: &str) -> Result<RadiusSq, String> {
    let r = Rational::parse(rho.trim()).map_err(|e| e.to_string())?;
    if !r.is_positive() {
        return Err(format!("radius must be positive, got {r}"));
    }
    Ok(RadiusSq::from_radius(&r))
}

pub fn svg(source: &str, radii: &str, layers: i32, lattice_radius: i32) -> Result<String, String> {
    let p = params(source)?;
    let mut opts = FigureOptions::new((-(layers as i64), layers as i64), lattice_radius as i64);
    let list: Vec<&str> = radii.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    opts.radii = radii_from_strings(&list).map_err(|e| e.to_string())?;
    render_svg(&p, &opts, Limits::new(MAX_POINTS)).map_err(|e| e.to_string())
}

pub fn classes(source: &str, rho: &str) -> Result<String, String> {
    let report = count(&params(source)?, &radius(rho)?, Limits::new(MAX_POINTS)).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&json!({
        "N": report.n,
        "classes": report.classes,
        "sizes": report.representatives.iter().map(|r| r.size).collect::<Vec<_>>(),
    }))
    .expect("serializable"))
}

pub fn group(source: &str, rho: &str, layer: i32) -> Result<String, String> {
    let p = params(source)?;
    let c = representative_cluster(&p, layer as i64, &radius(rho)?, 0, Limits::new(MAX_POINTS)).map_err(|e| e.to_string())?;
    let g = group_of(&c).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&json!({
        "cluster_size": c.len(),
        "order": g.order(),
        "elements": g.maps(),
    }))
    .expect("serializable"))
}

#[wasm_bindgen]
pub fn draw_set(source: &str, radii: &str, layers: i32, lattice_radius: i32) -> Result<String, JsError> {
    svg(source, radii, layers, lattice_radius).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn count_classes(source: &str, rho: &str) -> Result<String, JsError> {
    classes(source, rho).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cluster_group(source: &str, rho: &str, layer: i32) -> Result<String, JsError> {
    group(source, rho, layer).map_err(|e| JsError::new(&e))
}
