//! Layer tables: the coset of each layer and the step from the layer below.

use std::fmt::Write as _;

use crate::construct::{layer_origin, layer_vlevel};
use crate::error::{Error, Result};
use crate::number::Rational;
use crate::params::EngelParams;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub layer: i64,
    pub coordinates: String,
    pub relationship: String,
}

/// Height `vlevel · b`, written exactly when `b` is rational.
fn height(vlevel: &Rational, b: &Option<Rational>) -> String {
    match b {
        Some(b) => (vlevel * b).to_string(),
        None => format!("{vlevel}b"),
    }
}

fn coset(offset: &Rational, modulus: &Rational) -> String {
    if offset.is_zero() {
        format!("{modulus}Z")
    } else {
        format!("({offset}+{modulus}Z)")
    }
}

pub fn layer_table(params: &EngelParams, layers: (i64, i64)) -> Result<Vec<TableRow>> {
    if layers.0 > layers.1 {
        return Err(Error::Precondition("empty layer range".into()));
    }
    let b = params.b_sq.sqrt_exact();
    let modulus = Rational::from(2) * &params.a;
    (layers.0..=layers.1)
        .map(|m| {
            let o = layer_origin(params, m);
            let below = layer_origin(params, m - 1);
            let mut coordinates: Vec<String> = o.horiz.iter().map(|x| coset(x, &modulus)).collect();
            coordinates.push(format!("{{{}}}", height(&o.vlevel, &b)));
            let mut step: Vec<String> = o.horiz.iter().zip(&below.horiz).map(|(x, y)| (x - y).to_string()).collect();
            step.push(height(&(layer_vlevel(params, m) - layer_vlevel(params, m - 1)), &b));
            Ok(TableRow {
                layer: m,
                coordinates: coordinates.join(" x "),
                relationship: format!("X_{{{}}} + ({})", m - 1, step.join(",")),
            })
        })
        .collect()
}

pub fn table_csv(params: &EngelParams, layers: (i64, i64)) -> Result<String> {
    let mut out = String::from("layer,coordinates,relationship\n");
    for row in layer_table(params, layers)? {
        let _ = writeln!(out, "{},\"{}\",\"{}\"", row.layer, row.coordinates, row.relationship);
    }
    Ok(out)
}
