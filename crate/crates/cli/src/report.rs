//! Deterministic text rendering shared by every subcommand.
//!
//! All floats print through [`num`], which keeps 17 significant digits so
//! values survive a round trip through parsing and repeated runs emit
//! byte-identical reports; the infinite sentinel prints as the literal
//! `inf`.

use std::fmt::Write as _;

use errbound_core::hoffman::SweepTable;
use errbound_core::{ExtReal, Vector};

pub fn num(v: f64) -> String {
    // Canonicalize the zero sign so equal values print equal bytes.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

pub fn ext(v: ExtReal) -> String {
    match v.finite() {
        Some(x) => num(x),
        None => String::from("inf"),
    }
}

pub fn vector(v: &Vector) -> String {
    let mut s = String::from("[");
    for (i, c) in v.coords().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&num(*c));
    }
    s.push(']');
    s
}

pub fn opt_vector(v: Option<&Vector>) -> String {
    match v {
        Some(v) => vector(v),
        None => String::from("none"),
    }
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Renders an active-set label list as `{1,3}`.
pub fn labels(set: &[String]) -> String {
    format!("{{{}}}", set.join(","))
}

/// Renders the sweep grid as CSV, one line per cell.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("eps,anchor_id,direction_id,lower_bound,sigma_sampled\n");
    for c in &table.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(c.eps),
            c.anchor_id,
            c.direction_id,
            ext(c.lower_bound),
            ext(c.sigma_sampled)
        );
    }
    out
}
