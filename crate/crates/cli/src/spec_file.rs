//! JSON descriptions of finite max-affine systems.
//!
//! The on-disk shape is strict: unknown keys are rejected so a typoed
//! field fails loudly instead of silently falling back to a default, and
//! every row must match the declared ambient dimension.

use std::path::Path;

use errbound_core::convex::{AffineRow, MaxAffineSystem};
use errbound_core::{Error, NormSpec, Result, Vector};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpecFile {
    space_dim: usize,
    norm: String,
    rows: Vec<RowSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowSpec {
    label: String,
    a: Vec<f64>,
    b: f64,
}

/// Reads a system description from `path` and validates it.
pub fn load_system(path: &Path) -> Result<MaxAffineSystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid_input(format!("cannot read {}: {e}", path.display())))?;
    let spec: SystemSpecFile = serde_json::from_str(&text)
        .map_err(|e| Error::invalid_input(format!("{}: {e}", path.display())))?;
    if spec.space_dim == 0 {
        return Err(Error::invalid_input("space_dim must be at least 1"));
    }
    let norm = parse_norm(&spec.norm)?;
    let mut rows = Vec::with_capacity(spec.rows.len());
    for row in &spec.rows {
        if row.a.len() != spec.space_dim {
            return Err(Error::invalid_input(format!(
                "row {:?} has {} coefficients but space_dim is {}",
                row.label,
                row.a.len(),
                spec.space_dim
            )));
        }
        rows.push(AffineRow::new(row.label.clone(), Vector::from_slice(&row.a), row.b));
    }
    MaxAffineSystem::new(rows, norm)
}

fn parse_norm(name: &str) -> Result<NormSpec> {
    match name {
        "euclidean" => Ok(NormSpec::Euclidean),
        "sup" => Ok(NormSpec::Sup),
        "one" => Ok(NormSpec::One),
        other => Err(Error::invalid_input(format!(
            "unknown norm {other:?}; expected \"euclidean\", \"sup\", or \"one\""
        ))),
    }
}
