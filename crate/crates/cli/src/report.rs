//! Deterministic artifact writers.
//!
//! CSV cells are written as Rust's shortest round-trip float text and JSON
//! objects keep sorted keys, so a re-run with the same config and seed
//! reproduces every artifact byte for byte at any thread count.

use favard_core::family::TransversalityReport;
use favard_core::favard::DecayTable;
use favard_core::geom::BBox;
use serde::Serialize;
use std::fs;
use std::path::Path;

use crate::Result;

/// Canonical decay-table layout: one row per estimate.
pub const DECAY_HEADER: [&str; 6] = [
    "n_or_r",
    "value",
    "method",
    "resolution",
    "error_bar",
    "seed",
];

pub fn write_decay_csv(path: &Path, table: &DecayTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DECAY_HEADER)?;
    for row in &table.rows {
        let e = &row.estimate;
        w.write_record([
            fmt(row.x),
            fmt(e.value),
            e.method.to_string(),
            fmt(e.resolution),
            e.error_bar.map(fmt).unwrap_or_default(),
            e.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Energy table: one row per generation.
pub fn write_energy_csv(path: &Path, rows: &[(u32, f64, f64, u32)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "s", "I_s", "quadrature_order"])?;
    for &(n, s, value, order) in rows {
        w.write_record([n.to_string(), fmt(s), fmt(value), order.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Transversality table: one row per δ.
pub fn write_transversality_csv(path: &Path, report: &TransversalityReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["delta", "worst_ratio", "mean_psi", "se_psi", "seed"])?;
    for d in &report.per_delta {
        w.write_record([
            fmt(d.delta),
            fmt(d.worst_ratio),
            fmt(d.mean_psi),
            fmt(d.se_psi),
            report.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn bbox_json(b: &BBox) -> serde_json::Value {
    let d = b.dim as usize;
    serde_json::json!({"lo": &b.lo[..d], "hi": &b.hi[..d]})
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use favard_core::favard::{EstimateMethod, LengthEstimate};
    use tempfile::tempdir;

    #[test]
    fn decay_csv_layout_is_stable() {
        let mut table = DecayTable::new("probe");
        table.push(
            2.0,
            "n=2",
            LengthEstimate {
                value: 0.5,
                psi_averaged: Some(0.25),
                method: EstimateMethod::Buffon,
                resolution: 0.0,
                error_bar: Some(0.0625),
                seed: Some(7),
            },
        );
        table.push(
            3.0,
            "n=3",
            LengthEstimate {
                value: 0.375,
                psi_averaged: None,
                method: EstimateMethod::Minkowski,
                resolution: 0.015625,
                error_bar: None,
                seed: None,
            },
        );
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_decay_csv(&path, &table).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "n_or_r,value,method,resolution,error_bar,seed\n\
             2,0.5,buffon,0,0.0625,7\n\
             3,0.375,minkowski,0.015625,,\n"
        );
    }

    #[test]
    fn energy_csv_layout_is_stable() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("e.csv");
        write_energy_csv(&path, &[(2, 1.0, 3.5, 4)]).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "n,s,I_s,quadrature_order\n2,1,3.5,4\n"
        );
    }

    #[test]
    fn bbox_renders_only_its_dimension() {
        let b = BBox::new2([0.0, -1.0], [2.0, 3.0]).unwrap();
        assert_eq!(
            bbox_json(&b),
            serde_json::json!({"lo": [0.0, -1.0], "hi": [2.0, 3.0]})
        );
    }
}
