//! CSV and JSON artifact emission.
//!
//! Numbers are written with Rust's shortest round-trip `f64` formatting, so
//! re-parsing an emitted file recovers the exact values and identical runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::equilibria::BranchSample;
use crate::error::Result;
use crate::numerics::Trajectory;
use crate::optctl::OcSolution;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

/// One row per grid node: `t,S,I,R`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory<3>) -> Result<()> {
    let mut out = String::from("t,S,I,R\n");
    for (k, y) in traj.samples.iter().enumerate() {
        writeln!(out, "{},{},{},{}", traj.grid.node(k), y[0], y[1], y[2]).unwrap();
    }
    write_file(path, &out)
}

/// One row per grid node: `t,lambda1,lambda2,lambda3`.
pub fn write_adjoint_csv(path: &Path, traj: &Trajectory<3>) -> Result<()> {
    let mut out = String::from("t,lambda1,lambda2,lambda3\n");
    for (k, l) in traj.samples.iter().enumerate() {
        writeln!(out, "{},{},{},{}", traj.grid.node(k), l[0], l[1], l[2]).unwrap();
    }
    write_file(path, &out)
}

/// One row per grid node: `t,u1,u2`.
pub fn write_controls_csv(path: &Path, sol: &OcSolution) -> Result<()> {
    let mut out = String::from("t,u1,u2\n");
    for k in 0..sol.grid.len() {
        writeln!(out, "{},{},{}", sol.grid.node(k), sol.u1[k], sol.u2[k]).unwrap();
    }
    write_file(path, &out)
}

/// One row per scanned reproduction number. Columns for the lower and upper
/// endemic branches stay empty where the branch does not exist.
pub fn write_scan_csv(path: &Path, samples: &[BranchSample]) -> Result<()> {
    let mut out =
        String::from("r0,i_lower,stability_lower,i_upper,stability_upper\n");
    for s in samples {
        let mut row = format!("{}", s.r0);
        match s.points.len() {
            0 => row.push_str(",,,,"),
            // A unique endemic point continues the upper branch.
            1 => {
                let (i, st) = &s.points[0];
                write!(row, ",,,{},{:?}", i, st).unwrap();
            }
            _ => {
                let (i_lo, st_lo) = &s.points[0];
                let (i_hi, st_hi) = &s.points[1];
                write!(row, ",{},{:?},{},{:?}", i_lo, st_lo, i_hi, st_hi).unwrap();
            }
        }
        out.push_str(&row);
        out.push('\n');
    }
    write_file(path, &out)
}

/// Pretty-printed JSON report.
pub fn write_json_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| crate::Error::Config(format!("serialize report: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}
