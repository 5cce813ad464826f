use std::fmt::Write;

use super::run::SimTrace;
use crate::error::{Error, Result};

/// Fixed header of the per-step table.
pub const TABLE_HEADER: &str = "step,node,y,z,ys,zs,q,fired";

/// Per-step, per-node table. Needs a full trace.
pub fn step_table(trace: &SimTrace) -> Result<String> {
    if trace.steps.is_empty() {
        return Err(Error::TraceTooShallow);
    }
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for rec in &trace.steps {
        for (j, node) in rec.nodes.iter().enumerate() {
            let fired = rec.fired.iter().any(|f| f.0 == j) as u8;
            let q = node.state.y_s as f64 / node.state.z_s as f64;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                rec.step, j, node.mass.y, node.mass.z, node.state.y_s, node.state.z_s, q, fired
            )
            .expect("writing to a String");
        }
    }
    Ok(out)
}

/// Two-column table of the mean estimate per step.
pub fn mean_table(series: &[f64]) -> String {
    let mut out = String::from("step,mean_q\n");
    for (k, q) in series.iter().enumerate() {
        writeln!(out, "{k},{q}").expect("writing to a String");
    }
    out
}
