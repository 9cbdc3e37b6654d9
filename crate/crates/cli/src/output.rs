//! File writers. Numbers in CSV files use 17 significant digits.

use std::path::Path;

use serde_json::Value;
use t2m_core::Trajectory;

use crate::error::{CliError, CliResult};

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e)),
        _ => Ok(()),
    }
}

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_block(header: &mut Vec<String>, name: &str, n: usize) {
    header.extend((1..=n).map(|i| format!("{name}_{i}")));
}

/// Columns `t, x_i, y_i, y2_i`, then `w_i, w1_i` when the trajectory carries
/// a deviation field, then the named residual series.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, extra: &[(&str, &[f64])]) -> CliResult<()> {
    ensure_parent(path)?;
    let n = traj.dim();
    let mut header = vec!["t".to_string()];
    for name in ["x", "y", "y2"] {
        push_block(&mut header, name, n);
    }
    let deviation = traj.w.as_ref().zip(traj.w1.as_ref());
    if deviation.is_some() {
        push_block(&mut header, "w", n);
        push_block(&mut header, "w1", n);
    }
    header.extend(extra.iter().map(|(name, _)| name.to_string()));

    let mut out = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    out.write_record(&header).map_err(|e| io_error(path, e))?;
    for k in 0..traj.len() {
        let mut row = vec![traj.t[k]];
        row.extend(&traj.x[k]);
        row.extend(&traj.y[k]);
        row.extend(&traj.y2[k]);
        if let Some((w, w1)) = deviation {
            row.extend(&w[k]);
            row.extend(&w1[k]);
        }
        row.extend(extra.iter().map(|(_, series)| series[k]));
        out.write_record(row.into_iter().map(format_number))
            .map_err(|e| io_error(path, e))?;
    }
    out.flush().map_err(|e| io_error(path, e))
}

pub fn write_json(path: &Path, doc: &Value) -> CliResult<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(doc).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let s = format_number(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_number(-2.0), "-2.0000000000000000e0");
    }
}
