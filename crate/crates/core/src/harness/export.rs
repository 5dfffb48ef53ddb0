use std::fmt::Write;
use std::path::Path;

use super::{config_to_toml, HarnessError, Outcome, Report, Trajectory};
use crate::scenario::Component;

/// Values read back from a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrajectory {
    pub columns: Vec<String>,
    /// One row per record: `t`, energy, then the coordinates component-major.
    pub rows: Vec<Vec<f64>>,
    pub outcome: String,
}

fn header(n_u: usize) -> String {
    let mut cols = vec!["t".to_string(), "energy".to_string()];
    for c in Component::ALL {
        for i in 0..n_u {
            cols.push(format!("{}{i}", c.label()));
        }
    }
    cols.join(",")
}

/// Comma-separated text: `#` comment lines echoing the config, a header row,
/// one row per record and a closing outcome line.
pub fn render_trajectory(trajectory: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str("# dlo-sim trajectory\n");
    for line in config_to_toml(&trajectory.config).lines().filter(|l| !l.is_empty()) {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "# energy_scale = {}", trajectory.energy_scale).unwrap();
    out.push_str(&header(trajectory.config.n_u));
    out.push('\n');
    for r in &trajectory.records {
        write!(out, "{},{}", r.t, r.energy).unwrap();
        for v in r.q.iter() {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "# steps = {}", trajectory.steps).unwrap();
    writeln!(out, "# force_evals = {}", trajectory.force_evals).unwrap();
    match &trajectory.outcome {
        Outcome::Completed => out.push_str("outcome completed\n"),
        Outcome::Unstable { reason, .. } => {
            writeln!(out, "# reason = {reason}").unwrap();
            writeln!(out, "outcome {}", trajectory.outcome).unwrap();
        }
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn export_trajectory(trajectory: &Trajectory, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), &render_trajectory(trajectory))
}

pub fn export_report(report: &Report, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), &report.render())
}

pub fn parse_trajectory(text: &str) -> Result<ParsedTrajectory, HarnessError> {
    let mut columns = None;
    let mut rows = Vec::new();
    let mut outcome = None;
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("outcome ") {
            outcome = Some(rest.to_string());
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>()),
            Some(cols) => {
                let row = line
                    .split(',')
                    .map(|v| v.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| HarnessError::Parse(format!("line {}: {e}", n + 1)))?;
                if row.len() != cols.len() {
                    return Err(HarnessError::Parse(format!(
                        "line {}: {} fields, header has {}",
                        n + 1,
                        row.len(),
                        cols.len()
                    )));
                }
                rows.push(row);
            }
        }
    }
    Ok(ParsedTrajectory {
        columns: columns.ok_or_else(|| HarnessError::Parse("missing header row".into()))?,
        rows,
        outcome: outcome.ok_or_else(|| HarnessError::Parse("missing outcome line".into()))?,
    })
}
