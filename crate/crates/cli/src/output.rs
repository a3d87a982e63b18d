//! JSON summaries and CSV trajectories.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use pendctl::Trajectory;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

pub const CSV_HEADER: [&str; 8] = ["t", "x1", "x2", "x3", "x4", "u", "y1", "y2"];

/// Top-level JSON document written by every subcommand.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub config: RunConfig,
    pub system: Value,
    pub gains: Value,
    pub metrics: Value,
    pub residuals: BTreeMap<&'static str, f64>,
}

impl Summary {
    pub fn new(config: RunConfig) -> Self {
        Self {
            config,
            system: Value::Null,
            gains: Value::Null,
            metrics: Value::Null,
            residuals: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        if let Some((k, v)) = self.residuals.iter().find(|(_, v)| !v.is_finite()) {
            return Err(CliError::verification(
                "write summary",
                format!("residual {k} is {v}"),
            ));
        }
        serde_json::to_string_pretty(self)
            .map_err(|e| CliError::config("write summary", e.to_string()))
    }

    /// Writes to `path`, or stdout when absent.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        let text = self.to_json()?;
        match path {
            Some(p) => std::fs::write(p, text + "\n")
                .map_err(|e| CliError::config("write summary", format!("{}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                writeln!(out, "{text}")
                    .map_err(|e| CliError::config("write summary", e.to_string()))
            }
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// One row per sample: `t,x1,x2,x3,x4,u,y1,y2`.
pub fn write_csv<W: Write>(traj: &Trajectory, sink: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for i in 0..traj.len() {
        let x = traj.states[i].as_array();
        let y = traj.outputs[i];
        let row = [
            traj.times[i],
            x[0],
            x[1],
            x[2],
            x[3],
            traj.inputs[i],
            y[0],
            y[1],
        ];
        w.write_record(row.iter().map(|v| sig9(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::config("write trajectory", format!("{}: {e}", path.display())))?;
    write_csv(traj, std::io::BufWriter::new(file))
        .map_err(|e| CliError::config("write trajectory", format!("{}: {e}", path.display())))
}
