//! CSV and JSON artifacts. Floats are written in shortest round-trip form so
//! re-reading a file reproduces the in-memory values exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::grid::{apply_averaging, GridProfile, GridSpec};
use crate::lattice::ChainState;
use crate::macroscopic::PhysicalProfile;
use crate::solver::HistoryEntry;

use super::CliError;

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Csv {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// `phi,W,U` on the grid nodes.
pub fn write_profile(path: &Path, w: &GridProfile) -> Result<(), CliError> {
    let u = apply_averaging(w);
    let mut out = csv_writer(path)?;
    out.write_record(["phi", "W", "U"])
        .map_err(|e| csv_err(path, e))?;
    for (i, phi) in w.grid.nodes().into_iter().enumerate() {
        out.serialize((phi, w.values[i], u.values[i]))
            .map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Reads `phi,W[,U]` and checks the nodes against `grid`. The extension
/// values are the normalized states −1 and +1.
pub fn read_profile(path: &Path, grid: GridSpec) -> Result<GridProfile, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(phi_col), Some(w_col)) = (col("phi"), col("W")) else {
        return Err(CliError::Config(format!(
            "{}: expected columns phi, W",
            path.display()
        )));
    };
    let mut values = Vec::with_capacity(grid.len());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let parse = |c: usize| -> Result<f64, CliError> {
            rec.get(c)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Config(format!("{}: bad number in row {}", path.display(), row + 1))
                })
        };
        let phi = parse(phi_col)?;
        if row >= grid.len() || (phi - grid.phi(row as isize)).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "{}: row {} at phi = {phi} does not match the configured grid",
                path.display(),
                row + 1
            )));
        }
        values.push(parse(w_col)?);
    }
    GridProfile::from_values(grid, values, -1.0, 1.0)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `iter,L,N,P,grad_norm,lambda`.
pub fn write_history(path: &Path, history: &[HistoryEntry]) -> Result<(), CliError> {
    let mut out = csv_writer(path)?;
    out.write_record(["iter", "L", "N", "P", "grad_norm", "lambda"])
        .map_err(|e| csv_err(path, e))?;
    for e in history {
        out.serialize((
            e.iter,
            e.report.l,
            e.report.n,
            e.report.p,
            e.report.grad_norm,
            e.lambda,
        ))
        .map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// `phi,R,V`.
pub fn write_physical(path: &Path, p: &PhysicalProfile) -> Result<(), CliError> {
    let mut out = csv_writer(path)?;
    out.write_record(["phi", "R", "V"])
        .map_err(|e| csv_err(path, e))?;
    for i in 0..p.phi.len() {
        out.serialize((p.phi[i], p.r[i], p.v[i]))
            .map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Appends `t,j,r,v` rows for one snapshot.
pub fn append_snapshot(out: &mut csv::Writer<File>, s: &ChainState) -> Result<(), csv::Error> {
    for j in 0..s.n_atoms() {
        out.serialize((s.t, j, s.r[j], s.v[j]))?;
    }
    Ok(())
}

pub fn trajectory_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let mut out = csv_writer(path)?;
    out.write_record(["t", "j", "r", "v"])
        .map_err(|e| csv_err(path, e))?;
    Ok(out)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = create(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| CliError::io(path, e))
}
