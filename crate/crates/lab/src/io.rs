//! CSV artifacts. Numbers are written with 17 significant digits, which reproduces every
//! `f64` exactly on reading.

use std::path::Path;

use gpphs_core::control::ReferencePlan;
use gpphs_core::filter::FilteredDataset;
use gpphs_core::trajectory::Trajectory;
use gpphs_core::DVector;

use crate::error::LabError;

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header and numeric rows.
pub fn write_rows<I>(path: &Path, header: &[String], rows: I) -> Result<(), LabError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| LabError::artifact(path, e))?;
    w.write_record(header).map_err(|e| LabError::artifact(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_number(*v)))
            .map_err(|e| LabError::artifact(path, e))?;
    }
    w.flush().map_err(|e| LabError::artifact(path, e))
}

/// Writes equally long columns under `header`.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<(), LabError> {
    let len = columns.first().map_or(0, |c| c.len());
    if header.len() != columns.len() || columns.iter().any(|c| c.len() != len) {
        return Err(LabError::artifact(path, "columns differ in length"));
    }
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    write_rows(path, &header, (0..len).map(|k| columns.iter().map(|c| c[k]).collect()))
}

/// Reads a header and numeric rows.
pub fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), LabError> {
    if !path.is_file() {
        return Err(LabError::artifact(path, "missing artifact"));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::artifact(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| LabError::artifact(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| LabError::artifact(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LabError::artifact(path, format!("row {}: {e}", k + 1)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn names(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Counts the leading run of columns named `prefix1, prefix2, ...` starting at `from`.
fn count_run(header: &[String], from: usize, prefix: &str) -> usize {
    header[from..]
        .iter()
        .enumerate()
        .take_while(|(i, h)| **h == format!("{prefix}{}", i + 1))
        .count()
}

fn vectors(rows: &[Vec<f64>], from: usize, len: usize) -> Vec<DVector<f64>> {
    rows.iter()
        .map(|r| DVector::from_column_slice(&r[from..from + len]))
        .collect()
}

/// Header `t,x1..xn,u1..um[,y1..ym]`.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), LabError> {
    let (n, m) = (traj.dim_state(), traj.dim_input());
    let mut header = vec!["t".to_string()];
    header.extend(names("x", n));
    header.extend(names("u", m));
    if traj.outputs().is_some() {
        header.extend(names("y", m));
    }
    let rows = (0..traj.len()).map(|k| {
        let mut row = vec![traj.times()[k]];
        row.extend(traj.states()[k].iter());
        row.extend(traj.inputs()[k].iter());
        if let Some(y) = traj.outputs() {
            row.extend(y[k].iter());
        }
        row
    });
    write_rows(path, &header, rows)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, LabError> {
    let (header, rows) = read_rows(path)?;
    if header.first().map(String::as_str) != Some("t") {
        return Err(LabError::artifact(path, "first column must be `t`"));
    }
    let n = count_run(&header, 1, "x");
    let m = count_run(&header, 1 + n, "u");
    let k = count_run(&header, 1 + n + m, "y");
    if n == 0 || 1 + n + m + k != header.len() || (k != 0 && k != m) {
        return Err(LabError::artifact(path, "header must be t,x1..xn,u1..um[,y1..ym]"));
    }
    let times = rows.iter().map(|r| r[0]).collect();
    let outputs = (k > 0).then(|| vectors(&rows, 1 + n + m, m));
    Trajectory::new(times, vectors(&rows, 1, n), vectors(&rows, 1 + n, m), outputs).map_err(|e| LabError::artifact(path, e))
}

/// Header `t,xd1..xdn,xddot1..xddotn`.
pub fn write_plan(path: &Path, plan: &ReferencePlan) -> Result<(), LabError> {
    let n = plan.dim_state();
    let mut header = vec!["t".to_string()];
    header.extend(names("xd", n));
    header.extend(names("xddot", n));
    let rows = (0..plan.times().len()).map(|k| {
        let mut row = vec![plan.times()[k]];
        row.extend(plan.states()[k].iter());
        row.extend(plan.derivatives()[k].iter());
        row
    });
    write_rows(path, &header, rows)
}

pub fn read_plan(path: &Path) -> Result<ReferencePlan, LabError> {
    let (header, rows) = read_rows(path)?;
    let n = count_run(&header, 1, "xd");
    if header.first().map(String::as_str) != Some("t") || n == 0 || count_run(&header, 1 + n, "xddot") != n || header.len() != 1 + 2 * n {
        return Err(LabError::artifact(path, "header must be t,xd1..xdn,xddot1..xddotn"));
    }
    let times = rows.iter().map(|r| r[0]).collect();
    ReferencePlan::from_samples(times, vectors(&rows, 1, n), vectors(&rows, 1 + n, n)).map_err(|e| LabError::artifact(path, e))
}

/// Header `t,x1..xn,xdot1..xdotn,u1..um`.
pub fn write_filtered(path: &Path, data: &FilteredDataset) -> Result<(), LabError> {
    let (n, m) = (data.dim_state(), data.dim_input());
    let mut header = vec!["t".to_string()];
    header.extend(names("x", n));
    header.extend(names("xdot", n));
    header.extend(names("u", m));
    let rows = (0..data.len()).map(|k| {
        let mut row = vec![data.times()[k]];
        row.extend(data.states()[k].iter());
        row.extend(data.derivatives()[k].iter());
        row.extend(data.inputs()[k].iter());
        row
    });
    write_rows(path, &header, rows)
}

pub fn read_filtered(path: &Path) -> Result<FilteredDataset, LabError> {
    let (header, rows) = read_rows(path)?;
    let n = count_run(&header, 1, "x");
    let ok_dot = count_run(&header, 1 + n, "xdot") == n;
    let m = if ok_dot { count_run(&header, 1 + 2 * n, "u") } else { 0 };
    if header.first().map(String::as_str) != Some("t") || n == 0 || !ok_dot || header.len() != 1 + 2 * n + m {
        return Err(LabError::artifact(path, "header must be t,x1..xn,xdot1..xdotn,u1..um"));
    }
    FilteredDataset::new(
        rows.iter().map(|r| r[0]).collect(),
        vectors(&rows, 1, n),
        vectors(&rows, 1 + n, n),
        vectors(&rows, 1 + 2 * n, m),
    )
    .map_err(|e| LabError::artifact(path, e))
}
