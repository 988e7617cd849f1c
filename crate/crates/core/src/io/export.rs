use std::path::Path;

use crate::continuation::Branch;
use crate::error::{Error, Result};
use crate::solver::Solution;

pub(crate) const BRANCH_HEADER: [&str; 8] = [
    "t",
    "u_mean",
    "u_min",
    "u_max",
    "l2_deriv",
    "residual_sup",
    "iterations",
    "fold_flag",
];

/// 17 significant digits; parses back to the same `f64`.
pub(crate) fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRow {
    pub t: Option<f64>,
    pub u_mean: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub l2_deriv: f64,
    pub residual_sup: f64,
    pub iterations: usize,
    pub fold_flag: bool,
}

impl BranchRow {
    pub fn of(sol: &Solution, fold_flag: bool) -> Self {
        let d = &sol.diagnostics;
        Self {
            t: sol.t,
            u_mean: d.mean,
            u_min: d.min,
            u_max: d.max,
            l2_deriv: d.l2_deriv,
            residual_sup: sol.residual_sup,
            iterations: sol.iterations,
            fold_flag,
        }
    }

    pub fn rows(branch: &Branch) -> Vec<Self> {
        branch
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| Self::of(p, branch.fold_flag(i)))
            .collect()
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.t.map(num).unwrap_or_default(),
            num(self.u_mean),
            num(self.u_min),
            num(self.u_max),
            num(self.l2_deriv),
            num(self.residual_sup),
            self.iterations.to_string(),
            u8::from(self.fold_flag).to_string(),
        ]
    }
}

fn csv_string(header: &[String], records: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in records {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

/// Branch CSV text, one row per point in arclength order.
pub fn branch_csv(rows: &[BranchRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidProblem("cannot export an empty branch".into()));
    }
    let header: Vec<String> = BRANCH_HEADER.iter().map(|s| s.to_string()).collect();
    csv_string(&header, rows.iter().map(BranchRow::record))
}

pub fn export_branch(branch: &Branch, path: &Path) -> Result<()> {
    std::fs::write(path, branch_csv(&BranchRow::rows(branch))?)?;
    Ok(())
}

/// Nodal values of each solution, one row per solution: `t,u0,...,u{n-1}`.
pub fn fields_csv(points: &[Solution]) -> Result<String> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidProblem("no fields to export".into()));
    };
    let n = first.u.n();
    let header: Vec<String> = std::iter::once("t".to_string()).chain((0..n).map(|j| format!("u{j}"))).collect();
    csv_string(
        &header,
        points.iter().map(|p| {
            std::iter::once(p.t.map(num).unwrap_or_default())
                .chain(p.u.values().iter().map(|&v| num(v)))
                .collect()
        }),
    )
}

pub fn export_fields(points: &[Solution], path: &Path) -> Result<()> {
    std::fs::write(path, fields_csv(points)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub t: Option<f64>,
    pub values: Vec<f64>,
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::SchemaError {
            path: what.into(),
            message: format!("not a number: '{s}'"),
        })
}

fn parse_opt(s: &str, what: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_num(s, what).map(Some)
    }
}

fn records(text: &str) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let io = |e: csv::Error| Error::Io(e.to_string());
    let header = r.headers().map_err(io)?.clone();
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>().map_err(io)?;
    Ok((header, rows))
}

pub fn import_branch(text: &str) -> Result<Vec<BranchRow>> {
    let (header, rows) = records(text)?;
    if header.iter().ne(BRANCH_HEADER) {
        return Err(Error::SchemaError {
            path: "header".into(),
            message: format!("unexpected branch header {header:?}"),
        });
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let f = |k: usize| parse_num(&r[k], &format!("row {i}.{}", BRANCH_HEADER[k]));
            Ok(BranchRow {
                t: parse_opt(&r[0], &format!("row {i}.t"))?,
                u_mean: f(1)?,
                u_min: f(2)?,
                u_max: f(3)?,
                l2_deriv: f(4)?,
                residual_sup: f(5)?,
                iterations: f(6)? as usize,
                fold_flag: f(7)? != 0.0,
            })
        })
        .collect()
}

pub fn import_fields(text: &str) -> Result<Vec<FieldRecord>> {
    let (_, rows) = records(text)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let values = r
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, v)| parse_num(v, &format!("row {i}.u{j}")))
                .collect::<Result<Vec<_>>>()?;
            Ok(FieldRecord {
                t: parse_opt(&r[0], &format!("row {i}.t"))?,
                values,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{PeriodicGrid, SpectralField};

    fn sol(t: f64) -> Solution {
        let g = PeriodicGrid::new(8).unwrap();
        let u = SpectralField::sample(g, |x| t + 0.1 * x.sin()).unwrap();
        Solution::new(u, Some(t), 1e-12, 1e-10, 3)
    }

    #[test]
    fn one_point_branch_is_two_lines() {
        let text = branch_csv(&[BranchRow::of(&sol(0.5), false)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "t,u_mean,u_min,u_max,l2_deriv,residual_sup,iterations,fold_flag");
        assert!(lines[1].starts_with("5.0000000000000000e-1,"));
        assert!(lines[1].ends_with(",3,0"));
        assert!(branch_csv(&[]).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let pts = vec![sol(1.0 / 3.0), sol(std::f64::consts::PI)];
        let rows: Vec<BranchRow> = pts.iter().map(|p| BranchRow::of(p, true)).collect();
        assert_eq!(import_branch(&branch_csv(&rows).unwrap()).unwrap(), rows);
        let back = import_fields(&fields_csv(&pts).unwrap()).unwrap();
        for (r, p) in back.iter().zip(&pts) {
            assert_eq!(r.t, p.t);
            assert_eq!(r.values, p.u.values());
        }
    }
}
