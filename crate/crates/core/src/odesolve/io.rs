//! Solution files: CSV samples plus a JSON sidecar.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Diagnostics, Equation, ODESolution};
use crate::exactcore::fmt_rational;

#[derive(Debug, Error)]
pub enum SolutionIoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed solution file: {0}")]
    Malformed(String),
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    lambda: Option<String>,
    t_reached: f64,
    expansion: Vec<[f64; 2]>,
    facet: Equation,
    diagnostics: Diagnostics,
}

/// Seventeen significant digits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `x,u,du,ddu,gap` rows to `csv_path` and the sidecar to `json_path`.
pub fn write_solution(sol: &ODESolution, csv_path: &Path, json_path: &Path) -> Result<(), SolutionIoError> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(["x", "u", "du", "ddu", "gap"])?;
    for i in 0..sol.grid.len() {
        let gap = sol.gap.get(i).copied().unwrap_or(f64::NAN);
        w.write_record([sol.grid[i], sol.u[i], sol.du[i], sol.ddu[i], gap].map(fmt_f64))?;
    }
    w.flush()?;
    let side = Sidecar {
        lambda: sol.lambda().map(fmt_rational),
        t_reached: sol.t_reached,
        expansion: sol.expansion.iter().map(|&(e, c)| [e, c]).collect(),
        facet: sol.equation.clone(),
        diagnostics: sol.diagnostics.clone(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(json_path)?), &side)?;
    Ok(())
}

pub fn read_solution(csv_path: &Path, json_path: &Path) -> Result<ODESolution, SolutionIoError> {
    let side: Sidecar = serde_json::from_reader(BufReader::new(File::open(json_path)?))?;
    let mut r = csv::Reader::from_path(csv_path)?;
    let (mut grid, mut u, mut du, mut ddu, mut gap) = (vec![], vec![], vec![], vec![], vec![]);
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| SolutionIoError::Malformed(e.to_string())))
            .collect::<Result<_, _>>()?;
        if vals.len() < 4 {
            return Err(SolutionIoError::Malformed(format!("row with {} fields", vals.len())));
        }
        grid.push(vals[0]);
        u.push(vals[1]);
        du.push(vals[2]);
        ddu.push(vals[3]);
        if let Some(&g) = vals.get(4) {
            gap.push(g);
        }
    }
    if grid.len() < 2 {
        return Err(SolutionIoError::Malformed("fewer than two samples".into()));
    }
    if gap.iter().any(|g| g.is_nan()) {
        gap.clear();
    }
    Ok(ODESolution {
        grid,
        u,
        du,
        ddu,
        gap,
        t_reached: side.t_reached,
        expansion: side.expansion.into_iter().map(|[e, c]| (e, c)).collect(),
        equation: side.facet,
        diagnostics: side.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odesolve::{solve_t0, stenzel_solve, GridSpec};
    use crate::rootsystems::{build_system, facet, Multiplicities, Ordering, RootKind};

    #[test]
    fn round_trip_is_exact() {
        let rs = build_system(RootKind::B2, Multiplicities::Bc { m1: 2, m2: 2, m3: 0 }, Ordering::AlphaFirst).unwrap();
        let mut sol = solve_t0(&facet(&rs, 1).unwrap(), GridSpec { h: 0.05, x_max: None }).unwrap();
        sol.expansion = vec![(0.0, 1.25), (2.0 / 3.0, 0.1)];
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = (dir.path().join("s.csv"), dir.path().join("s.json"));
        write_solution(&sol, &c, &j).unwrap();
        assert_eq!(read_solution(&c, &j).unwrap(), sol);
        let st = stenzel_solve(1, 1, 1.0, GridSpec { h: 0.05, x_max: Some(5.0) }).unwrap();
        write_solution(&st, &c, &j).unwrap();
        assert_eq!(read_solution(&c, &j).unwrap(), st);
        let header = std::fs::read_to_string(&c).unwrap();
        assert!(header.starts_with("x,u,du,ddu,gap\n"));
    }
}
