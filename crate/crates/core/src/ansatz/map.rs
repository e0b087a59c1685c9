//! Residual maps over a window of root coordinates and decay fits along rays.

use std::path::Path;

use serde::Serialize;

use super::eval::{jet_residual_at, min_eigenvalue, Region};
use super::{least_squares_slope, GluedPotential};
use crate::odesolve::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    /// Samples per axis.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub a1: f64,
    pub a2: f64,
    pub rho: f64,
    pub beta: f64,
    /// NaN where the potential is not admissible.
    pub residual: f64,
    /// Smallest eigenvalue of the Euclidean Hessian of `ϱ`.
    pub min_eig: f64,
    pub region: Region,
}

/// Least-squares slope of `ln|residual|` along a coordinate ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// The coordinate that varies, `"alpha1"` or `"alpha2"`.
    pub axis: &'static str,
    pub fixed: f64,
    pub from: f64,
    pub to: f64,
    pub slope: f64,
    pub expected: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualMap {
    pub samples: Vec<ResidualSample>,
    pub fits: Vec<DecayFit>,
}

/// Value of the other coordinate on the decay rays.
const RAY_FIXED: f64 = 2.0;
const RAY_POINTS: usize = 33;

pub(crate) fn sample(p: &GluedPotential, a: [f64; 2]) -> ResidualSample {
    let (jet, region) = p.jet_region(a);
    let (_, h) = jet.root_coords();
    let rho = jet.ln_rho.exp();
    let hx = super::eval::euclidean(&p.sys, &h);
    ResidualSample {
        a1: a[0],
        a2: a[1],
        rho,
        beta: jet.ln_rho,
        residual: jet_residual_at(&p.sys, &jet, a, p.constants.c_ma).unwrap_or(f64::NAN),
        min_eig: rho * min_eigenvalue(&hx),
        region,
    }
}

fn ray_fit(p: &GluedPotential, axis: usize, from: f64, to: f64, expected: f64) -> DecayFit {
    let pts: Vec<(f64, f64)> = (0..RAY_POINTS)
        .map(|i| from + (to - from) * i as f64 / (RAY_POINTS - 1) as f64)
        .filter_map(|t| {
            let a = if axis == 0 { [t, RAY_FIXED] } else { [RAY_FIXED, t] };
            let r = sample(p, a).residual.abs();
            (r > 0.0 && r.is_finite()).then(|| (t, r.ln()))
        })
        .collect();
    DecayFit {
        axis: if axis == 0 { "alpha1" } else { "alpha2" },
        fixed: RAY_FIXED,
        from,
        to,
        slope: if pts.len() >= 2 { least_squares_slope(&pts) } else { f64::NAN },
        expected,
        points: pts.len(),
    }
}

/// Residuals on an `n × n` grid and decay fits on `[hi/2, hi]` along both axis rays.
pub fn residual_map(p: &GluedPotential, window: Window) -> ResidualMap {
    let n = window.n.max(2);
    let coord = |i: usize| window.lo + (window.hi - window.lo) * i as f64 / (n - 1) as f64;
    let samples = (0..n).flat_map(|i| (0..n).map(move |j| [coord(i), coord(j)])).map(|a| sample(p, a)).collect();
    let (from, to) = (0.5 * window.hi, window.hi);
    let fits = vec![ray_fit(p, 1, from, to, -2.0), ray_fit(p, 0, from, to, -p.d.a1)];
    ResidualMap { samples, fits }
}

/// CSV with header `a1,a2,rho,beta,residual,min_eig,region`.
pub fn write_samples_csv(samples: &[ResidualSample], path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["a1", "a2", "rho", "beta", "residual", "min_eig", "region"])?;
    for s in samples {
        let nums = [s.a1, s.a2, s.rho, s.beta, s.residual, s.min_eig].map(fmt_f64);
        w.write_record(nums.iter().map(String::as_str).chain(std::iter::once(s.region.as_str())))?;
    }
    w.flush()?;
    Ok(())
}
