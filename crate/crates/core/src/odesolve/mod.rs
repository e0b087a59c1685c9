//! One-variable Monge–Ampère equations on the half line: the continuity family
//! of a facet, the Stenzel fiber equation, tail expansions and integral checks.

mod continuity;
mod delta2;
mod duality;
mod expansion;
mod io;
mod stenzel;

pub use continuity::{
    continuity_solve, integral_identities, normalize_uref, ode_residual, solve_t0, t_bound, ContinuationOutcome,
    SolveOptions, StallReport,
};
pub use delta2::{solve_delta2, Delta2Solution};
pub use duality::{c2_ratio_bracket, legendre_sup_check, DualityCheck};
pub use expansion::{expansion_fit, expansion_fit_samples, Expansion, ExpansionError, ExpansionTerm};
pub use io::{read_solution, write_solution, SolutionIoError};
pub(crate) use io::fmt_f64;
pub use stenzel::{stenzel_residual, stenzel_solve};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactcore::{rational_string, Rational};
use crate::facetnum::InversionError;
use crate::quad::QuadError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("weight is not integrable: λ = {lambda} ≤ n1 + 2 n2 = {threshold}")]
    NotIntegrable { lambda: f64, threshold: f64 },
    #[error("reference normalization check failed: mass {mass} vs V = {v}")]
    NormalizationCheck { mass: f64, v: f64 },
    #[error("t_target must lie in [0, 1], got {0}")]
    BadTarget(f64),
    #[error("grid spacing must be positive and x_max larger than the spacing")]
    BadGrid,
    #[error("invalid Stenzel data: {0}")]
    BadStenzel(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error("numerical failure at t = {t_reached} (bound {t_bound}): {reason}")]
    NumericalFailure { t_reached: f64, t_bound: f64, reason: String },
}

/// Grid request; `x_max = None` selects `20/δ` for facets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub x_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { h: 0.01, x_max: None }
    }
}

impl GridSpec {
    /// Samples on `[0, x_max]`, with spacing `h/4` at the origin growing to `h` at `x = 1`.
    pub fn build(&self, x_max: f64) -> Result<Vec<f64>, SolveError> {
        if !(self.h > 0.0 && x_max > 2.0 * self.h) {
            return Err(SolveError::BadGrid);
        }
        let mut grid = vec![0.0];
        let mut x = 0.0;
        while x < x_max {
            x += self.h * (0.25 + 0.75 * x.min(1.0));
            grid.push(x);
        }
        let n = grid.len();
        if x_max - grid[n - 2] < 0.5 * self.h {
            grid.pop();
        }
        *grid.last_mut().unwrap() = x_max;
        Ok(grid)
    }
}

/// Which equation a solution satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Equation {
    /// `u″P(u′) = e^{−(t u + (1−t) u_ref)} J` on one facet.
    Facet {
        fiber_root: usize,
        n: u32,
        n1: u32,
        n2: u32,
        k: u32,
        #[serde(with = "rational_string")]
        lambda: Rational,
        #[serde(with = "rational_string")]
        delta: Rational,
        #[serde(with = "rational_string")]
        v: Rational,
        #[serde(with = "rational_string")]
        bar_dh: Rational,
        uref_c: f64,
    },
    /// `ρ″ (ρ′)^{m1+m2} = C sinh^{m1}(x) sinh^{m2}(2x)`.
    Stenzel { m1: u32, m2: u32, c: f64 },
}

/// Solver diagnostics attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    /// `min ν_t` over the samples.
    pub m_t: f64,
    /// Argmin of `ν_t`.
    pub x_t: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Sampled even solution on `[0, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ODESolution {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub ddu: Vec<f64>,
    /// `λ − u′`, kept separately because it is tiny in the tail.
    pub gap: Vec<f64>,
    pub t_reached: f64,
    /// `(exponent, coefficient)` with the constant term first; empty until fitted.
    pub expansion: Vec<(f64, f64)>,
    pub equation: Equation,
    pub diagnostics: Diagnostics,
}

impl ODESolution {
    pub fn x_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn lambda(&self) -> Option<&Rational> {
        match &self.equation {
            Equation::Facet { lambda, .. } => Some(lambda),
            Equation::Stenzel { .. } => None,
        }
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` containing `x ∈ [0, x_max]`.
    pub fn cell(&self, x: f64) -> usize {
        let i = self.grid.partition_point(|&g| g <= x);
        i.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// Quintic Hermite value, cubic Hermite slope and second derivative at `x`.
    pub fn interpolate(&self, x: f64) -> (f64, f64, f64) {
        let i = self.cell(x);
        let h = self.grid[i + 1] - self.grid[i];
        let th = (x - self.grid[i]) / h;
        let u = quintic(th, h, [self.u[i], self.du[i], self.ddu[i]], [self.u[i + 1], self.du[i + 1], self.ddu[i + 1]]);
        let (du, ddu) = cubic_d(th, h, [self.du[i], self.ddu[i]], [self.du[i + 1], self.ddu[i + 1]]);
        (u, du, ddu)
    }

    /// Gap `λ − u′` at `x`, by cubic Hermite on the stored gap.
    pub fn interpolate_gap(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let h = self.grid[i + 1] - self.grid[i];
        let th = (x - self.grid[i]) / h;
        cubic_d(th, h, [self.gap[i], -self.ddu[i]], [self.gap[i + 1], -self.ddu[i + 1]]).0
    }

    /// Mirror to the full line, `(x, u, u′, u″)` on `[−x_max, x_max]`.
    pub fn even_extension(&self) -> Vec<(f64, f64, f64, f64)> {
        let neg = (1..self.grid.len()).rev().map(|i| (-self.grid[i], self.u[i], -self.du[i], self.ddu[i]));
        let pos = (0..self.grid.len()).map(|i| (self.grid[i], self.u[i], self.du[i], self.ddu[i]));
        neg.chain(pos).collect()
    }

    /// The fitted constant term, if an expansion is attached.
    pub fn k00(&self) -> Option<f64> {
        self.expansion.first().map(|&(_, c)| c)
    }
}

/// `ln sinh x` for `x > 0`, accurate at both ends.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    x - std::f64::consts::LN_2 + (-(-2.0 * x).exp_m1()).ln()
}

/// `ln J` with `J = sinh^{a}(x) sinh^{b}(2x)`.
pub(crate) fn ln_weight(a: u32, b: u32, x: f64) -> f64 {
    let mut s = 0.0;
    if a > 0 {
        s += a as f64 * ln_sinh(x);
    }
    if b > 0 {
        s += b as f64 * ln_sinh(2.0 * x);
    }
    s
}

/// `(ln J)′`.
pub(crate) fn dln_weight(a: u32, b: u32, x: f64) -> f64 {
    a as f64 / x.tanh() + 2.0 * b as f64 / (2.0 * x).tanh()
}

/// Stable `ln(e^a + e^b)`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

pub(crate) fn quintic(th: f64, h: f64, a: [f64; 3], b: [f64; 3]) -> f64 {
    let (t2, t3) = (th * th, th * th * th);
    let (t4, t5) = (t3 * th, t3 * t2);
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = th - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    h0 * a[0] + h * h1 * a[1] + h * h * h2 * a[2] + h3 * b[0] + h * h4 * b[1] + h * h * h5 * b[2]
}

/// Cubic Hermite value and derivative.
pub(crate) fn cubic_d(th: f64, h: f64, a: [f64; 2], b: [f64; 2]) -> (f64, f64) {
    let (t2, t3) = (th * th, th * th * th);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * a[0]
        + (t3 - 2.0 * t2 + th) * h * a[1]
        + (-2.0 * t3 + 3.0 * t2) * b[0]
        + (t3 - t2) * h * b[1];
    let d = (6.0 * t2 - 6.0 * th) / h * a[0]
        + (3.0 * t2 - 4.0 * th + 1.0) * a[1]
        + (-6.0 * t2 + 6.0 * th) / h * b[0]
        + (3.0 * t2 - 2.0 * th) * b[1];
    (v, d)
}

/// `u_{i+1} = u_i + h/2 (u′_i + u′_{i+1}) + h²/12 (u″_i − u″_{i+1})` from `u_0`.
pub(crate) fn integrate_hermite(grid: &[f64], u0: f64, du: &[f64], ddu: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(grid.len());
    u.push(u0);
    for i in 0..grid.len() - 1 {
        let h = grid[i + 1] - grid[i];
        let step = 0.5 * h * (du[i] + du[i + 1]) + h * h / 12.0 * (ddu[i] - ddu[i + 1]);
        u.push(u[i] + step);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_graded_and_ends_at_xmax() {
        let g = GridSpec::default().build(30.0).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 30.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g[1] - 0.0025).abs() < 1e-15);
        assert!(g.windows(2).last().map(|w| w[1] - w[0]).unwrap() <= 0.0151);
        assert!(GridSpec { h: 0.0, x_max: None }.build(1.0).is_err());
    }

    #[test]
    fn ln_sinh_accuracy() {
        for &x in &[1e-8f64, 1e-3, 0.5, 3.0, 40.0, 400.0] {
            let want = if x < 300.0 { x.sinh().ln() } else { x - std::f64::consts::LN_2 };
            assert!((ln_sinh(x) - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }

    #[test]
    fn hermite_rules_are_exact_for_polynomials() {
        let f = |x: f64| x.powi(5) - 2.0 * x.powi(3) + x;
        let df = |x: f64| 5.0 * x.powi(4) - 6.0 * x * x + 1.0;
        let ddf = |x: f64| 20.0 * x.powi(3) - 12.0 * x;
        let (a, b, h) = (0.3, 0.8, 0.5);
        let v = quintic(0.37, h, [f(a), df(a), ddf(a)], [f(b), df(b), ddf(b)]);
        assert!((v - f(a + 0.37 * h)).abs() < 1e-14);
        let g = |x: f64| x.powi(3) - x;
        let dg = |x: f64| 3.0 * x * x - 1.0;
        let (v, d) = cubic_d(0.6, h, [g(a), dg(a)], [g(b), dg(b)]);
        assert!((v - g(a + 0.6 * h)).abs() < 1e-14 && (d - dg(a + 0.6 * h)).abs() < 1e-13);
        let grid = [0.0, 0.4, 1.0, 1.3];
        let u = integrate_hermite(&grid, 0.0, &grid.map(|x| 3.0 * x * x), &grid.map(|x| 6.0 * x));
        assert!((u[3] - 1.3f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn log_add_is_stable() {
        assert!((log_add(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
