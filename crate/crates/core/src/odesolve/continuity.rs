//! Continuity family `u″P(u′) = e^{−(t u + (1−t) u_ref)} J` on one facet.

use serde::Serialize;

use super::{
    dln_weight, integrate_hermite, ln_weight, log_add, quintic, cubic_d, Diagnostics, Equation, GridSpec,
    ODESolution, SolveError,
};
use crate::exactcore::{fmt_rational, int, to_f64, Rational};
use crate::facetnum::{FacetNumerics, Slope};
use crate::quad::{adaptive_simpson, cumulative_gl, GL_NODES, GL_WEIGHTS};
use crate::rootsystems::FacetData;

/// Iteration and continuation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub grid: GridSpec,
    pub relaxation: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub dt: f64,
    pub dt_min: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { grid: GridSpec::default(), relaxation: 0.5, tol: 1e-9, max_iter: 400, dt: 0.05, dt_min: 1e-4 }
    }
}

/// Continuation stopped short of its target next to the theoretical bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StallReport {
    pub t_reached: f64,
    pub t_target: f64,
    pub t_bound: f64,
    pub t_bound_exact: String,
    pub last_dt: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuationOutcome {
    Converged(ODESolution),
    Stalled { report: StallReport, last: Box<ODESolution> },
}

/// `ln(I/V)` with `I = ∫₀^∞ J/(e^{λx} + e^{−λx})`, so that `∫ e^{−u_ref} J = V`.
pub fn normalize_uref(f: &FacetData) -> Result<f64, SolveError> {
    let lambda = to_f64(&f.lambda);
    let threshold = (f.n1 + 2 * f.n2) as f64;
    if lambda <= threshold {
        return Err(SolveError::NotIntegrable { lambda, threshold });
    }
    let v = to_f64(&f.v);
    let (n1, n2) = (f.n1, f.n2);
    let integrand = move |x: f64| {
        if x <= 0.0 {
            return if n1 + n2 == 0 { 0.5 } else { 0.0 };
        }
        (ln_weight(n1, n2, x) - lambda * x - (-2.0 * lambda * x).exp().ln_1p()).exp()
    };
    let x_end = 5.0 + 60.0 / (lambda - threshold);
    let panels = (x_end.ceil() as usize).max(8);
    let width = x_end / panels as f64;
    let coarse: Vec<f64> = (0..=panels * 16).map(|i| i as f64 * width / 16.0).collect();
    let scale = *cumulative_gl(integrand, &coarse).last().unwrap();
    let tol = (1e-10f64).min(1e-13 * scale) / panels as f64;
    let mut total = 0.0;
    for j in 0..panels {
        total += adaptive_simpson(integrand, j as f64 * width, (j + 1) as f64 * width, tol)?;
    }
    let c = (total / v).ln();
    let fine: Vec<f64> = (0..=(x_end / 0.01) as usize).map(|i| i as f64 * 0.01).collect();
    let mass = *cumulative_gl(|x| integrand(x) / c.exp(), &fine).last().unwrap();
    if (mass / v - 1.0).abs() > 1e-8 {
        return Err(SolveError::NormalizationCheck { mass, v });
    }
    Ok(c)
}

#[derive(Debug, Clone)]
struct State {
    u: Vec<f64>,
    du: Vec<f64>,
    ddu: Vec<f64>,
    gap: Vec<f64>,
}

impl State {
    fn relax(&self, new: &State, w: f64) -> State {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect();
        State { u: mix(&self.u, &new.u), du: mix(&self.du, &new.du), ddu: mix(&self.ddu, &new.ddu), gap: mix(&self.gap, &new.gap) }
    }
}

const NODES: usize = 2 * GL_NODES.len();

/// Precomputed data on one grid.
struct FacetProblem {
    num: FacetNumerics,
    n1: u32,
    n2: u32,
    lambda: f64,
    ln_v: f64,
    uref_c: f64,
    grid: Vec<f64>,
    theta: [f64; NODES],
    weight: [f64; NODES],
    lnj_nodes: Vec<[f64; NODES]>,
    uref_nodes: Vec<[f64; NODES]>,
    lnj: Vec<f64>,
    uref: Vec<f64>,
}

impl FacetProblem {
    fn new(f: &FacetData, grid_spec: GridSpec) -> Result<Self, SolveError> {
        let uref_c = normalize_uref(f)?;
        let num = FacetNumerics::new(f);
        let lambda = num.lambda;
        let x_max = grid_spec.x_max.unwrap_or(20.0 / to_f64(&f.delta));
        let grid = grid_spec.build(x_max)?;
        let mut theta = [0.0; NODES];
        let mut weight = [0.0; NODES];
        for (j, (&x, &w)) in GL_NODES.iter().zip(&GL_WEIGHTS).enumerate() {
            theta[2 * j] = 0.5 * (1.0 - x);
            theta[2 * j + 1] = 0.5 * (1.0 + x);
            weight[2 * j] = 0.5 * w;
            weight[2 * j + 1] = 0.5 * w;
        }
        let uref_at = |x: f64| lambda * x + (-2.0 * lambda * x).exp().ln_1p() + uref_c;
        let (n1, n2) = (f.n1, f.n2);
        let mut lnj_nodes = Vec::with_capacity(grid.len() - 1);
        let mut uref_nodes = Vec::with_capacity(grid.len() - 1);
        for w in grid.windows(2) {
            let h = w[1] - w[0];
            lnj_nodes.push(theta.map(|th| ln_weight(n1, n2, w[0] + th * h)));
            uref_nodes.push(theta.map(|th| uref_at(w[0] + th * h)));
        }
        let lnj = grid.iter().map(|&x| if x > 0.0 { ln_weight(n1, n2, x) } else if n1 + n2 == 0 { 0.0 } else { f64::NEG_INFINITY }).collect();
        let uref = grid.iter().map(|&x| uref_at(x)).collect();
        Ok(FacetProblem {
            ln_v: num.v.ln(),
            num,
            n1,
            n2,
            lambda,
            uref_c,
            grid,
            theta,
            weight,
            lnj_nodes,
            uref_nodes,
            lnj,
            uref,
        })
    }

    fn zero_state(&self) -> State {
        let n = self.grid.len();
        State { u: vec![0.0; n], du: vec![0.0; n], ddu: vec![0.0; n], gap: vec![self.lambda; n] }
    }

    /// One Picard map: masses from `st`, slopes by inversion, `u″` from the equation.
    fn step(&self, st: &State, t: f64) -> Result<State, String> {
        let n = self.grid.len();
        let mut ln_cell = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let h = self.grid[i + 1] - self.grid[i];
            let a = [st.u[i], st.du[i], st.ddu[i]];
            let b = [st.u[i + 1], st.du[i + 1], st.ddu[i + 1]];
            let mut vals = [0.0; NODES];
            let mut top = f64::NEG_INFINITY;
            for q in 0..NODES {
                let u = quintic(self.theta[q], h, a, b);
                vals[q] = self.lnj_nodes[i][q] - t * u - (1.0 - t) * self.uref_nodes[i][q];
                top = top.max(vals[q]);
            }
            let s: f64 = vals.iter().zip(&self.weight).map(|(v, w)| w * (v - top).exp()).sum();
            ln_cell[i] = top + (h * s).ln();
        }
        let last = n - 1;
        let x_n = self.grid[last];
        let nu_n = t * st.u[last] + (1.0 - t) * self.uref[last] - self.lnj[last];
        let rate = t * st.du[last] + (1.0 - t) * self.lambda * (self.lambda * x_n).tanh()
            - dln_weight(self.n1, self.n2, x_n);
        if !(rate > 0.0) {
            return Err(format!("ν′(x_max) = {rate} is not positive"));
        }
        let mut ln_m = vec![f64::NEG_INFINITY; n];
        for i in 0..n - 1 {
            ln_m[i + 1] = log_add(ln_m[i], ln_cell[i]);
        }
        let mut ln_t = vec![0.0; n];
        ln_t[last] = -nu_n - rate.ln();
        for i in (0..n - 1).rev() {
            ln_t[i] = log_add(ln_t[i + 1], ln_cell[i]);
        }
        let shift = self.ln_v - ln_t[0];
        if !shift.is_finite() {
            return Err("total mass is not finite".into());
        }
        let mut du = vec![0.0; n];
        let mut gap = vec![0.0; n];
        let mut ddu = vec![0.0; n];
        for i in 0..n {
            let s = self.num.invert_ln(ln_m[i] + shift, ln_t[i] + shift).map_err(|e| e.to_string())?;
            du[i] = s.y;
            gap[i] = s.z;
            let nu_hat = t * st.u[i] + (1.0 - t) * self.uref[i];
            ddu[i] = if i == 0 && self.n1 + self.n2 > 0 {
                // u″(0)^{1+n1+n2} = e^{−ν̂(0)} 2^{n2} / P̃(0).
                let p = (1 + self.n1 + self.n2) as f64;
                ((-nu_hat + shift + self.n2 as f64 * std::f64::consts::LN_2 - self.num.p_tilde0().ln()) / p).exp()
            } else {
                (self.lnj[i] - nu_hat + shift - self.num.ln_p(s)).exp()
            };
        }
        let u0 = if t > 0.0 { st.u[0] - shift / t } else { 0.0 };
        let u = integrate_hermite(&self.grid, u0, &du, &ddu);
        if u.iter().chain(&ddu).any(|v| !v.is_finite()) {
            return Err("non-finite iterate".into());
        }
        Ok(State { u, du, ddu, gap })
    }

    fn solve_at(&self, init: &State, t: f64, opts: &SolveOptions) -> Result<(State, usize), String> {
        const WINDOW: usize = 20;
        let mut st = init.clone();
        let mut history = Vec::with_capacity(opts.max_iter);
        for it in 1..=opts.max_iter {
            let new = self.step(&st, t)?;
            let diff = new.u.iter().zip(&st.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if !diff.is_finite() {
                return Err("iteration diverged".into());
            }
            if diff < opts.tol {
                return Ok((new, it));
            }
            history.push(diff);
            if it % WINDOW == 0 && it > WINDOW {
                // Give up early when the observed contraction cannot reach `tol` in time.
                let rate = (diff / history[it - 1 - WINDOW]).powf(1.0 / WINDOW as f64);
                let needed = (opts.tol / diff).ln() / rate.ln();
                if rate >= 1.0 || needed > (opts.max_iter - it) as f64 {
                    return Err(format!("contraction rate {rate:.4} too slow at iteration {it}"));
                }
            }
            st = st.relax(&new, opts.relaxation);
        }
        Err(format!("no convergence in {} iterations", opts.max_iter))
    }

    /// `(m_t, x_t)` over the samples.
    fn nu_min(&self, st: &State, t: f64) -> (f64, f64) {
        (0..self.grid.len())
            .map(|i| (t * st.u[i] + (1.0 - t) * self.uref[i] - self.lnj[i], self.grid[i]))
            .filter(|(v, _)| v.is_finite())
            .fold((f64::INFINITY, 0.0), |best, c| if c.0 < best.0 { c } else { best })
    }

    fn admissible(&self, st: &State, t: f64) -> Result<(f64, f64), String> {
        let (m_t, x_t) = self.nu_min(st, t);
        let x_max = *self.grid.last().unwrap();
        if x_t > 0.8 * x_max {
            return Err(format!("minimum of ν_t escaped to x = {x_t}"));
        }
        Ok((m_t, x_t))
    }

    fn solution(&self, f: &FacetData, st: State, t: f64, iterations: usize) -> ODESolution {
        let (m_t, x_t) = self.nu_min(&st, t);
        let mut sol = ODESolution {
            grid: self.grid.clone(),
            u: st.u,
            du: st.du,
            ddu: st.ddu,
            gap: st.gap,
            t_reached: t,
            expansion: Vec::new(),
            equation: Equation::Facet {
                fiber_root: f.fiber_root,
                n: f.n,
                n1: f.n1,
                n2: f.n2,
                k: f.k,
                lambda: f.lambda.clone(),
                delta: f.delta.clone(),
                v: f.v.clone(),
                bar_dh: f.bar_dh.clone(),
                uref_c: self.uref_c,
            },
            diagnostics: Diagnostics { m_t, x_t, iterations, residual: 0.0 },
        };
        sol.diagnostics.residual = ode_residual(&sol, f, t);
        sol
    }
}

/// The explicit `t = 0` solution with `u₀(0) = 0`.
pub fn solve_t0(f: &FacetData, grid: GridSpec) -> Result<ODESolution, SolveError> {
    let prob = FacetProblem::new(f, grid)?;
    let st = prob
        .step(&prob.zero_state(), 0.0)
        .map_err(|reason| SolveError::NumericalFailure { t_reached: 0.0, t_bound: to_f64(&t_bound(f)), reason })?;
    Ok(prob.solution(f, st, 0.0, 1))
}

/// `(λ − n1 − 2n2)/(λ − barDH)`.
pub fn t_bound(f: &FacetData) -> Rational {
    (&f.lambda - int((f.n1 + 2 * f.n2) as i64)) / (&f.lambda - &f.bar_dh)
}

/// Continue from `t = 0` to `t_target`, or report where and why it stopped.
pub fn continuity_solve(f: &FacetData, t_target: f64, opts: &SolveOptions) -> Result<ContinuationOutcome, SolveError> {
    if !(0.0..=1.0).contains(&t_target) {
        return Err(SolveError::BadTarget(t_target));
    }
    let bound_exact = t_bound(f);
    let bound = to_f64(&bound_exact);
    let prob = FacetProblem::new(f, opts.grid)?;
    let mut st = prob
        .step(&prob.zero_state(), 0.0)
        .map_err(|reason| SolveError::NumericalFailure { t_reached: 0.0, t_bound: bound, reason })?;
    let (mut t, mut dt, mut total_iter) = (0.0, opts.dt, 1);
    while t < t_target {
        let t_next = (t + dt).min(t_target);
        let attempt = prob.solve_at(&st, t_next, opts).and_then(|(s, it)| prob.admissible(&s, t_next).map(|_| (s, it)));
        match attempt {
            Ok((s, it)) => {
                st = s;
                t = t_next;
                total_iter += it;
                dt = (2.0 * dt).min(opts.dt);
            }
            Err(reason) => {
                dt *= 0.5;
                if dt < opts.dt_min {
                    let last = prob.solution(f, st, t, total_iter);
                    if bound - t <= 0.05 {
                        let report = StallReport {
                            t_reached: t,
                            t_target,
                            t_bound: bound,
                            t_bound_exact: fmt_rational(&bound_exact),
                            last_dt: dt,
                            reason,
                        };
                        return Ok(ContinuationOutcome::Stalled { report, last: Box::new(last) });
                    }
                    return Err(SolveError::NumericalFailure { t_reached: t, t_bound: bound, reason });
                }
            }
        }
    }
    Ok(ContinuationOutcome::Converged(prob.solution(f, st, t, total_iter)))
}

fn facet_numerics_for(sol: &ODESolution, f: &FacetData) -> (FacetNumerics, f64) {
    let uref_c = match &sol.equation {
        Equation::Facet { uref_c, .. } => *uref_c,
        Equation::Stenzel { .. } => 0.0,
    };
    (FacetNumerics::new(f), uref_c)
}

/// Largest relative defect `|lhs − rhs|/(lhs + rhs)` over interior samples.
pub fn ode_residual(sol: &ODESolution, f: &FacetData, t: f64) -> f64 {
    let (num, uref_c) = facet_numerics_for(sol, f);
    let lambda = num.lambda;
    let n = sol.grid.len();
    (1..n - 1)
        .map(|i| {
            let x = sol.grid[i];
            let slope = Slope { y: sol.du[i], z: sol.gap[i] };
            let ln_lhs = sol.ddu[i].ln() + num.ln_p(slope);
            let uref = lambda * x + (-2.0 * lambda * x).exp().ln_1p() + uref_c;
            let ln_rhs = ln_weight(f.n1, f.n2, x) - t * sol.u[i] - (1.0 - t) * uref;
            let d = ln_lhs - ln_rhs;
            if d.is_nan() { 1.0 } else { (0.5 * d).tanh().abs() }
        })
        .fold(0.0, f64::max)
}

/// `(∫₀^∞ e^{−ν_t}, ∫₀^∞ u′ e^{−ν_t})`, expected to equal `(V, V·barDH)`.
pub fn integral_identities(sol: &ODESolution, f: &FacetData, t: f64) -> (f64, f64) {
    let (num, uref_c) = facet_numerics_for(sol, f);
    let lambda = num.lambda;
    let uref_at = |x: f64| lambda * x + (-2.0 * lambda * x).exp().ln_1p() + uref_c;
    let (mut mass, mut first) = (0.0, 0.0);
    for i in 0..sol.grid.len() - 1 {
        let (x0, h) = (sol.grid[i], sol.grid[i + 1] - sol.grid[i]);
        let a = [sol.u[i], sol.du[i], sol.ddu[i]];
        let b = [sol.u[i + 1], sol.du[i + 1], sol.ddu[i + 1]];
        for (&g, &w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            for th in [0.5 * (1.0 - g), 0.5 * (1.0 + g)] {
                let x = x0 + th * h;
                let u = quintic(th, h, a, b);
                let du = cubic_d(th, h, [a[1], a[2]], [b[1], b[2]]).0;
                let e = (ln_weight(f.n1, f.n2, x) - t * u - (1.0 - t) * uref_at(x)).exp();
                mass += 0.5 * w * h * e;
                first += 0.5 * w * h * du * e;
            }
        }
    }
    let last = sol.grid.len() - 1;
    let x_n = sol.grid[last];
    let nu_n = t * sol.u[last] + (1.0 - t) * uref_at(x_n) - ln_weight(f.n1, f.n2, x_n);
    let rate = t * sol.du[last] + (1.0 - t) * lambda * (lambda * x_n).tanh() - dln_weight(f.n1, f.n2, x_n);
    let tail = (-nu_n).exp() / rate;
    (mass + tail, first + lambda * tail)
}
