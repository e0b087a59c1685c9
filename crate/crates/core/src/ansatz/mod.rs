//! Glued asymptotically conical potential: the Tian–Yau type model near `D2`, the
//! Stenzel-fibered model near `D1`, the cutoff gluing and the interior extension.
//!
//! Points are written in root coordinates `(α1(x), α2(x))` of the ordered system
//! whose first simple root is the fiber root of the chosen facet.

mod bundle;
mod eval;
mod map;

pub use bundle::{load_bundle, save_bundle, BundleError, BundleMeta};
pub use eval::{
    bg_cosh, evaluate, ma_residual, metric_sample, ClosedForm, Evaluation, Jet, MetricSample, NonAdmissible,
    Potential, Region,
};
pub use map::{residual_map, write_samples_csv, DecayFit, ResidualMap, ResidualSample, Window};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criterion::{ke_exists, CriterionError};
use crate::exactcore::{int, rational_string, to_f64, Rational};
use crate::facetnum::FacetNumerics;
use crate::odesolve::{
    continuity_solve, expansion_fit, stenzel_solve, ContinuationOutcome, ExpansionError, GridSpec, ODESolution,
    SolveError, SolveOptions, StallReport,
};
use crate::rootsystems::{
    ansatz_geometry_ordered, facet_of_ordered, varpi, AnsatzGeometry, FacetData, RestrictedRootSystem, RootSystemError,
};

#[derive(Debug, Error)]
pub enum AnsatzError {
    #[error("no Kähler–Einstein potential on facet {fiber}: barycenter margin {margin}")]
    KeNonexistence { fiber: usize, margin: String },
    #[error("facet solver stalled at t = {}", .0.t_reached)]
    Stalled(Box<StallReport>),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error("fitted a1 = {fitted} deviates from {exact} by more than 2%")]
    A1Mismatch { fitted: f64, exact: f64 },
    #[error("gluing slope η = {eta} must lie in (0, {max})")]
    BadEta { eta: f64, max: f64 },
    #[error("b = {0} is not below 2")]
    ConeExponent(f64),
    #[error("truncation order {0} is not supported; only k = 1 is implemented")]
    UnsupportedTruncation(u32),
    #[error("fitted K2 = {0} is not positive")]
    NonpositiveK2(f64),
}

/// Constants of the glued potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzConstants {
    #[serde(with = "rational_string")]
    pub b: Rational,
    #[serde(with = "rational_string")]
    pub b1: Rational,
    #[serde(with = "rational_string")]
    pub a0: Rational,
    #[serde(with = "rational_string")]
    pub a1: Rational,
    #[serde(with = "rational_string")]
    pub zeta: Rational,
    /// `ψ = b1 x + K1 + K2 e^{−a1 x} + …`.
    pub k1: f64,
    pub k2: f64,
    /// `u = nψ + C_u`.
    pub c_u: f64,
    /// Fiber equation `C_w w″ (w′)^{k2} = sinh^{m_{α2}} sinh^{m_{2α2}}(2·)`.
    pub c_w: f64,
    /// Additive constant applied to the Stenzel solution to obtain `w`.
    pub w_shift: f64,
    /// Constant `C` of `det(d²ϱ) ∏⟨α, dϱ⟩^{m_α} = C ∏ sinh^{m_α} α`.
    pub c_ma: f64,
    pub eta: f64,
    pub m: f64,
    pub k_trunc: u32,
}

#[derive(Debug, Clone)]
pub struct AnsatzOptions {
    /// Gluing slope; defaults to `ζ(2/b − 1)/2`.
    pub eta: Option<f64>,
    pub k_trunc: u32,
    /// Interior level; chosen from the non-admissible set when absent.
    pub m: Option<f64>,
    /// Width of the interior blend band relative to `M`.
    pub blend: f64,
    pub c_ma: f64,
    pub j_max: u32,
    pub solve: SolveOptions,
    pub w_grid: GridSpec,
}

impl Default for AnsatzOptions {
    fn default() -> Self {
        AnsatzOptions {
            eta: None,
            k_trunc: 1,
            m: None,
            blend: 0.1,
            c_ma: 1.0,
            j_max: 4,
            solve: SolveOptions::default(),
            w_grid: GridSpec { h: 0.01, x_max: Some(24.0) },
        }
    }
}

/// f64 copies of the exact data used on every evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Derived {
    pub n: f64,
    pub thr: f64,
    pub lam: f64,
    pub lam_thr: f64,
    pub delta: f64,
    pub b: f64,
    pub a0: f64,
    pub a1: f64,
    pub zeta: f64,
    pub s: f64,
    pub g12_over_g11: f64,
    pub m_a2: u32,
    pub m_2a2: u32,
    pub k2: u32,
    pub two_varpi: [f64; 2],
    pub k00: f64,
    pub weyl_rows: Vec<[f64; 2]>,
}

/// The glued potential `ϱ` together with the one-variable solutions it is built from.
#[derive(Debug, Clone)]
pub struct GluedPotential {
    /// Ordered system with the fiber root first.
    pub sys: RestrictedRootSystem,
    /// Fiber root index in the unordered system (1 = α, 2 = β).
    pub fiber: usize,
    pub facet: FacetData,
    /// Facet solution `u` at `t = 1`; `ψ = (u − C_u)/n`.
    pub psi: ODESolution,
    /// Stenzel fiber solution, already shifted by `w_shift`.
    pub w: ODESolution,
    pub constants: AnsatzConstants,
    pub blend: f64,
    /// Constant added to `ψ`; zero for a built potential.
    pub psi_shift: f64,
    pub warnings: Vec<String>,
    pub(crate) num: FacetNumerics,
    pub(crate) d: Derived,
}

fn ln_rational(r: &Rational) -> f64 {
    to_f64(r).ln()
}

fn mult(sys: &RestrictedRootSystem, c: [i64; 2]) -> u32 {
    sys.mult_of(c)
}

/// `ln C_u` with `C_u = ln(b² g11^{1+n1+n2} |α̃2|² 2^{2N+n2} n^{1−n} / C)`, `N = n − 2 − n1 − n2`.
pub fn tian_yau_constant(sys: &RestrictedRootSystem, geo: &AnsatzGeometry, c_ma: f64) -> f64 {
    let g = &sys.gram;
    let (n1, n2) = (mult(sys, [1, 0]), mult(sys, [2, 0]));
    let n = sys.n;
    let tilde2 = &g[1][1] - &g[0][1] * &g[0][1] / &g[0][0];
    let big_n = (n - 2 - n1 - n2) as f64;
    2.0 * ln_rational(&geo.b)
        + (1 + n1 + n2) as f64 * ln_rational(&g[0][0])
        + ln_rational(&tilde2)
        + (2.0 * big_n + n2 as f64) * std::f64::consts::LN_2
        + (1.0 - n as f64) * (n as f64).ln()
        - c_ma.ln()
}

/// `ln(C_w e^{−nK1})`, the part of the fiber constant that does not depend on `K1`.
pub fn fiber_constant_reduced(sys: &RestrictedRootSystem, geo: &AnsatzGeometry, c_ma: f64) -> f64 {
    let g = &sys.gram;
    let (m_a2, m_2a2) = (mult(sys, [0, 1]), mult(sys, [0, 2]));
    let k2 = m_a2 + m_2a2;
    let tilde1 = &g[0][0] - &g[0][1] * &g[0][1] / &g[1][1];
    let t1 = [int(1), geo.zeta.clone()];
    let prod: f64 = sys
        .roots
        .iter()
        .filter(|r| r.coords[0] != 0)
        .map(|r| r.mult as f64 * ln_rational(&(&geo.a0 * sys.inner(&[int(r.coords[0]), int(r.coords[1])], &t1))))
        .sum();
    2.0 * ln_rational(&geo.a0)
        + ln_rational(&tilde1)
        + (1 + k2) as f64 * ln_rational(&g[1][1])
        + (m_2a2 + sys.n - 2 - k2) as f64 * std::f64::consts::LN_2
        + prod
        - c_ma.ln()
}

fn derived(sys: &RestrictedRootSystem, f: &FacetData, c: &AnsatzConstants) -> Derived {
    let g = &sys.gram;
    let vp = varpi(sys);
    let (m_a2, m_2a2) = (mult(sys, [0, 1]), mult(sys, [0, 2]));
    let thr = to_f64(&f.threshold());
    let lam = to_f64(&f.lambda);
    Derived {
        n: sys.n as f64,
        thr,
        lam,
        lam_thr: to_f64(&(&f.lambda - f.threshold())),
        delta: to_f64(&f.delta),
        b: to_f64(&c.b),
        a0: to_f64(&c.a0),
        a1: to_f64(&c.a1),
        zeta: to_f64(&c.zeta),
        s: to_f64(&(&c.a1 * &c.zeta)),
        g12_over_g11: to_f64(&(&g[0][1] / &g[0][0])),
        m_a2,
        m_2a2,
        k2: m_a2 + m_2a2,
        two_varpi: [2.0 * to_f64(&vp[0]), 2.0 * to_f64(&vp[1])],
        k00: sys.n as f64 * c.k1 + c.c_u,
        weyl_rows: sys.weyl_group().iter().map(|m| [m[0][0] as f64, m[0][1] as f64]).collect(),
    }
}

impl GluedPotential {
    /// Put a potential together from its parts without solving anything.
    pub fn assemble(
        sys: RestrictedRootSystem,
        fiber: usize,
        psi: ODESolution,
        w: ODESolution,
        constants: AnsatzConstants,
        blend: f64,
    ) -> Self {
        let facet = facet_of_ordered(&sys, fiber);
        let num = FacetNumerics::new(&facet);
        let d = derived(&sys, &facet, &constants);
        GluedPotential { sys, fiber, facet, psi, w, constants, blend, psi_shift: 0.0, warnings: Vec::new(), num, d }
    }

    /// Same potential with `ψ` replaced by `ψ + c`.
    pub fn with_psi_shift(&self, c: f64) -> Self {
        GluedPotential { psi_shift: self.psi_shift + c, ..self.clone() }
    }

    pub fn n(&self) -> u32 {
        self.sys.n
    }
}

/// Fitted and predicted tail data of `ψ` and `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionMatch {
    pub a1_psi: f64,
    pub k2_psi: f64,
    pub a1_w: f64,
    pub k2_w: f64,
}

impl ExpansionMatch {
    pub fn max_relative_gap(&self) -> f64 {
        let r = |a: f64, b: f64| (a - b).abs() / b.abs();
        r(self.a1_w, self.a1_psi).max(r(self.k2_w, self.k2_psi))
    }
}

/// Tail window used for the fiber fits.
fn w_tail_point(w: &ODESolution) -> f64 {
    w.x_max().min(18.0)
}

/// Compare `(a1, K2)` read off `ψ` with the same pair read off the fiber solution `w`.
pub fn expansion_match(p: &GluedPotential) -> Result<ExpansionMatch, AnsatzError> {
    let e = expansion_fit(&p.psi, 4)?;
    let n = p.d.n;
    let k2_psi = e.term(&p.facet.delta).map(|t| t.coefficient / n).unwrap_or(f64::NAN);
    let q1 = w_tail_point(&p.w);
    let q0 = q1 - 4.0;
    let pts: Vec<(f64, f64)> = (0..=40).map(|i| q0 + 0.1 * i as f64).map(|q| (q, p.w.interpolate(q).1.ln())).collect();
    let slope = least_squares_slope(&pts);
    let k2_w = (p.w.interpolate(q1).1.ln() - p.d.s * q1).exp() / p.d.s;
    Ok(ExpansionMatch { a1_psi: e.leading_exponent, k2_psi, a1_w: slope / p.d.zeta, k2_w })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

/// Solve both one-variable problems and assemble the glued potential for fiber root `fiber`.
pub fn build_glued(rs: &RestrictedRootSystem, fiber: usize, opts: &AnsatzOptions) -> Result<GluedPotential, AnsatzError> {
    if opts.k_trunc != 1 {
        return Err(AnsatzError::UnsupportedTruncation(opts.k_trunc));
    }
    let verdict = ke_exists(rs, fiber)?;
    if !verdict.ke_exists {
        return Err(AnsatzError::KeNonexistence { fiber, margin: crate::exactcore::fmt_rational(&verdict.margin) });
    }
    let sys = rs.with_first(fiber)?;
    let f = facet_of_ordered(&sys, fiber);
    let geo = ansatz_geometry_ordered(&sys);
    let b = to_f64(&geo.b);
    if b >= 2.0 {
        return Err(AnsatzError::ConeExponent(b));
    }
    let eta_max = to_f64(&geo.zeta) * (2.0 / b - 1.0);
    let eta = opts.eta.unwrap_or(0.5 * eta_max);
    if !(eta > 0.0 && eta < eta_max) {
        return Err(AnsatzError::BadEta { eta, max: eta_max });
    }
    let mut psi = match continuity_solve(&f, 1.0, &opts.solve)? {
        ContinuationOutcome::Converged(s) => s,
        ContinuationOutcome::Stalled { report, .. } => return Err(AnsatzError::Stalled(Box::new(report))),
    };
    let exp = expansion_fit(&psi, opts.j_max)?;
    let a1 = to_f64(&geo.a1);
    if (exp.leading_exponent - a1).abs() > 0.02 * a1 {
        return Err(AnsatzError::A1Mismatch { fitted: exp.leading_exponent, exact: a1 });
    }
    psi.expansion = exp.pairs();
    let n = sys.n as f64;
    let c_u = tian_yau_constant(&sys, &geo, opts.c_ma);
    let k1 = (exp.k00 - c_u) / n;
    let k2 = exp.term(&f.delta).map(|t| t.coefficient / n).unwrap_or(f64::NAN);
    if !(k2 > 0.0) {
        return Err(AnsatzError::NonpositiveK2(k2));
    }
    let c_w = (fiber_constant_reduced(&sys, &geo, opts.c_ma) + n * k1).exp();
    let (m_a2, m_2a2) = (sys.mult_of([0, 1]), sys.mult_of([0, 2]));
    let mut w = stenzel_solve(m_a2, m_2a2, 1.0 / c_w, opts.w_grid)?;
    // w′/s − w has no constant term in its tail since s < 2.
    let s = to_f64(&(&geo.a1 * &geo.zeta));
    let q = w_tail_point(&w);
    let (wq, dwq, _) = w.interpolate(q);
    let w_shift = dwq / s - wq;
    w.u.iter_mut().for_each(|v| *v += w_shift);
    let mut warnings = Vec::new();
    if !geo.a1_le_a0 {
        warnings.push(format!("a1 = {} exceeds a0 = {}", to_f64(&geo.a1), to_f64(&geo.a0)));
    }
    let constants = AnsatzConstants {
        b: geo.b.clone(),
        b1: geo.b1.clone(),
        a0: geo.a0.clone(),
        a1: geo.a1.clone(),
        zeta: geo.zeta.clone(),
        k1,
        k2,
        c_u,
        c_w,
        w_shift,
        c_ma: opts.c_ma,
        eta,
        m: 0.0,
        k_trunc: opts.k_trunc,
    };
    let mut p = GluedPotential::assemble(sys, fiber, psi, w, constants, opts.blend);
    p.warnings = warnings;
    p.constants.m = match opts.m {
        Some(m) => m,
        None => eval::default_interior_level(&p),
    };
    Ok(p)
}

#[cfg(test)]
mod tests;
