//! Jets of the potentials, Monge–Ampère residuals and metric data.

use serde::Serialize;
use thiserror::Error;

use super::GluedPotential;
use crate::odesolve::{ln_weight, ODESolution};
use crate::facetnum::Slope;
use crate::rootsystems::{apply_word, varpi, weyl_reduce, RestrictedRootSystem};
use crate::exactcore::to_f64;

/// Value and derivatives of `ϱ` in linear coordinates `l_i = ⟨L_i, x⟩`, scaled by `ϱ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    /// Rows are the covectors `L_i` in simple-root coordinates.
    pub basis: [[f64; 2]; 2],
    pub ln_rho: f64,
    /// `∂ϱ/∂l_i / ϱ`.
    pub grad: [f64; 2],
    /// `∂²ϱ/∂l_i∂l_j / ϱ`.
    pub hess: [[f64; 2]; 2],
    pub ln_det_hess: f64,
    /// `n ln ϱ − Σ m_γ γ(x)`.
    pub ma_offset: f64,
}

impl Jet {
    /// Scaled gradient and Hessian in root coordinates.
    pub fn root_coords(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let b = &self.basis;
        let g = [
            b[0][0] * self.grad[0] + b[1][0] * self.grad[1],
            b[0][1] * self.grad[0] + b[1][1] * self.grad[1],
        ];
        (g, congruence(b, &self.hess))
    }
}

/// `Bᵀ H B`.
fn congruence(b: &[[f64; 2]; 2], h: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| b[k][i] * h[k][l] * b[l][j]).sum();
        }
    }
    out
}

fn det2(h: &[[f64; 2]; 2]) -> f64 {
    h[0][0] * h[1][1] - h[0][1] * h[1][0]
}

fn min_eig(h: &[[f64; 2]; 2]) -> f64 {
    let tr = h[0][0] + h[1][1];
    let disc = ((h[0][0] - h[1][1]).powi(2) + 4.0 * h[0][1] * h[1][0]).sqrt();
    let hi = 0.5 * (tr + disc);
    if hi > 0.0 { det2(h) / hi } else { 0.5 * (tr - disc) }
}

/// A `W`-invariant potential known on the closed positive chamber.
pub trait Potential {
    fn system(&self) -> &RestrictedRootSystem;
    /// Jet at a chamber point given in root coordinates.
    fn jet(&self, a: [f64; 2]) -> Jet;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonAdmissible {
    #[error("Hessian is not positive definite at {0:?}")]
    Hessian([f64; 2]),
    #[error("⟨α, dϱ⟩ ≤ 0 for α = {root:?} at {at:?}")]
    Gradient { root: [i64; 2], at: [f64; 2] },
}

fn frame_f64(rs: &RestrictedRootSystem) -> [[f64; 2]; 2] {
    rs.frame
}

fn gram(rs: &RestrictedRootSystem) -> [[f64; 2]; 2] {
    rs.gram_f64()
}

/// `(⟨L_i, γ⟩)_i` for `γ = c1 α1 + c2 α2`.
fn pairing(basis: &[[f64; 2]; 2], g: &[[f64; 2]; 2], c: [i64; 2]) -> [f64; 2] {
    let gc = [g[0][0] * c[0] as f64 + g[0][1] * c[1] as f64, g[1][0] * c[0] as f64 + g[1][1] * c[1] as f64];
    [basis[0][0] * gc[0] + basis[0][1] * gc[1], basis[1][0] * gc[0] + basis[1][1] * gc[1]]
}

fn jet_residual(rs: &RestrictedRootSystem, jet: &Jet, a: [f64; 2], c: f64) -> Result<f64, NonAdmissible> {
    let g = gram(rs);
    let b = &jet.basis;
    // ⟨L_i, L_j⟩ = (B G Bᵀ)_ij.
    let lgl: [[f64; 2]; 2] = std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| b[i][k] * g[k][l] * b[j][l]).sum())
    });
    if !(jet.ln_det_hess.is_finite() && jet.hess[0][0] > 0.0) {
        return Err(NonAdmissible::Hessian(a));
    }
    let mut total = jet.ma_offset + det2(&lgl).ln() + jet.ln_det_hess - c.ln();
    for r in &rs.roots {
        let m = r.mult as f64;
        let ga = r.coords[0] as f64 * a[0] + r.coords[1] as f64 * a[1];
        let v = pairing(b, &g, r.coords);
        let term = if ga < 1e-7 {
            // On a wall ⟨γ, dϱ⟩/sinh γ tends to the second derivative along γ.
            let q = v[0] * (jet.hess[0][0] * v[0] + jet.hess[0][1] * v[1]) + v[1] * (jet.hess[1][0] * v[0] + jet.hess[1][1] * v[1]);
            let norm2 = r.coords[0] as f64 * (g[0][0] * r.coords[0] as f64 + g[0][1] * r.coords[1] as f64)
                + r.coords[1] as f64 * (g[1][0] * r.coords[0] as f64 + g[1][1] * r.coords[1] as f64);
            (q / norm2).ln() + ga
        } else {
            let d = v[0] * jet.grad[0] + v[1] * jet.grad[1];
            if !(d > 0.0) {
                return Err(NonAdmissible::Gradient { root: r.coords, at: a });
            }
            d.ln() + std::f64::consts::LN_2 - (-(-2.0 * ga).exp_m1()).ln()
        };
        total += m * term;
    }
    Ok(total)
}

/// `ln det d²ϱ + Σ m_α (ln⟨α, dϱ⟩ − ln sinh α) − ln C` at `a` (root coordinates).
pub fn ma_residual<P: Potential + ?Sized>(p: &P, a: [f64; 2], c: f64) -> Result<f64, NonAdmissible> {
    let (y, _) = weyl_reduce(p.system(), a);
    jet_residual(p.system(), &p.jet(y), y, c)
}

/// A potential given by a closed formula in orthonormal coordinates of `𝔞`.
pub struct ClosedForm<F> {
    rs: RestrictedRootSystem,
    f: F,
    inv_frame: [[f64; 2]; 2],
    two_varpi: [f64; 2],
}

impl<F> ClosedForm<F>
where
    F: Fn([f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]),
{
    /// `f` returns value, gradient and Hessian at a point of `𝔞`.
    pub fn new(rs: RestrictedRootSystem, f: F) -> Self {
        let fr = frame_f64(&rs);
        let det = det2(&fr);
        let inv_frame = [[fr[1][1] / det, -fr[0][1] / det], [-fr[1][0] / det, fr[0][0] / det]];
        let vp = varpi(&rs);
        let two_varpi = [2.0 * to_f64(&vp[0]), 2.0 * to_f64(&vp[1])];
        ClosedForm { rs, f, inv_frame, two_varpi }
    }

    /// Euclidean point with root coordinates `a`.
    pub fn point(&self, a: [f64; 2]) -> [f64; 2] {
        let m = &self.inv_frame;
        [m[0][0] * a[0] + m[0][1] * a[1], m[1][0] * a[0] + m[1][1] * a[1]]
    }

    /// Root coordinates of the Euclidean point `x`.
    pub fn root_coords(&self, x: [f64; 2]) -> [f64; 2] {
        let fr = &self.rs.frame;
        [fr[0][0] * x[0] + fr[0][1] * x[1], fr[1][0] * x[0] + fr[1][1] * x[1]]
    }
}

impl<F> Potential for ClosedForm<F>
where
    F: Fn([f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]),
{
    fn system(&self) -> &RestrictedRootSystem {
        &self.rs
    }

    fn jet(&self, a: [f64; 2]) -> Jet {
        let x = self.point(a);
        let (v, g, h) = (self.f)(x);
        let hess = h.map(|r| r.map(|e| e / v));
        // x = F⁻¹ a, so the coordinate covectors are the rows of F⁻¹.
        let m = &self.inv_frame;
        Jet {
            basis: [[m[0][0], m[0][1]], [m[1][0], m[1][1]]],
            ln_rho: v.ln(),
            grad: g.map(|e| e / v),
            hess,
            ln_det_hess: det2(&hess).ln(),
            ma_offset: self.rs.n as f64 * v.ln() - self.two_varpi[0] * a[0] - self.two_varpi[1] * a[1],
        }
    }
}

/// `cosh x1 + cosh x2` in orthonormal coordinates.
pub fn bg_cosh(rs: RestrictedRootSystem) -> ClosedForm<impl Fn([f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2])> {
    ClosedForm::new(rs, |x: [f64; 2]| {
        (x[0].cosh() + x[1].cosh(), [x[0].sinh(), x[1].sinh()], [[x[0].cosh(), 0.0], [0.0, x[1].cosh()]])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Interior,
    Blend,
    GlueBand,
    Model1,
    Model2,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Interior => "interior",
            Region::Blend => "blend",
            Region::GlueBand => "glue-band",
            Region::Model1 => "model1",
            Region::Model2 => "model2",
        }
    }
}

/// Smoothstep `6t⁵ − 15t⁴ + 10t³` on `[0, 1]` with two derivatives.
pub(crate) fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t2 = t * t;
    (t2 * t * (10.0 - 15.0 * t + 6.0 * t2), 30.0 * t2 * (1.0 - t).powi(2), 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t))
}

/// Convex `Φ` with `Φ(t) = 0` for `t ≤ −1`, `Φ(t) = t` for `t ≥ 1` and `Φ′` the smoothstep.
fn soft_plus(t: f64) -> (f64, f64, f64) {
    if t <= -1.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (t, 1.0, 0.0);
    }
    let u = 0.5 * (t + 1.0);
    let u4 = u.powi(4);
    let (d1, d2, _) = smoothstep(u);
    (2.0 * (u4 * u * u - 3.0 * u4 * u + 2.5 * u4), d1, 0.5 * d2)
}

struct PsiVals {
    psi: f64,
    dpsi: f64,
    ddpsi: f64,
    phi: f64,
    dphi: f64,
}

struct WVals {
    w: f64,
    dw: f64,
    ddw: f64,
}

/// Below this argument second derivatives come from interpolation instead of the ODE.
const ODE_FROM: f64 = 0.1;

fn tail_continuation(sol: &ODESolution, x: f64, rate: f64, growing: bool) -> (f64, f64, f64) {
    let i = sol.grid.len() - 1;
    let (x_n, u_n, du_n) = (sol.grid[i], sol.u[i], sol.du[i]);
    let dx = x - x_n;
    if growing {
        let e = (rate * dx).exp();
        (u_n + du_n / rate * (e - 1.0), du_n * e, rate * du_n * e)
    } else {
        let gap = sol.gap[i] * (-rate * dx).exp();
        let lam = du_n + sol.gap[i];
        (u_n + lam * dx - (sol.gap[i] - gap) / rate, gap, rate * gap)
    }
}

impl GluedPotential {
    fn psi_vals(&self, p: f64) -> PsiVals {
        let d = &self.d;
        let (u, du, gap, ddu_interp) = if p <= self.psi.x_max() {
            let (u, du, ddu) = self.psi.interpolate(p);
            (u, du, self.psi.interpolate_gap(p), ddu)
        } else {
            let (u, gap, ddu) = tail_continuation(&self.psi, p, d.delta, false);
            (u, d.lam - gap, gap, ddu)
        };
        let ddu = if p >= ODE_FROM {
            (ln_weight(self.facet.n1, self.facet.n2, p) - u - self.num.ln_p(Slope { y: du, z: gap })).exp()
        } else {
            ddu_interp
        };
        let c = self.psi_shift;
        PsiVals {
            psi: (u - self.constants.c_u) / d.n + c,
            dpsi: du / d.n,
            ddpsi: ddu / d.n,
            phi: (u - d.lam * p - d.k00) / d.n + c,
            dphi: -gap / d.n,
        }
    }

    fn w_vals(&self, q: f64) -> WVals {
        let d = &self.d;
        let (w, dw, ddw_interp) = if q <= self.w.x_max() {
            self.w.interpolate(q)
        } else {
            tail_continuation(&self.w, q, d.s, true)
        };
        let ddw = if q >= ODE_FROM {
            (ln_weight(d.m_a2, d.m_2a2, q) - self.constants.c_w.ln() - d.k2 as f64 * dw.ln()).exp()
        } else {
            ddw_interp
        };
        WVals { w, dw, ddw }
    }

    fn model2_jet(&self, a: [f64; 2]) -> Jet {
        let d = &self.d;
        let v = self.psi_vals(a[0]);
        let at2 = a[1] - d.g12_over_g11 * a[0];
        let (g0, b) = (v.dpsi, d.b);
        Jet {
            basis: [[1.0, 0.0], [-d.g12_over_g11, 1.0]],
            ln_rho: b * at2 + v.psi,
            grad: [g0, b],
            hess: [[v.ddpsi + g0 * g0, g0 * b], [g0 * b, b * b]],
            ln_det_hess: 2.0 * b.ln() + v.ddpsi.ln(),
            ma_offset: d.n * v.psi - d.thr * a[0],
        }
    }

    fn model1_jet(&self, a: [f64; 2]) -> Jet {
        let d = &self.d;
        let k1 = self.constants.k1;
        let t = a[0] + d.zeta * a[1];
        let wv = self.w_vals(a[1]);
        let e = (-d.a1 * t).exp();
        let f = 1.0 + e * wv.w;
        let (ew, ew1) = (e * wv.w / f, e * wv.dw / f);
        let h_tt = d.a0 * d.a0 - 2.0 * d.a0 * d.a1 * ew + d.a1 * d.a1 * ew;
        let h_tq = (d.a0 - d.a1) * ew1;
        let h_qq = e * wv.ddw / f;
        let hess = [[h_tt, h_tq], [h_tq, h_qq]];
        Jet {
            basis: [[1.0, d.zeta], [0.0, 1.0]],
            ln_rho: k1 + d.a0 * t + f.ln(),
            grad: [d.a0 - d.a1 * ew, ew1],
            hess,
            ln_det_hess: det2(&hess).ln(),
            ma_offset: d.n * k1 + d.lam_thr * a[0] + d.n * f.ln(),
        }
    }

    fn band_jet(&self, a: [f64; 2], tau: f64) -> Jet {
        let d = &self.d;
        let k1 = self.constants.k1;
        let eta = self.constants.eta;
        let (p, q) = (a[0], a[1]);
        let ds = [d.a0, d.a0 * d.zeta];
        let s_val = k1 + d.a0 * (p + d.zeta * q);
        let v = self.psi_vals(p);
        let f2 = v.phi.exp();
        let f2d = [v.dphi * f2, 0.0];
        let f2h = [[(v.ddpsi + v.dphi * v.dphi) * f2, 0.0], [0.0, 0.0]];
        let wv = self.w_vals(q);
        let e = (-d.a1 * (p + d.zeta * q)).exp();
        let s = d.s;
        let f1 = 1.0 + e * wv.w;
        let w1s = wv.dw - s * wv.w;
        let f1d = [-d.a1 * e * wv.w, e * w1s];
        let f1h = [
            [d.a1 * d.a1 * e * wv.w, -d.a1 * e * w1s],
            [-d.a1 * e * w1s, e * (wv.ddw - 2.0 * s * wv.dw + s * s * wv.w)],
        ];
        let (c0, c1, c2) = smoothstep(tau);
        let dt = [1.0, -eta];
        let diff = f1 - f2;
        let dd = [f1d[0] - f2d[0], f1d[1] - f2d[1]];
        let big_f = c0 * f1 + (1.0 - c0) * f2;
        let fd: [f64; 2] = std::array::from_fn(|i| c0 * f1d[i] + (1.0 - c0) * f2d[i] + c1 * dt[i] * diff);
        let fh: [[f64; 2]; 2] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                c0 * f1h[i][j] + (1.0 - c0) * f2h[i][j] + c1 * (dt[i] * dd[j] + dt[j] * dd[i]) + c2 * dt[i] * dt[j] * diff
            })
        });
        let grad: [f64; 2] = std::array::from_fn(|i| ds[i] + fd[i] / big_f);
        let hess: [[f64; 2]; 2] = std::array::from_fn(|i| {
            std::array::from_fn(|j| ds[i] * ds[j] + (ds[i] * fd[j] + fd[i] * ds[j] + fh[i][j]) / big_f)
        });
        Jet {
            basis: [[1.0, 0.0], [0.0, 1.0]],
            ln_rho: s_val + big_f.ln(),
            grad,
            hess,
            ln_det_hess: det2(&hess).ln(),
            ma_offset: d.n * k1 + d.lam_thr * p + d.n * big_f.ln(),
        }
    }

    /// The glued potential before the interior extension, with its region.
    pub fn glued_jet(&self, a: [f64; 2]) -> (Jet, Region) {
        let tau = a[0] - self.constants.eta * a[1];
        if tau <= 0.0 {
            (self.model2_jet(a), Region::Model2)
        } else if tau >= 1.0 {
            (self.model1_jet(a), Region::Model1)
        } else {
            (self.band_jet(a, tau), Region::GlueBand)
        }
    }

    /// `M + ln Σ_{w∈W} e^{(w·α1)(x)}` with gradient and Hessian in root coordinates.
    pub fn interior(&self, a: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let vals: Vec<f64> = self.d.weyl_rows.iter().map(|r| r[0] * a[0] + r[1] * a[1]).collect();
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ws: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
        let z: f64 = ws.iter().sum();
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for (r, w) in self.d.weyl_rows.iter().zip(&ws) {
            let sw = w / z;
            for i in 0..2 {
                g[i] += sw * r[i];
                for j in 0..2 {
                    h[i][j] += sw * r[i] * r[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] -= g[i] * g[j];
            }
        }
        (self.constants.m + top + z.ln(), g, h)
    }

    /// Jet and region at a chamber point, including the interior extension.
    pub fn jet_region(&self, a: [f64; 2]) -> (Jet, Region) {
        let (jet, region) = self.glued_jet(a);
        let eps = self.blend * self.constants.m;
        let rho = jet.ln_rho.exp();
        let (ri, gi, hi) = self.interior(a);
        let valid = rho.is_finite() && rho > 0.0;
        let unscaled = |v: f64, g: [f64; 2], h: [[f64; 2]; 2]| -> Jet {
            Jet {
                basis: [[1.0, 0.0], [0.0, 1.0]],
                ln_rho: v.ln(),
                grad: g.map(|e| e / v),
                hess: h.map(|r| r.map(|e| e / v)),
                ln_det_hess: (det2(&h) / (v * v)).ln(),
                ma_offset: self.d.n * v.ln() - self.d.two_varpi[0] * a[0] - self.d.two_varpi[1] * a[1],
            }
        };
        if valid && ri - rho <= -eps {
            return (jet, region);
        }
        if !valid || ri - rho >= eps {
            return (unscaled(ri, gi, hi), Region::Interior);
        }
        let (gs, hs) = jet.root_coords();
        let gg = gs.map(|e| e * rho);
        let hg = hs.map(|r| r.map(|e| e * rho));
        let (phi, d1, d2) = soft_plus((ri - rho) / eps);
        let delta = [gi[0] - gg[0], gi[1] - gg[1]];
        let v = rho + eps * phi;
        let g: [f64; 2] = std::array::from_fn(|i| gg[i] + d1 * delta[i]);
        let h: [[f64; 2]; 2] =
            std::array::from_fn(|i| std::array::from_fn(|j| hg[i][j] + d1 * (hi[i][j] - hg[i][j]) + d2 / eps * delta[i] * delta[j]));
        (unscaled(v, g, h), Region::Blend)
    }

    /// Region of an arbitrary point.
    pub fn region(&self, a: [f64; 2]) -> Region {
        let (y, _) = weyl_reduce(&self.sys, a);
        self.jet_region(y).1
    }
}

impl Potential for GluedPotential {
    fn system(&self) -> &RestrictedRootSystem {
        &self.sys
    }

    fn jet(&self, a: [f64; 2]) -> Jet {
        self.jet_region(a).0
    }
}

/// Smallest `M` keeping `ϱ_int` above `ϱ` on the box where `ϱ` misbehaves, plus one.
pub(crate) fn default_interior_level(p: &GluedPotential) -> f64 {
    let step = 0.25;
    let pts: Vec<[f64; 2]> =
        (0..=32).flat_map(|i| (0..=32).map(move |j| [i as f64 * step, j as f64 * step])).collect();
    let bad = |a: [f64; 2]| {
        let (jet, _) = p.glued_jet(a);
        !jet.ln_rho.is_finite() || jet_residual(&p.sys, &jet, a, 1.0).map(|r| !r.is_finite()).unwrap_or(true)
            || min_eig(&jet.root_coords().1) <= 0.0
    };
    let radius = pts.iter().filter(|a| bad(**a)).map(|a| a[0].max(a[1])).fold(1.0, f64::max) + 0.5;
    pts.iter()
        .filter(|a| a[0] <= radius && a[1] <= radius)
        .map(|a| p.glued_jet(*a).0.ln_rho.exp())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        + 1.0
}

/// `ϱ`, its gradient and Hessian in root coordinates, and the region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub rho: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    pub region: Region,
}

/// Linear map `R` with `weyl_reduce(a) = R a`.
fn reduction_matrix(rs: &RestrictedRootSystem, word: &[usize]) -> [[f64; 2]; 2] {
    let c0 = apply_word(rs, [1.0, 0.0], word);
    let c1 = apply_word(rs, [0.0, 1.0], word);
    [[c0[0], c1[0]], [c0[1], c1[1]]]
}

/// Evaluate at any point; derivatives are with respect to root coordinates.
pub fn evaluate(p: &GluedPotential, a: [f64; 2]) -> Evaluation {
    let (y, word) = weyl_reduce(&p.sys, a);
    let (jet, region) = p.jet_region(y);
    let rho = jet.ln_rho.exp();
    let (g, h) = jet.root_coords();
    let r = reduction_matrix(&p.sys, &word);
    let grad = [
        rho * (r[0][0] * g[0] + r[1][0] * g[1]),
        rho * (r[0][1] * g[0] + r[1][1] * g[1]),
    ];
    let hess = congruence(&r, &h).map(|row| row.map(|e| e * rho));
    Evaluation { rho, grad, hess, region }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSample {
    /// Hessian in orthonormal coordinates of `𝔞`.
    pub hessian: [[f64; 2]; 2],
    /// `tanh(γ(x)/2)⟨γ, dϱ⟩` per positive root.
    pub weights: Vec<([i64; 2], f64)>,
    pub beta: f64,
    pub r: f64,
    pub min_eig: f64,
}

/// Hessian, restricted-root toric weights, `β = ln ϱ` and the cone radius `2e^{β/2}`.
pub fn metric_sample<P: Potential + ?Sized>(p: &P, a: [f64; 2]) -> Result<MetricSample, NonAdmissible> {
    let rs = p.system();
    let (y, _) = weyl_reduce(rs, a);
    let jet = p.jet(y);
    let rho = jet.ln_rho.exp();
    let g = gram(rs);
    // Coordinates l = B F x, so the Euclidean Hessian is (BF)ᵀ Ĥ (BF).
    let fr = frame_f64(rs);
    let b = &jet.basis;
    let bf: [[f64; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| b[i][0] * fr[0][j] + b[i][1] * fr[1][j]));
    let hx = congruence(&bf, &jet.hess).map(|r| r.map(|e| e * rho));
    let me = min_eig(&hx);
    if !(me > 0.0) {
        return Err(NonAdmissible::Hessian(y));
    }
    let weights = rs
        .roots
        .iter()
        .map(|r| {
            let v = pairing(b, &g, r.coords);
            let ga = r.coords[0] as f64 * y[0] + r.coords[1] as f64 * y[1];
            (r.coords, (0.5 * ga).tanh() * rho * (v[0] * jet.grad[0] + v[1] * jet.grad[1]))
        })
        .collect();
    Ok(MetricSample { hessian: hx, weights, beta: jet.ln_rho, r: 2.0 * (0.5 * jet.ln_rho).exp(), min_eig: me })
}

pub(crate) fn min_eigenvalue(h: &[[f64; 2]; 2]) -> f64 {
    min_eig(h)
}

pub(crate) fn jet_residual_at(rs: &RestrictedRootSystem, jet: &Jet, a: [f64; 2], c: f64) -> Result<f64, NonAdmissible> {
    jet_residual(rs, jet, a, c)
}

/// Euclidean form `Fᵀ H F` of a root-coordinate Hessian.
pub(crate) fn euclidean(rs: &RestrictedRootSystem, h: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    congruence(&rs.frame, h)
}
