//! Separable Stenzel equation `ρ″ (ρ′)^m = C sinh^{m1}(x) sinh^{m2}(2x)`, `m = m1 + m2`.

use super::{integrate_hermite, ln_weight, log_add, Diagnostics, Equation, GridSpec, ODESolution, SolveError};
use crate::quad::{GL_NODES, GL_WEIGHTS};

/// `ρ′ = ((m+1) C ∫₀^x J)^{1/(m+1)}`, `ρ(0) = 0`; `x_max` defaults to 15.
pub fn stenzel_solve(m1: u32, m2: u32, c: f64, grid: GridSpec) -> Result<ODESolution, SolveError> {
    if m1 + m2 == 0 {
        return Err(SolveError::BadStenzel("m1 + m2 must be positive".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SolveError::BadStenzel(format!("C must be positive, got {c}")));
    }
    let xs = grid.build(grid.x_max.unwrap_or(15.0))?;
    let n = xs.len();
    let m = (m1 + m2) as f64;
    let p = m + 1.0;
    // ln ∫₀^x J, accumulated in log form since J grows like e^{(m1+2m2)x}.
    let mut ln_int = vec![f64::NEG_INFINITY; n];
    for i in 0..n - 1 {
        let (x0, h) = (xs[i], xs[i + 1] - xs[i]);
        let vals: Vec<(f64, f64)> = GL_NODES
            .iter()
            .zip(&GL_WEIGHTS)
            .flat_map(|(&g, &w)| [(0.5 * (1.0 - g), w), (0.5 * (1.0 + g), w)])
            .map(|(th, w)| (ln_weight(m1, m2, x0 + th * h), 0.5 * w))
            .collect();
        let top = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = vals.iter().map(|(l, w)| w * (l - top).exp()).sum();
        ln_int[i + 1] = log_add(ln_int[i], top + (h * s).ln());
    }
    let ln_pc = (p * c).ln();
    let du: Vec<f64> = ln_int.iter().map(|&l| ((ln_pc + l) / p).exp()).collect();
    let ddu: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                // ρ′ ≈ (C 2^{m2})^{1/(m+1)} x at the origin.
                ((c.ln() + m2 as f64 * std::f64::consts::LN_2) / p).exp()
            } else {
                (c.ln() + ln_weight(m1, m2, xs[i]) - m * du[i].ln()).exp()
            }
        })
        .collect();
    let u = integrate_hermite(&xs, 0.0, &du, &ddu);
    let mut sol = ODESolution {
        grid: xs,
        u,
        du,
        ddu,
        gap: Vec::new(),
        t_reached: 1.0,
        expansion: Vec::new(),
        equation: Equation::Stenzel { m1, m2, c },
        diagnostics: Diagnostics::default(),
    };
    sol.diagnostics.residual = stenzel_residual(&sol, m1, m2, c);
    Ok(sol)
}

/// Largest relative defect of the Stenzel equation over interior samples.
pub fn stenzel_residual(sol: &ODESolution, m1: u32, m2: u32, c: f64) -> f64 {
    let m = (m1 + m2) as f64;
    (1..sol.grid.len() - 1)
        .map(|i| {
            let d = sol.ddu[i].ln() + m * sol.du[i].ln() - c.ln() - ln_weight(m1, m2, sol.grid[i]);
            if d.is_nan() { 1.0 } else { (0.5 * d).tanh().abs() }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_rel_sinh(sol: &ODESolution) -> f64 {
        sol.grid
            .iter()
            .zip(&sol.du)
            .skip(1)
            .map(|(x, d)| (d - x.sinh()).abs() / x.sinh())
            .fold(0.0, f64::max)
    }

    #[test]
    fn cosh_family_members() {
        for m1 in [2, 4] {
            let sol = stenzel_solve(m1, 1, 0.5, GridSpec::default()).unwrap();
            assert!(max_rel_sinh(&sol) < 1e-10, "m1 = {m1}: {}", max_rel_sinh(&sol));
            assert!(sol.du.windows(2).all(|w| w[1] > w[0]));
            assert!(sol.diagnostics.residual < 1e-12);
        }
    }

    #[test]
    fn scaling_c_scales_slope() {
        let a = stenzel_solve(3, 2, 0.7, GridSpec::default()).unwrap();
        let s: f64 = 1.3;
        let b = stenzel_solve(3, 2, 0.7 * s.powi(6), GridSpec::default()).unwrap();
        for (x, y) in a.du.iter().zip(&b.du).skip(1) {
            assert!((y / x - s).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_cosh_data_has_tiny_residual() {
        let xs = GridSpec::default().build(15.0).unwrap();
        let sol = ODESolution {
            u: xs.iter().map(|x| x.cosh()).collect(),
            du: xs.iter().map(|x| x.sinh()).collect(),
            ddu: xs.iter().map(|x| x.cosh()).collect(),
            grid: xs,
            gap: Vec::new(),
            t_reached: 1.0,
            expansion: Vec::new(),
            equation: Equation::Stenzel { m1: 2, m2: 1, c: 0.5 },
            diagnostics: Diagnostics::default(),
        };
        assert!(stenzel_residual(&sol, 2, 1, 0.5) < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(stenzel_solve(0, 0, 1.0, GridSpec::default()).is_err());
        assert!(stenzel_solve(1, 0, -1.0, GridSpec::default()).is_err());
    }
}
