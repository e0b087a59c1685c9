//! Radial fiber Laplacian `Δ₂f = f″/w″ + (d₂ − 1) f′/w′` and its inverse.

use super::{integrate_hermite, ODESolution, SolveError};
use crate::quad::cumulative_samples;

/// Below this value of `w′` the quotient is replaced by its leading-order limit.
const W_PRIME_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Delta2Solution {
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub ddf: Vec<f64>,
    /// Samples with `x` below this use the small-`w′` limit `f′ ≈ g w′/d₂`.
    pub excluded_below: f64,
}

/// Solve `Δ₂f = g` on the samples of `w`, with `f′(0) = 0` and `f(0) = 0`.
pub fn solve_delta2(w: &ODESolution, g: &[f64], d2: f64) -> Result<Delta2Solution, SolveError> {
    if g.len() != w.grid.len() {
        return Err(SolveError::BadStenzel(format!("g has {} samples, w has {}", g.len(), w.grid.len())));
    }
    if w.ddu.iter().any(|&v| v <= 0.0) {
        return Err(SolveError::BadStenzel("w is not strictly convex".into()));
    }
    let n = w.grid.len();
    // f′ = (w′)^{1−d₂} ∫₀^x g (w′)^{d₂−1} w″.
    let integrand: Vec<f64> = (0..n).map(|i| g[i] * w.du[i].powf(d2 - 1.0) * w.ddu[i]).collect();
    let cum = cumulative_samples(&w.grid, &integrand);
    let mut excluded_below = 0.0;
    let mut df = vec![0.0; n];
    let mut ddf = vec![0.0; n];
    for i in 0..n {
        let ratio = if w.du[i] < W_PRIME_FLOOR {
            excluded_below = w.grid[i];
            g[i] / d2
        } else {
            cum[i] / w.du[i].powf(d2)
        };
        df[i] = ratio * w.du[i];
        ddf[i] = w.ddu[i] * (g[i] - (d2 - 1.0) * ratio);
    }
    let f = integrate_hermite(&w.grid, 0.0, &df, &ddf);
    Ok(Delta2Solution { grid: w.grid.clone(), f, df, ddf, excluded_below })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odesolve::{stenzel_solve, GridSpec};

    fn cosh_fiber() -> ODESolution {
        // ρ′ = sinh for (m1, m2, C) = (2, 1, 1/2).
        stenzel_solve(2, 1, 0.5, GridSpec { h: 0.01, x_max: Some(10.0) }).unwrap()
    }

    #[test]
    fn zero_source_gives_zero() {
        let w = cosh_fiber();
        let s = solve_delta2(&w, &vec![0.0; w.grid.len()], 4.0).unwrap();
        assert!(s.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn manufactured_solution() {
        let w = cosh_fiber();
        // f₀ = sech, so g = f₀″/cosh + 3 f₀′/sinh = sech²(tanh² − sech²) − 3 sech².
        let g: Vec<f64> = w
            .grid
            .iter()
            .map(|&x| {
                let (s, t) = (1.0 / x.cosh(), x.tanh());
                s * s * (t * t - s * s) - 3.0 * s * s
            })
            .collect();
        let sol = solve_delta2(&w, &g, 4.0).unwrap();
        let err = w
            .grid
            .iter()
            .zip(&sol.f)
            .map(|(&x, &f)| (f - (1.0 / x.cosh() - 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
        assert!(sol.excluded_below < 1e-2);
    }

    #[test]
    fn d2_one_telescopes() {
        let w = cosh_fiber();
        let g: Vec<f64> = w.grid.iter().map(|&x| (-x).exp()).collect();
        let sol = solve_delta2(&w, &g, 1.0).unwrap();
        let direct = cumulative_samples(&w.grid, &g.iter().zip(&w.ddu).map(|(a, b)| a * b).collect::<Vec<_>>());
        for i in 0..w.grid.len() {
            assert!((sol.df[i] - direct[i]).abs() < 1e-12 * direct[i].abs().max(1.0));
            assert!((sol.ddf[i] / w.ddu[i] - g[i]).abs() < 1e-14);
        }
    }
}
