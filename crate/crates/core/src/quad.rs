//! Numerical quadrature: adaptive Simpson and fixed Gauss–Legendre panels.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    NoConvergence { a: f64, b: f64 },
    #[error("non-finite integrand value at x = {0}")]
    NonFinite(f64),
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson with Richardson correction; `tol` is absolute per panel.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    for (x, v) in [(a, fa), (m, fm), (b, fb)] {
        if !v.is_finite() {
            return Err(QuadError::NonFinite(x));
        }
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() {
        return Err(QuadError::NonFinite(lm));
    }
    if !frm.is_finite() {
        return Err(QuadError::NonFinite(rm));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || m <= a || b <= m {
        return Err(QuadError::NoConvergence { a, b });
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

pub(crate) const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub(crate) const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(&x, &w)| w * (f(c - h * x) + f(c + h * x)))
        .sum::<f64>()
        * h
}

/// Cumulative integrals `∫_{x_0}^{x_i} f` on a grid, Gauss–Legendre per cell.
pub fn cumulative_gl<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in grid.windows(2) {
        acc += gauss_legendre(&f, w[0], w[1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson on sampled values over a possibly non-uniform grid.
///
/// Pairs of cells use the three-point rule for unequal spacing; a trailing odd
/// cell falls back to the trapezoid rule.
pub fn simpson_samples(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * (y[i] * (2.0 - h1 / h0) + y[i + 1] * hs * hs / (h0 * h1) + y[i + 2] * (2.0 - h0 / h1));
        i += 2;
    }
    if i + 1 < n {
        total += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    total
}

/// Cumulative integrals of sampled values, exact for piecewise cubics.
///
/// Each cell integrates the cubic through its four nearest samples with the
/// two-point Gauss rule.
pub fn cumulative_samples(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let g = 0.5 / 3f64.sqrt();
    for i in 0..n - 1 {
        let s = if n < 4 { 0 } else { i.saturating_sub(1).min(n - 4) };
        let e = (s + 4).min(n);
        let lagrange = |t: f64| {
            (s..e)
                .map(|a| {
                    let w: f64 = (s..e).filter(|&b| b != a).map(|b| (t - x[b]) / (x[a] - x[b])).product();
                    w * y[a]
                })
                .sum::<f64>()
        };
        let (c, h) = (0.5 * (x[i] + x[i + 1]), x[i + 1] - x[i]);
        out[i + 1] = out[i] + 0.5 * h * (lagrange(c - g * h) + lagrange(c + g * h));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_oscillatory() {
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn simpson_reports_nonfinite() {
        assert!(adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn gl_exact_to_degree_15() {
        let v = gauss_legendre(|x| x.powi(15) + x.powi(14), -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let c = cumulative_gl(f64::exp, &grid);
        for (x, v) in grid.iter().zip(&c) {
            assert!((v - (x.exp() - 1.0)).abs() < 1e-12 * x.exp());
        }
    }

    #[test]
    fn cumulative_samples_fourth_order() {
        let x: Vec<f64> = (0..=200).map(|i| (i as f64 / 200.0).powi(2) * 4.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        let c = cumulative_samples(&x, &y);
        for (xi, ci) in x.iter().zip(&c) {
            assert!((ci - xi.sin()).abs() < 1e-7);
        }
        let cubic = cumulative_samples(&[0.0, 0.3, 1.0, 1.2, 2.0], &[0.0, 0.027, 1.0, 1.728, 8.0]);
        assert!((cubic[4] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_samples_nonuniform() {
        let x: Vec<f64> = (0..=40).map(|i| (i as f64 / 40.0).powi(2) * 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        assert!((simpson_samples(&x, &y) - 3f64.sin()).abs() < 1e-5);
    }
}
