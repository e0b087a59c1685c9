//! Comparisons between two solutions: Legendre duality and second-derivative ratios.

use super::{cubic_d, ODESolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityCheck {
    /// `sup_x |u_a − u_b|`, including the limit at infinity.
    pub sup_u: f64,
    /// `sup_y |v_a − v_b|` over slopes reached by both, including `y = λ`.
    pub sup_v: f64,
}

fn limit_constant(s: &ODESolution, lambda: f64) -> f64 {
    s.k00().unwrap_or_else(|| {
        let i = s.grid.len() - 1;
        s.u[i] - lambda * s.grid[i]
    })
}

/// Point `x` with `u′(x) = y`, if `y` lies in the sampled range.
fn slope_preimage(s: &ODESolution, y: f64) -> Option<f64> {
    let n = s.grid.len();
    if !(y >= s.du[0] && y <= s.du[n - 1]) {
        return None;
    }
    let j = s.du.partition_point(|&d| d <= y).saturating_sub(1).min(n - 2);
    let (x0, h) = (s.grid[j], s.grid[j + 1] - s.grid[j]);
    let a = [s.du[j], s.ddu[j]];
    let b = [s.du[j + 1], s.ddu[j + 1]];
    let mut th = if b[0] > a[0] { (y - a[0]) / (b[0] - a[0]) } else { 0.0 };
    for _ in 0..30 {
        let (v, d) = cubic_d(th, h, a, b);
        if d <= 0.0 {
            break;
        }
        let next = (th - (v - y) / (d * h)).clamp(0.0, 1.0);
        if (next - th).abs() < 1e-16 {
            break;
        }
        th = next;
    }
    Some(x0 + th * h)
}

/// Compare `sup|u_a − u_b|` with `sup|v_a − v_b|` for the Legendre transforms.
pub fn legendre_sup_check(a: &ODESolution, b: &ODESolution, lambda: f64) -> DualityCheck {
    let end = (limit_constant(a, lambda) - limit_constant(b, lambda)).abs();
    let x_hi = a.x_max().min(b.x_max());
    let sup_u = a
        .grid
        .iter()
        .zip(&a.u)
        .filter(|(x, _)| **x <= x_hi)
        .map(|(&x, &u)| (u - b.interpolate(x).0).abs())
        .fold(end, f64::max);
    let v_diff = |p: &ODESolution, q: &ODESolution, i: usize| -> Option<f64> {
        let y = p.du[i];
        let xq = slope_preimage(q, y)?;
        let vp = p.grid[i] * y - p.u[i];
        let vq = xq * y - q.interpolate(xq).0;
        Some((vp - vq).abs())
    };
    let sup_v = (0..a.grid.len())
        .filter_map(|i| v_diff(a, b, i))
        .chain((0..b.grid.len()).filter_map(|i| v_diff(b, a, i)))
        .fold(end, f64::max);
    DualityCheck { sup_u, sup_v }
}

/// `(min, max)` of `u_a″/u_b″` over the samples of `a`.
pub fn c2_ratio_bracket(a: &ODESolution, b: &ODESolution) -> (f64, f64) {
    let x_hi = a.x_max().min(b.x_max());
    a.grid
        .iter()
        .zip(&a.ddu)
        .filter(|(x, _)| **x <= x_hi)
        .map(|(&x, &d)| d / b.interpolate(x).2)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odesolve::{continuity_solve, expansion_fit, solve_t0, ContinuationOutcome, GridSpec, SolveOptions};
    use crate::rootsystems::{build_system, facet, Multiplicities, Ordering, RootKind};

    fn b2_pair() -> (ODESolution, ODESolution) {
        let rs = build_system(RootKind::B2, Multiplicities::Bc { m1: 2, m2: 2, m3: 0 }, Ordering::AlphaFirst).unwrap();
        let f = facet(&rs, 1).unwrap();
        let mut u0 = solve_t0(&f, GridSpec::default()).unwrap();
        let ContinuationOutcome::Converged(mut u1) = continuity_solve(&f, 1.0, &SolveOptions::default()).unwrap() else {
            panic!()
        };
        u0.expansion = expansion_fit(&u0, 4).unwrap().pairs();
        u1.expansion = expansion_fit(&u1, 4).unwrap().pairs();
        (u0, u1)
    }

    #[test]
    fn legendre_transform_preserves_sup_distance() {
        let (u0, u1) = b2_pair();
        let d = legendre_sup_check(&u1, &u0, 4.0);
        assert!(d.sup_u > 0.01);
        assert!((d.sup_u - d.sup_v).abs() < 1e-4, "{d:?}");
        let same = legendre_sup_check(&u1, &u1, 4.0);
        assert!(same.sup_u < 1e-12 && same.sup_v < 1e-9, "{same:?}");
    }

    #[test]
    fn second_derivative_ratio_is_bounded() {
        let (u0, u1) = b2_pair();
        let (lo, hi) = c2_ratio_bracket(&u1, &u0);
        assert!(lo > 0.0 && hi.is_finite() && lo <= hi);
        let (lo, hi) = c2_ratio_bracket(&u1, &u1);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }
}
