//! Floating-point evaluation of the facet polynomial, its primitive and inverse.
//!
//! Near both endpoints of `[0, λ]` the monomial form of `P` loses every digit, so
//! `P` is evaluated as a product of linear factors and the primitives are stored as
//! `y^p·Q̃(y)` and `z^q·R̃(z)` with `z = λ − y` and `Q̃`, `R̃` in Chebyshev form on
//! half the segment.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactcore::{int, poly_integrate, to_f64, Rational, UniPoly};
use crate::rootsystems::FacetData;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InversionError {
    #[error("mass {0} outside [0, V]")]
    OutOfRange(f64),
    #[error("primitive inversion did not converge for target {0}")]
    NoConvergence(f64),
}

/// Chebyshev series on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    coeffs: Vec<f64>,
    a: f64,
    b: f64,
}

impl Chebyshev {
    /// Exact conversion of `p` restricted to `[a, b]`, rounded once at the end.
    pub fn from_exact(p: &UniPoly, a: &Rational, b: &Rational) -> Self {
        let half = (b - a) / int(2);
        let mid = (a + b) / int(2);
        let s = p.compose_linear(&mid, &half);
        let deg = s.degree().max(0) as usize;
        let mut cheb = vec![Rational::zero(); deg + 1];
        for (n, c) in s.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // s^n = 2^{1−n} Σ_j C(n, j) T_{n−2j}, with the T_0 term halved.
            let scale = if n == 0 {
                Rational::one()
            } else {
                Rational::new(BigInt::one(), BigInt::from(2).pow(n as u32 - 1))
            };
            let mut binom = BigInt::one();
            for j in 0..=n / 2 {
                let mut term = c * &scale * Rational::from_integer(binom.clone());
                if n > 0 && 2 * j == n {
                    term /= int(2);
                }
                cheb[n - 2 * j] += term;
                binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
            }
        }
        Chebyshev { coeffs: cheb.iter().map(to_f64).collect(), a: to_f64(a), b: to_f64(b) }
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let s = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coeffs.first().copied().unwrap_or(0.0)
    }
}

/// A point of `[0, λ]` carried together with its distance to `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub y: f64,
    pub z: f64,
}

/// Stable f64 view of one facet.
#[derive(Debug, Clone)]
pub struct FacetNumerics {
    pub lambda: f64,
    pub v: f64,
    pub n1: u32,
    pub n2: u32,
    pub k: u32,
    p_low: i32,
    y_factors: Vec<(f64, f64, i32)>,
    z_factors: Vec<(f64, f64, i32)>,
    q_low: i32,
    q_tilde: Chebyshev,
    r_low: i32,
    r_tilde: Chebyshev,
    q_half: f64,
}

impl FacetNumerics {
    pub fn new(f: &FacetData) -> Self {
        let lambda = &f.lambda;
        let half = lambda / int(2);
        let q = f.p.antiderivative();
        let q_low = q.low_order();
        let q_tilde = q.shift_down(q_low).expect("nonzero primitive");
        // R(z) = V − Q(λ − z) = ∫_{λ−z}^{λ} P.
        let r = &UniPoly::constant(f.v.clone()) - &q.compose_linear(lambda, &int(-1));
        let r_low = r.low_order();
        let r_tilde = r.shift_down(r_low).expect("nonzero tail primitive");
        let y_factors = f
            .linear_factors
            .iter()
            .map(|(c0, c1, m)| (to_f64(c0), to_f64(c1), *m as i32))
            .collect();
        let z_factors = f
            .linear_factors
            .iter()
            .map(|(c0, c1, m)| (to_f64(&(c0 + c1 * lambda)), -to_f64(c1), *m as i32))
            .collect();
        FacetNumerics {
            lambda: to_f64(lambda),
            v: to_f64(&f.v),
            n1: f.n1,
            n2: f.n2,
            k: f.k,
            p_low: (f.n1 + f.n2) as i32,
            y_factors,
            z_factors,
            q_low: q_low as i32,
            q_tilde: Chebyshev::from_exact(&q_tilde, &int(0), &half),
            r_low: r_low as i32,
            r_tilde: Chebyshev::from_exact(&r_tilde, &int(0), &half),
            q_half: to_f64(&poly_integrate(&f.p, &int(0), &half)),
        }
    }

    pub fn threshold(&self) -> f64 {
        (self.n1 + 2 * self.n2) as f64
    }

    pub fn slope_from_y(&self, y: f64) -> Slope {
        Slope { y, z: self.lambda - y }
    }

    pub fn slope_from_z(&self, z: f64) -> Slope {
        Slope { y: self.lambda - z, z }
    }

    fn p_y(&self, y: f64) -> f64 {
        self.y_factors
            .iter()
            .fold(y.powi(self.p_low), |acc, &(c0, c1, m)| acc * (c0 + c1 * y).powi(m))
    }

    fn p_z(&self, z: f64) -> f64 {
        let y = self.lambda - z;
        self.z_factors
            .iter()
            .fold(y.powi(self.p_low), |acc, &(c0, c1, m)| acc * (c0 + c1 * z).powi(m))
    }

    /// `P` at a slope, using whichever coordinate is accurate there.
    pub fn p(&self, s: Slope) -> f64 {
        if s.y <= 0.5 * self.lambda {
            self.p_y(s.y)
        } else {
            self.p_z(s.z)
        }
    }

    /// `ln P` at a slope; `−∞` at the endpoints, NaN if a factor turns negative.
    pub fn ln_p(&self, s: Slope) -> f64 {
        let (x, factors) = if s.y <= 0.5 * self.lambda { (s.y, &self.y_factors) } else { (s.z, &self.z_factors) };
        let lead = if self.p_low == 0 { 0.0 } else { self.p_low as f64 * s.y.ln() };
        factors.iter().fold(lead, |acc, &(c0, c1, m)| acc + m as f64 * (c0 + c1 * x).ln())
    }

    /// `lim_{y→0} P(y)/y^{n1+n2}`.
    pub fn p_tilde0(&self) -> f64 {
        self.y_factors.iter().map(|&(c0, _, m)| c0.powi(m)).product()
    }

    /// `∫₀^y P` for `y ≤ λ/2`.
    pub fn q_forward(&self, y: f64) -> f64 {
        y.powi(self.q_low) * self.q_tilde.eval(y)
    }

    /// `∫_{λ−z}^λ P` for `z ≤ λ/2`.
    pub fn r_tail(&self, z: f64) -> f64 {
        z.powi(self.r_low) * self.r_tilde.eval(z)
    }

    /// Solve `∫₀^{u′} P = mass` given the forward mass and the complementary tail mass.
    pub fn invert(&self, mass: f64, tail: f64) -> Result<Slope, InversionError> {
        if !(mass >= 0.0 && tail >= 0.0) {
            return Err(InversionError::OutOfRange(mass));
        }
        self.invert_ln(mass.ln(), tail.ln())
    }

    /// As [`FacetNumerics::invert`], with both masses given by their logarithms so
    /// that tails far below the f64 range stay usable.
    pub fn invert_ln(&self, ln_mass: f64, ln_tail: f64) -> Result<Slope, InversionError> {
        if ln_mass.is_nan() || ln_tail.is_nan() {
            return Err(InversionError::OutOfRange(ln_mass));
        }
        if ln_mass == f64::NEG_INFINITY {
            return Ok(self.slope_from_y(0.0));
        }
        if ln_tail == f64::NEG_INFINITY {
            return Ok(self.slope_from_z(0.0));
        }
        let half = 0.5 * self.lambda;
        if ln_mass <= self.q_half.ln() {
            let low = self.q_low as f64;
            let y = log_solve(ln_mass, half, low, |y| {
                let qt = self.q_tilde.eval(y);
                (low * y.ln() + qt.ln(), self.p_y(y) / (y.powi(self.q_low - 1) * qt))
            })?;
            Ok(self.slope_from_y(y))
        } else {
            let low = self.r_low as f64;
            let z = log_solve(ln_tail, half, low, |z| {
                let rt = self.r_tilde.eval(z);
                (low * z.ln() + rt.ln(), self.p_z(z) / (z.powi(self.r_low - 1) * rt))
            })?;
            Ok(self.slope_from_z(z))
        }
    }
}

/// Solve `G(ln x) = target` for `x ∈ (0, upper]`, where `g(x)` returns `G` and
/// `dG/d ln x > 0`, by Newton in `ln x` safeguarded by bisection.
fn log_solve<G: Fn(f64) -> (f64, f64)>(target: f64, upper: f64, low: f64, g: G) -> Result<f64, InversionError> {
    let hi0 = upper.ln();
    let (g_hi, _) = g(upper);
    if target >= g_hi {
        return Ok(upper);
    }
    // Near 0 the map is asymptotically affine in ln x with slope `low`.
    let probe = (upper * 1e-8).ln();
    let (g_probe, _) = g(probe.exp());
    let mut l = (probe + (target - g_probe) / low).min(hi0);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, hi0);
    for _ in 0..200 {
        let (gv, _) = g(l.exp());
        if gv <= target {
            lo = l;
            break;
        }
        hi = l;
        l -= 1.0 + (gv - target) / low;
    }
    if !lo.is_finite() {
        return Err(InversionError::NoConvergence(target));
    }
    let mut l = lo;
    for _ in 0..60 {
        let (gv, dg) = g(l.exp());
        let r = gv - target;
        if r == 0.0 {
            return Ok(l.exp());
        }
        if r < 0.0 {
            lo = l;
        } else {
            hi = l;
        }
        let mut next = l - r / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - l).abs() <= 4.0 * f64::EPSILON * l.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            return Ok(next.exp());
        }
        l = next;
    }
    Err(InversionError::NoConvergence(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcore::rat;
    use crate::rootsystems::{catalog, facet, family_lookup, Ordering};

    #[test]
    fn chebyshev_matches_exact() {
        let p = UniPoly::from_i64(&[3, -2, 0, 5, 1]);
        let c = Chebyshev::from_exact(&p, &rat(1, 3), &rat(7, 2));
        for i in 0..=10 {
            let x = rat(1, 3) + (rat(7, 2) - rat(1, 3)) * rat(i, 10);
            let want = to_f64(&p.eval(&x));
            assert!((c.eval(to_f64(&x)) - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }

    fn facets() -> Vec<FacetData> {
        let mut out = Vec::new();
        for e in catalog() {
            let rs = e.system(Ordering::AlphaFirst);
            out.push(facet(&rs, 1).unwrap());
            out.push(facet(&rs, 2).unwrap());
        }
        let rs = family_lookup("CII", 12).unwrap().system(Ordering::AlphaFirst);
        out.push(facet(&rs, 1).unwrap());
        out
    }

    #[test]
    fn p_q_r_match_exact_values() {
        for f in facets() {
            let num = FacetNumerics::new(&f);
            for i in 1..20 {
                let y = &f.lambda * rat(i, 20);
                let want_p = to_f64(&f.p.eval(&y));
                let s = num.slope_from_y(to_f64(&y));
                let got_p = if i > 10 { num.p(num.slope_from_z(to_f64(&(&f.lambda - &y)))) } else { num.p(s) };
                assert!((got_p - want_p).abs() <= 1e-12 * want_p.abs(), "{got_p} vs {want_p}");
                if i <= 10 {
                    let want_q = to_f64(&poly_integrate(&f.p, &int(0), &y));
                    assert!((num.q_forward(s.y) - want_q).abs() <= 1e-10 * want_q);
                } else {
                    let want_r = to_f64(&poly_integrate(&f.p, &y, &f.lambda));
                    let z = to_f64(&(&f.lambda - &y));
                    assert!((num.r_tail(z) - want_r).abs() <= 1e-10 * want_r);
                }
            }
        }
    }

    #[test]
    fn inversion_round_trip() {
        for f in facets() {
            let num = FacetNumerics::new(&f);
            for &y in &[1e-9, 1e-4, 0.1, 0.3, 0.5] {
                let y = y * num.lambda;
                let m = num.q_forward(y);
                let s = num.invert(m, num.v - m).unwrap();
                assert!((s.y - y).abs() <= 1e-12 * y, "{} vs {}", s.y, y);
            }
            for &z in &[1e-12, 1e-6, 0.01, 0.2, 0.45] {
                let z = z * num.lambda;
                let ln_t = num.r_low as f64 * z.ln() + num.r_tilde.eval(z).ln();
                let s = num.invert_ln((num.v - ln_t.exp()).ln(), ln_t).unwrap();
                assert!((s.z - z).abs() <= 1e-11 * z, "{} vs {}", s.z, z);
            }
        }
    }

    #[test]
    fn ln_p_matches_p() {
        for f in facets() {
            let num = FacetNumerics::new(&f);
            for &y in &[0.01, 0.3, 0.7, 0.999] {
                let s = num.slope_from_y(y * num.lambda);
                assert!((num.ln_p(s) - num.p(s).ln()).abs() < 1e-12 * num.ln_p(s).abs().max(1.0));
            }
            let y = 1e-7;
            assert!((num.p(num.slope_from_y(y)) / y.powi((f.n1 + f.n2) as i32) / num.p_tilde0() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn p_vanishes_to_order_k_at_lambda() {
        for f in facets() {
            let num = FacetNumerics::new(&f);
            let (a, b) = (num.p(num.slope_from_z(1e-6)), num.p(num.slope_from_z(2e-6)));
            let order = (b / a).log2();
            assert!((order - f.k as f64).abs() < 1e-3, "order {order} k {}", f.k);
        }
    }
}
