//! Exact rational arithmetic: dense univariate polynomials over `BigRational`,
//! exact definite integrals and beta values with integer second argument.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("beta function needs a > 0, got {0}")]
    NonPositiveBetaArgument(String),
    #[error("beta function needs a positive integer second argument")]
    ZeroBetaSecondArgument,
}

/// `p/q` as a rational.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as a rational.
pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a ratio of scaled parts when either side overflows.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Serialize as `"p/q"`, or `"p"` when the denominator is one.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod rational_string {
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("not a rational: {s}")))
    }
}

pub fn rational_pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

/// Dense polynomial with exact rational coefficients; `coeffs[i]` multiplies `x^i`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn one() -> Self {
        UniPoly::constant(Rational::one())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        UniPoly::monomial(Rational::one(), 1)
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        UniPoly::new(coeffs)
    }

    /// `a + b x`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        UniPoly::new(vec![a, b])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree, with −1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = UniPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    /// Primitive vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / int(i as i64 + 1)),
        );
        UniPoly::new(coeffs)
    }

    /// `p(a + b x)`.
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> Self {
        let inner = UniPoly::linear(a.clone(), b.clone());
        self.coeffs
            .iter()
            .rev()
            .fold(UniPoly::zero(), |acc, c| &(&acc * &inner) + &UniPoly::constant(c.clone()))
    }

    /// Largest `j` with `x^j` dividing `self` (zero polynomial gives 0).
    pub fn low_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divide by `x^j`; `None` unless `x^j` divides exactly.
    pub fn shift_down(&self, j: usize) -> Option<Self> {
        if self.is_zero() {
            return Some(UniPoly::zero());
        }
        (self.low_order() >= j).then(|| UniPoly::new(self.coeffs[j..].to_vec()))
    }

    /// Multiplicity of `r` as a root (0 if `p(r) ≠ 0`; `usize::MAX` for the zero polynomial).
    pub fn root_multiplicity(&self, r: &Rational) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        self.compose_linear(r, &Rational::one()).low_order()
    }

    /// True when only even powers appear.
    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 0 || c.is_zero())
    }

    pub fn to_f64(&self) -> F64Poly {
        F64Poly {
            coeffs: self.coeffs.iter().map(to_f64).collect(),
        }
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => fmt_rational(c),
                1 => format!("({})*x", fmt_rational(c)),
                _ => format!("({})*x^{}", fmt_rational(c), i),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl<'a> Add<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Floating-point image of a `UniPoly`, for fast evaluation in solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct F64Poly {
    pub coeffs: Vec<f64>,
}

impl F64Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative.
    pub fn eval_d(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }
}

/// Exact `∫_a^b p`.
pub fn poly_integrate(p: &UniPoly, a: &Rational, b: &Rational) -> Rational {
    let prim = p.antiderivative();
    prim.eval(b) - prim.eval(a)
}

/// Exact `B(a, n) = (n−1)! / ∏_{i<n} (a+i)` for rational `a > 0` and integer `n ≥ 1`.
pub fn exact_beta(a: &Rational, n: u32) -> Result<Rational, ExactError> {
    if !a.is_positive() {
        return Err(ExactError::NonPositiveBetaArgument(fmt_rational(a)));
    }
    if n == 0 {
        return Err(ExactError::ZeroBetaSecondArgument);
    }
    let (num, den) = (0..n).fold((Rational::one(), Rational::one()), |(num, den), i| {
        let num = if i == 0 { num } else { num * int(i as i64) };
        (num, den * (a + int(i as i64)))
    });
    Ok(num / den)
}

/// Expanded product `∏ f_i^{m_i}`.
pub fn poly_from_factors(factors: &[(UniPoly, u32)]) -> UniPoly {
    factors
        .iter()
        .fold(UniPoly::one(), |acc, (f, m)| &acc * &f.pow(*m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integrate_basic() {
        let x2 = UniPoly::monomial(int(1), 2);
        assert_eq!(poly_integrate(&x2, &int(0), &int(1)), rat(1, 3));
        assert_eq!(poly_integrate(&UniPoly::one(), &rat(7, 3), &rat(7, 3)), int(0));
    }

    #[test]
    fn integrate_cond_a_example() {
        // (x − 1/2)·x·(9/4 − x²) on [0, 3/2]; oracle expansion by hand:
        // −x⁴ + x³/2 + 9x²/4 − 9x/8.
        let p = poly_from_factors(&[
            (UniPoly::linear(rat(-1, 2), int(1)), 1),
            (UniPoly::x(), 1),
            (UniPoly::new(vec![rat(9, 4), int(0), int(-1)]), 1),
        ]);
        let by_hand = UniPoly::new(vec![int(0), rat(-9, 8), rat(9, 4), rat(1, 2), int(-1)]);
        assert_eq!(p, by_hand);
        assert_eq!(poly_integrate(&p, &int(0), &rat(3, 2)), rat(243, 640));
    }

    #[test]
    fn beta_values() {
        assert_eq!(exact_beta(&int(1), 1).unwrap(), int(1));
        assert_eq!(exact_beta(&rat(3, 2), 3).unwrap(), rat(16, 105));
        assert_eq!(exact_beta(&int(2), 3).unwrap(), rat(1, 12));
        assert!(exact_beta(&int(0), 3).is_err());
        assert!(exact_beta(&rat(-1, 2), 3).is_err());
        assert!(exact_beta(&int(1), 0).is_err());
    }

    #[test]
    fn factor_products() {
        assert_eq!(
            poly_from_factors(&[(UniPoly::x(), 2)]),
            UniPoly::from_i64(&[0, 0, 1])
        );
        assert_eq!(
            poly_from_factors(&[(UniPoly::x(), 1), (UniPoly::from_i64(&[1, -1]), 1)]),
            UniPoly::from_i64(&[0, 1, -1])
        );
        let p = poly_from_factors(&[(UniPoly::x(), 2), (UniPoly::from_i64(&[16, 0, -1]), 2)]);
        assert_eq!(p.degree(), 6);
        assert_eq!(p.leading(), int(1));
        for y in 0..4 {
            let y = int(y);
            let direct = &y * &y * rational_pow(&(int(16) - &y * &y), 2);
            assert_eq!(p.eval(&y), direct);
        }
    }

    #[test]
    fn root_multiplicity_and_shift() {
        let p = poly_from_factors(&[(UniPoly::x(), 3), (UniPoly::from_i64(&[4, -1]), 2)]);
        assert_eq!(p.root_multiplicity(&int(4)), 2);
        assert_eq!(p.root_multiplicity(&int(1)), 0);
        assert_eq!(p.low_order(), 3);
        assert_eq!(p.shift_down(3).unwrap().eval(&int(0)), int(16));
        assert!(p.shift_down(4).is_none());
    }

    #[test]
    fn compose_and_derivative() {
        let p = UniPoly::from_i64(&[1, 2, 3]);
        let q = p.compose_linear(&int(1), &int(-1));
        for v in -3..4 {
            let v = int(v);
            assert_eq!(q.eval(&v), p.eval(&(int(1) - &v)));
        }
        assert_eq!(p.derivative(), UniPoly::from_i64(&[2, 6]));
        assert_eq!(p.antiderivative().derivative(), p);
    }

    #[test]
    fn rational_strings() {
        assert_eq!(fmt_rational(&rat(-171875, 435456)), "-171875/435456");
        assert_eq!(fmt_rational(&rat(6, 3)), "2");
        assert_eq!(parse_rational("-79443359375/6062364").unwrap(), rat(-79443359375, 6062364));
        assert_eq!(parse_rational(" 5 ").unwrap(), int(5));
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn f64_image() {
        let p = UniPoly::from_i64(&[1, -3, 0, 2]).to_f64();
        let (v, d) = p.eval_d(1.5);
        assert!((v - (1.0 - 4.5 + 2.0 * 3.375)).abs() < 1e-14);
        assert!((d - (-3.0 + 6.0 * 2.25)).abs() < 1e-14);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..12).prop_map(|(p, q)| rat(p, q))
    }

    fn small_poly() -> impl Strategy<Value = UniPoly> {
        proptest::collection::vec(small_rational(), 0..7).prop_map(UniPoly::new)
    }

    proptest! {
        #[test]
        fn integral_is_additive(p in small_poly(), a in small_rational(), b in small_rational(), c in small_rational()) {
            prop_assert_eq!(
                poly_integrate(&p, &a, &c),
                poly_integrate(&p, &a, &b) + poly_integrate(&p, &b, &c)
            );
        }

        #[test]
        fn beta_recurrence(p in 1i64..200, q in 1i64..20, n in 1u32..10) {
            let a = rat(p, q);
            let lhs = exact_beta(&(&a + int(1)), n).unwrap();
            let rhs = &a / (&a + int(n as i64)) * exact_beta(&a, n).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn product_evaluates_pointwise(p in small_poly(), q in small_poly(), x in small_rational()) {
            prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
            prop_assert_eq!((&p + &q).eval(&x), p.eval(&x) + q.eval(&x));
        }

        #[test]
        fn trimmed_invariant(p in small_poly()) {
            prop_assert!(p.coeffs().last().map_or(true, |c| !c.is_zero()));
        }
    }
}
