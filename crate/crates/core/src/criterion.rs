//! Exact Kähler–Einstein existence criteria for rank-two facets.
//!
//! Every type-specific criterion is computed twice: through closed beta-function
//! forms where they exist, and through direct polynomial moment integrals. The
//! generic barycenter margin of the facet ODE is a third, independent route.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactcore::{
    exact_beta, fmt_rational, int, poly_from_factors, poly_integrate, rat, ExactError, Rational,
    UniPoly,
};
use crate::rootsystems::{facet, FacetData, Multiplicities, RestrictedRootSystem, RootKind, RootSystemError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CriterionError {
    #[error("multiplicity m1 must be at least 1")]
    ZeroM1,
    #[error("parameter m must be at least {min}, got {got}")]
    ParameterTooSmall { min: u32, got: u32 },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
}

/// `barDH − (n1 + 2 n2)`; positive exactly when the facet carries a KE metric.
pub fn barycenter_margin(f: &FacetData) -> Rational {
    &f.bar_dh - f.threshold()
}

/// Left minus right side of the two beta-function inequalities of type B(C)2.
///
/// The first concerns the segment along `β` (fiber root `β`), the second the
/// segment along `α`.
pub fn beta_condition_margins(m1: u32, m2: u32, m3: u32) -> Result<(Rational, Rational), CriterionError> {
    if m1 == 0 {
        return Err(CriterionError::ZeroM1);
    }
    let (m1r, m2r, m3r) = (int(m1 as i64), int(m2 as i64), int(m3 as i64));
    let s = m2 + m3;
    let first = exact_beta(&(rat(s as i64, 2) + int(1)), m1 + 1)?
        - (&m2r + int(2) * &m3r) / (int(2) * &m1r + &m2r + int(2) * &m3r)
            * exact_beta(&rat(s as i64 + 1, 2), m1 + 1)?;
    let second = exact_beta(&(rat(m1 as i64, 2) + int(1)), s + 1)?
        - &m1r / (&m1r + &m2r + int(2) * &m3r) * exact_beta(&rat(m1 as i64 + 1, 2), s + 1)?;
    Ok((first, second))
}

/// The same two conditions as weighted moment integrals over the polytope segments.
pub fn beta_condition_integrals(m1: u32, m2: u32, m3: u32) -> (Rational, Rational) {
    let s = m2 + m3;
    // Segment along β: x ∈ [0, X], density x^{m2+m3}(X² − x²)^{m1}, barycenter m2/2 + m3.
    let big_x = int(m1 as i64) + rat(m2 as i64, 2) + int(m3 as i64);
    let first_p = poly_from_factors(&[
        (UniPoly::linear(-(rat(m2 as i64, 2) + int(m3 as i64)), int(1)), 1),
        (UniPoly::x(), s),
        (UniPoly::new(vec![&big_x * &big_x, int(0), int(-1)]), m1),
    ]);
    let first = poly_integrate(&first_p, &int(0), &big_x);
    // Segment along α: w ∈ [0, W], density w^{m1}(T² − 4w²)^{m2+m3}, barycenter m1/2.
    let big_w = rat(m1 as i64, 2) + rat(m2 as i64, 2) + int(m3 as i64);
    let t = int(m1 as i64 + m2 as i64 + 2 * m3 as i64);
    let second_p = poly_from_factors(&[
        (UniPoly::linear(-rat(m1 as i64, 2), int(1)), 1),
        (UniPoly::x(), m1),
        (UniPoly::new(vec![&t * &t, int(0), int(-4)]), s),
    ]);
    let second = poly_integrate(&second_p, &int(0), &big_w);
    (first, second)
}

/// `∫₀^{3m/2} (x − m/2) x^m ((3m/2)² − x²)^m dx`.
pub fn cond_a_margin(m: u32) -> Result<Rational, CriterionError> {
    if m == 0 {
        return Err(CriterionError::ParameterTooSmall { min: 1, got: 0 });
    }
    let mr = int(m as i64);
    let top = rat(3 * m as i64, 2);
    let p = poly_from_factors(&[
        (UniPoly::linear(-(&mr / int(2)), int(1)), 1),
        (UniPoly::x(), m),
        (UniPoly::new(vec![&top * &top, int(0), int(-1)]), m),
    ]);
    Ok(poly_integrate(&p, &int(0), &top))
}

/// The two G2 moment integrals, and whether `m` is a multiplicity that occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G2Margins {
    /// Segment along the short root `β`.
    pub first: Rational,
    /// Segment along the long root `α`.
    pub second: Rational,
    pub covered: bool,
}

pub fn cond_g2_margins(m: u32) -> Result<G2Margins, CriterionError> {
    if m == 0 {
        return Err(CriterionError::ParameterTooSmall { min: 1, got: 0 });
    }
    let mr = int(m as i64);
    let half_m = &mr / int(2);
    let sq = |c: Rational, a: Rational| UniPoly::new(vec![&c * &c, int(0), -(&a * &a)]);
    let first_p = poly_from_factors(&[
        (UniPoly::linear(-half_m.clone(), int(1)), 1),
        (UniPoly::x(), m),
        (sq(rat(9 * m as i64, 2), int(1)), m),
        (sq(rat(3 * m as i64, 2), int(1)), m),
    ]);
    let first = poly_integrate(&first_p, &int(0), &rat(3 * m as i64, 2));
    let second_p = poly_from_factors(&[
        (UniPoly::linear(-half_m, int(1)), 1),
        (UniPoly::x(), m),
        (sq(rat(5 * m as i64, 2), int(1)), m),
        (sq(rat(5 * m as i64, 2), int(3)), m),
    ]);
    let second = poly_integrate(&second_p, &int(0), &rat(5 * m as i64, 6));
    Ok(G2Margins { first, second, covered: m == 1 || m == 2 })
}

/// Quotient of the two sides of the second beta condition at `(4, 4m − 16, 3)`.
pub fn condition_quotient_cii(m: u32) -> Result<Rational, CriterionError> {
    if m < 4 {
        return Err(CriterionError::ParameterTooSmall { min: 4, got: m });
    }
    let (m1, m2, m3) = (4u32, 4 * m - 16, 3u32);
    let s = m2 + m3;
    let lhs = exact_beta(&(rat(m1 as i64, 2) + int(1)), s + 1)?;
    let rhs = int(m1 as i64) / int((m1 + m2 + 2 * m3) as i64) * exact_beta(&rat(m1 as i64 + 1, 2), s + 1)?;
    Ok(lhs / rhs)
}

/// Verdict for one facet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeVerdict {
    pub ke_exists: bool,
    pub margin: Rational,
    /// Sign of the type-specific criterion, when one applies to this facet.
    pub type_specific: Option<Rational>,
    pub method_agreement: bool,
}

#[derive(Serialize)]
pub struct KeVerdictJson {
    pub margin: String,
    pub ke_exists: bool,
    pub method_agreement: bool,
}

impl KeVerdict {
    pub fn to_json(&self) -> KeVerdictJson {
        KeVerdictJson {
            margin: fmt_rational(&self.margin),
            ke_exists: self.ke_exists,
            method_agreement: self.method_agreement,
        }
    }
}

/// Existence verdict for the facet with fiber root `index` (1 = α, 2 = β).
pub fn ke_exists(rs: &RestrictedRootSystem, index: usize) -> Result<KeVerdict, CriterionError> {
    let f = facet(rs, index)?;
    let margin = barycenter_margin(&f);
    let type_specific = type_specific_margin(rs, index)?;
    let method_agreement = type_specific
        .as_ref()
        .is_none_or(|t| t.signum() == margin.signum());
    Ok(KeVerdict { ke_exists: margin.is_positive(), margin, type_specific, method_agreement })
}

fn type_specific_margin(rs: &RestrictedRootSystem, index: usize) -> Result<Option<Rational>, CriterionError> {
    Ok(match (rs.kind, rs.mults) {
        (RootKind::B2 | RootKind::BC2, Multiplicities::Bc { m1, m2, m3 }) => {
            let (beta_first, beta_second) = beta_condition_margins(m1, m2, m3)?;
            let (int_first, int_second) = beta_condition_integrals(m1, m2, m3);
            let (b, i) = if index == 1 { (beta_second, int_second) } else { (beta_first, int_first) };
            // The two normalizations differ by positive factors only.
            Some(if b.signum() == i.signum() { b } else { Rational::zero() })
        }
        (RootKind::A2, Multiplicities::Uniform { m }) => Some(cond_a_margin(m)?),
        (RootKind::G2, Multiplicities::Uniform { m }) => {
            let g = cond_g2_margins(m)?;
            Some(if index == 1 { g.second } else { g.first })
        }
        _ => None,
    })
}
