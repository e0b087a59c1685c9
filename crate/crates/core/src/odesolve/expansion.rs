//! Tail expansion `u − λx = K₀₀ + Σ K_e e^{−e x}` with `e ∈ {jδ + 2k}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::{Equation, ODESolution};
use crate::exactcore::{int, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpansionError {
    #[error("expansions are defined for facet solutions only")]
    NotFacet,
    #[error("tail too short: x_max·δ = {0} < 18")]
    TailTooShort(f64),
    #[error("too few positive gap samples in the fitting window")]
    EmptyWindow,
    #[error("least-squares solve failed")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub exponent: f64,
    pub exact: Rational,
    pub coefficient: f64,
    /// Every `(j, k)` with `jδ + 2k` equal to this exponent.
    pub labels: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub k00: f64,
    /// Fitted terms in increasing exponent order.
    pub terms: Vec<ExpansionTerm>,
    /// Decay rate of `λ − u′` from a log-linear regression on the window.
    pub leading_exponent: f64,
    /// Exponents shared by several `(j, k)`, whether or not they were resolvable.
    pub merged: Vec<(Rational, Vec<(u32, u32)>)>,
}

impl Expansion {
    /// `(exponent, coefficient)` pairs with `(0, K₀₀)` first.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        std::iter::once((0.0, self.k00)).chain(self.terms.iter().map(|t| (t.exponent, t.coefficient))).collect()
    }

    pub fn term(&self, exact: &Rational) -> Option<&ExpansionTerm> {
        self.terms.iter().find(|t| &t.exact == exact)
    }

    /// `Σ K_e e^{−e x}` and its derivative.
    pub fn eval_tail(&self, x: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(v, d), t| {
            let e = t.coefficient * (-t.exponent * x).exp();
            (v + e, d - t.exponent * e)
        })
    }
}

/// Fit the expansion of a facet solution on `[x_max/2, x_max]`.
pub fn expansion_fit(sol: &ODESolution, j_max: u32) -> Result<Expansion, ExpansionError> {
    let Equation::Facet { lambda, delta, .. } = &sol.equation else {
        return Err(ExpansionError::NotFacet);
    };
    expansion_fit_samples(&sol.grid, &sol.u, &sol.gap, to_f64(lambda), delta, j_max)
}

/// Fit from samples of `u` and of the gap `λ − u′`.
///
/// The coefficients come from weighted least squares on the gap, which avoids the
/// cancellation in `u − λx`; `K₀₀` is the window mean of the remainder. Terms that
/// have decayed below roundoff relative to the leading one are left out.
pub fn expansion_fit_samples(
    x: &[f64],
    u: &[f64],
    gap: &[f64],
    lambda: f64,
    delta: &Rational,
    j_max: u32,
) -> Result<Expansion, ExpansionError> {
    let x_max = *x.last().ok_or(ExpansionError::EmptyWindow)?;
    let d = to_f64(delta);
    if x_max * d < 18.0 - 1e-9 {
        return Err(ExpansionError::TailTooShort(x_max * d));
    }
    let rows: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= 0.5 * x_max && gap[i] > 0.0).collect();
    if rows.len() < 8 {
        return Err(ExpansionError::EmptyWindow);
    }
    let x_lo = x[rows[0]];
    let mut exps: BTreeMap<Rational, Vec<(u32, u32)>> = BTreeMap::new();
    let top = delta * int(j_max.max(1) as i64);
    for j in 0..=j_max {
        let mut k = 0u32;
        loop {
            let e = delta * int(j as i64) + int(2 * k as i64);
            if e > top {
                break;
            }
            if (j, k) != (0, 0) && &e >= delta {
                exps.entry(e).or_default().push((j, k));
            }
            k += 1;
        }
    }
    let merged = exps.iter().filter(|(_, l)| l.len() > 1).map(|(e, l)| (e.clone(), l.clone())).collect();
    let basis: Vec<(Rational, Vec<(u32, u32)>)> =
        exps.into_iter().filter(|(e, _)| (-(to_f64(e) - d) * x_lo).exp() > 1e-12).collect();

    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &i in &rows {
        let l = gap[i].ln();
        sx += x[i];
        sy += l;
        sxx += x[i] * x[i];
        sxy += x[i] * l;
    }
    let nr = rows.len() as f64;
    let leading_exponent = -(nr * sxy - sx * sy) / (nr * sxx - sx * sx);

    let mut a = DMatrix::zeros(rows.len(), basis.len());
    let b = DVector::from_element(rows.len(), 1.0);
    for (r, &i) in rows.iter().enumerate() {
        for (c, (e, _)) in basis.iter().enumerate() {
            let e = to_f64(e);
            a[(r, c)] = e * (-e * x[i]).exp() / gap[i];
        }
    }
    let norms: Vec<f64> = (0..basis.len()).map(|c| a.column(c).norm()).collect();
    for (c, nrm) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / nrm);
    }
    let svd = a.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let sol = svd.solve(&b, eps).map_err(|_| ExpansionError::Degenerate)?;
    let terms: Vec<ExpansionTerm> = basis
        .into_iter()
        .enumerate()
        .map(|(c, (exact, labels))| ExpansionTerm {
            exponent: to_f64(&exact),
            exact,
            coefficient: sol[c] / norms[c],
            labels,
        })
        .collect();
    let mut exp = Expansion { k00: 0.0, terms, leading_exponent, merged };
    let k00 = rows.iter().map(|&i| u[i] - lambda * x[i] - exp.eval_tail(x[i]).0).sum::<f64>() / nr;
    exp.k00 = k00;
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcore::rat;
    use crate::odesolve::{continuity_solve, ContinuationOutcome, GridSpec, SolveOptions};
    use crate::rootsystems::{build_system, facet, Multiplicities, Ordering, RootKind};

    #[test]
    fn recovers_synthetic_model() {
        let delta = rat(2, 3);
        let (lambda, d) = (4.0, 2.0 / 3.0);
        let x: Vec<f64> = GridSpec::default().build(30.0).unwrap();
        let u: Vec<f64> = x.iter().map(|&x| lambda * x + 1.0 + 0.3 * (-d * x).exp()).collect();
        let gap: Vec<f64> = x.iter().map(|&x| 0.3 * d * (-d * x).exp()).collect();
        let e = expansion_fit_samples(&x, &u, &gap, lambda, &delta, 4).unwrap();
        assert!((e.k00 - 1.0).abs() < 1e-6);
        assert!((e.term(&delta).unwrap().coefficient - 0.3).abs() < 1e-6);
        assert!((e.leading_exponent - d).abs() < 1e-9);
        assert_eq!(e.pairs()[0], (0.0, e.k00));
    }

    #[test]
    fn reports_merged_exponents() {
        let delta = rat(1, 2);
        let x: Vec<f64> = GridSpec::default().build(40.0).unwrap();
        let u: Vec<f64> = x.iter().map(|&x| 3.0 * x + (-0.5 * x).exp()).collect();
        let gap: Vec<f64> = x.iter().map(|&x| 0.5 * (-0.5 * x).exp()).collect();
        let e = expansion_fit_samples(&x, &u, &gap, 3.0, &delta, 8).unwrap();
        let two = e.merged.iter().find(|(x, _)| x == &int(2)).unwrap();
        assert_eq!(two.1, vec![(0, 1), (4, 0)]);
        assert!(e.merged.iter().all(|(_, l)| l.len() >= 2));
    }

    #[test]
    fn short_tail_is_rejected() {
        let x: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let g = vec![1.0; x.len()];
        assert!(matches!(expansion_fit_samples(&x, &g, &g, 1.0, &rat(1, 1), 3), Err(ExpansionError::TailTooShort(_))));
    }

    #[test]
    fn b2_leading_exponent_is_delta() {
        let rs = build_system(RootKind::B2, Multiplicities::Bc { m1: 2, m2: 2, m3: 0 }, Ordering::AlphaFirst).unwrap();
        let f = facet(&rs, 1).unwrap();
        let ContinuationOutcome::Converged(sol) = continuity_solve(&f, 1.0, &SolveOptions::default()).unwrap() else {
            panic!()
        };
        let e = expansion_fit(&sol, 4).unwrap();
        assert!((e.leading_exponent / (2.0 / 3.0) - 1.0).abs() < 0.01, "{}", e.leading_exponent);
        // u′ − λ = −Σ e K_e e^{−ex} approaches 0 from below.
        assert!(e.term(&rat(2, 3)).unwrap().coefficient > 0.0);
    }
}
