use std::sync::OnceLock;

use num_traits::{Signed, Zero};

use super::*;
use crate::exactcore::{rat, rational_pow};
use crate::rootsystems::{apply_int, build_system, catalog, catalog_lookup, Multiplicities, Ordering, RootKind};

fn built(name: &str, fiber: usize) -> GluedPotential {
    let rs = catalog_lookup(name).unwrap().system(Ordering::AlphaFirst);
    build_glued(&rs, fiber, &AnsatzOptions::default()).unwrap()
}

fn b2() -> &'static GluedPotential {
    static P: OnceLock<GluedPotential> = OnceLock::new();
    P.get_or_init(|| built("SO5xSO5/SO5", 1))
}

fn sl5() -> &'static GluedPotential {
    static P: OnceLock<GluedPotential> = OnceLock::new();
    P.get_or_init(|| built("SL5/S(GL2xGL3)", 2))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Deterministic points in `[lo, hi]²`.
fn scatter(count: usize, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    let mut s = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        lo + (hi - lo) * (s >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..count).map(|_| [next(), next()]).collect()
}

fn every_ordering() -> Vec<(String, RestrictedRootSystem, usize)> {
    catalog()
        .into_iter()
        .flat_map(|e| [1, 2].map(|f| (e.name.clone(), e.system(Ordering::AlphaFirst).with_first(f).unwrap(), f)))
        .collect()
}

#[test]
fn fiber_growth_rate_matches_stenzel_exponent() {
    for (name, sys, _) in every_ordering() {
        let geo = ansatz_geometry_ordered(&sys);
        let k2 = sys.mult_of([0, 1]) + sys.mult_of([0, 2]);
        let lhs = &geo.a1 * &geo.zeta * int(1 + k2 as i64);
        let rhs = int((sys.mult_of([0, 1]) + 2 * sys.mult_of([0, 2])) as i64);
        assert_eq!(lhs, rhs, "{name}");
    }
}

#[test]
fn model_one_exponent_absorbs_the_weight() {
    for (name, sys, fiber) in every_ordering() {
        let geo = ansatz_geometry_ordered(&sys);
        let f = facet_of_ordered(&sys, fiber);
        let vp = varpi(&sys);
        let n = int(sys.n as i64);
        let lhs = [&n * &geo.a0 - int(2) * &vp[0], &n * &geo.a0 * &geo.zeta - int(2) * &vp[1]];
        assert_eq!(lhs, [&f.lambda - f.threshold(), Rational::zero()], "{name}");
    }
}

#[test]
fn tian_yau_and_fiber_constants_match_at_the_first_correction() {
    for (name, sys, fiber) in every_ordering() {
        let geo = ansatz_geometry_ordered(&sys);
        let f = facet_of_ordered(&sys, fiber);
        let k = f.k;
        let mut dp = f.p.clone();
        for _ in 0..k {
            dp = dp.derivative();
        }
        let fact: i64 = (1..=k as i64).product();
        let pk = rational_pow(&int(-1), k) * dp.eval(&f.lambda) / int(fact);
        assert!(pk.is_positive(), "{name}");
        let n = sys.n as f64;
        let ln2 = std::f64::consts::LN_2;
        let lhs = (k + 1) as f64 * n.ln() + (f.n1 + f.n2) as f64 * ln2 + tian_yau_constant(&sys, &geo, 1.0) + to_f64(&pk).ln();
        let rhs = k as f64 * ln2 + (k + 2) as f64 * to_f64(&geo.zeta).ln() + fiber_constant_reduced(&sys, &geo, 1.0);
        assert!((lhs - rhs).abs() < 1e-12, "{name} fiber {fiber}: {lhs} vs {rhs}");
    }
}

#[test]
fn b2_builds_with_the_predicted_leading_exponent() {
    let p = b2();
    let a1 = to_f64(&rat(2, 3));
    assert_eq!(p.constants.a1, rat(2, 3));
    assert!(rel(p.psi.expansion[1].0, a1) < 0.02);
    assert!(p.constants.k2 > 0.0);
    assert!(p.warnings.is_empty());
    let eta_max = to_f64(&p.constants.zeta) * (2.0 / to_f64(&p.constants.b) - 1.0);
    assert!(p.constants.eta > 0.0 && p.constants.eta < eta_max);
}

#[test]
fn both_sl5_facets_build() {
    let other = built("SL5/S(GL2xGL3)", 1);
    assert!(expansion_match(&other).unwrap().max_relative_gap() < 0.02);
    assert!(expansion_match(sl5()).unwrap().max_relative_gap() < 0.02);
}

#[test]
fn g2_facet_without_ke_metric_is_refused() {
    let rs = catalog_lookup("G2/SO4").unwrap().system(Ordering::AlphaFirst);
    match build_glued(&rs, 1, &AnsatzOptions::default()) {
        Err(AnsatzError::KeNonexistence { fiber: 1, .. }) => {}
        other => panic!("expected refusal, got {:?}", other.map(|p| p.constants)),
    }
}

#[test]
fn option_validation() {
    let rs = catalog_lookup("SO5xSO5/SO5").unwrap().system(Ordering::AlphaFirst);
    let bad_eta = AnsatzOptions { eta: Some(5.0), ..Default::default() };
    assert!(matches!(build_glued(&rs, 1, &bad_eta), Err(AnsatzError::BadEta { .. })));
    let k2 = AnsatzOptions { k_trunc: 2, ..Default::default() };
    assert!(matches!(build_glued(&rs, 1, &k2), Err(AnsatzError::UnsupportedTruncation(2))));
}

/// `−Σ m_γ ln(1 − e^{−2γ})` over the roots not proportional to `α1`.
fn model_two_defect(sys: &RestrictedRootSystem, a: [f64; 2]) -> f64 {
    sys.roots
        .iter()
        .filter(|r| r.coords[1] != 0)
        .map(|r| -(r.mult as f64) * (-(-2.0 * (r.coords[0] as f64 * a[0] + r.coords[1] as f64 * a[1])).exp()).ln_1p())
        .sum()
}

#[test]
fn model_two_residual_is_the_root_defect() {
    for p in [b2(), sl5()] {
        for a in [[0.5, 10.0], [1.0, 12.0], [2.0, 14.0], [3.0, 16.0]] {
            assert_eq!(p.region(a), Region::Model2);
            let r = ma_residual(p, a, p.constants.c_ma).unwrap();
            let want = model_two_defect(&p.sys, a);
            assert!((r - want).abs() < 1e-12 + 1e-6 * want, "{a:?}: {r} vs {want}");
        }
    }
}

#[test]
fn deep_model_regions_follow_their_formulas() {
    for p in [b2(), sl5()] {
        let (b, zeta, a0, a1) = (to_f64(&p.constants.b), to_f64(&p.constants.zeta), to_f64(&p.constants.a0), to_f64(&p.constants.a1));
        let n = p.n() as f64;
        let g = p.sys.gram_f64();
        let a = [1.0, 12.0];
        let e = evaluate(p, a);
        assert_eq!(e.region, Region::Model2);
        let psi = (p.psi.interpolate(a[0]).0 - p.constants.c_u) / n;
        let want = (b * (a[1] - g[0][1] / g[0][0] * a[0]) + psi).exp();
        assert!(rel(e.rho, want) < 1e-12);

        let a = [12.0, 1.0];
        let e = evaluate(p, a);
        assert_eq!(e.region, Region::Model1);
        let t = a[0] + zeta * a[1];
        let want = p.constants.k1.exp() * (a0 * t).exp() * (1.0 + (-a1 * t).exp() * p.w.interpolate(a[1]).0);
        assert!(rel(e.rho, want) < 1e-12);
    }
}

#[test]
fn model_two_hessian_has_the_beta_structure() {
    let p = b2();
    let a = [1.0, 12.0];
    let e = evaluate(p, a);
    let n = p.n() as f64;
    let (_, du, ddu) = p.psi.interpolate(a[0]);
    let (b, r) = (to_f64(&p.constants.b), to_f64(&(&p.sys.gram[0][1] / &p.sys.gram[0][0])));
    let db = [du / n - b * r, b];
    let ddb = [[ddu / n, 0.0], [0.0, 0.0]];
    for i in 0..2 {
        assert!(rel(e.grad[i], e.rho * db[i]) < 1e-12);
        for j in 0..2 {
            let want = e.rho * (ddb[i][j] + db[i] * db[j]);
            assert!((e.hess[i][j] - want).abs() < 1e-5 * e.rho * ddb[0][0].abs().max(1.0), "{i}{j}");
        }
    }
}

/// Fourth-order central differences; the step resolves the steep interior blend.
fn fd_gradient(p: &GluedPotential, a: [f64; 2]) -> [f64; 2] {
    std::array::from_fn(|i| {
        let h = 1e-4;
        let at = |k: f64| {
            let mut b = a;
            b[i] += k * h;
            evaluate(p, b).rho
        };
        (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
    })
}

#[test]
fn gradients_agree_with_central_differences() {
    for p in [b2(), sl5()] {
        for a in scatter(50, -12.0, 12.0) {
            let e = evaluate(p, a);
            let fd = fd_gradient(p, a);
            let scale = e.grad[0].abs().max(e.grad[1].abs());
            for i in 0..2 {
                assert!((e.grad[i] - fd[i]).abs() < 1e-6 * scale, "{a:?} {i}: {} vs {}", e.grad[i], fd[i]);
            }
        }
    }
}

#[test]
fn weyl_invariance() {
    for p in [b2(), sl5()] {
        let ws = p.sys.weyl_group();
        for a in scatter(20, 0.0, 14.0) {
            let base = evaluate(p, a).rho;
            for w in &ws {
                assert!(rel(evaluate(p, apply_int(w, a)).rho, base) < 1e-10);
            }
        }
    }
}

#[test]
fn gluing_is_c2_across_the_band_edges() {
    for p in [b2(), sl5()] {
        let eta = p.constants.eta;
        for q in [9.0, 12.0, 15.0] {
            for edge in [0.0, 1.0] {
                let h = 1e-11;
                let (jl, rl) = p.glued_jet([edge + eta * q - h, q]);
                let (jr, rr) = p.glued_jet([edge + eta * q + h, q]);
                assert_ne!(rl, rr);
                let ((gl, hl), (gr, hr)) = (jl.root_coords(), jr.root_coords());
                assert!((jl.ln_rho - jr.ln_rho).abs() < 1e-9);
                for i in 0..2 {
                    assert!((gl[i] - gr[i]).abs() < 1e-9, "edge {edge} q {q}");
                    for j in 0..2 {
                        assert!((hl[i][j] - hr[i][j]).abs() < 1e-9, "edge {edge} q {q}: {hl:?} {hr:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn shifting_psi_shifts_the_residual_by_n_c() {
    let p = b2();
    let c = 0.1;
    let shifted = p.with_psi_shift(c);
    for a in [[1.0, 10.0], [2.0, 14.0]] {
        let r0 = ma_residual(p, a, 1.0).unwrap();
        let r1 = ma_residual(&shifted, a, 1.0).unwrap();
        assert!((r1 - r0 - p.n() as f64 * c).abs() < 1e-10);
        assert!(rel(evaluate(&shifted, a).rho, c.exp() * evaluate(p, a).rho) < 1e-12);
    }
}

fn bc2(m2: u32) -> RestrictedRootSystem {
    build_system(RootKind::BC2, Multiplicities::Bc { m1: 2, m2, m3: 1 }, Ordering::AlphaFirst).unwrap()
}

#[test]
fn cosh_sum_solves_the_equation_with_unit_constant() {
    for m2 in [2, 4] {
        let bg = bg_cosh(bc2(m2));
        for x in [[1.0, 2.0], [0.7, 3.1], [4.0, 0.6]] {
            let a = bg.root_coords(x);
            let r = ma_residual(&bg, a, 1.0).unwrap();
            assert!(r.abs() < 1e-12, "{x:?}: {r}");
            let quarter = ma_residual(&bg, a, 0.25).unwrap();
            assert!((quarter - 4f64.ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn cosh_sum_hessian_is_diagonal() {
    let bg = bg_cosh(bc2(2));
    for x in [[1.0, 2.0], [3.0, 0.5], [-0.4, 2.2]] {
        let (y, _) = crate::rootsystems::weyl_reduce(bg.system(), bg.root_coords(x));
        let x = bg.point(y);
        let s = metric_sample(&bg, y).unwrap();
        assert!(rel(s.hessian[0][0], x[0].cosh()) < 1e-12);
        assert!(rel(s.hessian[1][1], x[1].cosh()) < 1e-12);
        assert!(s.hessian[0][1].abs() < 1e-12 * x[0].cosh());
        assert!(s.min_eig > 0.0);
    }
}

#[test]
fn model_two_weights_are_positive_and_conical() {
    let p = b2();
    for q in [10.0, 12.0] {
        let s0 = metric_sample(p, [2.0, q]).unwrap();
        let s1 = metric_sample(p, [2.0, q + 2.0]).unwrap();
        assert!(s0.weights.iter().all(|(_, w)| *w > 0.0));
        assert!((s0.r - 2.0 * (0.5 * s0.beta).exp()).abs() < 1e-12 * s0.r);
        let (e0, e1) = (s0.beta.exp(), s1.beta.exp());
        for i in 0..2 {
            for j in 0..2 {
                if s0.hessian[i][j].abs() > 1e-12 * e0 {
                    assert!((s1.hessian[i][j] / e1 / (s0.hessian[i][j] / e0) - 1.0).abs() < 0.05);
                }
            }
        }
    }
}

#[test]
fn residual_decays_along_both_rays() {
    for p in [b2(), sl5()] {
        let m = residual_map(p, Window { lo: 4.0, hi: 16.0, n: 7 });
        let [f2, f1] = [&m.fits[0], &m.fits[1]];
        assert_eq!((f2.axis, f1.axis), ("alpha2", "alpha1"));
        assert!(f2.slope <= -2.0 + 0.1, "{f2:?}");
        assert!(f1.slope <= -to_f64(&p.constants.a1) + 0.1, "{f1:?}");
        assert!(m.samples.iter().all(|s| s.min_eig > 0.0 && s.residual.is_finite()));
    }
}

#[test]
fn regions_tile_by_the_band_coordinate() {
    let p = sl5();
    for a in scatter(200, 0.0, 16.0) {
        let tau = a[0] - p.constants.eta * a[1];
        let r = p.region(a);
        match r {
            Region::Model2 => assert!(tau <= 0.0),
            Region::Model1 => assert!(tau >= 1.0),
            Region::GlueBand => assert!(tau > 0.0 && tau < 1.0),
            Region::Interior | Region::Blend => assert!(a[0].max(a[1]) < 10.0),
        }
    }
}

#[test]
fn psi_and_w_tails_agree() {
    for p in [b2(), sl5()] {
        assert!(expansion_match(p).unwrap().max_relative_gap() < 0.02);
    }
}

#[test]
fn bundle_round_trip() {
    let p = sl5();
    let dir = tempfile::tempdir().unwrap();
    save_bundle(p, dir.path(), Some("SL5/S(GL2xGL3)".into())).unwrap();
    let (q, meta) = load_bundle(dir.path()).unwrap();
    assert_eq!(meta.space.as_deref(), Some("SL5/S(GL2xGL3)"));
    assert_eq!(q.constants, p.constants);
    assert_eq!(q.sys, p.sys);
    for a in scatter(20, 0.0, 14.0) {
        assert_eq!(evaluate(&q, a), evaluate(p, a));
    }
}

#[test]
fn samples_csv_has_the_documented_header() {
    let m = residual_map(sl5(), Window { lo: 4.0, hi: 8.0, n: 3 });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    write_samples_csv(&m.samples, &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("a1,a2,rho,beta,residual,min_eig,region\n"));
    assert_eq!(text.lines().count(), 10);
}



