//! Rank-two restricted root systems with multiplicities, the catalog of
//! indecomposable rank-two symmetric spaces, and the facet reductions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactcore::{
    fmt_rational, int, poly_from_factors, poly_integrate, rat, rational_pow, Rational, UniPoly,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootSystemError {
    #[error("invalid multiplicities {mults:?} for kind {kind}")]
    InvalidMultiplicities { kind: RootKind, mults: Vec<u32> },
    #[error("unknown symmetric space '{0}'")]
    UnknownSpace(String),
    #[error("family {family} needs r >= {min}, got {got}")]
    ParameterTooSmall { family: &'static str, min: u32, got: u32 },
    #[error("facet index must be 1 or 2, got {0}")]
    BadFacetIndex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum RootKind {
    A2,
    B2,
    BC2,
    G2,
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootKind::A2 => "A2",
            RootKind::B2 => "B2",
            RootKind::BC2 => "BC2",
            RootKind::G2 => "G2",
        };
        f.write_str(s)
    }
}

/// Multiplicity parameters as in the figure of rank-two types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplicities {
    /// `m1` on the long (diagonal) roots, `m2` on the short (axis) roots, `m3` on their doubles.
    Bc { m1: u32, m2: u32, m3: u32 },
    /// A single multiplicity shared by all roots (types A2 and G2).
    Uniform { m: u32 },
}

impl Multiplicities {
    pub fn as_vec(&self) -> Vec<u32> {
        match *self {
            Multiplicities::Bc { m1, m2, m3 } => vec![m1, m2, m3],
            Multiplicities::Uniform { m } => vec![m],
        }
    }
}

/// Which of the two base simple roots is listed first.
///
/// The base roots are `α` (multiplicity `m1`, long for B(C)2 and G2) and `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Ordering {
    AlphaFirst,
    BetaFirst,
}

impl Ordering {
    pub fn from_index(i: usize) -> Result<Self, RootSystemError> {
        match i {
            1 => Ok(Ordering::AlphaFirst),
            2 => Ok(Ordering::BetaFirst),
            _ => Err(RootSystemError::BadFacetIndex(i)),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Ordering::AlphaFirst => 1,
            Ordering::BetaFirst => 2,
        }
    }
}

/// Positive root `c1 α1 + c2 α2` with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PositiveRoot {
    pub coords: [i64; 2],
    pub mult: u32,
}

type Mat2 = [[Rational; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedRootSystem {
    pub kind: RootKind,
    pub mults: Multiplicities,
    pub ordering: Ordering,
    /// `gram[i][j] = ⟨α_i, α_j⟩`.
    pub gram: Mat2,
    pub roots: Vec<PositiveRoot>,
    pub n: u32,
    /// Rows are `α1`, `α2` written in an orthonormal basis of 𝔞.
    pub frame: [[f64; 2]; 2],
}

fn sqrt3_2() -> f64 {
    3f64.sqrt() / 2.0
}

/// Build the system with `α1 = α` (ordering `AlphaFirst`) or `α1 = β`.
pub fn build_system(
    kind: RootKind,
    mults: Multiplicities,
    ordering: Ordering,
) -> Result<RestrictedRootSystem, RootSystemError> {
    let invalid = || RootSystemError::InvalidMultiplicities { kind, mults: mults.as_vec() };
    let (gram, roots, frame): (Mat2, Vec<([i64; 2], u32)>, [[f64; 2]; 2]) = match (kind, mults) {
        (RootKind::B2 | RootKind::BC2, Multiplicities::Bc { m1, m2, m3 }) => {
            if m1 == 0 || m2 == 0 || (kind == RootKind::B2) != (m3 == 0) {
                return Err(invalid());
            }
            let roots = vec![
                ([1, 0], m1),
                ([0, 1], m2),
                ([1, 1], m2),
                ([1, 2], m1),
                ([0, 2], m3),
                ([2, 2], m3),
            ];
            (
                [[int(2), int(-1)], [int(-1), int(1)]],
                roots,
                [[-1.0, 1.0], [1.0, 0.0]],
            )
        }
        (RootKind::A2, Multiplicities::Uniform { m }) if m > 0 => (
            [[int(1), rat(-1, 2)], [rat(-1, 2), int(1)]],
            vec![([1, 0], m), ([0, 1], m), ([1, 1], m)],
            [[1.0, 0.0], [-0.5, sqrt3_2()]],
        ),
        (RootKind::G2, Multiplicities::Uniform { m }) if m > 0 => (
            [[int(3), rat(-3, 2)], [rat(-3, 2), int(1)]],
            vec![
                ([1, 0], m),
                ([0, 1], m),
                ([1, 1], m),
                ([1, 2], m),
                ([1, 3], m),
                ([2, 3], m),
            ],
            [[-1.5, sqrt3_2()], [1.0, 0.0]],
        ),
        _ => return Err(invalid()),
    };
    let mut rs = RestrictedRootSystem {
        kind,
        mults,
        ordering: Ordering::AlphaFirst,
        gram,
        roots: roots
            .into_iter()
            .filter(|&(_, m)| m > 0)
            .map(|(coords, mult)| PositiveRoot { coords, mult })
            .collect(),
        n: 0,
        frame,
    };
    rs.n = 2 + rs.roots.iter().map(|r| r.mult).sum::<u32>();
    if ordering == Ordering::BetaFirst {
        rs = rs.swapped();
    }
    Ok(rs)
}

impl RestrictedRootSystem {
    /// Same system with the two simple roots exchanged.
    pub fn swapped(&self) -> Self {
        let g = &self.gram;
        RestrictedRootSystem {
            kind: self.kind,
            mults: self.mults,
            ordering: match self.ordering {
                Ordering::AlphaFirst => Ordering::BetaFirst,
                Ordering::BetaFirst => Ordering::AlphaFirst,
            },
            gram: [[g[1][1].clone(), g[1][0].clone()], [g[0][1].clone(), g[0][0].clone()]],
            roots: self
                .roots
                .iter()
                .map(|r| PositiveRoot { coords: [r.coords[1], r.coords[0]], mult: r.mult })
                .collect(),
            n: self.n,
            frame: [self.frame[1], self.frame[0]],
        }
    }

    /// The system ordered so that the given base root (1 = α, 2 = β) is `α1`.
    pub fn with_first(&self, index: usize) -> Result<Self, RootSystemError> {
        let want = Ordering::from_index(index)?;
        Ok(if want == self.ordering { self.clone() } else { self.swapped() })
    }

    /// Column label in the style "B(C)2 (α1=α)".
    pub fn column_label(&self) -> String {
        let first = match self.ordering {
            Ordering::AlphaFirst => "α",
            Ordering::BetaFirst => "β",
        };
        match self.kind {
            RootKind::A2 => "A2".to_string(),
            RootKind::B2 | RootKind::BC2 => format!("B(C)2 (α1={first})"),
            RootKind::G2 => format!("G2 (α1={first})"),
        }
    }

    /// `⟨x, y⟩` for vectors in simple-root coordinates.
    pub fn inner(&self, x: &[Rational; 2], y: &[Rational; 2]) -> Rational {
        let g = &self.gram;
        let gy0 = &g[0][0] * &y[0] + &g[0][1] * &y[1];
        let gy1 = &g[1][0] * &y[0] + &g[1][1] * &y[1];
        &x[0] * gy0 + &x[1] * gy1
    }

    pub fn gram_f64(&self) -> [[f64; 2]; 2] {
        let g = &self.gram;
        let f = crate::exactcore::to_f64;
        [[f(&g[0][0]), f(&g[0][1])], [f(&g[1][0]), f(&g[1][1])]]
    }

    /// Multiplicity of `c1 α1 + c2 α2` (0 if not a positive root).
    pub fn mult_of(&self, coords: [i64; 2]) -> u32 {
        self.roots
            .iter()
            .find(|r| r.coords == coords)
            .map_or(0, |r| r.mult)
    }

    /// Cartan integers `2⟨α_i, α_j⟩ / ⟨α_i, α_i⟩`.
    pub fn cartan(&self) -> [[i64; 2]; 2] {
        let mut c = [[0i64; 2]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let q = int(2) * &self.gram[i][j] / &self.gram[i][i];
                assert!(q.is_integer(), "Cartan entry must be integral");
                *v = i64::try_from(q.to_integer()).expect("small Cartan entry");
            }
        }
        c
    }

    /// Simple reflection `s_i` acting on root coordinates `(α1(x), α2(x))`.
    pub fn reflection(&self, i: usize) -> [[i64; 2]; 2] {
        let c = self.cartan();
        let mut m = [[1, 0], [0, 1]];
        // α_j(s_i x) = α_j(x) − α_i(x)·⟨α_j, α_i^∨⟩
        for (j, row) in m.iter_mut().enumerate() {
            row[i] -= c[i][j];
        }
        m
    }

    /// All elements of the Weyl group as integer matrices on root coordinates.
    pub fn weyl_group(&self) -> Vec<[[i64; 2]; 2]> {
        let gens = [self.reflection(0), self.reflection(1)];
        let mut elems = vec![[[1, 0], [0, 1]]];
        let mut frontier = elems.clone();
        while let Some(g) = frontier.pop() {
            for s in &gens {
                let h = mat_mul_i(s, &g);
                if !elems.contains(&h) {
                    elems.push(h);
                    frontier.push(h);
                }
            }
        }
        elems
    }

    /// `(⟨α1, γ⟩, ⟨α2, γ⟩)` for `γ = c1 α1 + c2 α2`.
    pub fn dual_coords(&self, coords: [i64; 2]) -> [Rational; 2] {
        let c = [int(coords[0]), int(coords[1])];
        [
            self.inner(&[int(1), int(0)], &c),
            self.inner(&[int(0), int(1)], &c),
        ]
    }
}

fn mat_mul_i(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// One row of the table of indecomposable rank-two symmetric spaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceCatalogEntry {
    pub name: String,
    pub type_label: &'static str,
    pub kind: RootKind,
    pub mults: Multiplicities,
    pub family_parameter: Option<u32>,
}

impl SpaceCatalogEntry {
    pub fn system(&self, ordering: Ordering) -> RestrictedRootSystem {
        build_system(self.kind, self.mults, ordering).expect("catalog entries are valid")
    }
}

struct Family {
    type_label: &'static str,
    min_r: u32,
    name: fn(u32) -> String,
    kind: RootKind,
    mults: fn(u32) -> Multiplicities,
}

const FAMILIES: [Family; 3] = [
    Family {
        type_label: "AIII",
        min_r: 5,
        name: |r| format!("SL{r}/S(GL2xGL{})", r - 2),
        kind: RootKind::BC2,
        mults: |r| Multiplicities::Bc { m1: 2, m2: 2 * r - 8, m3: 1 },
    },
    Family {
        type_label: "CII",
        min_r: 5,
        name: |r| format!("Sp{}/Sp4xSp{}", 2 * r, 2 * r - 4),
        kind: RootKind::BC2,
        mults: |r| Multiplicities::Bc { m1: 4, m2: 4 * r - 16, m3: 3 },
    },
    Family {
        type_label: "BDI",
        min_r: 5,
        name: |r| format!("SO{r}/S(O2xO{})", r - 2),
        kind: RootKind::B2,
        mults: |r| Multiplicities::Bc { m1: 1, m2: r - 4, m3: 0 },
    },
];

struct Sporadic {
    type_label: &'static str,
    name: &'static str,
    kind: RootKind,
    mults: Multiplicities,
}

const SPORADIC: [Sporadic; 10] = [
    Sporadic { type_label: "AI", name: "SL3/SO3", kind: RootKind::A2, mults: Multiplicities::Uniform { m: 1 } },
    Sporadic { type_label: "A2", name: "PGL3xPGL3/PGL3", kind: RootKind::A2, mults: Multiplicities::Uniform { m: 2 } },
    Sporadic { type_label: "AII", name: "SL6/Sp6", kind: RootKind::A2, mults: Multiplicities::Uniform { m: 4 } },
    Sporadic { type_label: "EIV", name: "E6/F4", kind: RootKind::A2, mults: Multiplicities::Uniform { m: 8 } },
    Sporadic { type_label: "DIII", name: "SO10/GL5", kind: RootKind::BC2, mults: Multiplicities::Bc { m1: 4, m2: 4, m3: 1 } },
    Sporadic { type_label: "EIII", name: "E6/SO10xSO2", kind: RootKind::BC2, mults: Multiplicities::Bc { m1: 6, m2: 8, m3: 1 } },
    Sporadic { type_label: "B2", name: "SO5xSO5/SO5", kind: RootKind::B2, mults: Multiplicities::Bc { m1: 2, m2: 2, m3: 0 } },
    Sporadic { type_label: "CII", name: "Sp8/Sp4xSp4", kind: RootKind::B2, mults: Multiplicities::Bc { m1: 3, m2: 4, m3: 0 } },
    Sporadic { type_label: "G", name: "G2/SO4", kind: RootKind::G2, mults: Multiplicities::Uniform { m: 1 } },
    Sporadic { type_label: "G2", name: "G2xG2/G2", kind: RootKind::G2, mults: Multiplicities::Uniform { m: 2 } },
];

/// The 13 table rows, with each infinite family at its smallest parameter.
pub fn catalog() -> Vec<SpaceCatalogEntry> {
    let sporadic = |s: &Sporadic| SpaceCatalogEntry {
        name: s.name.to_string(),
        type_label: s.type_label,
        kind: s.kind,
        mults: s.mults,
        family_parameter: None,
    };
    let mut out: Vec<SpaceCatalogEntry> = SPORADIC[..4].iter().map(sporadic).collect();
    out.push(family_entry(&FAMILIES[0], 5));
    out.push(family_entry(&FAMILIES[1], 5));
    out.extend(SPORADIC[4..6].iter().map(sporadic));
    out.push(family_entry(&FAMILIES[2], 5));
    out.extend(SPORADIC[6..].iter().map(sporadic));
    out
}

fn family_entry(f: &Family, r: u32) -> SpaceCatalogEntry {
    SpaceCatalogEntry {
        name: (f.name)(r),
        type_label: f.type_label,
        kind: f.kind,
        mults: (f.mults)(r),
        family_parameter: Some(r),
    }
}

/// Family member by type label and parameter, e.g. `("AIII", 7)`.
pub fn family_lookup(type_label: &str, r: u32) -> Result<SpaceCatalogEntry, RootSystemError> {
    let f = FAMILIES
        .iter()
        .find(|f| f.type_label.eq_ignore_ascii_case(type_label))
        .ok_or_else(|| RootSystemError::UnknownSpace(format!("{type_label} r={r}")))?;
    if r < f.min_r {
        return Err(RootSystemError::ParameterTooSmall { family: f.type_label, min: f.min_r, got: r });
    }
    Ok(family_entry(f, r))
}

fn normalize_name(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .flat_map(char::to_lowercase)
        .map(|c| if c == '×' { 'x' } else { c })
        .collect()
}

/// Resolve a representative name such as `"SL5/S(GL2xGL3)"` or `"E6/F4"`.
pub fn catalog_lookup(name: &str) -> Result<SpaceCatalogEntry, RootSystemError> {
    let key = normalize_name(name);
    if let Some(s) = SPORADIC.iter().find(|s| normalize_name(s.name) == key) {
        return Ok(SpaceCatalogEntry {
            name: s.name.to_string(),
            type_label: s.type_label,
            kind: s.kind,
            mults: s.mults,
            family_parameter: None,
        });
    }
    for f in &FAMILIES {
        // The parameter is recovered from the first integer in the name and the
        // whole name is then matched against the family's pattern.
        let digits: String = key
            .chars()
            .skip_while(|c| !c.is_ascii_digit())
            .take_while(char::is_ascii_digit)
            .collect();
        let Ok(first) = digits.parse::<u32>() else { continue };
        let r = if f.type_label == "CII" { first / 2 } else { first };
        if r >= 3 && normalize_name(&(f.name)(r)) == key {
            return family_lookup(f.type_label, r);
        }
    }
    Err(RootSystemError::UnknownSpace(name.to_string()))
}

/// Coordinates `(A1, A2)` of `ϖ = ½ Σ m_γ γ` in the simple-root basis.
pub fn varpi(rs: &RestrictedRootSystem) -> [Rational; 2] {
    let mut a = [Rational::zero(), Rational::zero()];
    for r in &rs.roots {
        for (ai, c) in a.iter_mut().zip(r.coords) {
            *ai += int(c * r.mult as i64);
        }
    }
    a.map(|v| v / int(2))
}

/// `∏_{γ∈R⁺} ⟨γ, p⟩^{m_γ}` for `p` in simple-root coordinates.
pub fn dh_value(rs: &RestrictedRootSystem, p: &[Rational; 2]) -> Rational {
    rs.roots.iter().fold(Rational::one(), |acc, r| {
        let g = [int(r.coords[0]), int(r.coords[1])];
        acc * rational_pow(&rs.inner(&g, p), r.mult)
    })
}

/// Move `x` (root coordinates `(α1(x), α2(x))`) into the closed positive chamber.
///
/// Returns the chamber point and the indices of the simple reflections applied
/// to `x`, in order.
pub fn weyl_reduce(rs: &RestrictedRootSystem, x: [f64; 2]) -> ([f64; 2], Vec<usize>) {
    let refl = [rs.reflection(0), rs.reflection(1)];
    let mut y = x;
    let mut word = Vec::new();
    // A generic orbit has at most 12 points; the bound only guards against NaN input.
    for _ in 0..64 {
        let Some(i) = (0..2).find(|&i| y[i] < 0.0) else { break };
        y = apply_int(&refl[i], y);
        word.push(i);
    }
    (y, word)
}

/// Apply simple reflections in the given order.
pub fn apply_word(rs: &RestrictedRootSystem, x: [f64; 2], word: &[usize]) -> [f64; 2] {
    word.iter().fold(x, |y, &i| apply_int(&rs.reflection(i), y))
}

pub fn apply_int(m: &[[i64; 2]; 2], x: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] as f64 * x[0] + m[0][1] as f64 * x[1],
        m[1][0] as f64 * x[0] + m[1][1] as f64 * x[1],
    ]
}

/// One-variable reduction along the facet whose fiber root is `α1` of `rs`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetData {
    /// Index of the fiber root among the base roots (1 = α, 2 = β).
    pub fiber_root: usize,
    pub n: u32,
    pub n1: u32,
    pub n2: u32,
    pub k: u32,
    pub lambda: Rational,
    pub delta: Rational,
    pub p: UniPoly,
    /// `P = y^{n1+n2} ∏ (c0 + c1 y)^m`, listed as `(c0, c1, m)`.
    pub linear_factors: Vec<(Rational, Rational, u32)>,
    /// `χ` in simple-root coordinates.
    pub chi: [Rational; 2],
    pub v: Rational,
    pub bar_dh: Rational,
}

impl FacetData {
    /// `n1 + 2 n2`.
    pub fn threshold(&self) -> Rational {
        int(self.n1 as i64 + 2 * self.n2 as i64)
    }

    /// Segment length, barycenter and threshold in the moment-polytope normalization,
    /// which is half the scale used by the ODE.
    pub fn polytope_view(&self) -> (Rational, Rational, Rational) {
        let half = rat(1, 2);
        (&self.lambda * &half, &self.bar_dh * &half, self.threshold() * half)
    }

    pub fn lambda_f64(&self) -> f64 {
        crate::exactcore::to_f64(&self.lambda)
    }
}

/// Facet data for fiber root `index` (1 = α, 2 = β) of the space underlying `rs`.
pub fn facet(rs: &RestrictedRootSystem, index: usize) -> Result<FacetData, RootSystemError> {
    let sys = rs.with_first(index)?;
    Ok(facet_of_ordered(&sys, index))
}

/// Facet data with fiber `α1` of an already ordered system.
pub fn facet_of_ordered(sys: &RestrictedRootSystem, fiber_root: usize) -> FacetData {
    let n1 = sys.mult_of([1, 0]);
    let n2 = sys.mult_of([2, 0]);
    let k = sys.mult_of([0, 1]) + sys.mult_of([0, 2]);
    let [a1, a2] = varpi(sys);
    let chi = [a1 - rat(n1 as i64 + 2 * n2 as i64, 2), a2];
    let two_chi = [&chi[0] * int(2), &chi[1] * int(2)];
    let alpha1 = [int(1), int(0)];
    let mut factors = vec![(UniPoly::x(), n1 + n2)];
    let mut linear_factors = Vec::new();
    for r in sys.roots.iter().filter(|r| r.coords[1] != 0) {
        let g = [int(r.coords[0]), int(r.coords[1])];
        let c0 = sys.inner(&g, &two_chi) / int(2);
        let c1 = -sys.inner(&g, &alpha1) / int(2);
        factors.push((UniPoly::linear(c0.clone(), c1.clone()), r.mult));
        linear_factors.push((c0, c1, r.mult));
    }
    let p = poly_from_factors(&factors);
    let geo = ansatz_geometry_ordered(sys);
    let lambda = int(sys.n as i64) * &geo.b1;
    let v = poly_integrate(&p, &Rational::zero(), &lambda);
    let moment = poly_integrate(&(&p * &UniPoly::x()), &Rational::zero(), &lambda);
    let bar_dh = moment / &v;
    let delta = (&lambda - int(n1 as i64 + 2 * n2 as i64)) / int(k as i64 + 1);
    FacetData { fiber_root, n: sys.n, n1, n2, k, lambda, delta, p, linear_factors, chi, v, bar_dh }
}

/// Geometric constants of the Tian–Yau type ansatz for one ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzGeometry {
    pub b: Rational,
    pub b1: Rational,
    pub a0: Rational,
    pub a1: Rational,
    pub zeta: Rational,
    pub a1_le_a0: bool,
    pub varpi: [Rational; 2],
    pub n: u32,
}

impl AnsatzGeometry {
    pub fn to_json(&self) -> BTreeMap<&'static str, String> {
        BTreeMap::from([
            ("b", fmt_rational(&self.b)),
            ("b1", fmt_rational(&self.b1)),
            ("a0", fmt_rational(&self.a0)),
            ("a1", fmt_rational(&self.a1)),
            ("zeta", fmt_rational(&self.zeta)),
            ("A1", fmt_rational(&self.varpi[0])),
            ("A2", fmt_rational(&self.varpi[1])),
        ])
    }
}

/// `b`, `b1`, `a0`, `a1`, `ζ` for the ordering with fiber root `index` as `α1`.
pub fn ansatz_constants(rs: &RestrictedRootSystem, index: usize) -> Result<AnsatzGeometry, RootSystemError> {
    Ok(ansatz_geometry_ordered(&rs.with_first(index)?))
}

pub fn ansatz_geometry_ordered(sys: &RestrictedRootSystem) -> AnsatzGeometry {
    let g = &sys.gram;
    let n = int(sys.n as i64);
    let a = varpi(sys);
    let b = int(2) * &a[1] / &n;
    // α̃1 = α1 − (g12/g22) α2 and α̃2 = α2 − (g12/g11) α1, in simple-root coordinates.
    let t1 = [int(1), -(&g[0][1] / &g[1][1])];
    let t2 = [-(&g[0][1] / &g[0][0]), int(1)];
    let a0 = &b * sys.inner(&t2, &t2) / sys.inner(&t1, &t2);
    let b1 = -(&b * sys.inner(&t2, &[int(0), int(1)]) / &g[0][1]);
    let zeta = -(&g[0][1] / &g[1][1]);
    let m_a1 = int(sys.mult_of([1, 0]) as i64);
    let m_2a1 = int(sys.mult_of([2, 0]) as i64);
    let m_a2 = int(sys.mult_of([0, 1]) as i64);
    let m_2a2 = int(sys.mult_of([0, 2]) as i64);
    let a1 = (&n * &b1 - m_a1 - int(2) * m_2a1) / (int(1) + m_a2 + m_2a2);
    let a1_le_a0 = a1 <= a0;
    AnsatzGeometry { b, b1, a0, a1, zeta, a1_le_a0, varpi: a, n: sys.n }
}

/// Sanity predicate used by tests: symmetric positive definite Gram matrix.
pub fn gram_is_spd(rs: &RestrictedRootSystem) -> bool {
    let g = &rs.gram;
    g[0][1] == g[1][0]
        && g[0][0].is_positive()
        && (&g[0][0] * &g[1][1] - &g[0][1] * &g[1][0]).is_positive()
}
