//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use thiserror::Error;

use crate::ansatz::{
    build_glued, expansion_match, load_bundle, residual_map, save_bundle, write_samples_csv, AnsatzError,
    AnsatzOptions, BundleError, Window,
};
use crate::criterion::{ke_exists, CriterionError};
use crate::exactcore::fmt_rational;
use crate::odesolve::{
    continuity_solve, expansion_fit, integral_identities, read_solution, stenzel_solve, write_solution,
    ContinuationOutcome, ExpansionError, GridSpec, SolutionIoError, SolveError, SolveOptions, StallReport,
};
use crate::rootsystems::{
    ansatz_constants, catalog, catalog_lookup, facet, Ordering, RestrictedRootSystem, RootSystemError,
};

#[derive(Parser, Debug)]
#[command(name = "rank2ke", version, about = "Kähler–Einstein criteria and Ricci-flat ansatz for rank-two symmetric spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct SpaceArgs {
    /// Representative name, e.g. "SL5/S(GL2xGL3)".
    #[arg(long)]
    space: String,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Grid spacing away from the origin.
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Right end of the grid; defaults to 20/δ for facets and 15 for Stenzel.
    #[arg(long)]
    xmax: Option<f64>,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec { h: self.h, x_max: self.xmax }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometric constants of one or both orderings.
    Constants {
        #[command(flatten)]
        space: SpaceArgs,
        /// Fiber root of the facet: 1 = α, 2 = β.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        facet: Option<u8>,
    },
    /// Exact existence margins and verdicts.
    Criteria {
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        space: Option<String>,
        /// Fiber root of the facet: 1 = α, 2 = β.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), requires = "space")]
        facet: Option<u8>,
        /// Every catalog space and both facets.
        #[arg(long)]
        all: bool,
    },
    /// Continuity-method solve of one facet equation.
    SolveFacet {
        #[command(flatten)]
        space: SpaceArgs,
        /// Fiber root of the facet: 1 = α, 2 = β.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        facet: u8,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Output directory for `facet<F>.csv` and its JSON sidecar.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Stenzel potential `ρ″(ρ′)^{m1+m2} = C sinh^{m1}(x) sinh^{m2}(2x)`.
    Stenzel {
        #[arg(long)]
        m1: u32,
        #[arg(long)]
        m2: u32,
        /// Right-hand side constant.
        #[arg(long = "C")]
        c: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// CSV path; the sidecar goes next to it with extension `.json`.
        #[arg(long, default_value = "stenzel.csv")]
        out: PathBuf,
    },
    /// Build the glued potential and write a bundle.
    Ansatz {
        #[command(flatten)]
        space: SpaceArgs,
        /// Fiber root of the facet: 1 = α, 2 = β.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        facet: u8,
        /// Slope of the band coordinate `τ = p − ηq`, in `(0, ζ(2/b − 1))`; defaults to the midpoint.
        #[arg(long)]
        eta: Option<f64>,
        /// Truncation order of the fiber correction.
        #[arg(long = "k", default_value_t = 1)]
        k: u32,
        /// Interior level `M`.
        #[arg(long)]
        m: Option<f64>,
        /// Bundle directory.
        #[arg(long, default_value = "bundle")]
        out: PathBuf,
    },
    /// Residuals of a saved potential over a square window.
    ResidualMap {
        /// Bundle directory written by `ansatz`.
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        window: Vec<f64>,
        /// Samples per axis.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Output directory; defaults to the bundle directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the exponential expansion of a facet solution.
    Expansion {
        /// Solution CSV; the sidecar is the same path with extension `.json`.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 4)]
        jmax: u32,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Refused(String),
    #[error("solver stalled at t = {}", .0.t_reached)]
    Stalled(Box<StallReport>),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    SolutionIo(#[from] SolutionIoError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Ansatz(AnsatzError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<RootSystemError> for CliError {
    fn from(e: RootSystemError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnsatzError> for CliError {
    fn from(e: AnsatzError) -> Self {
        match e {
            AnsatzError::KeNonexistence { .. } => CliError::Refused(e.to_string()),
            AnsatzError::Stalled(r) => CliError::Stalled(r),
            AnsatzError::BadEta { .. } | AnsatzError::UnsupportedTruncation(_) => CliError::Usage(e.to_string()),
            other => CliError::Ansatz(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Refused(_) => 3,
            CliError::Stalled(_) => 4,
            _ => 1,
        }
    }
}

/// Pretty JSON whose floats carry seventeen significant digits.
struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize with seventeen significant digits per float.
pub fn to_json_string<T: Serialize>(v: &T) -> Result<String, serde_json::Error> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits(PrettyFormatter::new()));
    v.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn write_json_file<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json_string(v)? + "\n")?;
    Ok(())
}

fn system_of(name: &str) -> Result<(String, RestrictedRootSystem), CliError> {
    let e = catalog_lookup(name)?;
    Ok((e.name.clone(), e.system(Ordering::AlphaFirst)))
}

fn facets(requested: Option<u8>) -> Vec<usize> {
    requested.map_or(vec![1, 2], |f| vec![f as usize])
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsRow {
    pub space: String,
    pub facet: usize,
    pub column: String,
    pub b: String,
    pub b1: String,
    pub a0: String,
    pub a1: String,
    pub zeta: String,
    #[serde(rename = "A1")]
    pub big_a1: String,
    #[serde(rename = "A2")]
    pub big_a2: String,
    pub ke: bool,
    pub a1_le_a0: bool,
}

pub fn constants_row(space: &str, rs: &RestrictedRootSystem, facet_index: usize) -> Result<ConstantsRow, CliError> {
    let geo = ansatz_constants(rs, facet_index)?;
    Ok(ConstantsRow {
        space: space.to_string(),
        facet: facet_index,
        column: rs.with_first(facet_index)?.column_label(),
        b: fmt_rational(&geo.b),
        b1: fmt_rational(&geo.b1),
        a0: fmt_rational(&geo.a0),
        a1: fmt_rational(&geo.a1),
        zeta: fmt_rational(&geo.zeta),
        big_a1: fmt_rational(&geo.varpi[0]),
        big_a2: fmt_rational(&geo.varpi[1]),
        ke: ke_exists(rs, facet_index)?.ke_exists,
        a1_le_a0: geo.a1_le_a0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CriteriaRow {
    pub space: String,
    pub type_label: String,
    pub facet: usize,
    pub column: String,
    pub lambda: String,
    pub bar_dh: String,
    pub threshold: String,
    pub margin: String,
    pub type_specific_margin: Option<String>,
    pub ke_exists: bool,
    pub method_agreement: bool,
    pub a1_le_a0: bool,
}

pub fn criteria_row(space: &str, type_label: &str, rs: &RestrictedRootSystem, index: usize) -> Result<CriteriaRow, CliError> {
    let f = facet(rs, index)?;
    let v = ke_exists(rs, index)?;
    Ok(CriteriaRow {
        space: space.to_string(),
        type_label: type_label.to_string(),
        facet: index,
        column: rs.with_first(index)?.column_label(),
        lambda: fmt_rational(&f.lambda),
        bar_dh: fmt_rational(&f.bar_dh),
        threshold: fmt_rational(&f.threshold()),
        margin: fmt_rational(&v.margin),
        type_specific_margin: v.type_specific.as_ref().map(fmt_rational),
        ke_exists: v.ke_exists,
        method_agreement: v.method_agreement,
        a1_le_a0: ansatz_constants(rs, index)?.a1_le_a0,
    })
}

/// Rows for every catalog space and both facets.
pub fn criteria_all() -> Result<Vec<CriteriaRow>, CliError> {
    catalog()
        .iter()
        .flat_map(|e| [1, 2].map(|i| (e, i)))
        .map(|(e, i)| criteria_row(&e.name, e.type_label, &e.system(Ordering::AlphaFirst), i))
        .collect()
}

#[derive(Serialize)]
struct SolveSummary {
    space: String,
    facet: usize,
    t_reached: f64,
    ode_residual: f64,
    integral_mass: f64,
    integral_first_moment: f64,
    expected_mass: f64,
    expected_first_moment: f64,
    csv: PathBuf,
    json: PathBuf,
}

#[derive(Serialize)]
struct ExpansionTermJson {
    exponent: String,
    exponent_value: f64,
    coefficient: f64,
    labels: Vec<(u32, u32)>,
}

#[derive(Serialize)]
struct ExpansionJson {
    k00: f64,
    leading_exponent: f64,
    terms: Vec<ExpansionTermJson>,
    merged: Vec<(String, Vec<(u32, u32)>)>,
}

#[derive(Serialize)]
struct AnsatzSummary<'a> {
    space: String,
    facet: usize,
    constants: &'a crate::ansatz::AnsatzConstants,
    expansion_match: crate::ansatz::ExpansionMatch,
    warnings: &'a [String],
    bundle: PathBuf,
}

fn sidecar_of(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Constants { space, facet } => {
            let (name, rs) = system_of(&space.space)?;
            let rows = facets(facet).into_iter().map(|i| constants_row(&name, &rs, i)).collect::<Result<Vec<_>, _>>()?;
            writeln!(out, "{}", to_json_string(&rows)?)?;
        }
        Command::Criteria { space, facet, all } => {
            let rows = if all {
                criteria_all()?
            } else {
                let name = space.ok_or_else(|| CliError::Usage("--space or --all is required".into()))?;
                let e = catalog_lookup(&name)?;
                let rs = e.system(Ordering::AlphaFirst);
                facets(facet)
                    .into_iter()
                    .map(|i| criteria_row(&e.name, e.type_label, &rs, i))
                    .collect::<Result<Vec<_>, _>>()?
            };
            writeln!(out, "{}", to_json_string(&rows)?)?;
        }
        Command::SolveFacet { space, facet: index, t, grid, out: dir } => {
            let (name, rs) = system_of(&space.space)?;
            let f = facet(&rs, index as usize)?;
            let opts = SolveOptions { grid: grid.spec(), ..SolveOptions::default() };
            let sol = match continuity_solve(&f, t, &opts)? {
                ContinuationOutcome::Converged(s) => s,
                ContinuationOutcome::Stalled { report, .. } => return Err(CliError::Stalled(Box::new(report))),
            };
            std::fs::create_dir_all(&dir)?;
            let csv = dir.join(format!("facet{index}.csv"));
            let json = sidecar_of(&csv);
            write_solution(&sol, &csv, &json)?;
            let (mass, first) = integral_identities(&sol, &f, t);
            let v = crate::exactcore::to_f64(&f.v);
            let summary = SolveSummary {
                space: name,
                facet: index as usize,
                t_reached: sol.t_reached,
                ode_residual: sol.diagnostics.residual,
                integral_mass: mass,
                integral_first_moment: first,
                expected_mass: v,
                expected_first_moment: v * crate::exactcore::to_f64(&f.bar_dh),
                csv,
                json,
            };
            writeln!(out, "{}", to_json_string(&summary)?)?;
        }
        Command::Stenzel { m1, m2, c, grid, out: csv } => {
            let sol = stenzel_solve(m1, m2, c, grid.spec())?;
            if let Some(parent) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            write_solution(&sol, &csv, &sidecar_of(&csv))?;
            writeln!(out, "{}", csv.display())?;
        }
        Command::Ansatz { space, facet: index, eta, k, m, out: dir } => {
            let (name, rs) = system_of(&space.space)?;
            let opts = AnsatzOptions { eta, k_trunc: k, m, ..AnsatzOptions::default() };
            let p = build_glued(&rs, index as usize, &opts)?;
            save_bundle(&p, &dir, Some(name.clone()))?;
            let summary = AnsatzSummary {
                space: name,
                facet: index as usize,
                constants: &p.constants,
                expansion_match: expansion_match(&p)?,
                warnings: &p.warnings,
                bundle: dir,
            };
            writeln!(out, "{}", to_json_string(&summary)?)?;
        }
        Command::ResidualMap { potential, window, n, out: dir } => {
            let (lo, hi) = (window[0], window[1]);
            if !(lo < hi) || n < 2 {
                return Err(CliError::Usage(format!("need lo < hi and n ≥ 2, got [{lo}, {hi}] with n = {n}")));
            }
            let (p, _) = load_bundle(&potential)?;
            let map = residual_map(&p, Window { lo, hi, n });
            let dir = dir.unwrap_or(potential);
            std::fs::create_dir_all(&dir)?;
            write_samples_csv(&map.samples, &dir.join("residual_map.csv"))?;
            write_json_file(&dir.join("decay_fits.json"), &map.fits)?;
            writeln!(out, "{}", to_json_string(&map.fits)?)?;
        }
        Command::Expansion { solution, jmax } => {
            let sol = read_solution(&solution, &sidecar_of(&solution))?;
            let e = expansion_fit(&sol, jmax)?;
            let json = ExpansionJson {
                k00: e.k00,
                leading_exponent: e.leading_exponent,
                terms: e
                    .terms
                    .iter()
                    .map(|t| ExpansionTermJson {
                        exponent: fmt_rational(&t.exact),
                        exponent_value: t.exponent,
                        coefficient: t.coefficient,
                        labels: t.labels.clone(),
                    })
                    .collect(),
                merged: e.merged.iter().map(|(r, l)| (fmt_rational(r), l.clone())).collect(),
            };
            writeln!(out, "{}", to_json_string(&json)?)?;
        }
    }
    Ok(())
}

/// Parse `argv` (program name first), run, and return the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.cmd, out) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Stalled(report) => {
                    let _ = writeln!(err, "{}", to_json_string(report.as_ref()).unwrap_or_default());
                }
                other => {
                    let _ = writeln!(err, "error: {other}");
                }
            }
            e.exit_code()
        }
    }
}
