//! Potential bundles: a directory holding both solutions, the constants and the metadata.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AnsatzConstants, GluedPotential};
use crate::odesolve::{read_solution, write_solution, SolutionIoError};
use crate::rootsystems::{build_system, Multiplicities, Ordering, RootKind, RootSystemError};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Solution(#[from] SolutionIoError),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub space: Option<String>,
    pub kind: RootKind,
    pub mults: Multiplicities,
    /// Fiber root index in the unordered system (1 = α, 2 = β).
    pub fiber: usize,
    pub blend: f64,
    pub eta: f64,
    pub k_trunc: u32,
    pub m: f64,
    pub c_ma: f64,
    pub warnings: Vec<String>,
}

impl BundleMeta {
    pub fn of(p: &GluedPotential, space: Option<String>) -> Self {
        BundleMeta {
            space,
            kind: p.sys.kind,
            mults: p.sys.mults,
            fiber: p.fiber,
            blend: p.blend,
            eta: p.constants.eta,
            k_trunc: p.constants.k_trunc,
            m: p.constants.m,
            c_ma: p.constants.c_ma,
            warnings: p.warnings.clone(),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), BundleError> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), v)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, BundleError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Write `psi.csv`, `w.csv` (with JSON sidecars), `constants.json` and `meta.json` into `dir`.
pub fn save_bundle(p: &GluedPotential, dir: &Path, space: Option<String>) -> Result<(), BundleError> {
    std::fs::create_dir_all(dir)?;
    write_solution(&p.psi, &dir.join("psi.csv"), &dir.join("psi.json"))?;
    write_solution(&p.w, &dir.join("w.csv"), &dir.join("w.json"))?;
    write_json(&dir.join("constants.json"), &p.constants)?;
    write_json(&dir.join("meta.json"), &BundleMeta::of(p, space))?;
    Ok(())
}

pub fn load_bundle(dir: &Path) -> Result<(GluedPotential, BundleMeta), BundleError> {
    let meta: BundleMeta = read_json(&dir.join("meta.json"))?;
    let constants: AnsatzConstants = read_json(&dir.join("constants.json"))?;
    let psi = read_solution(&dir.join("psi.csv"), &dir.join("psi.json"))?;
    let w = read_solution(&dir.join("w.csv"), &dir.join("w.json"))?;
    let sys = build_system(meta.kind, meta.mults, Ordering::AlphaFirst)?.with_first(meta.fiber)?;
    let mut p = GluedPotential::assemble(sys, meta.fiber, psi, w, constants, meta.blend);
    p.warnings = meta.warnings.clone();
    Ok((p, meta))
}
