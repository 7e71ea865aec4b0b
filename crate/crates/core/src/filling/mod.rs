//! Filling and minimality tests, the 0-1 program for smallest minimal filling
//! sets, and the search for largest ones.

pub mod exhaustive;
pub mod ilp;
pub mod maximum;
pub mod minimum;
pub mod regions;
pub mod simplified;
pub mod solver;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::homology::CombinatorialMap;
use crate::surface::SurfaceModel;

pub use ilp::{IlpModel, Objective};
pub use maximum::max_minimal_filling;
pub use minimum::min_filling;
pub use regions::{complementary_regions, CutComplex, FillingOracle, Region};
pub use simplified::{boundary_loops, filling_cuts, simplified_graph, BoundaryLoop, CoverCut, SimplifiedGraph};
pub use solver::{BridgeSolver, BuiltinSolver, SolveOptions, SolveOutcome, SolveStatus, Solver};

/// Every complementary region is an open disk.
pub fn is_filling(model: &SurfaceModel, map: &CombinatorialMap, set: &Bits) -> bool {
    complementary_regions(model, map, set).is_filling()
}

pub fn is_minimal_filling(model: &SurfaceModel, map: &CombinatorialMap, set: &Bits) -> bool {
    is_filling(model, map, set) && set.iter().all(|c| !is_filling(model, map, &set.without(c)))
}

/// `|S| <= 2g` for a minimal filling set with one complementary region.
pub fn bound_check_2g(model: &SurfaceModel, map: &CombinatorialMap, set: &Bits) -> Result<bool> {
    let cx = complementary_regions(model, map, set);
    if cx.regions.len() != 1 || !cx.is_filling() {
        return Err(Error::Invariant("bound_check_2g needs a filling set with one region".into()));
    }
    if set.len() > 2 * model.genus {
        return Err(Error::Invariant(format!("{} systoles exceed 2g = {}", set.len(), 2 * model.genus)));
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Builtin,
    Bridge,
}

impl SolverKind {
    pub fn make(&self) -> Result<Box<dyn Solver + Send>> {
        Ok(match self {
            SolverKind::Builtin => Box::new(BuiltinSolver),
            SolverKind::Bridge => Box::new(BridgeSolver::from_env()?),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub time_limit: Option<Duration>,
    pub threads: usize,
    pub solver: SolverKind,
    pub symmetry_breaking: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { time_limit: None, threads: 1, solver: SolverKind::Builtin, symmetry_breaking: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillingKind {
    Min,
    Max,
}

impl FillingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FillingKind::Min => "min",
            FillingKind::Max => "max",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FillingResult {
    pub m: usize,
    pub kind: FillingKind,
    pub set: Bits,
    pub proved_optimal: bool,
    pub cuts_used: usize,
    /// Canonical forms of every optimum found (isomorphism classes), when enumerated.
    pub classes: Vec<Bits>,
    /// Best proven bound on the optimum (lower bound for min, upper bound for max).
    pub bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub cardinality: usize,
    pub proved_optimal: bool,
    pub cuts_used: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingJson {
    pub m: usize,
    pub kind: FillingKind,
    pub systoles: Vec<String>,
    pub certificate: CertificateJson,
}

impl FillingResult {
    pub fn to_json(&self, model: &SurfaceModel) -> FillingJson {
        FillingJson {
            m: self.m,
            kind: self.kind,
            systoles: model.labels(&self.set),
            certificate: CertificateJson {
                cardinality: self.set.len(),
                proved_optimal: self.proved_optimal,
                cuts_used: self.cuts_used,
            },
        }
    }
}

impl FillingJson {
    pub fn to_set(&self, model: &SurfaceModel) -> Result<Bits> {
        self.systoles.iter().map(|l| model.parse_label(l)).collect()
    }
}
