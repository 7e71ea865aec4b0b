//! Hyperbolic realisation of the critical point: the fundamental polygon cut
//! along a one-region minimal filling set, its chart of Teichmüller space, and
//! the Morse index of the systole function there.

pub mod chart;
pub mod geometry;
pub mod index;
pub mod polygon;

pub use chart::{Chart, ChartPoint};
pub use geometry::{side_length, Dd, Mat2, PolygonGeometry};
pub use index::{check_eutactic, index, length_jacobian, IndexReport, DEFAULT_FD_STEP, DEFAULT_RANK_TOL};
pub use polygon::{cut_to_polygon, FundamentalPolygon, PolygonJson};

use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::filling::regions::FillingOracle;
use crate::homology::CombinatorialMap;
use crate::surface::SurfaceModel;

use index::LengthJacobian;

#[derive(Clone, Copy, Debug)]
pub struct IndexOptions {
    pub fd_step: f64,
    pub rank_tol: f64,
    pub newton_tol: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { fd_step: DEFAULT_FD_STEP, rank_tol: DEFAULT_RANK_TOL, newton_tol: chart::DEFAULT_NEWTON_TOL }
    }
}

/// Everything computed at the critical point for one filling set.
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub chart: Chart,
    pub defect: f64,
    pub lengths: Vec<f64>,
    pub jacobian: LengthJacobian,
    pub report: IndexReport,
    pub eutactic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexJson {
    pub m: usize,
    pub systoles: Vec<String>,
    pub parameters: usize,
    pub index: usize,
    pub predicted: usize,
    pub spectral_gap: f64,
    pub singular_values: Vec<f64>,
    pub eutactic: bool,
    pub holonomy_defect: f64,
    pub max_length_error: f64,
    pub fd_step: f64,
    pub rank_tol: f64,
}

/// `m 2^(m-3) - (m + 3)`.
pub fn predicted_index(m: usize) -> usize {
    m * (1 << (m - 3)) - (m + 3)
}

/// First set of the list with a single complementary region.
pub fn one_region_set(model: &SurfaceModel, sets: &[Bits]) -> Result<Bits> {
    let oracle = FillingOracle::new(model);
    sets.iter()
        .find(|s| oracle.fills(s) && oracle.region_count(s) == 1)
        .copied()
        .ok_or_else(|| Error::Invariant("no filling set with a single complementary region was supplied".into()))
}

pub fn critical_point(model: &SurfaceModel, map: &CombinatorialMap, set: &Bits, opts: &IndexOptions) -> Result<CriticalPoint> {
    let polygon = cut_to_polygon(model, map, set)?;
    let mut chart = Chart::new(model, map, polygon)?;
    chart.newton_tol = opts.newton_tol;
    let origin = ChartPoint::critical(&chart.polygon);
    let defect = chart.defect(&origin);
    let lengths = chart.lengths(&origin)?.iter().map(|l| l.hi()).collect();
    let jacobian = length_jacobian(&chart, opts.fd_step)?;
    let report = index(&jacobian, opts.rank_tol)?;
    let eutactic = check_eutactic(&jacobian.rows)?;
    Ok(CriticalPoint { chart, defect, lengths, jacobian, report, eutactic })
}

impl CriticalPoint {
    pub fn max_length_error(&self) -> f64 {
        let want = self.chart.geometry.systole_length().hi();
        self.lengths.iter().map(|l| (l - want).abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self, model: &SurfaceModel, opts: &IndexOptions) -> IndexJson {
        IndexJson {
            m: model.m,
            systoles: model.labels(&self.chart.polygon.set),
            parameters: self.chart.dimension(),
            index: self.report.index,
            predicted: predicted_index(model.m),
            spectral_gap: self.report.gap,
            singular_values: self.report.singular_values.clone(),
            eutactic: self.eutactic,
            holonomy_defect: self.defect,
            max_length_error: self.max_length_error(),
            fd_step: opts.fd_step,
            rank_tol: opts.rank_tol,
        }
    }
}
