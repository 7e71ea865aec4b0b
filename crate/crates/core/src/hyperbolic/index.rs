//! Length Jacobian at the critical point, its numerical rank (the Morse index)
//! and the eutacticity test.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

use super::chart::Chart;
use super::geometry::dd;

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
/// Required ratio between the last kept and the first dropped singular value.
pub const MIN_SPECTRAL_GAP: f64 = 1e3;

/// `|C| x (3M - 3)` derivatives of the systole lengths in the chart coordinates.
#[derive(Clone, Debug)]
pub struct LengthJacobian {
    pub rows: DMatrix<f64>,
    pub step: f64,
}

impl LengthJacobian {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows.nrows() {
            let line: Vec<String> = (0..self.rows.ncols()).map(|c| format!("{:.12e}", self.rows[(r, c)])).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub index: usize,
    pub singular_values: Vec<f64>,
    /// `σ_r / σ_{r+1}`, infinite when every singular value is kept.
    pub gap: f64,
    pub tolerance: f64,
}

/// Five-point central differences, re-solving the dependent lengths at every evaluation.
pub fn length_jacobian(chart: &Chart, step: f64) -> Result<LengthJacobian> {
    let dim = chart.dimension();
    let n = chart.words.len();
    let mut rows = DMatrix::zeros(n, dim);
    for col in 0..dim {
        let at = |k: f64| -> Result<Vec<f64>> {
            let mut coords = vec![dd(0.0); dim];
            coords[col] = dd(k * step);
            Ok(chart.lengths_at(&coords)?.iter().map(|l| l.hi()).collect::<Vec<_>>())
        };
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        for r in 0..n {
            rows[(r, col)] = (-p2[r] + 8.0 * p1[r] - 8.0 * m1[r] + m2[r]) / (12.0 * step);
        }
    }
    Ok(LengthJacobian { rows, step })
}

/// Dimension of the span of the gradients: singular values above `tol * σ_max`,
/// accepted only when the spectrum has a clean gap at the cut.
pub fn index(jacobian: &LengthJacobian, tol: f64) -> Result<IndexReport> {
    let mut sv: Vec<f64> = jacobian.rows.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return Ok(IndexReport { index: 0, singular_values: sv, gap: f64::INFINITY, tolerance: tol });
    }
    let rank = sv.iter().filter(|&&s| s > tol * max).count();
    let gap = if rank == sv.len() { f64::INFINITY } else { sv[rank - 1] / sv[rank] };
    if gap <= MIN_SPECTRAL_GAP {
        return Err(Error::IndeterminateRank(format!(
            "no clean gap at rank {} (ratio {:.3e}); spectrum {:?}",
            rank, gap, sv
        )));
    }
    Ok(IndexReport { index: rank, singular_values: sv, gap, tolerance: tol })
}

/// True when no direction `v` has `v . row >= 0` for every row with at least one
/// strict inequality. Solved as: maximise the sum of `v . row` over the box
/// `[-1, 1]^d` subject to every `v . row >= 0`; eutactic iff the optimum is zero.
pub fn check_eutactic(rows: &DMatrix<f64>) -> Result<bool> {
    let scale = rows.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return Ok(true);
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..rows.ncols())
        .map(|j| lp.add_var((0..rows.nrows()).map(|r| rows[(r, j)] / scale).sum(), (-1.0, 1.0)))
        .collect();
    for r in 0..rows.nrows() {
        let terms: Vec<_> = vars.iter().enumerate().map(|(j, &v)| (v, rows[(r, j)] / scale)).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().map_err(|e| Error::IndeterminateRank(format!("eutacticity LP failed: {}", e)))?;
    Ok(sol.objective() < 1e-7 * rows.nrows() as f64)
}
