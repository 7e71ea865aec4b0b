//! The polygon chart of Teichmüller space at the critical point: pair-length
//! offsets and one angle per intersection point, with three offsets solved from
//! the closure condition.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::homology::CombinatorialMap;
use crate::surface::SurfaceModel;

use super::geometry::{distance, dd, dd_acosh, dd_pi, edge_matrix, projective_defect, side_length, Dd, Mat2, PolygonGeometry};
use super::polygon::{curve_word, FundamentalPolygon};

/// Condition number below which a triple of classes may be solved for.
pub const DEPENDENT_COND_LIMIT: f64 = 1e6;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;

/// Offsets `y` per pair class and angles `θ` per intersection point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub y: Vec<Dd>,
    pub theta: Vec<Dd>,
}

impl ChartPoint {
    pub fn critical(polygon: &FundamentalPolygon) -> ChartPoint {
        ChartPoint { y: vec![dd(0.0); polygon.class_count()], theta: vec![dd(0.0); polygon.point_count()] }
    }
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub polygon: FundamentalPolygon,
    pub geometry: PolygonGeometry,
    /// Classes solved from closure.
    pub dependent: [usize; 3],
    /// The remaining classes, in order; the chart coordinates are their offsets followed by the angles.
    pub free: Vec<usize>,
    /// Polygon edges crossed by every systole of the surface.
    pub words: Vec<Vec<usize>>,
    pub newton_tol: f64,
}

/// Per-edge lengths and corner angles of a chart point.
fn edge_data(polygon: &FundamentalPolygon, geometry: &PolygonGeometry, p: &ChartPoint) -> (Vec<Dd>, Vec<Dd>) {
    let lengths = polygon.edges.iter().map(|e| geometry.s * e.base_multiple as f64 + p.y[e.length_class]).collect();
    let angles = polygon.vertices.iter().map(|v| p.theta[v.intersection_id] * v.sign as f64).collect();
    (lengths, angles)
}

/// `M_n ... M_1` of the edge matrices.
pub fn closure_product(polygon: &FundamentalPolygon, geometry: &PolygonGeometry, p: &ChartPoint) -> Mat2 {
    let (lengths, angles) = edge_data(polygon, geometry, p);
    let mut prod = Mat2::identity();
    for (l, a) in lengths.iter().zip(&angles) {
        prod = edge_matrix(*l, dd(0.0), *a) * prod;
    }
    prod
}

pub fn holonomy_defect(polygon: &FundamentalPolygon, geometry: &PolygonGeometry, p: &ChartPoint) -> f64 {
    projective_defect(&closure_product(polygon, geometry, p))
}

/// The three independent entries of `±P - I` after fixing the sign by the trace.
fn residual(polygon: &FundamentalPolygon, geometry: &PolygonGeometry, p: &ChartPoint) -> [Dd; 3] {
    let mut a = closure_product(polygon, geometry, p).normalized();
    if a.trace().hi() < 0.0 {
        a = a.scale(dd(-1.0));
    }
    [a.0[0][0] - a.0[1][1], a.0[0][1], a.0[1][0]]
}

fn residual_jacobian(polygon: &FundamentalPolygon, geometry: &PolygonGeometry, p: &ChartPoint, dep: &[usize; 3]) -> Matrix3<f64> {
    let h = 1e-9;
    let mut j = Matrix3::zeros();
    for (col, &q) in dep.iter().enumerate() {
        let mut plus = p.clone();
        plus.y[q] += h;
        let mut minus = p.clone();
        minus.y[q] -= h;
        let (rp, rm) = (residual(polygon, geometry, &plus), residual(polygon, geometry, &minus));
        for row in 0..3 {
            j[(row, col)] = ((rp[row] - rm[row]) / (2.0 * h)).hi();
        }
    }
    j
}

fn condition_number(j: &Matrix3<f64>) -> f64 {
    let sv = j.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl Chart {
    pub fn new(model: &SurfaceModel, map: &CombinatorialMap, polygon: FundamentalPolygon) -> Result<Chart> {
        let geometry = side_length(model.m);
        let classes = polygon.class_count();
        let origin = ChartPoint::critical(&polygon);
        let mut dependent = None;
        'scan: for a in 0..classes {
            for b in a + 1..classes {
                for c in b + 1..classes {
                    let dep = [a, b, c];
                    if condition_number(&residual_jacobian(&polygon, &geometry, &origin, &dep)) < DEPENDENT_COND_LIMIT {
                        dependent = Some(dep);
                        break 'scan;
                    }
                }
            }
        }
        let dependent = dependent.ok_or_else(|| Error::Numerical("no well-conditioned triple of dependent lengths".into()))?;
        let free = (0..classes).filter(|q| !dependent.contains(q)).collect();
        let words = (0..model.n()).map(|c| curve_word(model, map, &polygon, c)).collect();
        Ok(Chart { polygon, geometry, dependent, free, words, newton_tol: DEFAULT_NEWTON_TOL })
    }

    pub fn dimension(&self) -> usize {
        self.free.len() + self.polygon.point_count()
    }

    /// Chart point from free coordinates, dependent offsets still zero.
    pub fn point_from(&self, coords: &[Dd]) -> ChartPoint {
        let mut p = ChartPoint::critical(&self.polygon);
        for (q, v) in self.free.iter().zip(coords) {
            p.y[*q] = *v;
        }
        for (t, v) in p.theta.iter_mut().zip(&coords[self.free.len()..]) {
            *t = *v;
        }
        p
    }

    pub fn defect(&self, p: &ChartPoint) -> f64 {
        holonomy_defect(&self.polygon, &self.geometry, p)
    }

    /// Newton iteration on the three dependent offsets. Returns the point and
    /// the number of iterations used.
    pub fn solve_dependent_lengths(&self, coords: &[Dd]) -> Result<(ChartPoint, usize)> {
        if coords.len() != self.dimension() {
            return Err(Error::Numerical(format!("expected {} chart coordinates, got {}", self.dimension(), coords.len())));
        }
        let mut p = self.point_from(coords);
        // NaN compares as infinitely large so a blown-up iterate never looks converged
        let norm = |r: &[Dd; 3]| r.iter().map(|x| x.abs().hi()).fold(0.0, |a: f64, x| if x.is_nan() { f64::INFINITY } else { a.max(x) });
        let mut r = residual(&self.polygon, &self.geometry, &p);
        for it in 0..NEWTON_MAX_ITERATIONS {
            if !norm(&r).is_finite() || self.dependent.iter().any(|&q| !p.y[q].hi().is_finite()) {
                break;
            }
            // well below the tolerance and no longer improving at double-double precision
            if norm(&r) < 1e-26 {
                return Ok((p, it));
            }
            let j = residual_jacobian(&self.polygon, &self.geometry, &p, &self.dependent);
            let rhs = Vector3::new(-r[0].hi(), -r[1].hi(), -r[2].hi());
            let step = j.lu().solve(&rhs).ok_or_else(|| Error::Numerical("singular closure Jacobian".into()))?;
            // refine the step against the low-order parts of the residual
            let low = Vector3::new(-r[0].lo(), -r[1].lo(), -r[2].lo());
            let fine = j.lu().solve(&low).unwrap_or_else(Vector3::zeros);
            for (k, &q) in self.dependent.iter().enumerate() {
                p.y[q] += dd(step[k]) + dd(fine[k]);
            }
            let next = residual(&self.polygon, &self.geometry, &p);
            if norm(&next) >= norm(&r) && norm(&r) < self.newton_tol {
                return Ok((p, it + 1));
            }
            r = next;
        }
        if norm(&r) < self.newton_tol && self.dependent.iter().all(|&q| p.y[q].hi().is_finite()) {
            return Ok((p, NEWTON_MAX_ITERATIONS));
        }
        Err(Error::Numerical(format!(
            "closure Newton did not converge in {} iterations (residual {:.3e}); the point left the chart",
            NEWTON_MAX_ITERATIONS,
            norm(&r)
        )))
    }

    /// Frame of each edge: the isometry taking the segment from `i` to `i e^l`
    /// onto the edge, walking the boundary counterclockwise.
    fn frames(&self, p: &ChartPoint) -> (Vec<Mat2>, Vec<Dd>) {
        let (lengths, angles) = edge_data(&self.polygon, &self.geometry, p);
        let mut frames = Vec::with_capacity(lengths.len());
        let mut f = Mat2::identity();
        for (l, a) in lengths.iter().zip(&angles) {
            frames.push(f);
            f = f * Mat2::translation(*l) * Mat2::rotation(dd_pi() / 2.0 - *a);
        }
        (frames, lengths)
    }

    /// Side pairings: generator `b` carries the partner edge onto edge `b`.
    pub fn generators(&self, p: &ChartPoint) -> Vec<Mat2> {
        let (frames, lengths) = self.frames(p);
        let pi = dd_pi();
        (0..frames.len())
            .map(|b| {
                let a = self.polygon.edges[b].partner;
                frames[b] * Mat2::translation(lengths[b]) * Mat2::rotation(pi) * frames[a].inverse()
            })
            .collect()
    }

    pub fn holonomy(&self, word: &[usize], gens: &[Mat2]) -> Mat2 {
        word.iter().fold(Mat2::identity(), |w, &b| w * gens[b])
    }

    /// Lengths of every systole: `2 arccosh(|tr W| / 2)` of its holonomy.
    pub fn lengths(&self, p: &ChartPoint) -> Result<Vec<Dd>> {
        let gens = self.generators(p);
        self.words
            .iter()
            .enumerate()
            .map(|(c, w)| {
                let tr = self.holonomy(w, &gens).trace().abs();
                if tr.hi() < 2.0 {
                    return Err(Error::Numerical(format!("systole {} has non-hyperbolic holonomy (|tr| = {})", c, tr.hi())));
                }
                Ok(dd_acosh(tr * 0.5) * 2.0)
            })
            .collect()
    }

    /// Lengths at the point with the given free coordinates.
    pub fn lengths_at(&self, coords: &[Dd]) -> Result<Vec<Dd>> {
        let (p, _) = self.solve_dependent_lengths(coords)?;
        self.lengths(&p)
    }

    /// Point at distance `t` from the start of edge `b`, in the upper half plane.
    fn edge_point(&self, frames: &[Mat2], b: usize, t: f64) -> (f64, f64) {
        frames[b].apply((0.0, t.exp()))
    }

    /// Length of systole `c` by minimising the broken geodesic through its
    /// crossing points: inside the polygon the curve runs from where it enters
    /// (the partner of the previous crossing) to the next crossing, and a point at
    /// distance `t` along an edge is glued to distance `l - t` on its partner.
    pub fn arc_length(&self, p: &ChartPoint, c: usize) -> Result<f64> {
        let word = &self.words[c];
        if word.is_empty() {
            return Err(Error::Numerical(format!("systole {} crosses no polygon edge", c)));
        }
        let (frames, lengths) = self.frames(p);
        let lens: Vec<f64> = lengths.iter().map(|l| l.hi()).collect();
        let k = word.len();
        let total = |ts: &[f64]| -> f64 {
            (0..k)
                .map(|i| {
                    let prev = word[(i + k - 1) % k];
                    let entry = self.polygon.edges[prev].partner;
                    let from = self.edge_point(&frames, entry, lens[prev] - ts[(i + k - 1) % k]);
                    let to = self.edge_point(&frames, word[i], ts[i]);
                    distance(from, to)
                })
                .sum()
        };
        let mut ts: Vec<f64> = word.iter().map(|&b| lens[b] / 2.0).collect();
        let mut best = total(&ts);
        // cyclic golden-section coordinate descent; the objective is convex in the
        // edge parameters because edges are geodesic segments
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _sweep in 0..200 {
            let before = best;
            for i in 0..k {
                let (mut lo, mut hi) = (0.0, lens[word[i]]);
                let eval = |x: f64, ts: &mut Vec<f64>| {
                    let keep = ts[i];
                    ts[i] = x;
                    let v = total(ts);
                    ts[i] = keep;
                    v
                };
                let mut x1 = hi - phi * (hi - lo);
                let mut x2 = lo + phi * (hi - lo);
                let mut f1 = eval(x1, &mut ts);
                let mut f2 = eval(x2, &mut ts);
                while hi - lo > 1e-13 {
                    if f1 < f2 {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - phi * (hi - lo);
                        f1 = eval(x1, &mut ts);
                    } else {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + phi * (hi - lo);
                        f2 = eval(x2, &mut ts);
                    }
                }
                ts[i] = (lo + hi) / 2.0;
                best = total(&ts);
            }
            if before - best < 1e-15 {
                break;
            }
        }
        Ok(best)
    }
}
