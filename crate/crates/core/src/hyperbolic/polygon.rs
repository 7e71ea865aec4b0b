//! The fundamental polygon obtained by cutting the surface along a minimal
//! filling set with a single complementary region.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::filling::regions::boundary_next;
use crate::homology::{CombinatorialMap, Dart};
use crate::surface::{bit, CubeEdge, SurfaceModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonEdge {
    pub index: usize,
    /// Pair class; paired edges share it. Classes are numbered by first appearance.
    pub length_class: usize,
    pub partner: usize,
    /// Base length is `base_multiple * s`.
    pub base_multiple: usize,
    /// The filling curve this arc belongs to (systole index).
    pub curve_id: usize,
}

/// The corner at the end of the edge with the same index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonVertex {
    pub intersection_id: usize,
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct FundamentalPolygon {
    pub m: usize,
    pub set: Bits,
    pub edges: Vec<PolygonEdge>,
    pub vertices: Vec<PolygonVertex>,
    /// Intersection points of the filling set, as realised-square indices.
    pub points: Vec<usize>,
    /// Cut darts of each edge, in boundary order.
    pub runs: Vec<Vec<Dart>>,
    /// Edge containing each cut dart (`usize::MAX` elsewhere).
    pub run_of: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonJson {
    pub m: usize,
    pub systoles: Vec<String>,
    pub edges: Vec<PolygonEdge>,
    pub vertices: Vec<PolygonVertex>,
}

impl FundamentalPolygon {
    /// Number of intersection points `M`.
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn class_count(&self) -> usize {
        self.edges.len() / 2
    }

    /// `2M - 3` free lengths plus `M` angles.
    pub fn parameter_count(&self) -> usize {
        3 * self.point_count() - 3
    }

    /// First edge of each pair class.
    pub fn class_representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.class_count()];
        for e in &self.edges {
            if reps[e.length_class] == usize::MAX {
                reps[e.length_class] = e.index;
            }
        }
        reps
    }

    pub fn to_json(&self, model: &SurfaceModel) -> PolygonJson {
        PolygonJson {
            m: self.m,
            systoles: model.labels(&self.set),
            edges: self.edges.clone(),
            vertices: self.vertices.clone(),
        }
    }
}

/// Walks the boundary of the single complementary region. A corner sits where the
/// next cut dart lies in the same face; elsewhere the boundary passes straight
/// through a square where a cut curve meets an uncut one.
pub fn cut_to_polygon(model: &SurfaceModel, map: &CombinatorialMap, set: &Bits) -> Result<FundamentalPolygon> {
    let cut = |d: Dart| set.contains(model.owner_of(map.face_of(d), map.axis_of(d)));
    let total = (0..map.dart_count()).filter(|&d| cut(d)).count();
    let start = (0..map.dart_count()).find(|&d| cut(d)).ok_or_else(|| Error::Invariant("empty cut set".into()))?;
    let mut walk = vec![start];
    let mut d = boundary_next(map, start, &cut);
    while d != start {
        walk.push(d);
        d = boundary_next(map, d, &cut);
    }
    if walk.len() != total {
        return Err(Error::Invariant(format!(
            "the set has more than one complementary region (boundary walk covers {} of {} cut sides)",
            walk.len(),
            total
        )));
    }
    let len = walk.len();
    let corner: Vec<bool> = (0..len).map(|t| walk[(t + 1) % len] == map.phi(walk[t])).collect();
    let t0 = corner.iter().position(|&c| c).ok_or_else(|| Error::Invariant("boundary without corners".into()))?;
    walk.rotate_left(t0 + 1);
    let mut corner = corner;
    corner.rotate_left(t0 + 1);
    let mut runs: Vec<Vec<Dart>> = Vec::new();
    let mut cur = Vec::new();
    for t in 0..len {
        cur.push(walk[t]);
        if corner[t] {
            runs.push(std::mem::take(&mut cur));
        }
    }
    let mut run_of = vec![usize::MAX; map.dart_count()];
    for (r, run) in runs.iter().enumerate() {
        for &d in run {
            run_of[d] = r;
        }
    }
    let partner: Vec<usize> = runs.iter().map(|run| run_of[map.alpha(run[0])]).collect();
    for (r, run) in runs.iter().enumerate() {
        if run.iter().any(|&d| run_of[map.alpha(d)] != partner[r]) || partner[partner[r]] != r || partner[r] == r {
            return Err(Error::Invariant(format!("edge {} is not glued to a single partner", r)));
        }
    }
    let mut class = vec![usize::MAX; runs.len()];
    let mut classes = 0;
    for r in 0..runs.len() {
        if class[r] == usize::MAX {
            class[r] = classes;
            class[partner[r]] = classes;
            classes += 1;
        }
    }
    let corner_square: Vec<usize> = runs.iter().map(|run| map.head(*run.last().unwrap(), model)).collect();
    let mut points = corner_square.clone();
    points.sort_unstable();
    points.dedup();
    let edges = (0..runs.len())
        .map(|r| PolygonEdge {
            index: r,
            length_class: class[r],
            partner: partner[r],
            base_multiple: runs[r].len(),
            curve_id: model.owner_of(map.face_of(runs[r][0]), map.axis_of(runs[r][0])),
        })
        .collect();
    let vertices = (0..runs.len())
        .map(|r| {
            let v = map.face_of(*runs[r].last().unwrap());
            let sq = &model.squares[corner_square[r]];
            let sign = if bit(v, sq.i) == bit(v, sq.j) { 1 } else { -1 };
            PolygonVertex { intersection_id: points.binary_search(&corner_square[r]).unwrap(), sign }
        })
        .collect();
    Ok(FundamentalPolygon { m: model.m, set: *set, edges, vertices, points, runs, run_of })
}

/// Polygon edges crossed by systole `c`, in order along the curve. At each square
/// between consecutive sides of `c` the curve leaves the face through the next
/// side of the walk; when that side is cut, the crossing is recorded.
pub fn curve_word(model: &SurfaceModel, map: &CombinatorialMap, polygon: &FundamentalPolygon, c: usize) -> Vec<usize> {
    let cycle = &model.systole_cycle[c];
    let mut word = Vec::new();
    for t in 0..4 {
        let e: &CubeEdge = &cycle.edges[t];
        let q = cycle.squares[(t + 1) % 4];
        let d0 = map.dart(e.low, e.axis);
        if let Some(d) = [d0, map.alpha(d0)].into_iter().find(|&d| map.head(d, model) == q) {
            let r = polygon.run_of[map.phi(d)];
            if r != usize::MAX {
                word.push(r);
            }
        }
    }
    word
}
