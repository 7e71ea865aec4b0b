//! Simplified graph of a non-filling solution and the boundary loops used for
//! lazy filling cuts. The graph lives on the m-cube: vertices are m-gons,
//! edges are their shared sides.

use std::collections::VecDeque;

use crate::bits::Bits;
use crate::homology::Echelon;
use crate::surface::{CubeEdge, SurfaceModel};

use super::regions::complementary_regions;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplifiedGraph {
    pub m: usize,
    /// Present edges by dense cube-edge index.
    pub edges: Vec<bool>,
    /// Vertices still present.
    pub vertices: Vec<bool>,
}

/// The four cube edges of a square, in cyclic order around it.
pub fn square_edges(m: usize, sq: &crate::surface::Square) -> [usize; 4] {
    let (ei, ej) = (1u32 << (sq.i - 1), 1u32 << (sq.j - 1));
    [
        CubeEdge { axis: sq.i, low: sq.base }.index(m),
        CubeEdge { axis: sq.j, low: sq.base | ei }.index(m),
        CubeEdge { axis: sq.i, low: sq.base | ej }.index(m),
        CubeEdge { axis: sq.j, low: sq.base }.index(m),
    ]
}

impl SimplifiedGraph {
    fn valency(&self, v: u32) -> usize {
        (1..=self.m).filter(|&k| self.edges[CubeEdge::at(v, k).index(self.m)]).count()
    }

    fn incident(&self, v: u32) -> Vec<usize> {
        (1..=self.m).map(|k| CubeEdge::at(v, k).index(self.m)).filter(|&e| self.edges[e]).collect()
    }

    fn delete_vertex(&mut self, v: u32) {
        for e in self.incident(v) {
            self.edges[e] = false;
        }
        self.vertices[v as usize] = false;
    }

    /// Realised squares all of whose edges are present.
    fn full_squares<'a>(&'a self, model: &'a SurfaceModel) -> impl Iterator<Item = [usize; 4]> + 'a {
        model.squares.iter().map(move |sq| square_edges(self.m, sq)).filter(move |es| es.iter().all(|&e| self.edges[e]))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&b| b).count()
    }

    /// Edges lying on some realised square of which the graph keeps only one or two edges.
    pub fn boundary_edges(&self, model: &SurfaceModel) -> Vec<bool> {
        let mut out = vec![false; self.edges.len()];
        for sq in &model.squares {
            let es = square_edges(self.m, sq);
            let present = es.iter().filter(|&&e| self.edges[e]).count();
            if present == 1 || present == 2 {
                for e in es {
                    if self.edges[e] {
                        out[e] = true;
                    }
                }
            }
        }
        out
    }
}

/// Steps 1-3: delete the chosen systoles' edges, then repeatedly prune valency-1
/// vertices and one valency-2 corner of a full realised square; once stable,
/// delete one edge at a valency >= 4 vertex that lies on exactly one full square
/// and start over. Ties go to the least vertex, then the least edge.
pub fn simplified_graph(model: &SurfaceModel, solution: &Bits) -> SimplifiedGraph {
    let m = model.m;
    let faces = model.face_count();
    let edges: Vec<bool> = (0..model.edge_count()).map(|id| !solution.contains(model.edge_owner[id])).collect();
    let mut g = SimplifiedGraph { m, edges, vertices: vec![true; faces] };
    loop {
        loop {
            let mut changed = false;
            loop {
                let leaves: Vec<u32> =
                    (0..faces as u32).filter(|&v| g.vertices[v as usize] && g.valency(v) == 1).collect();
                if leaves.is_empty() {
                    break;
                }
                for v in leaves {
                    if g.valency(v) == 1 {
                        g.delete_vertex(v);
                    }
                }
                changed = true;
            }
            let full: Vec<[usize; 4]> = g.full_squares(model).collect();
            let corner = (0..faces as u32).find(|&v| {
                g.vertices[v as usize] && g.valency(v) == 2 && {
                    let inc = g.incident(v);
                    full.iter().any(|es| es.contains(&inc[0]) && es.contains(&inc[1]))
                }
            });
            if let Some(v) = corner {
                g.delete_vertex(v);
                changed = true;
            }
            if !changed {
                break;
            }
        }
        let full: Vec<[usize; 4]> = g.full_squares(model).collect();
        let mut target = None;
        'outer: for v in 0..faces as u32 {
            if !g.vertices[v as usize] || g.valency(v) <= 3 {
                continue;
            }
            for e in g.incident(v) {
                if full.iter().filter(|es| es.contains(&e)).count() == 1 {
                    target = Some(e);
                    break 'outer;
                }
            }
        }
        match target {
            Some(e) => g.edges[e] = false,
            None => break,
        }
    }
    for v in 0..faces as u32 {
        if g.vertices[v as usize] && g.valency(v) == 0 {
            g.vertices[v as usize] = false;
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLoop {
    /// Closed vertex walk `v_0, v_1, ..., v_0`.
    pub walk: Vec<u32>,
    pub edges: Vec<usize>,
    /// Systoles owning an edge of the loop.
    pub crossing: Bits,
}

/// A cycle basis of the boundary-edge subgraph: breadth-first spanning forest
/// plus one loop per non-tree edge.
pub fn boundary_loops(model: &SurfaceModel, g: &SimplifiedGraph) -> Vec<BoundaryLoop> {
    let m = model.m;
    let faces = model.face_count();
    let bnd = g.boundary_edges(model);
    let adj = |v: u32| -> Vec<(u32, usize)> {
        (1..=m)
            .map(|k| (v ^ (1 << (k - 1)), CubeEdge::at(v, k).index(m)))
            .filter(|&(_, e)| bnd[e])
            .collect()
    };
    let mut parent: Vec<Option<(u32, usize)>> = vec![None; faces];
    let mut depth = vec![usize::MAX; faces];
    let mut tree = vec![false; bnd.len()];
    for root in 0..faces as u32 {
        if depth[root as usize] != usize::MAX || adj(root).is_empty() {
            continue;
        }
        depth[root as usize] = 0;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for (w, e) in adj(v) {
                if depth[w as usize] == usize::MAX {
                    depth[w as usize] = depth[v as usize] + 1;
                    parent[w as usize] = Some((v, e));
                    tree[e] = true;
                    q.push_back(w);
                }
            }
        }
    }
    let mut loops = Vec::new();
    for e in 0..bnd.len() {
        if !bnd[e] || tree[e] {
            continue;
        }
        let (a, b) = CubeEdge::from_index(m, e).endpoints();
        let (mut x, mut y) = (a, b);
        let (mut left, mut right) = (vec![a], vec![b]);
        let (mut le, mut re) = (Vec::new(), Vec::new());
        while x != y {
            if depth[x as usize] >= depth[y as usize] {
                let (p, pe) = parent[x as usize].unwrap();
                le.push(pe);
                x = p;
                left.push(x);
            } else {
                let (p, pe) = parent[y as usize].unwrap();
                re.push(pe);
                y = p;
                right.push(y);
            }
        }
        // walk: a -> ... -> lca -> ... -> b -> a
        right.pop();
        right.reverse();
        let mut walk = left;
        walk.extend(right);
        walk.push(a);
        re.reverse();
        let mut edges = le;
        edges.extend(re);
        edges.push(e);
        let crossing = edges.iter().map(|&id| model.edge_owner[id]).collect();
        loops.push(BoundaryLoop { walk, edges, crossing });
    }
    loops
}

/// Homology of the dual cell complex (cube edges modulo realised-square boundaries),
/// used to certify that a loop is essential.
pub struct DualHomology {
    m: usize,
    boundaries: Echelon,
}

impl DualHomology {
    pub fn new(model: &SurfaceModel) -> DualHomology {
        let m = model.m;
        let mut boundaries = Echelon::new(model.edge_count());
        for sq in &model.squares {
            let es = square_edges(m, sq);
            let mut row = vec![0i64; model.edge_count()];
            row[es[0]] += 1;
            row[es[1]] += 1;
            row[es[2]] -= 1;
            row[es[3]] -= 1;
            boundaries.insert(&row);
        }
        DualHomology { m, boundaries }
    }

    pub fn chain(&self, walk: &[u32]) -> Vec<i64> {
        let mut row = vec![0i64; self.m << (self.m - 1)];
        for w in walk.windows(2) {
            let (u, v) = (w[0], w[1]);
            let k = (u ^ v).trailing_zeros() as usize + 1;
            let e = CubeEdge::at(u, k);
            row[e.index(self.m)] += if e.low == u { 1 } else { -1 };
        }
        row
    }

    /// Whether the closed walk is non-zero in rational first homology.
    pub fn is_nontrivial(&self, walk: &[u32]) -> bool {
        let mut e = self.boundaries.clone();
        e.insert(&self.chain(walk))
    }
}

/// A lazy filling cut: every filling set contains a member of `set`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverCut {
    pub set: Bits,
}

/// Cuts for a non-filling solution: one per boundary loop that is certified
/// essential; if none is, one per non-disk complementary region (the systoles
/// owning an uncut side inside it).
pub fn filling_cuts(
    model: &SurfaceModel,
    map: &crate::homology::CombinatorialMap,
    dual: &DualHomology,
    solution: &Bits,
) -> Vec<CoverCut> {
    let g = simplified_graph(model, solution);
    let mut cuts: Vec<CoverCut> = boundary_loops(model, &g)
        .into_iter()
        .filter(|l| !l.crossing.intersects(solution) && dual.is_nontrivial(&l.walk))
        .map(|l| CoverCut { set: l.crossing })
        .collect();
    if cuts.is_empty() {
        cuts = region_cuts(model, map, solution);
    }
    cuts.sort();
    cuts.dedup();
    cuts
}

pub fn region_cuts(model: &SurfaceModel, map: &crate::homology::CombinatorialMap, solution: &Bits) -> Vec<CoverCut> {
    let cx = complementary_regions(model, map, solution);
    let mut cuts = Vec::new();
    for (r, reg) in cx.regions.iter().enumerate() {
        if reg.is_disk() {
            continue;
        }
        let mut set = Bits::EMPTY;
        for id in 0..model.edge_count() {
            let owner = model.edge_owner[id];
            if solution.contains(owner) {
                continue;
            }
            let (a, _) = CubeEdge::from_index(model.m, id).endpoints();
            if cx.region_of_face[a as usize] == r {
                set.insert(owner);
            }
        }
        if !set.is_empty() {
            cuts.push(CoverCut { set });
        }
    }
    cuts
}
