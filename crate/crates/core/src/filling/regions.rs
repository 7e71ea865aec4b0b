//! Complementary regions of a systole subset. A region is a union of m-gons glued
//! along sides whose owning systole is not in the subset; its Euler characteristic
//! as an open surface is `faces - uncut sides + interior vertices`.

use crate::bits::Bits;
use crate::homology::CombinatorialMap;
use crate::surface::{CubeEdge, SurfaceModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub faces: usize,
    pub edges: usize,
    pub vertices: usize,
    pub euler: i64,
    pub boundary_circles: usize,
}

impl Region {
    pub fn is_disk(&self) -> bool {
        self.euler == 1 && self.boundary_circles == 1
    }
}

#[derive(Clone, Debug)]
pub struct CutComplex {
    pub regions: Vec<Region>,
    pub region_of_face: Vec<usize>,
    /// Pairwise intersections inside the subset (`V_D`).
    pub intersections: usize,
}

impl CutComplex {
    /// `V_D - E_D + Σχ(regions)` with `E_D = 2 V_D`; equals `2 - 2g`.
    pub fn total_euler(&self) -> i64 {
        -(self.intersections as i64) + self.regions.iter().map(|r| r.euler).sum::<i64>()
    }

    pub fn is_filling(&self) -> bool {
        self.regions.iter().all(Region::is_disk)
    }
}

pub struct UnionFind {
    parent: Vec<u16>,
    pub components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n as u16).collect(), components: n }
    }

    #[inline]
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    #[inline]
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb as u16;
        self.components -= 1;
        true
    }
}

/// Region decomposition by union-find over uncut sides, with boundary circles
/// counted by walking the cut darts.
pub fn complementary_regions(model: &SurfaceModel, map: &CombinatorialMap, set: &Bits) -> CutComplex {
    let m = model.m;
    let faces = model.face_count();
    let mut uf = UnionFind::new(faces);
    for id in 0..model.edge_count() {
        if !set.contains(model.edge_owner[id]) {
            let (a, b) = CubeEdge::from_index(m, id).endpoints();
            uf.union(a as usize, b as usize);
        }
    }
    let mut root_id = vec![usize::MAX; faces];
    let mut region_of_face = vec![0; faces];
    let mut regions: Vec<Region> = Vec::new();
    for f in 0..faces {
        let r = uf.find(f);
        if root_id[r] == usize::MAX {
            root_id[r] = regions.len();
            regions.push(Region { faces: 0, edges: 0, vertices: 0, euler: 0, boundary_circles: 0 });
        }
        region_of_face[f] = root_id[r];
        regions[root_id[r]].faces += 1;
    }
    for id in 0..model.edge_count() {
        if !set.contains(model.edge_owner[id]) {
            let (a, _) = CubeEdge::from_index(m, id).endpoints();
            regions[region_of_face[a as usize]].edges += 1;
        }
    }
    for (q, pair) in model.square_to_systoles.iter().enumerate() {
        if !set.contains(pair[0]) && !set.contains(pair[1]) {
            regions[region_of_face[model.squares[q].base as usize]].vertices += 1;
        }
    }
    let cut = |d: usize| set.contains(model.owner_of(map.face_of(d), map.axis_of(d)));
    let mut seen = vec![false; map.dart_count()];
    for d0 in 0..map.dart_count() {
        if seen[d0] || !cut(d0) {
            continue;
        }
        let mut d = d0;
        loop {
            seen[d] = true;
            d = boundary_next(map, d, &cut);
            if d == d0 {
                break;
            }
        }
        regions[region_of_face[map.face_of(d0) as usize]].boundary_circles += 1;
    }
    for r in regions.iter_mut() {
        r.euler = r.faces as i64 - r.edges as i64 + r.vertices as i64;
    }
    CutComplex { regions, region_of_face, intersections: model.intersections_within(set) }
}

/// Next cut dart along the boundary of the region containing `d`.
#[inline]
pub fn boundary_next(map: &CombinatorialMap, d: usize, cut: &impl Fn(usize) -> bool) -> usize {
    let mut e = map.phi(d);
    while !cut(e) {
        e = map.phi(map.alpha(e));
    }
    e
}

/// Fast filling decisions by an Euler count: with `T` the complement, the subset
/// fills iff the number of regions equals `2^m - 4|T| + E(T)`, since every region
/// has Euler characteristic at most one with equality exactly for disks.
#[derive(Clone, Debug)]
pub struct FillingOracle {
    pub n: usize,
    pub faces: usize,
    /// The four cube edges of each systole as face pairs.
    pub edges: Vec<[(u8, u8); 4]>,
    pub neighbors: Vec<Bits>,
}

impl FillingOracle {
    pub fn new(model: &SurfaceModel) -> FillingOracle {
        let edges = model
            .systole_cycle
            .iter()
            .map(|cyc| {
                let mut out = [(0u8, 0u8); 4];
                for (t, e) in cyc.edges.iter().enumerate() {
                    let (a, b) = e.endpoints();
                    out[t] = (a as u8, b as u8);
                }
                out
            })
            .collect();
        FillingOracle { n: model.n(), faces: model.face_count(), edges, neighbors: model.neighbor_bits.clone() }
    }

    /// Number of regions of the complement of `set`.
    pub fn region_count(&self, set: &Bits) -> usize {
        let mut uf = UnionFind::new(self.faces);
        for t in set.complement(self.n).iter() {
            for &(a, b) in &self.edges[t] {
                uf.union(a as usize, b as usize);
            }
        }
        uf.components
    }

    pub fn intersections(&self, set: &Bits) -> usize {
        set.iter().map(|c| self.neighbors[c].and(set).len()).sum::<usize>() / 2
    }

    /// Components of the graph of uncut sides, compared with the disk count.
    pub fn fills(&self, set: &Bits) -> bool {
        if set.is_empty() {
            return false;
        }
        let t = set.complement(self.n);
        let et = self.intersections(&t) as i64;
        let want = self.faces as i64 - 4 * t.len() as i64 + et;
        if want < 1 {
            return false;
        }
        let mut uf = UnionFind::new(self.faces);
        for c in t.iter() {
            for &(a, b) in &self.edges[c] {
                uf.union(a as usize, b as usize);
            }
        }
        uf.components as i64 == want
    }

    pub fn is_minimal_filling(&self, set: &Bits) -> bool {
        self.fills(set) && set.iter().all(|c| !self.fills(&set.without(c)))
    }

    /// Members whose removal keeps the set filling.
    pub fn redundant_members(&self, set: &Bits) -> Vec<usize> {
        set.iter().filter(|&c| self.fills(&set.without(c))).collect()
    }

    /// Shrinks a filling set to a minimal filling subset, removing the
    /// lowest-index redundant member first.
    pub fn shrink_to_minimal(&self, set: &Bits) -> Bits {
        let mut s = *set;
        loop {
            match s.iter().find(|&c| self.fills(&s.without(c))) {
                Some(c) => s.remove(c),
                None => return s,
            }
        }
    }

    /// Number of complementary regions of a filling set, `E(S) - M + 1`.
    pub fn filling_regions(&self, set: &Bits, min_intersections: i64) -> i64 {
        self.intersections(set) as i64 - min_intersections + 1
    }
}
