//! Cellular chain complex of the tesselation and the rational rank of the span
//! of systole classes in first homology.

pub mod map;
pub mod rank;

use std::fmt::Write as _;

pub use map::{build_combinatorial_map, CombinatorialMap, Dart};
pub use rank::{exact_rank, rank_mod_p, Echelon};

use crate::bits::Bits;
use crate::surface::{prev_axis, CubeEdge, SurfaceModel};

/// Boundary maps with edges oriented from the corner `(k-1, k)` to the corner `(k, k+1)`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Sparse columns of ∂₂: per face, `(edge, sign)`.
    pub d2: Vec<Vec<(usize, i64)>>,
    /// Sparse columns of ∂₁: per edge, `(tail, -1)` and `(head, +1)`.
    pub d1: Vec<[(usize, i64); 2]>,
}

pub fn edge_tail(model: &SurfaceModel, e: &CubeEdge) -> usize {
    model.square_at(e.low, prev_axis(model.m, e.axis))
}

pub fn edge_head(model: &SurfaceModel, e: &CubeEdge) -> usize {
    model.square_at(e.low, e.axis)
}

impl ChainComplex {
    pub fn new(model: &SurfaceModel, map: &CombinatorialMap) -> ChainComplex {
        let m = model.m;
        let edges = model.edge_count();
        let d1 = (0..edges)
            .map(|id| {
                let e = CubeEdge::from_index(m, id);
                [(edge_tail(model, &e), -1), (edge_head(model, &e), 1)]
            })
            .collect();
        let d2 = (0..map.faces as u32)
            .map(|v| {
                let s = map.orientation[v as usize] as i64;
                (1..=m).map(|k| (CubeEdge::at(v, k).index(m), s)).collect()
            })
            .collect();
        ChainComplex { vertices: model.squares.len(), edges, faces: map.faces, d2, d1 }
    }

    pub fn d2_dense_columns(&self) -> Vec<Vec<i64>> {
        self.d2
            .iter()
            .map(|col| {
                let mut v = vec![0; self.edges];
                for &(e, s) in col {
                    v[e] += s;
                }
                v
            })
            .collect()
    }

    /// `∂₁ · chain` for a 1-chain.
    pub fn boundary1(&self, chain: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.vertices];
        for (e, &c) in chain.iter().enumerate() {
            if c != 0 {
                for &(v, s) in &self.d1[e] {
                    out[v] += s * c;
                }
            }
        }
        out
    }

    /// Whether ∂₁∘∂₂ vanishes.
    pub fn is_complex(&self) -> bool {
        self.d2_dense_columns().iter().all(|col| self.boundary1(col).iter().all(|&x| x == 0))
    }

    /// ∂₂ as `row col value` lines (rows are edges, columns faces).
    pub fn d2_triplets(&self) -> String {
        let mut out = String::new();
        let mut entries: Vec<(usize, usize, i64)> =
            self.d2.iter().enumerate().flat_map(|(f, col)| col.iter().map(move |&(e, s)| (e, f, s))).collect();
        entries.sort_unstable();
        for (e, f, s) in entries {
            let _ = writeln!(out, "{} {} {}", e, f, s);
        }
        out
    }
}

/// The 1-cycle of a systole, signed by the direction of its `systole_cycle`.
pub fn systole_cycle_vector(model: &SurfaceModel, c: usize) -> Vec<i64> {
    let mut v = vec![0i64; model.edge_count()];
    let cyc = &model.systole_cycle[c];
    for t in 0..4 {
        let e = cyc.edges[t];
        let sign = if edge_tail(model, &e) == cyc.squares[t] { 1 } else { -1 };
        v[e.index(model.m)] += sign;
    }
    v
}

/// Systole cycles as `row col value` lines (rows are edges, columns systoles).
pub fn cycle_triplets(model: &SurfaceModel) -> String {
    let mut out = String::new();
    let mut entries = Vec::new();
    for c in 0..model.n() {
        for (e, &x) in systole_cycle_vector(model, c).iter().enumerate() {
            if x != 0 {
                entries.push((e, c, x));
            }
        }
    }
    entries.sort_unstable();
    for (e, c, x) in entries {
        let _ = writeln!(out, "{} {} {}", e, c, x);
    }
    out
}

/// Homology toolkit bound to one surface.
pub struct Homology<'a> {
    pub model: &'a SurfaceModel,
    pub map: CombinatorialMap,
    pub complex: ChainComplex,
    boundaries: Echelon,
}

impl<'a> Homology<'a> {
    pub fn new(model: &'a SurfaceModel) -> crate::Result<Homology<'a>> {
        let map = build_combinatorial_map(model)?;
        let complex = ChainComplex::new(model, &map);
        let mut boundaries = Echelon::new(complex.edges);
        for col in complex.d2_dense_columns() {
            boundaries.insert(&col);
        }
        Ok(Homology { model, map, complex, boundaries })
    }

    pub fn boundary_rank(&self) -> usize {
        self.boundaries.rank()
    }

    /// `rank([cycles | im ∂₂]) - rank(im ∂₂)` over the rationals.
    pub fn span_rank(&self, set: &Bits) -> usize {
        let mut e = self.boundaries.clone();
        for c in set.iter() {
            e.insert(&systole_cycle_vector(self.model, c));
        }
        e.rank() - self.boundaries.rank()
    }

    /// Rank of the same span over `F_p` (a lower bound for the rational rank).
    pub fn span_rank_mod_p(&self, set: &Bits, p: u64) -> usize {
        let b = self.complex.d2_dense_columns();
        let mut rows = b.clone();
        rows.extend(set.iter().map(|c| systole_cycle_vector(self.model, c)));
        rank_mod_p(&rows, p) - rank_mod_p(&b, p)
    }
}

/// Rank of the homological span of a systole set.
pub fn homology_span_rank(model: &SurfaceModel, set: &Bits) -> crate::Result<usize> {
    Ok(Homology::new(model)?.span_rank(set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{build_surface, SurfaceParams};

    fn model(m: usize) -> SurfaceModel {
        build_surface(SurfaceParams::new(m).unwrap()).unwrap()
    }

    #[test]
    fn euler_and_complex() {
        for m in 5..=8 {
            let s = model(m);
            let map = build_combinatorial_map(&s).unwrap();
            assert_eq!(map.euler_characteristic(&s), 2 - 2 * s.genus as i64);
            for v in 0..map.faces as u32 {
                assert_eq!(map.face_walk(v).len(), m);
            }
            let cx = ChainComplex::new(&s, &map);
            assert!(cx.is_complex());
            for c in 0..s.n() {
                let z = systole_cycle_vector(&s, c);
                assert_eq!(z.iter().filter(|&&x| x != 0).count(), 4);
                assert!(z.iter().all(|&x| x.abs() <= 1));
                assert!(cx.boundary1(&z).iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn orientation_is_parity() {
        let s = model(6);
        let map = build_combinatorial_map(&s).unwrap();
        for v in 0..64u32 {
            let want = if v.count_ones() % 2 == 0 { 1 } else { -1 };
            assert_eq!(map.orientation[v as usize], want);
        }
    }

    #[test]
    fn ranks_m5_m6() {
        for (m, want) in [(5, 10), (6, 31)] {
            let s = model(m);
            let h = Homology::new(&s).unwrap();
            assert_eq!(h.boundary_rank(), (1 << m) - 1);
            let all = Bits::full(s.n());
            assert_eq!(h.span_rank(&all), want);
            assert_eq!(h.span_rank_mod_p(&all, 1_000_000_007), want);
            assert_eq!(h.span_rank(&Bits::from_indices([3])), 1);
        }
    }

    #[test]
    fn reversed_cycle_negates() {
        let s = model(5);
        let z = systole_cycle_vector(&s, 0);
        let mut rev = s.clone();
        let cyc = &mut rev.systole_cycle[0];
        cyc.squares = [cyc.squares[1], cyc.squares[0], cyc.squares[3], cyc.squares[2]];
        cyc.edges = [cyc.edges[0], cyc.edges[3], cyc.edges[2], cyc.edges[1]];
        let zr = systole_cycle_vector(&rev, 0);
        assert!(z.iter().zip(&zr).all(|(a, b)| *a == -b));
    }
}
