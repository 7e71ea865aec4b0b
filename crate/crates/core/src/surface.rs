//! Combinatorial model of the surface tesselated by right-angled regular m-gons
//! whose dual graph is the 1-skeleton of the m-cube.
//!
//! Conventions: axes are 1-based and cyclic mod m. A cube vertex is a `u32`
//! whose bit `p - 1` holds coordinate `p`. A systole `{i, (a_1..a_k)}` with
//! `k = m - 3` fixes coordinates `i+2, ..., i-2` (in that cyclic order) to
//! `a_1..a_k` and traverses the four cube edges in direction `i` at the
//! vertices whose coordinates `i-1` and `i+1` are free.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::{Bits, CAPACITY};
use crate::error::{Error, Result};

pub const MAX_M: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub m: usize,
}

impl SurfaceParams {
    pub fn new(m: usize) -> Result<Self> {
        if m < 5 {
            return Err(Error::NotHyperbolic(m));
        }
        if m > MAX_M || m * (1 << (m - 3)) > CAPACITY {
            return Err(Error::TooLarge(m, MAX_M));
        }
        Ok(SurfaceParams { m })
    }

    pub fn genus(&self) -> usize {
        1 + (self.m - 4) * (1 << (self.m - 3))
    }

    pub fn systole_count(&self) -> usize {
        self.m * (1 << (self.m - 3))
    }
}

/// `M(m) = 1 - 2^{m-2}(4 - m)`, the Euler-characteristic lower bound on the
/// number of pairwise intersections of a filling set.
pub fn min_intersections(params: SurfaceParams) -> i64 {
    let m = params.m as i64;
    1 - (1i64 << (m - 2)) * (4 - m)
}

#[inline]
pub fn next_axis(m: usize, i: usize) -> usize {
    i % m + 1
}

#[inline]
pub fn prev_axis(m: usize, i: usize) -> usize {
    (i + m - 2) % m + 1
}

#[inline]
pub fn bit(v: u32, p: usize) -> u32 {
    (v >> (p - 1)) & 1
}

#[inline]
pub fn flip(v: u32, p: usize) -> u32 {
    v ^ (1 << (p - 1))
}

/// A systole label. `tuple` packs `a_1` as the most significant of `k` bits,
/// so numeric order on `(axis, tuple)` is the lexicographic label order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Systole {
    pub axis: usize,
    pub tuple: u32,
    pub k: usize,
}

impl Systole {
    pub fn new(axis: usize, entries: &[u8]) -> Systole {
        let k = entries.len();
        let tuple = entries.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Systole { axis, tuple, k }
    }

    /// `a_t` for `t` in `1..=k`.
    #[inline]
    pub fn a(&self, t: usize) -> u32 {
        (self.tuple >> (self.k - t)) & 1
    }

    pub fn entries(&self) -> Vec<u8> {
        (1..=self.k).map(|t| self.a(t) as u8).collect()
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn validate(&self, params: SurfaceParams) -> Result<()> {
        if self.axis < 1 || self.axis > params.m || self.k != params.m - 3 || self.tuple >> self.k != 0 {
            return Err(Error::BadLabel(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for Systole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.entries().iter().map(|b| b.to_string()).collect();
        write!(f, "{}:({})", self.axis, body.join(","))
    }
}

impl FromStr for Systole {
    type Err = Error;
    fn from_str(s: &str) -> Result<Systole> {
        let bad = || Error::BadLabel(s.to_string());
        let (axis, rest) = s.split_once(':').ok_or_else(bad)?;
        let axis: usize = axis.trim().parse().map_err(|_| bad())?;
        let rest = rest.trim();
        let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let mut entries = Vec::new();
        for tok in inner.split(',') {
            match tok.trim() {
                "0" => entries.push(0),
                "1" => entries.push(1),
                _ => return Err(bad()),
            }
        }
        Ok(Systole::new(axis, &entries))
    }
}

/// A 4-cycle of the cube graph: free axes `i < j`, other coordinates taken from `base`
/// (which has bits `i` and `j` cleared).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Square {
    pub i: usize,
    pub j: usize,
    pub base: u32,
}

impl Square {
    pub fn containing(v: u32, p: usize, q: usize) -> Square {
        let (i, j) = if p < q { (p, q) } else { (q, p) };
        Square { i, j, base: v & !(1 << (i - 1)) & !(1 << (j - 1)) }
    }

    /// The fixed coordinates in increasing position order.
    pub fn rest(&self, m: usize) -> Vec<u8> {
        (1..=m).filter(|&p| p != self.i && p != self.j).map(|p| bit(self.base, p) as u8).collect()
    }

    pub fn vertices(&self) -> [u32; 4] {
        let (a, b) = (1u32 << (self.i - 1), 1u32 << (self.j - 1));
        [self.base, self.base | a, self.base | a | b, self.base | b]
    }

    pub fn is_realised(&self, m: usize) -> bool {
        self.j == self.i + 1 || (self.i == 1 && self.j == m)
    }

    fn sort_key(&self, m: usize) -> (usize, usize, Vec<u8>) {
        (self.i, self.j, self.rest(m))
    }

    pub fn label(&self, m: usize) -> String {
        let r: Vec<String> = self.rest(m).iter().map(|b| b.to_string()).collect();
        format!("{{({},{}),({})}}", self.i, self.j, r.join(","))
    }
}

/// A cube edge in direction `axis` joining `low` (coordinate `axis` = 0) and `low ^ e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeEdge {
    pub axis: usize,
    pub low: u32,
}

impl CubeEdge {
    pub fn at(v: u32, axis: usize) -> CubeEdge {
        CubeEdge { axis, low: v & !(1 << (axis - 1)) }
    }

    pub fn endpoints(&self) -> (u32, u32) {
        (self.low, flip(self.low, self.axis))
    }

    /// Dense index in `0..m·2^{m-1}`, ordered by `(axis, low)`.
    pub fn index(&self, m: usize) -> usize {
        let p = self.axis - 1;
        let v = self.low as usize;
        let compressed = (v & ((1 << p) - 1)) | ((v >> (p + 1)) << p);
        p * (1 << (m - 1)) + compressed
    }

    pub fn from_index(m: usize, id: usize) -> CubeEdge {
        let half = 1 << (m - 1);
        let p = id / half;
        let c = id % half;
        let low = (c & ((1 << p) - 1)) | ((c >> p) << (p + 1));
        CubeEdge { axis: p + 1, low: low as u32 }
    }
}

/// The cyclic sequence `square_0, edge_0, square_1, ..., edge_3` of a systole:
/// `edges[t]` joins `squares[t]` and `squares[(t + 1) % 4]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystoleCycle {
    pub squares: [usize; 4],
    pub edges: [CubeEdge; 4],
}

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub params: SurfaceParams,
    pub m: usize,
    pub k: usize,
    pub genus: usize,
    pub systoles: Vec<Systole>,
    pub squares: Vec<Square>,
    pub square_to_systoles: Vec<[usize; 2]>,
    pub systole_squares: Vec<[usize; 4]>,
    pub systole_cycle: Vec<SystoleCycle>,
    /// Intersecting partners of each systole, sorted.
    pub neighbors: Vec<[usize; 4]>,
    pub neighbor_bits: Vec<Bits>,
    /// Owning systole of each cube edge, by dense edge index.
    pub edge_owner: Vec<usize>,
    /// `square_lookup[p - 1][base]` = index of the realised square with cyclic axes `(p, p+1)`.
    square_lookup: Vec<HashMap<u32, usize>>,
}

impl SurfaceModel {
    pub fn n(&self) -> usize {
        self.systoles.len()
    }

    pub fn face_count(&self) -> usize {
        1 << self.m
    }

    pub fn edge_count(&self) -> usize {
        self.m << (self.m - 1)
    }

    pub fn systole_index(&self, s: &Systole) -> Option<usize> {
        if s.validate(self.params).is_err() {
            return None;
        }
        Some(((s.axis - 1) << self.k) | s.tuple as usize)
    }

    pub fn parse_label(&self, label: &str) -> Result<usize> {
        let s: Systole = label.parse()?;
        self.systole_index(&s).ok_or_else(|| Error::BadLabel(label.to_string()))
    }

    /// Systole owning the cube edge at `v` in direction `axis`.
    pub fn owner_of(&self, v: u32, axis: usize) -> usize {
        self.edge_owner[CubeEdge::at(v, axis).index(self.m)]
    }

    /// Realised square with cyclic axes `(p, p+1)` containing `v`.
    pub fn square_at(&self, v: u32, p: usize) -> usize {
        let q = next_axis(self.m, p);
        let base = v & !(1 << (p - 1)) & !(1 << (q - 1));
        self.square_lookup[p - 1][&base]
    }

    pub fn square_index(&self, sq: &Square) -> Option<usize> {
        if !sq.is_realised(self.m) {
            return None;
        }
        let p = if sq.i == 1 && sq.j == self.m { self.m } else { sq.i };
        self.square_lookup[p - 1].get(&sq.base).copied()
    }

    /// Label rule: axes adjacent mod m and, with `j = i+1`, `(a_2..a_k) = (b_1..b_{k-1})`.
    pub fn intersects(&self, s1: usize, s2: usize) -> bool {
        intersects_rule(self.m, &self.systoles[s1], &self.systoles[s2])
    }

    /// Square-sharing definition of intersection.
    pub fn shares_square(&self, s1: usize, s2: usize) -> bool {
        s1 != s2 && self.systole_squares[s1].iter().any(|q| self.systole_squares[s2].contains(q))
    }

    /// Number of intersecting pairs inside a subset.
    pub fn intersections_within(&self, set: &Bits) -> usize {
        set.iter().map(|c| self.neighbor_bits[c].and(set).len()).sum::<usize>() / 2
    }

    /// The `n x n` intersection matrix `A` and the `2n x n` square incidence matrix `N`.
    pub fn incidence_matrices(&self) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
        let n = self.n();
        let mut a = vec![vec![0u8; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for &j in &self.neighbors[i] {
                row[j] = 1;
            }
        }
        let mut inc = vec![vec![0u8; n]; self.squares.len()];
        for (q, pair) in self.square_to_systoles.iter().enumerate() {
            for &c in pair {
                inc[q][c] = 1;
            }
        }
        (a, inc)
    }

    pub fn to_json(&self) -> SurfaceJson {
        SurfaceJson {
            m: self.m,
            systoles: self
                .systoles
                .iter()
                .map(|s| SystoleJson { axis: s.axis, tuple: s.entries() })
                .collect(),
            genus: self.genus,
        }
    }

    /// Intersection graph in Graphviz DOT format.
    pub fn to_dot(&self) -> String {
        let mut out = format!("graph intersections_m{} {{\n", self.m);
        for s in &self.systoles {
            out.push_str(&format!("  \"{}\";\n", s));
        }
        for i in 0..self.n() {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push_str(&format!("  \"{}\" -- \"{}\";\n", self.systoles[i], self.systoles[j]));
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn labels(&self, set: &Bits) -> Vec<String> {
        set.iter().map(|c| self.systoles[c].to_string()).collect()
    }
}

pub fn intersects_rule(m: usize, s: &Systole, t: &Systole) -> bool {
    let k = m - 3;
    let (lo, hi) = if t.axis == next_axis(m, s.axis) {
        (s, t)
    } else if s.axis == next_axis(m, t.axis) {
        (t, s)
    } else {
        return false;
    };
    let tail = lo.tuple & ((1 << (k - 1)) - 1);
    let head = hi.tuple >> 1;
    tail == head
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystoleJson {
    pub axis: usize,
    pub tuple: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceJson {
    pub m: usize,
    pub systoles: Vec<SystoleJson>,
    pub genus: usize,
}

/// Vertex of the systole `{i, a}` with coordinate `i` = 0, `i-1` = `b1`, `i+1` = `b2`.
fn systole_vertex(m: usize, s: &Systole, b1: u32, b2: u32) -> u32 {
    let i = s.axis;
    let mut v = 0u32;
    for t in 1..=s.k {
        let p = (i + t) % m + 1;
        v |= s.a(t) << (p - 1);
    }
    v |= b1 << (prev_axis(m, i) - 1);
    v |= b2 << (next_axis(m, i) - 1);
    v
}

pub fn build_surface(params: SurfaceParams) -> Result<SurfaceModel> {
    let params = SurfaceParams::new(params.m)?;
    let m = params.m;
    let k = m - 3;

    let mut systoles = Vec::with_capacity(params.systole_count());
    for axis in 1..=m {
        for tuple in 0..(1u32 << k) {
            systoles.push(Systole { axis, tuple, k });
        }
    }

    let mut squares = Vec::with_capacity(2 * systoles.len());
    for p in 1..=m {
        let q = next_axis(m, p);
        for v in 0..(1u32 << m) {
            if bit(v, p) == 0 && bit(v, q) == 0 {
                squares.push(Square::containing(v, p, q));
            }
        }
    }
    squares.sort_by_key(|sq| sq.sort_key(m));
    let mut square_lookup = vec![HashMap::new(); m];
    for (idx, sq) in squares.iter().enumerate() {
        let p = if sq.i == 1 && sq.j == m { m } else { sq.i };
        square_lookup[p - 1].insert(sq.base, idx);
    }

    let mut edge_owner = vec![usize::MAX; m << (m - 1)];
    let mut systole_edges = Vec::with_capacity(systoles.len());
    for (c, s) in systoles.iter().enumerate() {
        let mut es = Vec::with_capacity(4);
        for (b1, b2) in [(0, 0), (0, 1), (1, 1), (1, 0)] {
            let e = CubeEdge { axis: s.axis, low: systole_vertex(m, s, b1, b2) };
            let id = e.index(m);
            if edge_owner[id] != usize::MAX {
                return Err(Error::Invariant(format!("cube edge {:?} owned twice", e)));
            }
            edge_owner[id] = c;
            es.push(e);
        }
        systole_edges.push(es);
    }
    if edge_owner.iter().any(|&o| o == usize::MAX) {
        return Err(Error::Invariant("some cube edge has no owning systole".into()));
    }

    let mut model = SurfaceModel {
        params,
        m,
        k,
        genus: params.genus(),
        systoles,
        squares,
        square_to_systoles: Vec::new(),
        systole_squares: Vec::new(),
        systole_cycle: Vec::new(),
        neighbors: Vec::new(),
        neighbor_bits: Vec::new(),
        edge_owner,
        square_lookup,
    };

    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); model.squares.len()];
    for (c, es) in systole_edges.iter().enumerate() {
        let mut sqs = Vec::with_capacity(4);
        for e in es {
            for p in [prev_axis(m, e.axis), e.axis] {
                let q = model.square_at(e.low, p);
                if !sqs.contains(&q) {
                    sqs.push(q);
                }
            }
        }
        if sqs.len() != 4 {
            return Err(Error::Invariant(format!("systole {} meets {} squares", model.systoles[c], sqs.len())));
        }
        sqs.sort_unstable();
        for &q in &sqs {
            holders[q].push(c);
        }
        model.systole_cycle.push(order_cycle(&model, es)?);
        model.systole_squares.push([sqs[0], sqs[1], sqs[2], sqs[3]]);
    }
    for (q, h) in holders.iter().enumerate() {
        if h.len() != 2 || h[0] == h[1] {
            return Err(Error::Invariant(format!("square {} lies on {} systoles", q, h.len())));
        }
        model.square_to_systoles.push([h[0], h[1]]);
    }
    for c in 0..model.n() {
        let mut nb: Vec<usize> = model.systole_squares[c]
            .iter()
            .map(|&q| {
                let [a, b] = model.square_to_systoles[q];
                if a == c {
                    b
                } else {
                    a
                }
            })
            .collect();
        nb.sort_unstable();
        nb.dedup();
        if nb.len() != 4 {
            return Err(Error::Invariant(format!("systole {} has {} partners", model.systoles[c], nb.len())));
        }
        model.neighbor_bits.push(Bits::from_indices(nb.iter().copied()));
        model.neighbors.push([nb[0], nb[1], nb[2], nb[3]]);
    }
    Ok(model)
}

/// Orders a systole's squares starting at the least one, stepping first towards
/// the lesser of its two neighbours in the cycle.
fn order_cycle(model: &SurfaceModel, es: &[CubeEdge]) -> Result<SystoleCycle> {
    let m = model.m;
    let ends: Vec<(usize, usize)> =
        es.iter().map(|e| (model.square_at(e.low, prev_axis(m, e.axis)), model.square_at(e.low, e.axis))).collect();
    let other = |e: usize, q: usize| if ends[e].0 == q { ends[e].1 } else { ends[e].0 };
    let start = ends.iter().flat_map(|&(a, b)| [a, b]).min().unwrap();
    let incident: Vec<usize> = (0..4).filter(|&e| ends[e].0 == start || ends[e].1 == start).collect();
    if incident.len() != 2 {
        return Err(Error::Invariant("systole squares do not form a 4-cycle".into()));
    }
    let mut first = incident[0];
    if other(incident[1], start) < other(first, start) {
        first = incident[1];
    }
    let mut squares = [start; 4];
    let mut edges = [es[0]; 4];
    let mut used = [false; 4];
    let (mut cur, mut e) = (start, first);
    for t in 0..4 {
        squares[t] = cur;
        edges[t] = es[e];
        used[e] = true;
        cur = other(e, cur);
        if t < 3 {
            e = (0..4)
                .find(|&f| !used[f] && (ends[f].0 == cur || ends[f].1 == cur))
                .ok_or_else(|| Error::Invariant("broken systole cycle".into()))?;
        }
    }
    if cur != start {
        return Err(Error::Invariant("systole cycle does not close".into()));
    }
    Ok(SystoleCycle { squares, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_m() {
        assert!(matches!(SurfaceParams::new(4), Err(Error::NotHyperbolic(4))));
        assert!(build_surface(SurfaceParams { m: 4 }).is_err());
    }

    #[test]
    fn counts() {
        for (m, n, g) in [(5, 20, 5), (6, 48, 17), (7, 112, 49), (8, 256, 129)] {
            let s = build_surface(SurfaceParams::new(m).unwrap()).unwrap();
            assert_eq!(s.n(), n);
            assert_eq!(s.genus, g);
            assert_eq!(s.squares.len(), 2 * n);
            assert_eq!(min_intersections(s.params), 2 * g as i64 - 1);
        }
    }

    #[test]
    fn example_four_squares() {
        let s = build_surface(SurfaceParams::new(5).unwrap()).unwrap();
        let c = s.parse_label("1:(0,0)").unwrap();
        let mut got: Vec<String> = s.systole_squares[c].iter().map(|&q| s.squares[q].label(5)).collect();
        got.sort();
        let mut want = vec!["{(1,2),(0,0,0)}", "{(1,5),(1,0,0)}", "{(1,2),(0,0,1)}", "{(1,5),(0,0,0)}"];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn label_roundtrip() {
        let s: Systole = "3:(1,0,1)".parse().unwrap();
        assert_eq!(s.axis, 3);
        assert_eq!(s.entries(), vec![1, 0, 1]);
        assert_eq!(s.to_string(), "3:(1,0,1)");
        assert!("3:(1,2)".parse::<Systole>().is_err());
        assert!("x".parse::<Systole>().is_err());
    }

    #[test]
    fn edge_index_roundtrip() {
        for m in 5..=7 {
            for id in 0..(m << (m - 1)) {
                let e = CubeEdge::from_index(m, id);
                assert_eq!(bit(e.low, e.axis), 0);
                assert_eq!(e.index(m), id);
            }
        }
    }

    #[test]
    fn cycles_are_consistent() {
        for m in 5..=7 {
            let s = build_surface(SurfaceParams::new(m).unwrap()).unwrap();
            for (c, cyc) in s.systole_cycle.iter().enumerate() {
                let mut sq = cyc.squares;
                sq.sort_unstable();
                assert_eq!(sq, s.systole_squares[c]);
                assert_eq!(cyc.squares[0], sq[0]);
                assert!(cyc.squares[1] < cyc.squares[3]);
                for t in 0..4 {
                    let e = cyc.edges[t];
                    let (a, b) = e.endpoints();
                    for q in [cyc.squares[t], cyc.squares[(t + 1) % 4]] {
                        let vs = s.squares[q].vertices();
                        assert!(vs.contains(&a) && vs.contains(&b));
                    }
                    // the two traversed edges at a square are opposite sides
                    let prev = cyc.edges[(t + 3) % 4];
                    assert_eq!(prev.axis, e.axis);
                    assert_ne!(prev.low, e.low);
                }
            }
        }
    }
}
