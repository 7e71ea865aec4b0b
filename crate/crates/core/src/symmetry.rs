//! Automorphisms of the tesselated surface: signed axis permutations of the cube
//! that carry realised squares to realised squares, and the orbit machinery built
//! on their action on systoles.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::surface::{bit, CubeEdge, Square, SurfaceModel};

/// An axis permutation followed by coordinate flips. `perm[p - 1]` is the image of axis `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    pub perm: Vec<usize>,
    pub flips: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryJson {
    pub perm: Vec<usize>,
    pub flips: Vec<u8>,
}

impl Automorphism {
    pub fn identity(m: usize) -> Automorphism {
        Automorphism { perm: (1..=m).collect(), flips: 0 }
    }

    #[inline]
    pub fn permute(&self, v: u32) -> u32 {
        let mut w = 0u32;
        for (p, &q) in self.perm.iter().enumerate() {
            w |= ((v >> p) & 1) << (q - 1);
        }
        w
    }

    #[inline]
    pub fn apply(&self, v: u32) -> u32 {
        self.permute(v) ^ self.flips
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        let perm = other.perm.iter().map(|&q| self.perm[q - 1]).collect();
        Automorphism { perm, flips: self.permute(other.flips) ^ self.flips }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut inv = vec![0; self.perm.len()];
        for (p, &q) in self.perm.iter().enumerate() {
            inv[q - 1] = p + 1;
        }
        let g = Automorphism { perm: inv, flips: 0 };
        let flips = g.permute(self.flips);
        Automorphism { perm: g.perm, flips }
    }

    pub fn apply_square(&self, sq: &Square) -> Square {
        Square::containing(self.apply(sq.base), self.perm[sq.i - 1], self.perm[sq.j - 1])
    }

    pub fn apply_edge(&self, e: &CubeEdge) -> CubeEdge {
        CubeEdge::at(self.apply(e.low), self.perm[e.axis - 1])
    }

    pub fn preserves_realised_squares(&self, model: &SurfaceModel) -> bool {
        model.squares.iter().all(|sq| self.apply_square(sq).is_realised(model.m))
    }

    pub fn to_json(&self) -> SymmetryJson {
        let m = self.perm.len();
        SymmetryJson { perm: self.perm.clone(), flips: (1..=m).map(|p| bit(self.flips, p) as u8).collect() }
    }

    pub fn from_json(j: &SymmetryJson) -> Automorphism {
        let flips = j.flips.iter().enumerate().fold(0u32, |acc, (p, &b)| acc | ((b as u32) << p));
        Automorphism { perm: j.perm.clone(), flips }
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=m).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for t in k..cur.len() {
            cur.swap(k, t);
            rec(k + 1, cur, out);
            cur.swap(k, t);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

fn dihedral(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 0..m {
        out.push((0..m).map(|p| (p + r) % m + 1).collect());
        out.push((0..m).map(|p| (r + m - p) % m + 1).collect());
    }
    out.sort();
    out
}

/// Filters every signed permutation of the cube by the realised-square predicate.
pub fn automorphisms_by_filter(model: &SurfaceModel) -> Vec<Automorphism> {
    let m = model.m;
    let mut out = Vec::new();
    for perm in permutations(m) {
        for flips in 0..(1u32 << m) {
            let g = Automorphism { perm: perm.clone(), flips };
            if g.preserves_realised_squares(model) {
                out.push(g);
            }
        }
    }
    out.sort();
    out
}

/// Proposes dihedral axis permutations with arbitrary flips and verifies each.
pub fn automorphisms_fast(model: &SurfaceModel) -> Result<Vec<Automorphism>> {
    let m = model.m;
    let mut out = Vec::new();
    for perm in dihedral(m) {
        for flips in 0..(1u32 << m) {
            let g = Automorphism { perm: perm.clone(), flips };
            if !g.preserves_realised_squares(model) {
                return Err(Error::Invariant(format!("proposed automorphism {:?} fails verification", g)));
            }
            out.push(g);
        }
    }
    out.sort();
    Ok(out)
}

/// The automorphism group acting on systole indices.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    pub m: usize,
    pub elements: Vec<Automorphism>,
    /// `systole_perm[g][c]` = index of `g · c`.
    pub systole_perm: Vec<Vec<u16>>,
}

impl SymmetryGroup {
    /// Full group. For `m <= 7` the predicate filter over all signed permutations
    /// is authoritative; larger `m` uses the verified dihedral proposal.
    pub fn new(model: &SurfaceModel) -> Result<SymmetryGroup> {
        let elements = if model.m <= 7 { automorphisms_by_filter(model) } else { automorphisms_fast(model)? };
        SymmetryGroup::from_elements(model, elements)
    }

    /// Fast construction (dihedral proposal, verified).
    pub fn new_fast(model: &SurfaceModel) -> Result<SymmetryGroup> {
        SymmetryGroup::from_elements(model, automorphisms_fast(model)?)
    }

    pub fn from_elements(model: &SurfaceModel, elements: Vec<Automorphism>) -> Result<SymmetryGroup> {
        let mut systole_perm = Vec::with_capacity(elements.len());
        for g in &elements {
            let row: Result<Vec<u16>> = (0..model.n()).map(|c| act(g, c, model).map(|x| x as u16)).collect();
            systole_perm.push(row?);
        }
        Ok(SymmetryGroup { m: model.m, elements, systole_perm })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Setwise stabiliser of the axis-1 family `C_1` (elements fixing axis 1).
    pub fn stabilizer_of_c1(&self) -> SymmetryGroup {
        let keep: Vec<usize> = (0..self.elements.len()).filter(|&g| self.elements[g].perm[0] == 1).collect();
        SymmetryGroup {
            m: self.m,
            elements: keep.iter().map(|&g| self.elements[g].clone()).collect(),
            systole_perm: keep.iter().map(|&g| self.systole_perm[g].clone()).collect(),
        }
    }

    #[inline]
    pub fn image(&self, g: usize, set: &Bits) -> Bits {
        let p = &self.systole_perm[g];
        set.iter().map(|c| p[c] as usize).collect()
    }

    /// Lexicographically least image of `set` over the group.
    pub fn canonical_form(&self, set: &Bits) -> Bits {
        let mut best = *set;
        for g in 0..self.elements.len() {
            let img = self.image(g, set);
            if img.lex_cmp(&best) == std::cmp::Ordering::Less {
                best = img;
            }
        }
        best
    }

    pub fn orbit_of_systole(&self, c: usize) -> BTreeSet<usize> {
        self.systole_perm.iter().map(|p| p[c] as usize).collect()
    }

    pub fn stabilizer_order(&self, c: usize) -> usize {
        self.systole_perm.iter().filter(|p| p[c] as usize == c).count()
    }

    /// All distinct images of a set (its orbit).
    pub fn orbit_of_set(&self, set: &Bits) -> BTreeSet<Bits> {
        (0..self.elements.len()).map(|g| self.image(g, set)).collect()
    }

    pub fn is_closed(&self) -> bool {
        let set: HashSet<&Automorphism> = self.elements.iter().collect();
        self.elements.iter().all(|a| set.contains(&a.inverse()))
            && self.elements.iter().all(|a| self.elements.iter().all(|b| set.contains(&a.compose(b))))
    }
}

/// Image of systole `c` under `g`, identified through its square set.
pub fn act(g: &Automorphism, c: usize, model: &SurfaceModel) -> Result<usize> {
    let e = model.systole_cycle[c].edges[0];
    let img = g.apply_edge(&e);
    let d = model.owner_of(img.low, img.axis);
    let mut want: Vec<usize> = Vec::with_capacity(4);
    for &q in &model.systole_squares[c] {
        let sq = g.apply_square(&model.squares[q]);
        match model.square_index(&sq) {
            Some(x) => want.push(x),
            None => return Err(Error::Invariant(format!("{:?} maps a realised square outside the family", g))),
        }
    }
    want.sort_unstable();
    if want != model.systole_squares[d] {
        return Err(Error::Invariant(format!("{:?} does not map systole {} to a systole", g, model.systoles[c])));
    }
    Ok(d)
}

/// One canonical (lexicographically least) representative per orbit of subsets of
/// `C_1` of size at most `max_size` under the setwise stabiliser of `C_1`.
/// Subsets are reported as local indices into `C_1` (which are also global indices).
pub fn subset_orbit_representatives(model: &SurfaceModel, group: &SymmetryGroup, max_size: usize) -> Vec<Bits> {
    let stab = group.stabilizer_of_c1();
    let base = 1usize << model.k;
    let canon = |set: &Bits| stab.canonical_form(set);
    let mut all = vec![Bits::EMPTY];
    let mut level: BTreeSet<Bits> = [Bits::EMPTY].into_iter().collect();
    for _ in 0..max_size.min(base) {
        let mut next = BTreeSet::new();
        for rep in &level {
            for x in 0..base {
                if !rep.contains(x) {
                    next.insert(canon(&rep.with(x)));
                }
            }
        }
        all.extend(next.iter().copied());
        level = next;
    }
    all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.lex_cmp(b)));
    all
}

/// Reference count of subset orbits by explicit partition of all subsets (small cases).
pub fn subset_orbit_count_bruteforce(model: &SurfaceModel, group: &SymmetryGroup, max_size: usize) -> usize {
    let stab = group.stabilizer_of_c1();
    let base = 1usize << model.k;
    let mut seen: HashSet<Bits> = HashSet::new();
    let mut count = 0;
    for mask in 0u64..(1u64 << base) {
        if mask.count_ones() as usize > max_size {
            continue;
        }
        let set: Bits = (0..base).filter(|&x| mask >> x & 1 == 1).collect();
        if seen.contains(&set) {
            continue;
        }
        count += 1;
        seen.extend(stab.orbit_of_set(&set));
    }
    count
}


#[cfg(test)]
mod m7 {
    use super::*;
    use crate::surface::{build_surface, SurfaceParams};

    #[test]
    fn orbit_count_m7() {
        let s = build_surface(SurfaceParams::new(7).unwrap()).unwrap();
        let g = SymmetryGroup::new(&s).unwrap();
        assert_eq!(g.order(), 1792);
        assert_eq!(g.stabilizer_of_c1().order(), 2 * 128);
        assert_eq!(subset_orbit_representatives(&s, &g, 7).len(), 923);
    }
}
