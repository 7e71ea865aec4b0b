//! Oriented combinatorial map of the tesselation. Faces are cube vertices, darts
//! are sides `(face, axis)`, tesselation vertices are realised squares.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::surface::{flip, next_axis, prev_axis, CubeEdge, SurfaceModel};

pub type Dart = usize;

#[derive(Clone, Debug)]
pub struct CombinatorialMap {
    pub m: usize,
    pub faces: usize,
    /// `+1` or `-1` per face; `+1` walks the sides in increasing axis order.
    pub orientation: Vec<i8>,
    /// Cyclic order of the four corner faces around each realised square.
    pub rotation: Vec<[u32; 4]>,
}

impl CombinatorialMap {
    #[inline]
    pub fn dart(&self, face: u32, axis: usize) -> Dart {
        face as usize * self.m + axis - 1
    }

    #[inline]
    pub fn face_of(&self, d: Dart) -> u32 {
        (d / self.m) as u32
    }

    #[inline]
    pub fn axis_of(&self, d: Dart) -> usize {
        d % self.m + 1
    }

    pub fn dart_count(&self) -> usize {
        self.faces * self.m
    }

    /// The same side seen from the adjacent face.
    #[inline]
    pub fn alpha(&self, d: Dart) -> Dart {
        let (v, k) = (self.face_of(d), self.axis_of(d));
        self.dart(flip(v, k), k)
    }

    /// Next side along the oriented boundary walk of the same face.
    #[inline]
    pub fn phi(&self, d: Dart) -> Dart {
        let (v, k) = (self.face_of(d), self.axis_of(d));
        let k2 = if self.orientation[v as usize] > 0 { next_axis(self.m, k) } else { prev_axis(self.m, k) };
        self.dart(v, k2)
    }

    /// Axis pair `(p, p+1)` (given by `p`) of the corner where the dart starts.
    #[inline]
    pub fn tail_axis(&self, d: Dart) -> usize {
        let (v, k) = (self.face_of(d), self.axis_of(d));
        if self.orientation[v as usize] > 0 {
            prev_axis(self.m, k)
        } else {
            k
        }
    }

    #[inline]
    pub fn head_axis(&self, d: Dart) -> usize {
        let (v, k) = (self.face_of(d), self.axis_of(d));
        if self.orientation[v as usize] > 0 {
            k
        } else {
            prev_axis(self.m, k)
        }
    }

    pub fn tail(&self, d: Dart, model: &SurfaceModel) -> usize {
        model.square_at(self.face_of(d), self.tail_axis(d))
    }

    pub fn head(&self, d: Dart, model: &SurfaceModel) -> usize {
        model.square_at(self.face_of(d), self.head_axis(d))
    }

    pub fn edge_of(&self, d: Dart, m: usize) -> usize {
        CubeEdge::at(self.face_of(d), self.axis_of(d)).index(m)
    }

    /// Darts of one face in walk order.
    pub fn face_walk(&self, face: u32) -> Vec<Dart> {
        let start = self.dart(face, 1);
        let mut walk = vec![start];
        let mut d = self.phi(start);
        while d != start {
            walk.push(d);
            d = self.phi(d);
        }
        walk
    }

    pub fn euler_characteristic(&self, model: &SurfaceModel) -> i64 {
        model.squares.len() as i64 - model.edge_count() as i64 + self.faces as i64
    }
}

/// Orients the faces by breadth-first propagation from face 0: neighbours across a
/// side must traverse it in opposite directions. Every side is re-checked afterwards.
pub fn build_combinatorial_map(model: &SurfaceModel) -> Result<CombinatorialMap> {
    let m = model.m;
    let faces = 1usize << m;
    let mut orientation = vec![0i8; faces];
    orientation[0] = 1;
    let mut queue = VecDeque::from([0u32]);
    while let Some(v) = queue.pop_front() {
        for k in 1..=m {
            let w = flip(v, k);
            if orientation[w as usize] == 0 {
                orientation[w as usize] = -orientation[v as usize];
                queue.push_back(w);
            }
        }
    }
    let rotation = model.squares.iter().map(|sq| sq.vertices()).collect();
    let map = CombinatorialMap { m, faces, orientation, rotation };
    for d in 0..map.dart_count() {
        let e = map.alpha(d);
        if map.tail(d, model) != map.head(e, model) || map.head(d, model) != map.tail(e, model) {
            return Err(Error::Invariant(format!("orientation inconsistent at dart {}", d)));
        }
        if map.head(d, model) != map.tail(map.phi(d), model) {
            return Err(Error::Invariant(format!("face walk broken at dart {}", d)));
        }
    }
    Ok(map)
}
