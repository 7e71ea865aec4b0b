//! Largest minimal filling sets.
//!
//! Work with complements: `S` is a minimal filling set iff its complement `T`
//! is a maximal member of the family `F` of sets whose complement fills. `F` is
//! closed under subsets, so the largest `S` is the complement of the smallest
//! maximal member of `F`.
//!
//! Orbits of `F` are visited once each by orderly generation: sets grow by
//! elements past their current maximum and a set is kept only when it is the
//! lex-least member of its orbit. Removing the largest element of a lex-least
//! set leaves a lex-least set, so every orbit is reached.
//!
//! For `T` in `F` and `c` outside, `T + c` stays in `F` iff
//! `rank(c, T) = |N(c) ∩ T|`, where `rank(c, T)` is the cycle rank that the
//! four sides of `c` add to the graph of sides already cut by `T`. Both sides of
//! the test only grow with `T`, so a skipped systole `c` can never be blocked
//! below a node once `rank(c, T ∪ open) <= |N(c) ∩ T|`, and the branch is cut.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::error::Result;
use crate::surface::SurfaceModel;
use crate::symmetry::SymmetryGroup;

use super::regions::FillingOracle;
use super::{FillingKind, FillingResult, SearchOptions};

/// Restarts of the randomized greedy used for the initial bound and as the
/// fallback when no exact search is available.
pub const GREEDY_RESTARTS: usize = 2000;
const GREEDY_SEED: u64 = 0x5eed_0f_f111;

/// Union-find over at most 64 faces, small enough to copy per node.
#[derive(Clone, Copy)]
struct SmallUf {
    parent: [u8; 64],
    comps: u32,
}

impl SmallUf {
    fn new(k: usize) -> SmallUf {
        let mut parent = [0u8; 64];
        for (i, p) in parent.iter_mut().enumerate() {
            *p = i as u8;
        }
        SmallUf { parent, comps: k as u32 }
    }

    fn find(&mut self, mut x: u8) -> u8 {
        while self.parent[x as usize] != x {
            let g = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = g;
            x = g;
        }
        x
    }

    fn union(&mut self, a: u8, b: u8) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a as usize] = b;
            self.comps -= 1;
        }
    }
}

#[derive(Clone, Copy)]
struct Node {
    t: u64,
    uf: SmallUf,
    next: usize,
}

/// Statistics of an exact maximum search.
#[derive(Clone, Debug, Default)]
pub struct OrderlyStats {
    pub nodes: u64,
    /// Smallest maximal complement size seen (the answer when the search completes).
    pub best: usize,
    /// Orbit representatives of the maximal complements of size `best`, in systole indices.
    pub optima: Vec<Bits>,
    pub completed: bool,
}

/// Orderly search over complements. Systoles are relabelled by `order` so that
/// bit `p` of a mask is systole `order[p]`.
pub struct OrderlySearch {
    n: usize,
    faces: usize,
    order: Vec<usize>,
    edges: Vec<[(u8, u8); 4]>,
    nbr: Vec<u64>,
    /// Byte tables of every group element acting on masks.
    tables: Vec<Vec<[u64; 256]>>,
}

impl OrderlySearch {
    /// `None` when the masks do not fit (more than 64 systoles or faces).
    pub fn new(model: &SurfaceModel, group: &SymmetryGroup) -> Option<OrderlySearch> {
        let n = model.n();
        if n > 64 || model.face_count() > 64 {
            return None;
        }
        let oracle = FillingOracle::new(model);
        let order = ladder_order(model, &oracle);
        let mut pos = vec![0usize; n];
        for (p, &c) in order.iter().enumerate() {
            pos[c] = p;
        }
        let edges = order.iter().map(|&c| oracle.edges[c]).collect();
        let nbr = order.iter().map(|&c| oracle.neighbors[c].iter().fold(0u64, |a, d| a | 1 << pos[d])).collect();
        let bytes = n.div_ceil(8);
        let tables = (0..group.order())
            .map(|g| {
                (0..bytes)
                    .map(|b| {
                        let mut tb = [0u64; 256];
                        for (v, slot) in tb.iter_mut().enumerate() {
                            for k in 0..8 {
                                let p = 8 * b + k;
                                if v >> k & 1 == 1 && p < n {
                                    *slot |= 1 << pos[group.systole_perm[g][order[p]] as usize];
                                }
                            }
                        }
                        tb
                    })
                    .collect()
            })
            .collect();
        Some(OrderlySearch { n, faces: model.face_count(), order, edges, nbr, tables })
    }

    fn to_bits(&self, t: u64) -> Bits {
        (0..self.n).filter(|&p| t >> p & 1 == 1).map(|p| self.order[p]).collect()
    }

    fn image(&self, g: usize, t: u64) -> u64 {
        self.tables[g].iter().enumerate().fold(0, |r, (b, tb)| r | tb[(t >> (8 * b) & 0xff) as usize])
    }

    /// Lex-least in its orbit, comparing masks by their lowest differing bit.
    fn canonical(&self, t: u64) -> bool {
        (0..self.tables.len()).all(|g| {
            let im = self.image(g, t);
            let d = im ^ t;
            d == 0 || d & d.wrapping_neg() & im == 0
        })
    }

    fn cut(&self, uf: &mut SmallUf, p: usize) {
        for &(a, b) in &self.edges[p] {
            uf.union(a, b);
        }
    }

    /// Cycle rank the sides of `p` add to the cut graph.
    fn rank(&self, uf: &SmallUf, p: usize) -> u32 {
        let mut u = *uf;
        self.cut(&mut u, p);
        4 - (uf.comps - u.comps)
    }

    /// `t + p` stays in the family, given `t` in it.
    fn free(&self, uf: &SmallUf, t: u64, p: usize) -> bool {
        self.rank(uf, p) == (self.nbr[p] & t).count_ones()
    }

    fn is_maximal(&self, node: &Node) -> bool {
        (0..self.n).all(|c| node.t >> c & 1 == 1 || !self.free(&node.uf, node.t, c))
    }

    /// Calls `f` on every child that survives the family test, the
    /// skipped-systole test and the canonicity test.
    fn expand(&self, node: &Node, mut f: impl FnMut(Node)) {
        let t = node.t;
        let n = self.n;
        let all = if n == 64 { !0 } else { (1u64 << n) - 1 };
        let free: Vec<usize> = (node.next..n).filter(|&d| self.free(&node.uf, t, d)).collect();
        // suffix[i]: the node's graph with free[i..] also cut
        let mut suffix = vec![node.uf; free.len() + 1];
        for i in (0..free.len()).rev() {
            suffix[i] = suffix[i + 1];
            self.cut(&mut suffix[i], free[i]);
        }
        for (i, &p) in free.iter().enumerate() {
            let skipped = !t & all & ((1u64 << p) - 1);
            // later children only lose open systoles, so this failure is final
            if self.any_unblockable(skipped, &suffix[i], t) {
                break;
            }
            let t2 = t | 1 << p;
            let mut uf = node.uf;
            self.cut(&mut uf, p);
            let mut open_uf = uf;
            for &d in &free[i + 1..] {
                if self.free(&uf, t2, d) {
                    self.cut(&mut open_uf, d);
                }
            }
            if self.any_unblockable(skipped, &open_uf, t2) || !self.canonical(t2) {
                continue;
            }
            f(Node { t: t2, uf, next: p + 1 });
        }
    }

    fn any_unblockable(&self, mut skipped: u64, open_uf: &SmallUf, t: u64) -> bool {
        while skipped != 0 {
            let c = skipped.trailing_zeros() as usize;
            skipped &= skipped - 1;
            if self.rank(open_uf, c) <= (self.nbr[c] & t).count_ones() {
                return true;
            }
        }
        false
    }

    fn children(&self, node: &Node) -> Vec<Node> {
        let mut out = Vec::new();
        self.expand(node, |c| out.push(c));
        out
    }

    /// Finds every orbit of maximal complements of the least size not above
    /// `bound`; `bound` is typically the size of a known maximal complement.
    pub fn run(&self, bound: usize, threads: usize, deadline: Option<Instant>) -> OrderlyStats {
        let shared = Shared {
            best: AtomicUsize::new(bound),
            hits: Mutex::new(Vec::new()),
            nodes: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            deadline,
        };
        // a shallow frontier feeds the workers
        let mut frontier = vec![Node { t: 0, uf: SmallUf::new(self.faces), next: 0 }];
        let mut tasks = Vec::new();
        for _ in 0..3 {
            let mut next = Vec::new();
            for node in frontier {
                self.visit(&node, &shared);
                if (node.t.count_ones() as usize) < shared.best.load(Ordering::SeqCst) {
                    next.extend(self.children(&node));
                }
            }
            frontier = next;
        }
        tasks.extend(frontier);
        let cursor = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..threads.max(1).min(tasks.len().max(1)) {
                s.spawn(|| {
                    let mut local = 0u64;
                    loop {
                        let i = cursor.fetch_add(1, Ordering::SeqCst);
                        if i >= tasks.len() || shared.stop.load(Ordering::Relaxed) {
                            break;
                        }
                        self.dfs(&tasks[i], &shared, &mut local);
                    }
                    shared.nodes.fetch_add(local, Ordering::SeqCst);
                });
            }
        });
        let best = shared.best.load(Ordering::SeqCst);
        let hits = shared.hits.into_inner().unwrap();
        let mut optima: Vec<Bits> =
            hits.iter().filter(|t| t.count_ones() as usize == best).map(|&t| self.to_bits(t)).collect();
        optima.sort_by(|a, b| a.lex_cmp(b));
        OrderlyStats {
            nodes: shared.nodes.load(Ordering::SeqCst),
            best,
            optima,
            completed: !shared.stop.load(Ordering::SeqCst),
        }
    }

    fn visit(&self, node: &Node, shared: &Shared) {
        let size = node.t.count_ones() as usize;
        if size <= shared.best.load(Ordering::SeqCst) && self.is_maximal(node) {
            shared.best.fetch_min(size, Ordering::SeqCst);
            shared.hits.lock().unwrap().push(node.t);
        }
    }

    fn dfs(&self, node: &Node, shared: &Shared, local: &mut u64) {
        *local += 1;
        if *local % 4096 == 0 {
            if let Some(d) = shared.deadline {
                if Instant::now() >= d {
                    shared.stop.store(true, Ordering::SeqCst);
                }
            }
        }
        if shared.stop.load(Ordering::Relaxed) {
            return;
        }
        self.visit(node, shared);
        if node.t.count_ones() as usize >= shared.best.load(Ordering::Relaxed) {
            return;
        }
        self.expand(node, |c| self.dfs(&c, shared, local));
    }
}

struct Shared {
    best: AtomicUsize,
    hits: Mutex<Vec<u64>>,
    nodes: AtomicU64,
    stop: AtomicBool,
    deadline: Option<Instant>,
}

/// Breadth-first order over systoles sharing a face, starting at systole 0.
fn ladder_order(model: &SurfaceModel, oracle: &FillingOracle) -> Vec<usize> {
    let n = model.n();
    let near: Vec<Bits> = (0..n)
        .map(|c| {
            let mut b = Bits::EMPTY;
            for &(x, y) in &oracle.edges[c] {
                for f in [x as u32, y as u32] {
                    for k in 1..=model.m {
                        b.insert(model.owner_of(f, k));
                    }
                }
            }
            b.without(c)
        })
        .collect();
    let mut order = vec![0usize];
    let mut seen = Bits::from_indices([0]);
    let mut i = 0;
    while order.len() < n {
        if i == order.len() {
            let c = seen.complement(n).first().unwrap();
            seen.insert(c);
            order.push(c);
        }
        let c = order[i];
        i += 1;
        for d in near[c].iter() {
            if !seen.contains(d) {
                seen.insert(d);
                order.push(d);
            }
        }
    }
    order
}

/// Randomized greedy: grow a maximal complement in random order. Returns the
/// largest minimal filling set over `restarts` seeded runs.
pub fn greedy_max(model: &SurfaceModel, restarts: usize, deadline: Option<Instant>) -> Bits {
    let oracle = FillingOracle::new(model);
    let n = model.n();
    let mut rng = ChaCha8Rng::seed_from_u64(GREEDY_SEED);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = Bits::full(n);
    let mut best_len = 0;
    for run in 0..restarts.max(1) {
        if run > 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        order.shuffle(&mut rng);
        let mut t = Bits::EMPTY;
        for &c in &order {
            if oracle.fills(&t.with(c).complement(n)) {
                t.insert(c);
            }
        }
        let s = t.complement(n);
        if s.len() > best_len {
            best_len = s.len();
            best = s;
        }
    }
    best
}

fn classes_of(group: &SymmetryGroup, sets: impl IntoIterator<Item = Bits>) -> Vec<Bits> {
    let set: std::collections::BTreeSet<Bits> = sets.into_iter().map(|s| group.canonical_form(&s)).collect();
    let mut v: Vec<Bits> = set.into_iter().collect();
    v.sort_by(|a, b| a.lex_cmp(b));
    v
}

pub fn max_minimal_filling(model: &SurfaceModel, opts: &SearchOptions) -> Result<FillingResult> {
    let group = SymmetryGroup::new(model)?;
    let n = model.n();
    let deadline = opts.time_limit.map(|d| Instant::now() + d);
    let seed = greedy_max(model, GREEDY_RESTARTS, deadline);
    let fallback = |set: Bits| FillingResult {
        m: model.m,
        kind: FillingKind::Max,
        set,
        proved_optimal: false,
        cuts_used: 0,
        classes: classes_of(&group, [set]),
        bound: None,
    };
    let Some(search) = OrderlySearch::new(model, &group) else {
        return Ok(fallback(group.canonical_form(&seed)));
    };
    let stats = search.run(n - seed.len(), opts.threads, deadline);
    if !stats.completed {
        let best = stats.optima.first().map_or(seed, |t| t.complement(n));
        let best = if best.len() >= seed.len() { best } else { seed };
        return Ok(fallback(group.canonical_form(&best)));
    }
    let classes = classes_of(&group, stats.optima.iter().map(|t| t.complement(n)));
    Ok(FillingResult {
        m: model.m,
        kind: FillingKind::Max,
        set: classes[0],
        proved_optimal: true,
        cuts_used: 0,
        classes,
        bound: Some(n - stats.best),
    })
}
