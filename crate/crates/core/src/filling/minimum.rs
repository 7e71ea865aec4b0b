//! Smallest filling sets: the 0-1 program solved cardinality by cardinality with
//! lazy filling cuts and an orbit case split on the axis-1 family.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::homology::{build_combinatorial_map, CombinatorialMap};
use crate::surface::SurfaceModel;
use crate::symmetry::{subset_orbit_representatives, SymmetryGroup};

use super::ilp::{IlpModel, Objective};
use super::regions::FillingOracle;
use super::simplified::{filling_cuts, CoverCut, DualHomology};
use super::solver::{SolveOptions, SolveStatus};
use super::{FillingKind, FillingResult, SearchOptions};

/// Lower bound on the size of any filling set. A filling set meets every systole
/// (total domination, `4N >= n`), has `E(S) >= M`, and
/// `2E(S) = 4N - e(S, S^c) <= 4N - (n - N)` gives `N >= (2M + n) / 5`.
pub fn cardinality_lower_bound(ilp: &IlpModel) -> usize {
    let n = ilp.n as i64;
    let counting = (2 * ilp.min_intersections + n + 4) / 5;
    let domination = (n + 3) / 4;
    let lp = ilp.lp_bound().map_or(0, |v| (v - 1e-6).ceil() as i64);
    counting.max(domination).max(lp) as usize
}

/// One restricted problem per orbit representative of zero patterns on `C_1`
/// with at most `(n - N) / m` zeros, or the unrestricted problem.
fn restricted_problems(model: &SurfaceModel, group: &SymmetryGroup, base: &IlpModel, target: usize, split: bool) -> Vec<IlpModel> {
    if !split {
        let mut p = base.clone();
        p.cardinality = Some(target);
        return vec![p];
    }
    let zeros = (model.n() - target) / model.m;
    subset_orbit_representatives(model, group, zeros)
        .iter()
        .map(|rep| base.add_symmetry_breaking(model, rep, target))
        .collect()
}

/// Cover cuts plus their images under the group, deduplicated and sorted.
fn cuts_with_images(group: &SymmetryGroup, cuts: &[CoverCut]) -> BTreeSet<CoverCut> {
    let mut out = BTreeSet::new();
    for cut in cuts {
        for g in 0..group.order() {
            out.insert(CoverCut { set: group.image(g, &cut.set) });
        }
    }
    out
}

pub struct MinSearch<'a> {
    pub model: &'a SurfaceModel,
    pub map: CombinatorialMap,
    pub group: SymmetryGroup,
    pub oracle: FillingOracle,
    dual: DualHomology,
}

impl<'a> MinSearch<'a> {
    pub fn new(model: &'a SurfaceModel) -> Result<MinSearch<'a>> {
        Ok(MinSearch {
            model,
            map: build_combinatorial_map(model)?,
            group: SymmetryGroup::new(model)?,
            oracle: FillingOracle::new(model),
            dual: DualHomology::new(model),
        })
    }

    /// Solves every restricted problem at cardinality `target`, enumerating all
    /// solutions. Returns the filling and the non-filling solutions; `None` on timeout.
    pub fn round(
        &self,
        base: &IlpModel,
        target: usize,
        opts: &SearchOptions,
        deadline: Option<Instant>,
    ) -> Result<Option<(Vec<Bits>, Vec<Bits>)>> {
        let problems = restricted_problems(self.model, &self.group, base, target, opts.symmetry_breaking);
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<(usize, Result<Option<(Vec<Bits>, Vec<Bits>)>>)>> = Mutex::new(Vec::new());
        let workers = opts.threads.max(1).min(problems.len().max(1));
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| {
                    let mut solver = match opts.solver.make() {
                        Ok(s) => s,
                        Err(e) => {
                            results.lock().unwrap().push((usize::MAX, Err(e)));
                            return;
                        }
                    };
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        if i >= problems.len() {
                            return;
                        }
                        let so = SolveOptions { deadline, enumerate: true };
                        let r = solver.solve_at(&problems[i], target, &so).map(|out| {
                            if out.status == SolveStatus::TimedOut {
                                return None;
                            }
                            Some(out.solutions.into_iter().partition(|x| self.oracle.fills(x)))
                        });
                        results.lock().unwrap().push((i, r));
                    }
                });
            }
        });
        let mut results = results.into_inner().unwrap();
        results.sort_by_key(|(i, _)| *i);
        let mut fill = Vec::new();
        let mut rest = Vec::new();
        for (_, r) in results {
            match r? {
                None => return Ok(None),
                Some((f, c)) => {
                    fill.extend(f);
                    rest.extend(c);
                }
            }
        }
        Ok(Some((fill, rest)))
    }

    /// Cover cuts separating the non-filling optima, closed under the group.
    pub fn cuts_for(&self, rest: &[Bits]) -> BTreeSet<CoverCut> {
        let cuts: Vec<CoverCut> =
            rest.iter().flat_map(|x| filling_cuts(self.model, &self.map, &self.dual, x)).collect();
        cuts_with_images(&self.group, &cuts)
    }

    pub fn run(&self, opts: &SearchOptions) -> Result<FillingResult> {
        let start = Instant::now();
        let deadline = opts.time_limit.map(|d| start + d);
        let mut base = IlpModel::base(self.model, Objective::Minimize);
        let lower = cardinality_lower_bound(&base);
        let mut pool: BTreeSet<CoverCut> = BTreeSet::new();
        for target in lower..=self.model.n() {
            let Some((fill, rest)) = self.round(&base, target, opts, deadline)? else {
                return Err(Error::Timeout(format!("minimum search stopped at N = {} (proven lower bound {})", target, target)));
            };
            if fill.is_empty() {
                // every optimum at this cardinality is enumerated, so the cuts only
                // serve to prune larger cardinalities
                for cut in self.cuts_for(&rest) {
                    if pool.insert(cut.clone()) {
                        base.cuts.push(cut);
                    }
                }
                continue;
            }
            let classes: BTreeSet<Bits> = fill.iter().map(|x| self.group.canonical_form(x)).collect();
            let mut classes: Vec<Bits> = classes.into_iter().collect();
            classes.sort_by(|a, b| a.lex_cmp(b));
            let set = classes[0];
            if !self.oracle.is_minimal_filling(&set) {
                return Err(Error::Invariant("a smallest filling set is not minimal".into()));
            }
            return Ok(FillingResult {
                m: self.model.m,
                kind: FillingKind::Min,
                set,
                proved_optimal: true,
                cuts_used: pool.len(),
                classes,
                bound: Some(target),
            });
        }
        Err(Error::Invariant("the full systole set fills, so some cardinality must succeed".into()))
    }
}

pub fn min_filling(model: &SurfaceModel, opts: &SearchOptions) -> Result<FillingResult> {
    MinSearch::new(model)?.run(opts)
}
