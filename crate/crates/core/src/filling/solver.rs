//! Solvers for the filling program at a fixed cardinality.
//!
//! The built-in solver is a depth-first branch and bound over the `x` variables.
//! The `y` and `t` variables are eliminated: at any 0-1 point `y_i = x_a x_b` is
//! optimal, `x_j <= t_j` says a chosen systole meets another chosen one (implied
//! by its own cover row), and the remaining constraints are cover rows
//! (`Σ_{j ∈ K} x_j >= 1`), exclusion rows and `E(x) >= M(m)`.
//! Bounds used at every node:
//! - unit propagation of cover and exclusion rows;
//! - a packing bound: cover rows with pairwise disjoint open candidates each need
//!   their own new member;
//! - the cut bound `2E(S) = 4|S| - e(S, S^c)` with `e(S, S^c)` bounded below by
//!   the cover requirement on every unchosen systole;
//! - a degree bound on the intersections the open systoles can still add.

use std::process::Command;
use std::time::Instant;

use crate::bits::Bits;
use crate::error::{Error, Result};

use super::ilp::IlpModel;

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub deadline: Option<Instant>,
    /// Collect every solution rather than stopping at the first.
    pub enumerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    TimedOut,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub solutions: Vec<Bits>,
    pub nodes: u64,
}

/// A solver answers: which 0-1 points of the program have `Σ x = target`?
pub trait Solver {
    fn solve_at(&mut self, ilp: &IlpModel, target: usize, opts: &SolveOptions) -> Result<SolveOutcome>;
    fn name(&self) -> &'static str;
}

#[derive(Clone, Debug, Default)]
pub struct BuiltinSolver;

impl Solver for BuiltinSolver {
    fn name(&self) -> &'static str {
        "builtin"
    }

    fn solve_at(&mut self, ilp: &IlpModel, target: usize, opts: &SolveOptions) -> Result<SolveOutcome> {
        let mut rows: Vec<Bits> = ilp.neighbors.clone();
        rows.extend(ilp.cuts.iter().map(|c| c.set));
        let mut s = Search {
            n: ilp.n,
            nbr: &ilp.neighbors,
            rows,
            exclusions: &ilp.exclusions,
            target,
            need2: 2 * ilp.min_intersections,
            enumerate: opts.enumerate,
            deadline: opts.deadline,
            solutions: Vec::new(),
            nodes: 0,
            timed_out: false,
            done: false,
        };
        if ilp.fixed_in.intersects(&ilp.fixed_out) {
            return Ok(SolveOutcome { status: SolveStatus::Infeasible, solutions: vec![], nodes: 0 });
        }
        s.dfs(ilp.fixed_in, ilp.fixed_out);
        let status = if s.timed_out {
            SolveStatus::TimedOut
        } else if s.solutions.is_empty() {
            SolveStatus::Infeasible
        } else {
            SolveStatus::Feasible
        };
        let mut solutions = s.solutions;
        solutions.sort_by(|a, b| a.lex_cmp(b));
        Ok(SolveOutcome { status, solutions, nodes: s.nodes })
    }
}

struct Search<'a> {
    n: usize,
    nbr: &'a [Bits],
    rows: Vec<Bits>,
    exclusions: &'a [Bits],
    target: usize,
    need2: i64,
    enumerate: bool,
    deadline: Option<Instant>,
    solutions: Vec<Bits>,
    nodes: u64,
    timed_out: bool,
    done: bool,
}

impl Search<'_> {
    fn propagate(&self, p: &mut Bits, o: &mut Bits) -> bool {
        loop {
            let mut changed = false;
            if p.len() > self.target || self.n - o.len() < self.target {
                return false;
            }
            if p.len() == self.target {
                let rest = p.complement(self.n);
                if rest != *o {
                    *o = rest;
                    changed = true;
                }
            } else if self.n - o.len() == self.target {
                let rest = o.complement(self.n);
                if rest != *p {
                    *p = rest;
                    changed = true;
                }
            }
            for row in &self.rows {
                if row.intersects(p) {
                    continue;
                }
                let cand = row.minus(o);
                match cand.len() {
                    0 => return false,
                    1 => {
                        p.insert(cand.first().unwrap());
                        changed = true;
                    }
                    _ => {}
                }
            }
            for x in self.exclusions {
                if x.is_subset(p) {
                    return false;
                }
                let rest = x.minus(p);
                if rest.len() == 1 && !rest.is_subset(o) {
                    *o = o.or(&rest);
                    changed = true;
                }
            }
            if p.intersects(o) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    fn intersections(&self, p: &Bits) -> i64 {
        p.iter().map(|c| self.nbr[c].and(p).len() as i64).sum::<i64>() / 2
    }

    fn bounded_out(&self, p: &Bits, o: &Bits) -> bool {
        let n = self.n;
        let k = self.target as i64;
        let r = self.target - p.len();
        let open = p.or(o).complement(n);
        // cut bound from the unchosen side
        let mut lb_out: i64 = o.iter().map(|u| (self.nbr[u].and(p).len() as i64).max(1)).sum();
        let outside_from_open = n - self.target - o.len();
        let mut vals: Vec<i64> = open.iter().map(|u| (self.nbr[u].and(p).len() as i64).max(1)).collect();
        vals.sort_unstable();
        lb_out += vals.iter().take(outside_from_open).sum::<i64>();
        // cut bound from the chosen side
        let lb_in: i64 = p.iter().map(|v| self.nbr[v].and(o).len() as i64).sum();
        if 4 * k - lb_out.max(lb_in) < self.need2 {
            return true;
        }
        // degree bound on new intersections (doubled)
        let e2 = 2 * self.intersections(p);
        let mut gains: Vec<i64> = open
            .iter()
            .map(|u| {
                2 * self.nbr[u].and(p).len() as i64
                    + (self.nbr[u].and(&open).len() as i64).min(r.saturating_sub(1) as i64)
            })
            .collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        if e2 + gains.iter().take(r).sum::<i64>() < self.need2 {
            return true;
        }
        // packing bound on uncovered rows
        let mut cands: Vec<Bits> = self.rows.iter().filter(|row| !row.intersects(p)).map(|row| row.minus(o)).collect();
        cands.sort_by_key(|c| c.len());
        let mut used = Bits::EMPTY;
        let mut packed = 0;
        for c in &cands {
            if !c.intersects(&used) {
                used = used.or(c);
                packed += 1;
                if packed > r {
                    return true;
                }
            }
        }
        false
    }

    fn dfs(&mut self, mut p: Bits, mut o: Bits) {
        if self.done {
            return;
        }
        self.nodes += 1;
        if self.nodes % 4096 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    self.done = true;
                    return;
                }
            }
        }
        if !self.propagate(&mut p, &mut o) {
            return;
        }
        if self.bounded_out(&p, &o) {
            return;
        }
        let uncovered = self.rows.iter().filter(|row| !row.intersects(&p)).min_by_key(|row| row.minus(&o).len()).copied();
        match uncovered {
            Some(row) => {
                let cand = row.minus(&o);
                let mut o2 = o;
                for c in cand.iter() {
                    self.dfs(p.with(c), o2);
                    if self.done {
                        return;
                    }
                    o2.insert(c);
                }
            }
            None => {
                if p.len() == self.target {
                    if 2 * self.intersections(&p) >= self.need2 {
                        self.solutions.push(p);
                        if !self.enumerate {
                            self.done = true;
                        }
                    }
                    return;
                }
                let open = p.or(&o).complement(self.n);
                let v = open.iter().max_by_key(|&u| (self.nbr[u].and(&p).len(), std::cmp::Reverse(u))).unwrap();
                self.dfs(p.with(v), o);
                if self.done {
                    return;
                }
                self.dfs(p, o.with(v));
            }
        }
    }
}

/// Hands the program to an external mixed-integer solver. The command named by
/// `SYSTOLE_MIP_COMMAND` is run with two arguments, an LP file and a solution
/// path; the solution file must list the indices `j` with `x_j = 1`, one
/// solution per line, or the single word `infeasible`.
#[derive(Clone, Debug)]
pub struct BridgeSolver {
    pub command: String,
}

impl BridgeSolver {
    pub fn from_env() -> Result<BridgeSolver> {
        std::env::var("SYSTOLE_MIP_COMMAND")
            .map(|command| BridgeSolver { command })
            .map_err(|_| Error::Invariant("no bridged solver configured (set SYSTOLE_MIP_COMMAND)".into()))
    }
}

impl Solver for BridgeSolver {
    fn name(&self) -> &'static str {
        "bridge"
    }

    fn solve_at(&mut self, ilp: &IlpModel, target: usize, _opts: &SolveOptions) -> Result<SolveOutcome> {
        let mut prog = ilp.clone();
        prog.cardinality = Some(target);
        let dir = std::env::temp_dir().join(format!("systole-bridge-{}", std::process::id()));
        std::fs::create_dir_all(&dir)?;
        let lp = dir.join("model.lp");
        let sol = dir.join("solution.txt");
        std::fs::write(&lp, prog.to_lp_format())?;
        let status = Command::new(&self.command).arg(&lp).arg(&sol).status()?;
        if !status.success() {
            return Err(Error::Invariant(format!("bridged solver exited with {}", status)));
        }
        let text = std::fs::read_to_string(&sol)?;
        let mut solutions = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line == "infeasible" {
                break;
            }
            let set: std::result::Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
            let set = set.map_err(|_| Error::Invariant(format!("bad solution line: {}", line)))?;
            let x = Bits::from_indices(set);
            if !prog.is_feasible(&x) {
                return Err(Error::Invariant("bridged solver returned an infeasible point".into()));
            }
            solutions.push(x);
        }
        let status = if solutions.is_empty() { SolveStatus::Infeasible } else { SolveStatus::Feasible };
        Ok(SolveOutcome { status, solutions, nodes: 0 })
    }
}
