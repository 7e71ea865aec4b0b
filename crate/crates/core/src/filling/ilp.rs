//! The 0-1 program for filling sets: selection variables `x_j`, square variables
//! `y_i`, intersection counters `t_j`, and an append-only pool of lazy cuts.

use std::fmt::Write as _;

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::bits::Bits;
use crate::surface::{min_intersections, SurfaceModel};

use super::simplified::CoverCut;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
    T(usize),
}

impl Var {
    pub fn name(&self) -> String {
        match self {
            Var::X(j) => format!("x{}", j),
            Var::Y(i) => format!("y{}", i),
            Var::T(j) => format!("t{}", j),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(Var, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    fn holds(&self, value: impl Fn(Var) -> i64) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(v, a)| a * value(v)).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct IlpModel {
    pub m: usize,
    pub n: usize,
    pub squares: usize,
    pub min_intersections: i64,
    pub neighbors: Vec<Bits>,
    pub square_pairs: Vec<[usize; 2]>,
    pub objective: Objective,
    /// Lazy cover cuts `Σ_{j ∈ K} x_j >= 1`.
    pub cuts: Vec<CoverCut>,
    /// Exclusion cuts `Σ_{j ∈ X} x_j <= |X| - 1`.
    pub exclusions: Vec<Bits>,
    /// Variables fixed to one / zero.
    pub fixed_in: Bits,
    pub fixed_out: Bits,
    pub cardinality: Option<usize>,
}

impl IlpModel {
    pub fn base(model: &SurfaceModel, objective: Objective) -> IlpModel {
        IlpModel {
            m: model.m,
            n: model.n(),
            squares: model.squares.len(),
            min_intersections: min_intersections(model.params),
            neighbors: model.neighbor_bits.clone(),
            square_pairs: model.square_to_systoles.clone(),
            objective,
            cuts: Vec::new(),
            exclusions: Vec::new(),
            fixed_in: Bits::EMPTY,
            fixed_out: Bits::EMPTY,
            cardinality: None,
        }
    }

    /// Fixes `C_1` to the representative's zero pattern and the cardinality to `target`.
    /// `zeros` lists the members of `C_1` with `x_j = 0`; the rest of `C_1` is set to one.
    pub fn add_symmetry_breaking(&self, model: &SurfaceModel, zeros: &Bits, target: usize) -> IlpModel {
        let mut out = self.clone();
        for j in 0..(1usize << model.k) {
            if zeros.contains(j) {
                out.fixed_out.insert(j);
            } else {
                out.fixed_in.insert(j);
            }
        }
        out.cardinality = Some(target);
        out
    }

    pub fn add_cut(&mut self, cut: CoverCut) -> bool {
        if self.cuts.contains(&cut) {
            return false;
        }
        self.cuts.push(cut);
        true
    }

    /// The base constraints, exactly.
    pub fn base_constraints(&self) -> Vec<LinearConstraint> {
        let mut out = Vec::new();
        out.push(LinearConstraint {
            name: "intersections".into(),
            terms: (0..self.squares).map(|i| (Var::Y(i), 1)).collect(),
            sense: Sense::Ge,
            rhs: self.min_intersections,
        });
        for j in 0..self.n {
            let mut terms: Vec<(Var, i64)> = vec![(Var::T(j), 1)];
            for (i, pair) in self.square_pairs.iter().enumerate() {
                if pair.contains(&j) {
                    terms.push((Var::Y(i), -1));
                }
            }
            out.push(LinearConstraint { name: format!("count{}", j), terms, sense: Sense::Eq, rhs: 0 });
            out.push(LinearConstraint {
                name: format!("link_lo{}", j),
                terms: vec![(Var::X(j), 1), (Var::T(j), -1)],
                sense: Sense::Le,
                rhs: 0,
            });
            out.push(LinearConstraint {
                name: format!("link_hi{}", j),
                terms: vec![(Var::T(j), 1), (Var::X(j), -4)],
                sense: Sense::Le,
                rhs: 0,
            });
        }
        for i in 0..self.n {
            out.push(LinearConstraint {
                name: format!("cover{}", i),
                terms: self.neighbors[i].iter().map(|j| (Var::X(j), 1)).collect(),
                sense: Sense::Ge,
                rhs: 1,
            });
        }
        out
    }

    /// Base constraints plus cuts, exclusions, fixings and the cardinality equality.
    pub fn all_constraints(&self) -> Vec<LinearConstraint> {
        let mut out = self.base_constraints();
        for (c, cut) in self.cuts.iter().enumerate() {
            out.push(LinearConstraint {
                name: format!("fill{}", c),
                terms: cut.set.iter().map(|j| (Var::X(j), 1)).collect(),
                sense: Sense::Ge,
                rhs: 1,
            });
        }
        for (c, ex) in self.exclusions.iter().enumerate() {
            out.push(LinearConstraint {
                name: format!("excl{}", c),
                terms: ex.iter().map(|j| (Var::X(j), 1)).collect(),
                sense: Sense::Le,
                rhs: ex.len() as i64 - 1,
            });
        }
        for j in self.fixed_in.iter() {
            out.push(LinearConstraint { name: format!("fix{}", j), terms: vec![(Var::X(j), 1)], sense: Sense::Eq, rhs: 1 });
        }
        for j in self.fixed_out.iter() {
            out.push(LinearConstraint { name: format!("fix{}", j), terms: vec![(Var::X(j), 1)], sense: Sense::Eq, rhs: 0 });
        }
        if let Some(k) = self.cardinality {
            out.push(LinearConstraint {
                name: "cardinality".into(),
                terms: (0..self.n).map(|j| (Var::X(j), 1)).collect(),
                sense: Sense::Eq,
                rhs: k as i64,
            });
        }
        out
    }

    /// Completes `x` with `y_i = x_a x_b` and `t_j = Σ_i n_{ij} y_i`.
    pub fn completion(&self, x: &Bits) -> (Vec<i64>, Vec<i64>) {
        let y: Vec<i64> =
            self.square_pairs.iter().map(|&[a, b]| (x.contains(a) && x.contains(b)) as i64).collect();
        let mut t = vec![0i64; self.n];
        for (i, &[a, b]) in self.square_pairs.iter().enumerate() {
            t[a] += y[i];
            t[b] += y[i];
        }
        (y, t)
    }

    /// Whether `x` (with its canonical completion) satisfies every constraint.
    pub fn is_feasible(&self, x: &Bits) -> bool {
        let (y, t) = self.completion(x);
        let value = |v: Var| match v {
            Var::X(j) => x.contains(j) as i64,
            Var::Y(i) => y[i],
            Var::T(j) => t[j],
        };
        self.all_constraints().iter().all(|c| c.holds(value))
    }

    /// Linear-relaxation optimum of `Σ x_j` (all variables in `[0, 1]`, `t` in `[0, 4]`).
    pub fn lp_bound(&self) -> Option<f64> {
        let dir = match self.objective {
            Objective::Minimize => OptimizationDirection::Minimize,
            Objective::Maximize => OptimizationDirection::Maximize,
        };
        let mut lp = Problem::new(dir);
        let xs: Vec<_> = (0..self.n).map(|_| lp.add_var(1.0, (0.0, 1.0))).collect();
        let ys: Vec<_> = (0..self.squares).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        let ts: Vec<_> = (0..self.n).map(|_| lp.add_var(0.0, (0.0, 4.0))).collect();
        for c in self.all_constraints() {
            let terms: Vec<(minilp::Variable, f64)> = c
                .terms
                .iter()
                .map(|&(v, a)| {
                    let var = match v {
                        Var::X(j) => xs[j],
                        Var::Y(i) => ys[i],
                        Var::T(j) => ts[j],
                    };
                    (var, a as f64)
                })
                .collect();
            let op = match c.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            lp.add_constraint(terms.as_slice(), op, c.rhs as f64);
        }
        lp.solve().ok().map(|s| s.objective())
    }

    /// CPLEX LP text for handing the program to an external solver.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let sense = match self.objective {
            Objective::Minimize => "Minimize",
            Objective::Maximize => "Maximize",
        };
        let _ = writeln!(out, "\\ filling program, m = {}", self.m);
        let _ = writeln!(out, "{}", sense);
        let obj: Vec<String> = (0..self.n).map(|j| format!("x{}", j)).collect();
        let _ = writeln!(out, " obj: {}", obj.join(" + "));
        let _ = writeln!(out, "Subject To");
        for c in self.all_constraints() {
            let mut lhs = String::new();
            for (k, &(v, a)) in c.terms.iter().enumerate() {
                let sign = if a < 0 { " - " } else if k == 0 { "" } else { " + " };
                let mag = a.abs();
                if mag == 1 {
                    let _ = write!(lhs, "{}{}", sign, v.name());
                } else {
                    let _ = write!(lhs, "{}{} {}", sign, mag, v.name());
                }
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {}: {} {} {}", c.name, lhs, op, c.rhs);
        }
        let _ = writeln!(out, "Bounds");
        for j in 0..self.n {
            let _ = writeln!(out, " 0 <= t{} <= 4", j);
        }
        let _ = writeln!(out, "Binaries");
        for j in 0..self.n {
            let _ = writeln!(out, " x{}", j);
        }
        for i in 0..self.squares {
            let _ = writeln!(out, " y{}", i);
        }
        let _ = writeln!(out, "End");
        out
    }
}
