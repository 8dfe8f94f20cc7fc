//! LP relaxation and integer solve of the augmented system.
//!
//! Conormal variables are eliminated before solving: their columns are moved to
//! the right-hand side and their weights into a constant offset. Reports always
//! speak about the full augmented vector.

mod bnb;
pub mod simplex;
pub mod sparse;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::constraints::{ConstraintSystem, Variable};
use crate::{Error, Result};

pub use bnb::ilp_solve_with;
pub use simplex::{farkas_gap, SimplexOptions, SimplexResult};
pub use sparse::CscMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    IterationLimit,
    /// Basis became singular and could not be refactored.
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "OPTIMAL",
            Status::Infeasible => "INFEASIBLE",
            Status::IterationLimit => "ITERATION_LIMIT",
            Status::NumericalFailure => "NUMERICAL_FAILURE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Status::Optimal,
            Status::Infeasible,
            Status::IterationLimit,
            Status::NumericalFailure,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
    }
}

/// `min offset + c x  s.t.  A x = b, 0 <= x <= u` over the free variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    pub upper: Vec<f64>,
    /// Free column -> index in the full vector.
    pub columns: Vec<usize>,
    /// Eliminated variables `(full index, value)`.
    pub fixed: Vec<(usize, f64)>,
    pub full_len: usize,
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl LinearProgram {
    /// Plain LP without eliminated variables.
    pub fn new(
        objective: Vec<f64>,
        matrix: CscMatrix,
        rhs: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        let lp = LinearProgram {
            col_names: (0..n).map(|j| format!("x{j}")).collect(),
            row_names: (0..matrix.rows).map(|i| format!("r{i}")).collect(),
            objective,
            objective_offset: 0.0,
            rhs,
            upper,
            columns: (0..n).collect(),
            fixed: Vec::new(),
            full_len: n,
            matrix,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// LP over an incidence system with per-column weights; fixed-to-one
    /// variables are substituted out.
    pub fn from_system(system: &ConstraintSystem, weights: &[f64]) -> Result<Self> {
        let n = system.cols();
        if weights.len() != n {
            return Err(Error::Dimension(format!(
                "{} weights for {n} columns",
                weights.len()
            )));
        }
        let mut is_fixed = vec![false; n];
        for &j in &system.fixed_ones {
            is_fixed[j] = true;
        }
        let mut rhs: Vec<f64> = system.rhs.iter().map(|&r| r as f64).collect();
        let mut offset = 0.0;
        let mut fixed = Vec::new();
        let mut columns = Vec::new();
        let mut triplets = Vec::new();
        for j in 0..n {
            if is_fixed[j] {
                if !system.rhs_absorbs_fixed() {
                    for (i, v) in system.column(j) {
                        rhs[i] -= v as f64;
                    }
                }
                offset += weights[j];
                fixed.push((j, 1.0));
            } else {
                let c = columns.len();
                for (i, v) in system.column(j) {
                    triplets.push((i, c, v as f64));
                }
                columns.push(j);
            }
        }
        // Rows left without free entries are either satisfied (drop) or
        // unsatisfiable (keep, so the solver reports infeasibility).
        let mut used = vec![false; system.rows];
        for &(i, _, _) in &triplets {
            used[i] = true;
        }
        let mut remap = vec![usize::MAX; system.rows];
        let mut kept = Vec::new();
        for i in 0..system.rows {
            if used[i] || rhs[i] != 0.0 {
                remap[i] = kept.len();
                kept.push(i);
            }
        }
        for t in &mut triplets {
            t.0 = remap[t.0];
        }
        let matrix = CscMatrix::from_triplets(kept.len(), columns.len(), &triplets);
        let lp = LinearProgram {
            objective: columns.iter().map(|&j| weights[j]).collect(),
            objective_offset: offset,
            rhs: kept.iter().map(|&i| rhs[i]).collect(),
            upper: vec![1.0; columns.len()],
            col_names: columns.iter().map(|&j| variable_name(&system.variables[j])).collect(),
            row_names: kept.iter().map(|&i| format!("r{i}")).collect(),
            columns,
            fixed,
            full_len: n,
            matrix,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        let m = self.matrix.rows;
        if self.matrix.cols != n
            || self.upper.len() != n
            || self.columns.len() != n
            || self.col_names.len() != n
            || self.rhs.len() != m
            || self.row_names.len() != m
        {
            return Err(Error::Dimension("linear program parts disagree in size".into()));
        }
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::BadIntegrand(*c));
        }
        if self.upper.iter().any(|u| !u.is_finite() || *u < 0.0) {
            return Err(Error::InvalidSpec("upper bounds must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    /// Full vector from values of the free variables.
    pub fn lift(&self, free: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.full_len];
        for (&j, &v) in self.columns.iter().zip(free) {
            x[j] = v;
        }
        for &(j, v) in &self.fixed {
            x[j] = v;
        }
        x
    }

    /// `offset + c x`. Terms are summed in sorted order, so two solutions with
    /// the same multiset of costs get bit-identical objectives.
    pub fn objective_value(&self, free: &[f64]) -> f64 {
        let mut terms: Vec<f64> = self
            .objective
            .iter()
            .zip(free)
            .map(|(c, x)| c * x)
            .filter(|t| *t != 0.0)
            .collect();
        terms.push(self.objective_offset);
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }

    /// Max violation of `A x = b` and of the bounds.
    pub fn infeasibility(&self, free: &[f64]) -> (f64, f64) {
        let ax = self.matrix.mul(free);
        let eq = ax
            .iter()
            .zip(&self.rhs)
            .fold(0.0f64, |a, (l, r)| a.max((l - r).abs()));
        let bd = free
            .iter()
            .zip(&self.upper)
            .fold(0.0f64, |a, (x, u)| a.max(-x).max(x - u));
        (eq, bd)
    }
}

fn variable_name(v: &Variable) -> String {
    match *v {
        Variable::Triangle(t) => format!("t{t}"),
        Variable::Quadrangle { first, second, .. } => format!("q{first}_{second}"),
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol_int: f64,
    /// Branch-and-bound node budget.
    pub node_limit: usize,
    /// Simplex iterations per LP; `None` picks a size-based default.
    pub max_iterations: Option<usize>,
    /// Record the primal/dual-bound trace of the (root) LP.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_int: 1e-7,
            node_limit: 100_000,
            max_iterations: None,
            trace: false,
        }
    }
}

impl SolverOptions {
    pub(crate) fn simplex(&self) -> SimplexOptions {
        SimplexOptions {
            max_iterations: self.max_iterations,
            trace: self.trace,
            ..SimplexOptions::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    /// Full augmented vector (fixed variables included).
    pub x: Vec<f64>,
    pub objective: f64,
    pub fractional_vars: Vec<usize>,
    pub iterations: usize,
    /// Branch nodes solved after the root.
    pub nodes: usize,
    pub wall_time: Duration,
    /// Lower bound: the LP dual bound, or the best open-node bound for an
    /// interrupted branch-and-bound.
    pub dual_bound: f64,
    /// Root relaxation objective (ILP only).
    pub lp_bound: Option<f64>,
    pub proved_optimal: bool,
    /// Row multipliers with a positive [`farkas_gap`] when infeasible.
    pub farkas: Option<Vec<f64>>,
    pub trace: Vec<(f64, f64)>,
}

impl SolveReport {
    /// `key: value` lines, then one `x <index> <value>` line per nonzero entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status: {}", self.status.as_str());
        let _ = writeln!(s, "objective: {}", self.objective);
        let _ = writeln!(s, "dual_bound: {}", self.dual_bound);
        if let Some(b) = self.lp_bound {
            let _ = writeln!(s, "lp_bound: {b}");
        }
        let _ = writeln!(s, "proved_optimal: {}", self.proved_optimal);
        let _ = writeln!(s, "variables: {}", self.x.len());
        let _ = writeln!(s, "fractional: {}", self.fractional_vars.len());
        let list: Vec<String> = self.fractional_vars.iter().map(|j| j.to_string()).collect();
        let _ = writeln!(s, "fractional_vars: {}", list.join(" "));
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let _ = writeln!(s, "nodes: {}", self.nodes);
        let _ = writeln!(s, "wall_time_ms: {:.3}", self.wall_time.as_secs_f64() * 1e3);
        for (j, v) in self.x.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(s, "x {j} {v}");
            }
        }
        s
    }
}

pub(crate) fn fractional(x: &[f64], tol: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v > tol && v < 1.0 - tol)
        .map(|(j, _)| j)
        .collect()
}

pub fn lp_solve(lp: &LinearProgram) -> SolveReport {
    lp_solve_with(lp, &SolverOptions::default())
}

pub fn lp_solve_with(lp: &LinearProgram, opts: &SolverOptions) -> SolveReport {
    let start = Instant::now();
    let lower = vec![0.0; lp.cols()];
    let r = simplex::solve(&lp.matrix, &lp.rhs, &lp.objective, &lower, &lp.upper, &opts.simplex());
    let x = lp.lift(&r.x);
    SolveReport {
        status: r.status,
        fractional_vars: fractional(&x, opts.tol_int),
        objective: lp.objective_value(&r.x),
        x,
        iterations: r.iterations,
        nodes: 0,
        wall_time: start.elapsed(),
        dual_bound: r.dual_bound + lp.objective_offset,
        lp_bound: None,
        proved_optimal: r.status == Status::Optimal,
        farkas: r.farkas,
        trace: r.trace,
    }
}

pub fn ilp_solve(lp: &LinearProgram) -> SolveReport {
    ilp_solve_with(lp, &SolverOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarClass {
    Zero,
    One,
    Fractional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundCheck {
    pub classes: Vec<VarClass>,
    pub zeros: usize,
    pub ones: usize,
    pub fractional: Vec<usize>,
}

/// Classify every entry as 0, 1 or fractional at tolerance `tol`.
pub fn round_check(report: &SolveReport, tol: f64) -> RoundCheck {
    let classes: Vec<VarClass> = report
        .x
        .iter()
        .map(|&v| {
            if v.abs() <= tol {
                VarClass::Zero
            } else if (v - 1.0).abs() <= tol {
                VarClass::One
            } else {
                VarClass::Fractional
            }
        })
        .collect();
    RoundCheck {
        zeros: classes.iter().filter(|c| **c == VarClass::Zero).count(),
        ones: classes.iter().filter(|c| **c == VarClass::One).count(),
        fractional: classes
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == VarClass::Fractional)
            .map(|(j, _)| j)
            .collect(),
        classes,
    }
}
