//! Branch-and-bound over the binary free variables.
//!
//! Depth-first dives (the child nearest the LP value first) with best-bound
//! backtracking from a heap of open nodes. Every node is solved from scratch,
//! so the result does not depend on any warm-start state.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{fractional, simplex, LinearProgram, SolveReport, SolverOptions, Status};

struct Open {
    bound: f64,
    id: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Most fractional variable, lowest index on ties.
fn branch_variable(x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        let f = v - v.floor();
        if f <= tol || f >= 1.0 - tol {
            continue;
        }
        let dist = (f - 0.5).abs();
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some((j, dist));
        }
    }
    best.map(|b| b.0)
}

pub fn ilp_solve_with(lp: &LinearProgram, opts: &SolverOptions) -> SolveReport {
    let start = Instant::now();
    let n = lp.cols();
    let sopts = opts.simplex();
    let mut iterations = 0usize;
    let mut nodes = 0usize;
    let mut next_id = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap: BinaryHeap<Open> = BinaryHeap::new();
    let mut root_bound = None;
    let mut trace = Vec::new();
    let mut farkas = None;
    let mut limit_hit = false;

    let mut dive: Option<(Vec<(usize, f64)>, f64)> = Some((Vec::new(), f64::NEG_INFINITY));
    loop {
        let (fixings, parent_bound) = match dive.take() {
            Some(f) => f,
            None => {
                let Some(open) = heap.pop() else { break };
                if let Some((inc, _)) = &incumbent {
                    if prune(open.bound, *inc) {
                        continue;
                    }
                }
                (open.fixings, open.bound)
            }
        };
        if root_bound.is_some() {
            if nodes >= opts.node_limit {
                limit_hit = true;
                heap.push(Open {
                    bound: parent_bound,
                    id: next_id,
                    fixings,
                });
                break;
            }
            nodes += 1;
        }

        let mut lower = vec![0.0; n];
        let mut upper = lp.upper.clone();
        for &(j, v) in &fixings {
            lower[j] = v;
            upper[j] = v;
        }
        let mut node_opts = sopts.clone();
        node_opts.trace = sopts.trace && root_bound.is_none();
        let r = simplex::solve(&lp.matrix, &lp.rhs, &lp.objective, &lower, &upper, &node_opts);
        iterations += r.iterations;
        let bound = r.objective + lp.objective_offset;
        if root_bound.is_none() {
            trace = r.trace.clone();
            match r.status {
                Status::Optimal => root_bound = Some(bound),
                Status::Infeasible => {
                    farkas = r.farkas;
                    break;
                }
                status => {
                    let x = lp.lift(&r.x);
                    return SolveReport {
                        status,
                        fractional_vars: fractional(&x, opts.tol_int),
                        objective: lp.objective_value(&r.x),
                        x,
                        iterations,
                        nodes,
                        wall_time: start.elapsed(),
                        dual_bound: f64::NEG_INFINITY,
                        lp_bound: None,
                        proved_optimal: false,
                        farkas: None,
                        trace,
                    };
                }
            }
        }
        if r.status != Status::Optimal {
            // Infeasible child, or a numerical failure we cannot use for pruning.
            if r.status != Status::Infeasible {
                limit_hit = true;
            }
            continue;
        }
        if let Some((inc, _)) = &incumbent {
            if prune(bound, *inc) {
                continue;
            }
        }
        match branch_variable(&r.x, opts.tol_int) {
            None => {
                let x: Vec<f64> = r.x.iter().map(|v| v.round()).collect();
                let (eq, _) = lp.infeasibility(&x);
                if eq > 1e-9 {
                    // Rounding broke feasibility; treat as unresolved.
                    limit_hit = true;
                    continue;
                }
                let value = lp.objective_value(&x);
                if incumbent.as_ref().is_none_or(|(inc, _)| value < *inc) {
                    incumbent = Some((value, x));
                }
            }
            Some(j) => {
                let up_first = r.x[j] >= 0.5;
                let mut near = fixings.clone();
                near.push((j, if up_first { 1.0 } else { 0.0 }));
                let mut far = fixings;
                far.push((j, if up_first { 0.0 } else { 1.0 }));
                next_id += 1;
                heap.push(Open {
                    bound,
                    id: next_id,
                    fixings: far,
                });
                dive = Some((near, bound));
            }
        }
    }

    let open_bound = heap
        .iter()
        .map(|o| o.bound)
        .fold(f64::INFINITY, f64::min);
    let (status, proved) = match (&incumbent, limit_hit) {
        (Some(_), false) => (Status::Optimal, true),
        (None, false) => (Status::Infeasible, true),
        (_, true) => (Status::IterationLimit, false),
    };
    let (objective, x) = match incumbent {
        Some((v, x)) => (v, lp.lift(&x)),
        None => (f64::INFINITY, Vec::new()),
    };
    let dual_bound = if proved {
        objective
    } else {
        open_bound.min(objective)
    };
    SolveReport {
        status,
        fractional_vars: fractional(&x, opts.tol_int),
        objective,
        x,
        iterations,
        nodes,
        wall_time: start.elapsed(),
        dual_bound,
        lp_bound: root_bound,
        proved_optimal: proved && status == Status::Optimal,
        farkas,
        trace,
    }
}

fn prune(bound: f64, incumbent: f64) -> bool {
    bound >= incumbent - 1e-9 * incumbent.abs().max(1.0)
}
