//! Bounded-variable primal revised simplex.
//!
//! Solves `min c x  s.t.  A x = b,  l <= x <= u` with finite bounds. Phase 1
//! adds one signed artificial per row; in phase 2 the artificials are pinned
//! to `[0, 0]`, so any left in the basis are redundant rows. The basis is held
//! as a dense LU factorization plus a product-form eta file, refactored
//! periodically.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots it switches to
//! the least-index rule (Bland) until the objective moves again, which rules
//! out cycling. All ties are broken by index, so runs are reproducible.

use super::sparse::CscMatrix;
use super::Status;

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 1000;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: Option<usize>,
    /// Primal feasibility tolerance.
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance.
    pub optimality_tol: f64,
    /// Record `(primal objective, dual bound)` after every phase 2 pricing.
    pub trace: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: None,
            feasibility_tol: 1e-8,
            optimality_tol: 1e-9,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals of the last phase that ran.
    pub y: Vec<f64>,
    /// Lagrangian lower bound `y b + sum_j min(d_j l_j, d_j u_j)`.
    pub dual_bound: f64,
    /// Row multipliers proving infeasibility, when infeasible.
    pub farkas: Option<Vec<f64>>,
    pub iterations: usize,
    pub trace: Vec<(f64, f64)>,
}

struct Eta {
    r: usize,
    w: Vec<(usize, f64)>,
    pivot: f64,
}

/// Dense `P B = L U` with an eta file for basis updates.
struct Factor {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    etas: Vec<Eta>,
}

impl Factor {
    fn new(m: usize) -> Self {
        Factor {
            m,
            lu: vec![0.0; m * m],
            perm: (0..m).collect(),
            etas: Vec::new(),
        }
    }

    /// `dense` is row-major `B`. Returns false if `B` is numerically singular.
    fn factorize(&mut self, mut a: Vec<f64>) -> bool {
        let m = self.m;
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut p = k;
            let mut best = a[k * m + k].abs();
            for i in k + 1..m {
                let v = a[i * m + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-11 {
                return false;
            }
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * m + k];
            let (head, tail) = a.split_at_mut((k + 1) * m);
            let row_k = &head[k * m..];
            for i in 0..m - k - 1 {
                let row_i = &mut tail[i * m..(i + 1) * m];
                if row_i[k] == 0.0 {
                    continue;
                }
                let l = row_i[k] / pivot;
                row_i[k] = l;
                for j in k + 1..m {
                    if row_k[j] != 0.0 {
                        row_i[j] -= l * row_k[j];
                    }
                }
            }
        }
        self.lu = a;
        self.perm = perm;
        self.etas.clear();
        true
    }

    /// `B^{-1} a` for a dense right-hand side.
    fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut v: Vec<f64> = (0..m).map(|i| a[self.perm[i]]).collect();
        for i in 0..m {
            let row = &self.lu[i * m..i * m + i];
            let s: f64 = row.iter().zip(&v[..i]).map(|(l, x)| l * x).sum();
            v[i] -= s;
        }
        for i in (0..m).rev() {
            let row = &self.lu[i * m..(i + 1) * m];
            let s: f64 = row[i + 1..].iter().zip(&v[i + 1..]).map(|(u, x)| u * x).sum();
            v[i] = (v[i] - s) / row[i];
        }
        for eta in &self.etas {
            let zr = v[eta.r] / eta.pivot;
            if zr != 0.0 {
                for &(i, wi) in &eta.w {
                    v[i] -= wi * zr;
                }
            }
            v[eta.r] = zr;
        }
        v
    }

    /// `c B^{-1}` for a dense row vector.
    fn btran(&self, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut v = c.to_vec();
        for eta in self.etas.iter().rev() {
            let s: f64 = eta.w.iter().map(|&(i, wi)| v[i] * wi).sum();
            v[eta.r] = (v[eta.r] - s) / eta.pivot;
        }
        // U^T w = v
        for i in 0..m {
            let row = &self.lu[i * m..(i + 1) * m];
            let wi = v[i] / row[i];
            v[i] = wi;
            if wi != 0.0 {
                for j in i + 1..m {
                    v[j] -= row[j] * wi;
                }
            }
        }
        // L^T u = w
        for i in (0..m).rev() {
            let ui = v[i];
            if ui != 0.0 {
                let row = &self.lu[i * m..i * m + i];
                for (j, l) in row.iter().enumerate() {
                    v[j] -= l * ui;
                }
            }
        }
        let mut y = vec![0.0; m];
        for i in 0..m {
            y[self.perm[i]] = v[i];
        }
        y
    }

    fn push_eta(&mut self, r: usize, w: &[f64]) {
        let entries = w
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != r && v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            r,
            w: entries,
            pivot: w[r],
        });
    }
}

const NONBASIC: usize = usize::MAX;

struct Solver<'a> {
    a: &'a CscMatrix,
    b: &'a [f64],
    m: usize,
    n: usize,
    sigma: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    factor: Factor,
}

impl<'a> Solver<'a> {
    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        if j < self.n {
            for (i, a) in self.a.column(j) {
                v[i] = a;
            }
        } else {
            v[j - self.n] = self.sigma[j - self.n];
        }
        v
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.a.col_dot(j, y)
        } else {
            self.sigma[j - self.n] * y[j - self.n]
        }
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut dense = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                for (i, v) in self.a.column(j) {
                    dense[i * m + k] = v;
                }
            } else {
                dense[(j - self.n) * m + k] = self.sigma[j - self.n];
            }
        }
        if !self.factor.factorize(dense) {
            return false;
        }
        // x_B = B^{-1} (b - N x_N)
        let mut rhs = self.b.to_vec();
        for j in 0..self.n + m {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                if j < self.n {
                    for (i, v) in self.a.column(j) {
                        rhs[i] -= v * self.x[j];
                    }
                } else {
                    rhs[j - self.n] -= self.sigma[j - self.n] * self.x[j];
                }
            }
        }
        let xb = self.factor.ftran(&rhs);
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[k];
        }
        true
    }

    fn residual_norm(&self) -> f64 {
        let mut r = self.b.to_vec();
        for j in 0..self.n + self.m {
            if self.x[j] != 0.0 {
                if j < self.n {
                    for (i, v) in self.a.column(j) {
                        r[i] -= v * self.x[j];
                    }
                } else {
                    r[j - self.n] -= self.sigma[j - self.n] * self.x[j];
                }
            }
        }
        r.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Runs one phase. Returns the status and final duals.
    fn run_phase(
        &mut self,
        cost: &[f64],
        opts: &SimplexOptions,
        iterations: &mut usize,
        limit: usize,
        trace: Option<&mut Vec<(f64, f64)>>,
    ) -> (Status, Vec<f64>, f64) {
        let total = self.n + self.m;
        let mut trace = trace;
        let mut degenerate = 0usize;
        let mut retries = 0;
        loop {
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let y = self.factor.btran(&cb);

            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<(usize, f64)> = None;
            let mut dual_bound: f64 = y.iter().zip(self.b).map(|(a, b)| a * b).sum();
            for j in 0..total {
                if self.pos[j] != NONBASIC {
                    continue;
                }
                let d = cost[j] - self.col_dot(j, &y);
                dual_bound += if d > 0.0 { d * self.lo[j] } else { d * self.hi[j] };
                if self.lo[j] == self.hi[j] {
                    continue;
                }
                let at_lower = self.x[j] <= self.lo[j];
                let eligible = (at_lower && d < -opts.optimality_tol)
                    || (!at_lower && d > opts.optimality_tol);
                if !eligible {
                    continue;
                }
                match entering {
                    None => entering = Some((j, d)),
                    Some((_, best)) if !bland && d.abs() > best.abs() => entering = Some((j, d)),
                    _ => {}
                }
            }
            let primal: f64 = (0..total).map(|j| cost[j] * self.x[j]).sum();
            if let Some(t) = trace.as_deref_mut() {
                t.push((primal, dual_bound));
            }

            let Some((q, d)) = entering else {
                if self.residual_norm() > opts.feasibility_tol && retries < 3 {
                    retries += 1;
                    if self.refactor() {
                        continue;
                    }
                }
                return (Status::Optimal, y, dual_bound);
            };
            if *iterations >= limit {
                return (Status::IterationLimit, y, dual_bound);
            }
            *iterations += 1;

            let w = self.factor.ftran(&self.column_dense(q));
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            let mut theta = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None; // (position, bound hit)
            let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let piv_tol = PIVOT_TOL * wmax.max(1.0);
            for (k, &wk) in w.iter().enumerate() {
                if wk.abs() <= piv_tol {
                    continue;
                }
                let j = self.basis[k];
                let rate = -dir * wk;
                let (limit, bound) = if rate < 0.0 {
                    ((self.x[j] - self.lo[j]) / -rate, self.lo[j])
                } else if self.hi[j].is_finite() {
                    ((self.hi[j] - self.x[j]) / rate, self.hi[j])
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    None => limit < theta - 1e-12 || (limit <= theta + 1e-12),
                    Some((r, _)) => {
                        if limit < theta - 1e-12 {
                            true
                        } else if limit <= theta + 1e-12 {
                            if bland {
                                j < self.basis[r]
                            } else {
                                let (a, b) = (wk.abs(), w[r].abs());
                                a > b || (a == b && j < self.basis[r])
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    if leave.is_none() && limit > theta + 1e-12 {
                        continue;
                    }
                    theta = theta.min(limit);
                    leave = Some((k, bound));
                }
            }

            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            if theta != 0.0 {
                for (k, &wk) in w.iter().enumerate() {
                    if wk != 0.0 {
                        let j = self.basis[k];
                        self.x[j] -= dir * wk * theta;
                    }
                }
                self.x[q] += dir * theta;
            }
            match leave {
                None => {
                    // Bound flip.
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, bound)) => {
                    let out = self.basis[r];
                    self.x[out] = bound;
                    self.pos[out] = NONBASIC;
                    self.basis[r] = q;
                    self.pos[q] = r;
                    self.factor.push_eta(r, &w);
                    if self.factor.etas.len() >= REFACTOR_EVERY && !self.refactor() {
                        return (Status::NumericalFailure, y, dual_bound);
                    }
                }
            }
        }
    }
}

/// Solve `min c x, A x = b, lower <= x <= upper`. All bounds must be finite.
pub fn solve(
    a: &CscMatrix,
    b: &[f64],
    c: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    assert!(c.len() == n && lower.len() == n && upper.len() == n);

    let mut x = vec![0.0; n + m];
    x[..n].copy_from_slice(lower);
    let mut residual = b.to_vec();
    for j in 0..n {
        if x[j] != 0.0 {
            for (i, v) in a.column(j) {
                residual[i] -= v * x[j];
            }
        }
    }
    let sigma: Vec<f64> = residual.iter().map(|&r| if r >= 0.0 { 1.0 } else { -1.0 }).collect();
    for i in 0..m {
        x[n + i] = residual[i].abs();
    }
    let mut lo = lower.to_vec();
    lo.extend(std::iter::repeat_n(0.0, m));
    let mut hi = upper.to_vec();
    hi.extend(std::iter::repeat_n(f64::INFINITY, m));
    let mut pos = vec![NONBASIC; n + m];
    for i in 0..m {
        pos[n + i] = i;
    }
    let mut s = Solver {
        a,
        b,
        m,
        n,
        sigma,
        lo,
        hi,
        x,
        basis: (n..n + m).collect(),
        pos,
        factor: Factor::new(m),
    };
    let ok = s.refactor();
    debug_assert!(ok, "artificial basis is diagonal");

    let limit = opts.max_iterations.unwrap_or(50 * (m + n) + 10_000);
    let mut iterations = 0;
    let mut trace = Vec::new();

    let mut phase1 = vec![0.0; n + m];
    for c1 in &mut phase1[n..] {
        *c1 = 1.0;
    }
    let (status, y1, _) = s.run_phase(&phase1, opts, &mut iterations, limit, None);
    let infeasibility: f64 = s.x[n..].iter().sum();
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let finish = |s: &Solver, status, y: Vec<f64>, dual_bound, farkas, iterations, trace| {
        let xs = s.x[..n].to_vec();
        let objective = xs.iter().zip(c).map(|(x, c)| x * c).sum();
        SimplexResult {
            status,
            x: xs,
            objective,
            y,
            dual_bound,
            farkas,
            iterations,
            trace,
        }
    };
    if status != Status::Optimal {
        return finish(&s, status, y1, f64::NEG_INFINITY, None, iterations, trace);
    }
    if infeasibility > opts.feasibility_tol * scale {
        let farkas = Some(y1.clone());
        return finish(&s, Status::Infeasible, y1, f64::NEG_INFINITY, farkas, iterations, trace);
    }

    for i in 0..m {
        s.hi[n + i] = 0.0;
        if s.pos[n + i] == NONBASIC {
            s.x[n + i] = 0.0;
        }
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    let tr = if opts.trace { Some(&mut trace) } else { None };
    let (status, y2, dual_bound) = s.run_phase(&phase2, opts, &mut iterations, limit, tr);
    finish(&s, status, y2, dual_bound, None, iterations, trace)
}

/// Infeasibility gap of row multipliers `y`: `y b - max_{l<=x<=u} y A x`.
/// A positive gap proves `A x = b` has no solution in the box.
pub fn farkas_gap(a: &CscMatrix, b: &[f64], lower: &[f64], upper: &[f64], y: &[f64]) -> f64 {
    let yb: f64 = y.iter().zip(b).map(|(y, b)| y * b).sum();
    let max_activity: f64 = (0..a.cols)
        .map(|j| {
            let g = a.col_dot(j, y);
            (g * lower[j]).max(g * upper[j])
        })
        .sum();
    yb - max_activity
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lp(rows: usize, cols: usize, t: &[(usize, usize, f64)]) -> CscMatrix {
        CscMatrix::from_triplets(rows, cols, t)
    }

    #[test]
    fn small_bounded_problem() {
        // min -x - 2y  s.t. x + y + s = 1.5, 0 <= x, y <= 1, 0 <= s <= 10
        let a = lp(1, 3, &[(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)]);
        let r = solve(
            &a,
            &[1.5],
            &[-1.0, -2.0, 0.0],
            &[0.0; 3],
            &[1.0, 1.0, 10.0],
            &SimplexOptions::default(),
        );
        assert_eq!(r.status, Status::Optimal);
        assert_relative_eq!(r.x[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.x[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.objective, -2.5, epsilon = 1e-12);
        assert_relative_eq!(r.dual_bound, r.objective, epsilon = 1e-10);
    }

    #[test]
    fn infeasible_problem_has_certificate() {
        // x + y = 3 with x, y in [0, 1].
        let a = lp(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        let r = solve(&a, &[3.0], &[1.0, 1.0], &[0.0; 2], &[1.0; 2], &SimplexOptions::default());
        assert_eq!(r.status, Status::Infeasible);
        let y = r.farkas.unwrap();
        assert!(farkas_gap(&a, &[3.0], &[0.0; 2], &[1.0; 2], &y) > 0.5);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // Second row duplicates the first.
        let a = lp(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let r = solve(&a, &[1.0, 1.0], &[2.0, 1.0], &[0.0; 2], &[1.0; 2], &SimplexOptions::default());
        assert_eq!(r.status, Status::Optimal);
        assert_relative_eq!(r.objective, 1.0, epsilon = 1e-12);
        assert_eq!(r.x, vec![0.0, 1.0]);
    }

    #[test]
    fn weak_duality_along_the_path() {
        // A small assignment-like polytope.
        let mut t = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                t.push((i, 3 * i + j, 1.0));
                t.push((3 + j, 3 * i + j, 1.0));
            }
        }
        let a = lp(6, 9, &t);
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let opts = SimplexOptions {
            trace: true,
            ..Default::default()
        };
        let r = solve(&a, &[1.0; 6], &c, &[0.0; 9], &[1.0; 9], &opts);
        assert_eq!(r.status, Status::Optimal);
        assert_relative_eq!(r.objective, 5.0, epsilon = 1e-10);
        assert!(!r.trace.is_empty());
        for &(p, d) in &r.trace {
            assert!(d <= p + 1e-9, "dual bound {d} above primal {p}");
        }
    }
}
