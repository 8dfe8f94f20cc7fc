//! Resolution ladder: one boundary problem solved on successively finer lattices.
//!
//! The problem is a unit square at height 0 whose conormal triangles stand
//! vertically on the boundary (`a -> b` gets the triangle `(a, b, b + e_z)`),
//! so the surface has to leave the boundary upwards and close over the square.
//! At resolution `r` the square has side `r` lattice units (unit length) and
//! the box is `height` lattice units tall, a slab that stays thin as `r` grows.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::constraints::build_pair_system;
use crate::io::{InstanceFile, IntegrandSpec, SolverSection};
use crate::lattice::{generate_dictionary_with, LatticeSpec};
use crate::qp::build_q_with;
use crate::solver::{
    ilp_solve_with, lp_solve_with, round_check, LinearProgram, SolverOptions, Status,
};
use crate::{Execution, Result};

/// Square boundary of `side` lattice units with vertical conormal triangles.
pub fn square_instance(resolution: u32, side: u32, height: u32, max_edge: f64) -> Result<InstanceFile> {
    let lattice = LatticeSpec::new(resolution, [side, side, height], max_edge)?;
    let s = side as i64;
    let mut corners = Vec::new();
    for i in 0..s {
        corners.push([i, 0, 0]);
    }
    for j in 0..s {
        corners.push([s, j, 0]);
    }
    for i in (1..=s).rev() {
        corners.push([i, s, 0]);
    }
    for j in (1..=s).rev() {
        corners.push([0, j, 0]);
    }
    let n = corners.len();
    let boundary: Vec<_> = (0..n).map(|k| [corners[k], corners[(k + 1) % n]]).collect();
    let conormal = boundary
        .iter()
        .map(|&[a, b]| [a, b, [b[0], b[1], 1]])
        .collect();
    Ok(InstanceFile {
        lattice,
        label: format!("square side {side} at resolution {resolution}"),
        boundary,
        conormal,
        integrand: IntegrandSpec::default(),
        solver: SolverSection::default(),
    })
}

#[derive(Debug, Clone)]
pub struct LadderConfig {
    pub resolutions: Vec<u32>,
    /// Box height in lattice units.
    pub height: u32,
    pub max_edge: f64,
    pub tol_int: f64,
    pub node_limit: usize,
    /// Run branch-and-bound when the relaxation is fractional.
    pub solve_ilp: bool,
    pub exec: Execution,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            resolutions: vec![1, 2],
            height: 1,
            max_edge: 1.5,
            tol_int: 1e-7,
            node_limit: 10_000,
            solve_ilp: true,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rung {
    pub resolution: u32,
    pub triangles: usize,
    pub quadrangles: usize,
    pub rows: usize,
    pub free_columns: usize,
    pub lp_status: Status,
    pub lp_objective: f64,
    pub fractional: Vec<usize>,
    /// Fractional count when re-scanned at `1e-9`.
    pub fractional_fine: usize,
    pub lp_time: Duration,
    pub ilp_status: Option<Status>,
    pub ilp_objective: Option<f64>,
    pub ilp_nodes: Option<usize>,
    /// `lp <= ilp` and the ILP solution is integral.
    pub sandwich_ok: Option<bool>,
}

pub fn run_rung(resolution: u32, cfg: &LadderConfig) -> Result<Rung> {
    let inst = square_instance(resolution, resolution, cfg.height, cfg.max_edge)?;
    let dict = generate_dictionary_with(&inst.lattice, cfg.exec)?;
    let problem = inst.boundary_problem(&dict)?;
    let system = build_pair_system(&dict, &problem)?;
    let integrand = inst.integrand.build(&dict)?;
    let q = build_q_with(&dict, integrand.as_ref(), cfg.exec)?;
    let lp = LinearProgram::from_system(&system, &q.augmented_weights(&system))?;
    let opts = SolverOptions {
        tol_int: cfg.tol_int,
        node_limit: cfg.node_limit,
        ..Default::default()
    };
    let start = Instant::now();
    let relax = lp_solve_with(&lp, &opts);
    let lp_time = start.elapsed();
    let check = round_check(&relax, cfg.tol_int);
    let fine = round_check(&relax, 1e-9);
    let mut rung = Rung {
        resolution,
        triangles: dict.triangle_count(),
        quadrangles: system.cols() - dict.triangle_count(),
        rows: lp.rows(),
        free_columns: lp.cols(),
        lp_status: relax.status,
        lp_objective: relax.objective,
        fractional: check.fractional,
        fractional_fine: fine.fractional.len(),
        lp_time,
        ilp_status: None,
        ilp_objective: None,
        ilp_nodes: None,
        sandwich_ok: None,
    };
    if cfg.solve_ilp && relax.status == Status::Optimal && !rung.fractional.is_empty() {
        let ilp = ilp_solve_with(&lp, &opts);
        let integral = round_check(&ilp, cfg.tol_int).fractional.is_empty();
        let scale = 1e-9 * ilp.objective.abs().max(1.0);
        rung.sandwich_ok = Some(
            ilp.status == Status::Optimal && integral && relax.objective <= ilp.objective + scale,
        );
        rung.ilp_status = Some(ilp.status);
        rung.ilp_objective = Some(ilp.objective);
        rung.ilp_nodes = Some(ilp.nodes);
    }
    Ok(rung)
}

pub fn run_ladder(cfg: &LadderConfig) -> Result<Vec<Rung>> {
    cfg.resolutions.iter().map(|&r| run_rung(r, cfg)).collect()
}

pub fn ladder_table(rungs: &[Rung]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4} {:>7} {:>7} {:>6} {:>6} {:>9} {:>14} {:>5} {:>9} {:>14} {:>6} {:>8}",
        "res", "tris", "quads", "rows", "cols", "lp", "lp_obj", "frac", "lp_ms", "ilp_obj", "nodes", "sandwich"
    );
    for r in rungs {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>4} {:>7} {:>7} {:>6} {:>6} {:>9} {:>14.9} {:>5} {:>9.1} {:>14} {:>6} {:>8}",
            r.resolution,
            r.triangles,
            r.quadrangles,
            r.rows,
            r.free_columns,
            r.lp_status.as_str(),
            r.lp_objective,
            r.fractional.len(),
            r.lp_time.as_secs_f64() * 1e3,
            opt(r.ilp_objective.map(|v| format!("{v:.9}"))),
            opt(r.ilp_nodes.map(|v| v.to_string())),
            opt(r.sandwich_ok.map(|v| v.to_string())),
        );
    }
    s
}
