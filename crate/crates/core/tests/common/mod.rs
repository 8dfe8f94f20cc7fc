//! Shared fixtures and exhaustive oracles for the integration tests.
#![allow(dead_code)]

use willmore_ilp::constraints::{BoundaryProblem, ConstraintSystem};
use willmore_ilp::lattice::{LatticeSpec, TriangleDictionary, TriangleId, VertexId};

pub type P = [i64; 3];

pub fn vid(spec: &LatticeSpec, p: P) -> VertexId {
    spec.vertex_id(p).unwrap()
}

/// Dictionary spanned by explicit lattice triangles (both orientations).
pub fn dict_of(extents: [u32; 3], tris: &[[P; 3]]) -> TriangleDictionary {
    let spec = LatticeSpec::new(1, extents, 3f64.sqrt()).unwrap();
    let triples: Vec<_> = tris.iter().map(|t| t.map(|p| vid(&spec, p))).collect();
    TriangleDictionary::from_triples(spec, &triples).unwrap()
}

pub fn tri(d: &TriangleDictionary, t: [P; 3]) -> TriangleId {
    d.find_triangle_at(t).unwrap()
}

pub fn loop_problem(d: &TriangleDictionary, pts: &[P], conormal: &[[P; 3]]) -> BoundaryProblem {
    let v: Vec<_> = pts.iter().map(|&p| vid(d.spec(), p)).collect();
    let j = conormal.iter().map(|&t| tri(d, t)).collect();
    BoundaryProblem::from_loop(d, &v, j, "fixture").unwrap()
}

pub struct Fixture {
    pub name: &'static str,
    pub dict: TriangleDictionary,
    pub problem: BoundaryProblem,
}

const O: P = [0, 0, 0];
const X: P = [1, 0, 0];
const Y: P = [0, 1, 0];
const Z: P = [0, 0, 1];
const XY: P = [1, 1, 0];
const XZ: P = [1, 0, 1];
const YZ: P = [0, 1, 1];

/// Small dictionaries (at most 12 oriented triangles) with boundary problems.
pub fn fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();

    let square = [[O, X, XY], [O, XY, Y], [O, X, Y], [X, XY, Y]];
    let d = dict_of([1, 1, 0], &square);
    out.push(Fixture {
        name: "flat square, closed",
        problem: BoundaryProblem::empty("closed"),
        dict: d,
    });
    let d = dict_of([1, 1, 0], &square);
    out.push(Fixture {
        name: "flat square, boundary",
        problem: loop_problem(&d, &[O, X, XY, Y], &[[O, X, XY], [O, XY, Y]]),
        dict: d,
    });

    // Regular tetrahedron on alternate cube corners, outward faces.
    let tet = [[O, YZ, XY], [O, XY, XZ], [O, XZ, YZ], [XY, YZ, XZ]];
    let d = dict_of([1, 1, 1], &tet);
    out.push(Fixture {
        name: "tetrahedron, closed",
        problem: BoundaryProblem::empty("closed"),
        dict: d,
    });
    let d = dict_of([1, 1, 1], &tet);
    // The missing outward face XY -> YZ -> XZ leaves the hole XY -> XZ -> YZ.
    out.push(Fixture {
        name: "open tetrahedron",
        problem: loop_problem(&d, &[XY, XZ, YZ], &[[O, YZ, XY], [O, XY, XZ], [O, XZ, YZ]]),
        dict: d,
    });

    // Floor and wall squares meeting at a right angle along O-X.
    let fold = [[O, X, XY], [O, XY, Y], [X, O, Z], [X, Z, XZ]];
    let d = dict_of([1, 1, 1], &fold);
    out.push(Fixture {
        name: "fold, closed",
        problem: BoundaryProblem::empty("closed"),
        dict: d,
    });
    out
}

/// All 0/1 vectors with `A x = b` and fixed ones set, by depth-first search.
/// A row is checked as soon as its last column is assigned.
pub fn enumerate(sys: &ConstraintSystem, limit: usize) -> Vec<Vec<i64>> {
    let n = sys.cols();
    let mut last = vec![None; sys.rows];
    let mut rows_of: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for j in 0..n {
        for (i, v) in sys.column(j) {
            last[i] = Some(j);
            rows_of[j].push((i, v as i64));
        }
    }
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, l) in last.iter().enumerate() {
        if let Some(j) = l {
            closes[*j].push(i);
        }
    }
    let fixed: std::collections::HashSet<usize> = sys.fixed_ones.iter().copied().collect();
    let absorbs = sys.rhs_absorbs_fixed();
    // Rows without any column must already hold.
    if last.iter().zip(&sys.rhs).any(|(l, &r)| l.is_none() && r != 0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let mut acc = vec![0i64; sys.rows];
    fn go(
        j: usize,
        n: usize,
        x: &mut Vec<i64>,
        acc: &mut Vec<i64>,
        ctx: &(Vec<Vec<(usize, i64)>>, Vec<Vec<usize>>, std::collections::HashSet<usize>, bool, Vec<i64>),
        out: &mut Vec<Vec<i64>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if j == n {
            out.push(x.clone());
            return;
        }
        let (rows_of, closes, fixed, absorbs, rhs) = ctx;
        let is_fixed = fixed.contains(&j);
        let choices: &[i64] = if is_fixed { &[1] } else { &[0, 1] };
        for &v in choices {
            x[j] = v;
            let counts = !(is_fixed && *absorbs);
            if counts {
                for &(i, a) in &rows_of[j] {
                    acc[i] += a * v;
                }
            }
            if closes[j].iter().all(|&i| acc[i] == rhs[i]) {
                go(j + 1, n, x, acc, ctx, out, limit);
            }
            if counts {
                for &(i, a) in &rows_of[j] {
                    acc[i] -= a * v;
                }
            }
        }
        x[j] = 0;
    }
    let ctx = (rows_of, closes, fixed, absorbs, sys.rhs.clone());
    go(0, n, &mut x, &mut acc, &ctx, &mut out, limit);
    out
}

pub mod oracles {
    use rand::Rng;
    use willmore_ilp::geometry::{HingeGeometry, Point, Vector};

    /// Random hinge `(a, b, c)`, `(b, a, d)` sharing the edge `a b`, kept away
    /// from flat and from folded-back configurations.
    pub fn random_hinge<R: Rng>(rng: &mut R) -> ([Point; 3], [Point; 3]) {
        loop {
            let mut p = || Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (a, b, c, d) = (p(), p(), p(), p());
            let ti = [a, b, c];
            let tj = [b, a, d];
            let Ok(h) = HingeGeometry::from_triangles(&ti, &tj, 1.0) else { continue };
            let areas_ok = h.triangle_areas.iter().all(|&x| x > 0.05);
            if h.edge_len > 0.2 && areas_ok && h.cos_half > 0.05 && h.dihedral_angle > 0.2 {
                return (ti, tj);
            }
        }
    }

    fn area(t: &[Point; 3]) -> f64 {
        0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm()
    }

    /// Sum of the in-plane unit vectors perpendicular to the shared edge and
    /// pointing into each triangle; it points into the fold.
    pub fn fold_interior(ti: &[Point; 3], tj: &[Point; 3]) -> Vector {
        let [a, b, c] = *ti;
        let d = tj[2];
        let e = (b - a).normalize();
        let perp = |p: Point| {
            let v = p - a;
            (v - e * v.dot(&e)).normalize()
        };
        perp(c) + perp(d)
    }

    /// Central-difference gradient of the hinge's total area with respect to
    /// translating the shared edge.
    pub fn edge_area_gradient(ti: &[Point; 3], tj: &[Point; 3], step: f64) -> Vector {
        let shared: Vec<Point> = ti.iter().filter(|p| tj.contains(p)).copied().collect();
        let total = |t: Vector| {
            let mv = |tri: &[Point; 3]| tri.map(|p| if shared.contains(&p) { p + t } else { p });
            area(&mv(ti)) + area(&mv(tj))
        };
        let mut g = Vector::zeros();
        for k in 0..3 {
            let mut e = Vector::zeros();
            e[k] = step;
            g[k] = (total(e) - total(-e)) / (2.0 * step);
        }
        g
    }
}

pub mod instances {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;
    use willmore_ilp::constraints::build_pair_system;
    use willmore_ilp::geometry::CostTable;
    use willmore_ilp::lattice::generate_dictionary;
    use willmore_ilp::qp::{build_q, QuadraticEnergy};
    use willmore_ilp::solver::sparse::CscMatrix;
    use willmore_ilp::solver::LinearProgram;

    pub struct Instance {
        pub dict: TriangleDictionary,
        pub problem: BoundaryProblem,
        pub system: ConstraintSystem,
        pub q: QuadraticEnergy,
        pub integrand: CostTable,
        pub lp: LinearProgram,
    }

    /// Random instance with at most `max_cols` free columns: a connected handful of
    /// triangles from the 2x2x1 lattice, either closed or bounded by a fixed pair of adjacent triangles,
    /// with random per-triangle costs on top of a weighted Willmore term.
    pub fn random_instance<R: Rng>(rng: &mut R, max_cols: usize) -> Instance {
        let spec = LatticeSpec::new(1, [2, 2, 1], 1.5).unwrap();
        let full = generate_dictionary(&spec).unwrap();
        let geometric: Vec<TriangleId> = full
            .triangles()
            .iter()
            .filter(|t| t.id < full.opposite_triangle(t.id))
            .map(|t| t.id)
            .collect();
        loop {
            let size = rng.gen_range(2..=5);
            let mut chosen = vec![*geometric.choose(rng).unwrap()];
            while chosen.len() < size {
                // Grow through shared edges so the pieces can interact.
                let edges: Vec<usize> = chosen.iter().flat_map(|&t| full.triangle_edges(t)).collect();
                let g = *edges.choose(rng).unwrap();
                let t = *full.triangles_on_edge(g).choose(rng).unwrap();
                let t = t.min(full.opposite_triangle(t));
                if !chosen.contains(&t) {
                    chosen.push(t);
                }
            }
            let triples: Vec<_> = chosen.iter().map(|&t| full.triangle(t).vertices).collect();
            let dict = TriangleDictionary::from_triples(spec.clone(), &triples).unwrap();
            let problem = if rng.gen_bool(0.25) {
                BoundaryProblem::empty("closed")
            } else {
                match hinge_collar(&dict, rng) {
                    Some(p) => p,
                    None => continue,
                }
            };
            let system = build_pair_system(&dict, &problem).unwrap();
            let mut integrand = CostTable {
                willmore_weight: [0.5, 1.0, 2.0][rng.gen_range(0..3)],
                ..Default::default()
            };
            for t in 0..dict.triangle_count() {
                integrand.costs.insert(t, rng.gen_range(0..8) as f64 * 0.25);
            }
            let q = build_q(&dict, &integrand).unwrap();
            let lp = LinearProgram::from_system(&system, &q.augmented_weights(&system)).unwrap();
            if lp.cols() <= max_cols {
                return Instance {
                    dict,
                    problem,
                    system,
                    q,
                    integrand,
                    lp,
                };
            }
        }
    }

    /// Two fixed triangles `(a, b, c)` and `(b, a, d)` bounded by the loop `a d b c`.
    fn hinge_collar<R: Rng>(dict: &TriangleDictionary, rng: &mut R) -> Option<BoundaryProblem> {
        let t = rng.gen_range(0..dict.triangle_count());
        let v = dict.triangle(t).vertices;
        let k = rng.gen_range(0..3);
        let (a, b, c) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
        let g = dict.find_geometric_edge(a, b)?;
        let s = **dict
            .triangles_on_edge(g)
            .iter()
            .filter(|&&s| s != t && s != dict.opposite_triangle(t))
            .filter(|&&s| dict.triangle(s).incidence(b, a) == 1)
            .collect::<Vec<_>>()
            .choose(rng)?;
        let w = dict.triangle(s).vertices;
        let d = *w.iter().find(|&&x| x != a && x != b)?;
        BoundaryProblem::from_loop(dict, &[a, d, b, c], vec![t, s], "collar").ok()
    }

    /// All integral feasible points with their objective values.
    pub fn feasible_points(inst: &Instance) -> Vec<(f64, Vec<i64>)> {
        enumerate(&inst.system, usize::MAX)
            .into_iter()
            .map(|x| {
                let free: Vec<f64> = inst.lp.columns.iter().map(|&j| x[j] as f64).collect();
                (inst.lp.objective_value(&free), x)
            })
            .collect()
    }

    /// Substitute `value[c]` for every free column `c` of `lp` with `!keep[c]`.
    pub fn fix_columns(lp: &LinearProgram, keep: &[bool], value: &[f64]) -> LinearProgram {
        let mut rhs = lp.rhs.clone();
        let mut fixed = lp.fixed.clone();
        let mut offset = vec![lp.objective_offset];
        let (mut triplets, mut columns, mut objective, mut names) = (vec![], vec![], vec![], vec![]);
        for c in 0..lp.cols() {
            if keep[c] {
                let k = columns.len();
                triplets.extend(lp.matrix.column(c).map(|(i, v)| (i, k, v)));
                columns.push(lp.columns[c]);
                objective.push(lp.objective[c]);
                names.push(lp.col_names[c].clone());
            } else {
                for (i, v) in lp.matrix.column(c) {
                    rhs[i] -= v * value[c];
                }
                offset.push(lp.objective[c] * value[c]);
                fixed.push((lp.columns[c], value[c]));
            }
        }
        offset.sort_by(f64::total_cmp);
        let n = columns.len();
        LinearProgram {
            objective,
            objective_offset: offset.iter().sum(),
            matrix: CscMatrix::from_triplets(lp.rows(), n, &triplets),
            rhs,
            upper: vec![1.0; n],
            columns,
            fixed,
            full_len: lp.full_len,
            col_names: names,
            row_names: lp.row_names.clone(),
        }
    }

    /// A random instance reduced to at most `free` variables by pinning the rest
    /// to one of its feasible points, with every full feasible point that agrees
    /// on the pinned columns.
    pub fn pinned_instance<R: Rng>(rng: &mut R, free: usize) -> (LinearProgram, Vec<Vec<f64>>) {
        loop {
            let inst = random_instance(rng, 48);
            let points = feasible_points(&inst);
            if points.len() < 2 {
                continue;
            }
            let a = rng.gen_range(0..points.len());
            let b = (a + rng.gen_range(1..points.len())) % points.len();
            let column = |x: &[i64]| -> Vec<f64> { inst.lp.columns.iter().map(|&j| x[j] as f64).collect() };
            let (value, other) = (column(&points[a].1), column(&points[b].1));
            // Free every column where the two points differ, then pad at random.
            let mut keep: Vec<bool> = value.iter().zip(&other).map(|(u, v)| u != v).collect();
            if keep.iter().filter(|&&k| k).count() > free {
                continue;
            }
            let mut order: Vec<usize> = (0..inst.lp.cols()).filter(|&c| !keep[c]).collect();
            order.shuffle(rng);
            let room = free - keep.iter().filter(|&&k| k).count();
            for &c in order.iter().take(room) {
                keep[c] = true;
            }
            let lp = fix_columns(&inst.lp, &keep, &value);
            let matching: Vec<Vec<f64>> = points
                .iter()
                .map(|(_, x)| column(x))
                .filter(|x| (0..x.len()).all(|c| keep[c] || x[c] == value[c]))
                .map(|x| (0..x.len()).filter(|&c| keep[c]).map(|c| x[c]).collect())
                .collect();
            return (lp, matching);
        }
    }
}

pub mod energies {
    use super::*;
    use willmore_ilp::constraints::Variable;
    use willmore_ilp::geometry::{mesh_energy, paired_energy, Integrand, TriMesh};
    use willmore_ilp::qp::{build_q, quadratic_energy};
    use willmore_ilp::solver::LinearProgram;

    /// The three evaluations of one integral feasible point.
    #[derive(Debug, Clone, Copy)]
    pub struct Evaluations {
        pub objective: f64,
        pub quadratic: f64,
        /// `mesh_energy` when every edge carries at most two selected triangles,
        /// otherwise the energy of the mesh with the selected quadrangles as hinges.
        pub mesh: f64,
        pub manifold: bool,
    }

    pub struct Evaluator<'a> {
        dict: &'a TriangleDictionary,
        system: &'a ConstraintSystem,
        integrand: &'a dyn Integrand,
        q: willmore_ilp::qp::QuadraticEnergy,
        lp: LinearProgram,
    }

    impl<'a> Evaluator<'a> {
        pub fn new(
            dict: &'a TriangleDictionary,
            system: &'a ConstraintSystem,
            integrand: &'a dyn Integrand,
        ) -> Self {
            let q = build_q(dict, integrand).unwrap();
            let lp = LinearProgram::from_system(system, &q.augmented_weights(system)).unwrap();
            Evaluator {
                dict,
                system,
                integrand,
                q,
                lp,
            }
        }

        pub fn eval(&self, x: &[i64]) -> Evaluations {
            let free: Vec<f64> = self.lp.columns.iter().map(|&j| x[j] as f64).collect();
            let n = self.dict.triangle_count();
            let tri: Vec<f64> = x[..n].iter().map(|&v| v as f64).collect();
            let selected: Vec<TriangleId> = (0..n).filter(|&t| x[t] == 1).collect();
            let mesh = TriMesh::from_dictionary(self.dict, &selected);
            let manifold = mesh.edge_map().values().all(|ts| ts.len() <= 2);
            let mesh_value = if manifold {
                mesh_energy(&mesh, self.integrand).unwrap()
            } else {
                let local = |t: TriangleId| selected.iter().position(|&s| s == t).unwrap();
                let pairs: Vec<(usize, usize)> = self
                    .system
                    .variables
                    .iter()
                    .zip(x)
                    .filter(|(_, &v)| v == 1)
                    .filter_map(|(var, _)| match *var {
                        Variable::Quadrangle { first, second, .. } => Some((local(first), local(second))),
                        Variable::Triangle(_) => None,
                    })
                    .collect();
                paired_energy(&mesh, &pairs, self.integrand).unwrap()
            };
            Evaluations {
                objective: self.lp.objective_value(&free),
                quadratic: quadratic_energy(&tri, &self.q),
                mesh: mesh_value,
                manifold,
            }
        }
    }

    pub fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }
}

/// Flat 2x2 square with the four corner triangles fixed; the diamond between them
/// can be filled by a fan around the centre or split along either diagonal.
pub fn flat_diamond() -> (TriangleDictionary, BoundaryProblem) {
    let p = |x, y| [x, y, 0];
    let (s, e, n, w, c) = (p(1, 0), p(2, 1), p(1, 2), p(0, 1), p(1, 1));
    let corners = [
        [p(0, 0), s, w],
        [s, p(2, 0), e],
        [e, p(2, 2), n],
        [n, p(0, 2), w],
    ];
    let inner = [
        [s, e, c],
        [e, n, c],
        [n, w, c],
        [w, s, c],
        [s, e, n],
        [s, n, w],
        [e, n, w],
        [e, w, s],
    ];
    let all: Vec<[P; 3]> = corners.iter().chain(&inner).copied().collect();
    let d = dict_of([2, 2, 0], &all);
    let ring = [p(0, 0), s, p(2, 0), e, p(2, 2), n, p(0, 2), w];
    let problem = loop_problem(&d, &ring, &corners);
    (d, problem)
}

/// Small integer matrices for cross-checking the unimodularity tests: random
/// `{-1, 0, 1}` matrices, blocks cut from pair systems and a planted odd cycle.
pub fn tu_fixtures() -> Vec<(String, willmore_ilp::tu::IntMatrix)> {
    use rand::{Rng, SeedableRng};
    use willmore_ilp::constraints::build_pair_system;
    use willmore_ilp::tu::IntMatrix;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut out = Vec::new();
    for k in 0..150 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let dense: Vec<Vec<i64>> = (0..r)
            .map(|_| (0..c).map(|_| [0, 0, 1, -1][rng.gen_range(0..4)]).collect())
            .collect();
        out.push((format!("random {k}"), IntMatrix::from_dense(&dense)));
    }

    // Interval matrices are totally unimodular.
    for n in 2..=6 {
        let dense: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(j >= i / 2 && j <= i)).collect())
            .collect();
        out.push((format!("interval {n}"), IntMatrix::from_dense(&dense)));
    }

    // A 4-cycle with one sign flipped has determinant 2; pad it with noise rows.
    let planted = [
        vec![1, 1, 0, 0, 0, 1],
        vec![0, 1, 1, 0, 0, 0],
        vec![0, 0, 1, 1, 1, 0],
        vec![-1, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 0, 1, 0],
        vec![0, 0, 0, 0, 0, 1],
    ];
    out.push(("planted 4-cycle".into(), IntMatrix::from_dense(&planted)));

    for f in fixtures() {
        let system = build_pair_system(&f.dict, &f.problem).unwrap();
        let full = IntMatrix::from_system(&system);
        for k in 0..20 {
            let rows: Vec<usize> = (0..rng.gen_range(2..=6)).map(|_| rng.gen_range(0..full.rows)).collect();
            let mut rows = rows;
            rows.sort_unstable();
            rows.dedup();
            // Columns touching the chosen rows, so the block is not mostly zero.
            let mut cols: Vec<usize> = rows.iter().flat_map(|&i| full.row(i).iter().map(|e| e.0)).collect();
            cols.sort_unstable();
            cols.dedup();
            while cols.len() > 6 {
                cols.remove(rng.gen_range(0..cols.len()));
            }
            out.push((format!("{} block {k}", f.name), IntMatrix::from_dense(&full.submatrix(&rows, &cols))));
        }
    }
    out
}
