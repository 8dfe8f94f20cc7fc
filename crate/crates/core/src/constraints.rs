//! Boundary problems and incidence systems.
//!
//! Two constraint forms are assembled from a dictionary and a boundary problem:
//!
//! - the oriented form `B x = r`: one row per geometric edge (oriented from its
//!   smaller vertex id), one column per oriented triangle, entries `+1`/`-1`
//!   by orientation agreement;
//! - the pair form `D x^ = r'`: one row per (triangle, edge of the triangle),
//!   columns for triangles (`+1` in their three rows) and for quadrangles, i.e.
//!   non-degenerate adjacent pairs (`-1` in the two rows of the shared edge).
//!
//! Conormal triangles are recorded as variables fixed to one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::geometry;
use crate::lattice::{adjacent_pairs, EdgeId, TriangleDictionary, TriangleId, VertexId};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// The discrete boundary datum: an oriented closed edge chain and conormal triangles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryProblem {
    /// Oriented edge id and sign; `-1` means the chain runs against the edge.
    pub boundary_edges: Vec<(EdgeId, i8)>,
    pub conormal_triangles: Vec<TriangleId>,
    pub label: String,
}

impl BoundaryProblem {
    pub fn empty(label: &str) -> Self {
        BoundaryProblem {
            boundary_edges: Vec::new(),
            conormal_triangles: Vec::new(),
            label: label.to_string(),
        }
    }

    /// Boundary following the closed vertex loop `v0 -> v1 -> ... -> v0`.
    pub fn from_loop(
        dict: &TriangleDictionary,
        vertices: &[VertexId],
        conormal: Vec<TriangleId>,
        label: &str,
    ) -> Result<Self> {
        let mut edges = Vec::with_capacity(vertices.len());
        for (k, &a) in vertices.iter().enumerate() {
            let b = vertices[(k + 1) % vertices.len()];
            let e = dict.find_edge(a, b).ok_or_else(|| {
                Error::InvalidBoundary(format!("edge {a} -> {b} is not a dictionary edge"))
            })?;
            edges.push((e, 1));
        }
        Ok(BoundaryProblem {
            boundary_edges: edges,
            conormal_triangles: conormal,
            label: label.to_string(),
        })
    }

    /// The chain as traversed vertex pairs `from -> to`.
    pub fn directed(&self, dict: &TriangleDictionary) -> Vec<[VertexId; 2]> {
        self.boundary_edges
            .iter()
            .map(|&(e, s)| {
                let [a, b] = dict.edge(e).endpoints;
                if s >= 0 {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect()
    }

    /// Checks closure and the conormal rules. With `require_cover`, every boundary
    /// edge must be covered by exactly one conormal triangle (needed by the pair form).
    pub fn validate(&self, dict: &TriangleDictionary, require_cover: bool) -> Result<()> {
        for &(e, s) in &self.boundary_edges {
            if e >= dict.edge_count() {
                return Err(Error::InvalidBoundary(format!("edge id {e} out of range")));
            }
            if s != 1 && s != -1 {
                return Err(Error::InvalidBoundary(format!("sign {s} is not +-1")));
            }
        }
        let directed = self.directed(dict);
        let mut balance: BTreeMap<VertexId, i64> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for &[a, b] in &directed {
            *balance.entry(a).or_default() += 1;
            *balance.entry(b).or_default() -= 1;
            if !seen.insert([a.min(b), a.max(b)]) {
                return Err(Error::InvalidBoundary(format!(
                    "edge ({a}, {b}) appears twice in the chain"
                )));
            }
        }
        if let Some((v, _)) = balance.iter().find(|(_, &d)| d != 0) {
            return Err(Error::InvalidBoundary(format!(
                "chain is not closed: vertex {v} has unequal in and out degree"
            )));
        }

        let mut cover: HashMap<[VertexId; 2], usize> = HashMap::new();
        let mut fixed = BTreeSet::new();
        for &t in &self.conormal_triangles {
            if t >= dict.triangle_count() {
                return Err(Error::InvalidBoundary(format!("triangle id {t} out of range")));
            }
            if !fixed.insert(t) {
                return Err(Error::InvalidBoundary(format!("conormal triangle {t} listed twice")));
            }
            let tri = dict.triangle(t);
            let mut touches = false;
            for &[a, b] in &directed {
                match tri.incidence(a, b) {
                    1 => {
                        touches = true;
                        *cover.entry([a.min(b), a.max(b)]).or_default() += 1;
                    }
                    -1 => {
                        return Err(Error::InvalidBoundary(format!(
                            "conormal triangle {t} runs against the boundary edge {a} -> {b}"
                        )))
                    }
                    _ => {}
                }
            }
            if !touches {
                return Err(Error::InvalidBoundary(format!(
                    "conormal triangle {t} shares no edge with the boundary"
                )));
            }
        }
        for &[a, b] in &directed {
            let n = cover.get(&[a.min(b), a.max(b)]).copied().unwrap_or(0);
            if n > 1 || (require_cover && n != 1) {
                return Err(Error::InvalidBoundary(format!(
                    "boundary edge {a} -> {b} is covered by {n} conormal triangles, expected exactly one"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// `B x = r`.
    OrientedEdge,
    /// `D x^ = r'`.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    Triangle(TriangleId),
    Quadrangle {
        first: TriangleId,
        second: TriangleId,
        edge: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowLabel {
    /// Geometric edge, oriented from its smaller vertex id.
    Edge(usize),
    TriangleEdge { triangle: TriangleId, edge: usize },
}

/// Sparse `{-1, 0, 1}` matrix in compressed column form with right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub kind: SystemKind,
    pub rows: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<i8>,
    pub rhs: Vec<i64>,
    /// Sorted indices of variables fixed to one.
    pub fixed_ones: Vec<usize>,
    pub variables: Vec<Variable>,
    pub row_labels: Vec<RowLabel>,
    /// All-zero rows removed during assembly.
    pub dropped_rows: usize,
}

impl ConstraintSystem {
    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, i8)> {
        (0..self.cols())
            .flat_map(|j| self.column(j).map(move |(i, v)| (i, j, v)))
            .collect()
    }

    pub fn dense(&self) -> Vec<Vec<i8>> {
        let mut m = vec![vec![0i8; self.cols()]; self.rows];
        for (i, j, v) in self.triplets() {
            m[i][j] = v;
        }
        m
    }

    /// The B-form right-hand side is already `r~ = r - B x_J`, so its fixed
    /// columns stay out of products. The pair form keeps them in.
    pub fn rhs_absorbs_fixed(&self) -> bool {
        self.kind == SystemKind::OrientedEdge
    }

    fn active(&self, j: usize) -> bool {
        !(self.rhs_absorbs_fixed() && self.fixed_ones.binary_search(&j).is_ok())
    }

    /// `A x` for a real vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 && self.active(j) {
                for (i, v) in self.column(j) {
                    out[i] += v as f64 * xj;
                }
            }
        }
        out
    }

    pub fn apply_int(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0 && self.active(j) {
                for (i, v) in self.column(j) {
                    out[i] += v as i64 * xj;
                }
            }
        }
        out
    }

    /// Rows violated by an integral vector, with their residual `A x - rhs`.
    pub fn violations(&self, x: &[i64]) -> Vec<(usize, i64)> {
        self.apply_int(x)
            .iter()
            .zip(&self.rhs)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| (i, a - b))
            .collect()
    }

    /// Feasible for the equalities, the fixed variables and `x in {0,1}`.
    pub fn is_feasible(&self, x: &[i64]) -> bool {
        x.len() == self.cols()
            && x.iter().all(|&v| v == 0 || v == 1)
            && self.fixed_ones.iter().all(|&j| x[j] == 1)
            && self.violations(x).is_empty()
    }

    pub fn column_of(&self, var: &Variable) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }

    pub fn triangle_count(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| matches!(v, Variable::Triangle(_)))
            .count()
    }

    /// Plain text triplets: header `rows cols nnz`, then `row col value` lines.
    pub fn to_triplet_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols(), self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        s
    }
}

/// A `{-1, 0, 1}` matrix read back from triplet text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, i8)>,
}

impl TripletMatrix {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header `rows cols nnz`"))?;
        let h = parse_ints(header, 3, path, ln + 1)?;
        let (rows, cols, nnz) = (h[0] as usize, h[1] as usize, h[2] as usize);
        let mut entries = Vec::with_capacity(nnz);
        for (ln, line) in lines {
            let t = parse_ints(line, 3, path, ln + 1)?;
            if t[0] < 0 || t[0] as usize >= rows || t[1] < 0 || t[1] as usize >= cols {
                return Err(Error::parse(path, ln + 1, "index out of range"));
            }
            if !(-1..=1).contains(&t[2]) {
                return Err(Error::parse(path, ln + 1, "value must be -1, 0 or 1"));
            }
            entries.push((t[0] as usize, t[1] as usize, t[2] as i8));
        }
        if entries.len() != nnz {
            return Err(Error::parse(
                path,
                1,
                format!("header announces {nnz} entries, found {}", entries.len()),
            ));
        }
        Ok(TripletMatrix { rows, cols, entries })
    }

    pub fn dense(&self) -> Vec<Vec<i8>> {
        let mut m = vec![vec![0i8; self.cols]; self.rows];
        for &(i, j, v) in &self.entries {
            m[i][j] = v;
        }
        m
    }
}

fn parse_ints(line: &str, n: usize, path: &str, ln: usize) -> Result<Vec<i64>> {
    let v: Vec<i64> = line
        .split_whitespace()
        .map(|t| t.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(path, ln, format!("expected {n} integers: {e}")))?;
    if v.len() != n {
        return Err(Error::parse(path, ln, format!("expected {n} integers, found {}", v.len())));
    }
    Ok(v)
}

fn compress(
    kind: SystemKind,
    columns: Vec<Vec<(usize, i8)>>,
    rows: usize,
    rhs: Vec<i64>,
    fixed_ones: Vec<usize>,
    variables: Vec<Variable>,
    row_labels: Vec<RowLabel>,
) -> ConstraintSystem {
    let mut used = vec![false; rows];
    for col in &columns {
        for &(i, _) in col {
            used[i] = true;
        }
    }
    // Drop all-zero rows; one with a nonzero rhs stays, it is what makes the system infeasible.
    let keep: Vec<bool> = (0..rows).map(|i| used[i] || rhs[i] != 0).collect();
    let mut remap = vec![usize::MAX; rows];
    let mut n = 0;
    for i in 0..rows {
        if keep[i] {
            remap[i] = n;
            n += 1;
        }
    }
    let mut col_ptr = vec![0];
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    for mut col in columns {
        col.sort_unstable();
        for (i, v) in col {
            row_idx.push(remap[i]);
            values.push(v);
        }
        col_ptr.push(row_idx.len());
    }
    ConstraintSystem {
        kind,
        rows: n,
        col_ptr,
        row_idx,
        values,
        rhs: (0..rows).filter(|&i| keep[i]).map(|i| rhs[i]).collect(),
        fixed_ones,
        variables,
        row_labels: (0..rows).filter(|&i| keep[i]).map(|i| row_labels[i]).collect(),
        dropped_rows: rows - n,
    }
}

/// Assemble `B x = r~` with conormal triangles fixed to one.
///
/// `r~ = r - B x_J`, so boundary edges covered by a conormal triangle leave the
/// active right-hand side.
pub fn build_oriented_system(
    dict: &TriangleDictionary,
    problem: &BoundaryProblem,
) -> Result<ConstraintSystem> {
    problem.validate(dict, false)?;
    let rows = dict.geometric_edge_count();
    let columns: Vec<Vec<(usize, i8)>> = dict
        .triangles()
        .iter()
        .map(|t| {
            dict.triangle_edges(t.id)
                .iter()
                .zip(t.directed_edges())
                .map(|(&g, [a, _])| {
                    let [lo, _] = dict.geometric_edge(g);
                    (g, if a == lo { 1 } else { -1 })
                })
                .collect()
        })
        .collect();
    let mut rhs = vec![0i64; rows];
    for [a, b] in problem.directed(dict) {
        let g = dict
            .find_geometric_edge(a, b)
            .ok_or_else(|| Error::InvalidBoundary(format!("edge ({a}, {b}) not in dictionary")))?;
        rhs[g] += if a < b { 1 } else { -1 };
    }
    let mut fixed: Vec<usize> = problem.conormal_triangles.clone();
    fixed.sort_unstable();
    for &t in &fixed {
        for &(g, v) in &columns[t] {
            rhs[g] -= v as i64;
        }
    }
    let variables = (0..dict.triangle_count()).map(Variable::Triangle).collect();
    let labels = (0..rows).map(RowLabel::Edge).collect();
    Ok(compress(
        SystemKind::OrientedEdge,
        columns,
        rows,
        rhs,
        fixed,
        variables,
        labels,
    ))
}

/// Adjacent pairs whose hinge is non-degenerate; these become quadrangle variables.
pub fn quadrangles(dict: &TriangleDictionary) -> Vec<crate::lattice::AdjacentPair> {
    quadrangles_with(dict, Execution::default())
}

pub fn quadrangles_with(
    dict: &TriangleDictionary,
    exec: Execution,
) -> Vec<crate::lattice::AdjacentPair> {
    let pairs = adjacent_pairs(dict);
    let ok = par::map(exec, &pairs, |p| geometry::hinge(dict, p.first, p.second).is_ok());
    pairs
        .into_iter()
        .zip(ok)
        .filter_map(|(p, ok)| ok.then_some(p))
        .collect()
}

/// Assemble `D x^ = r'` with conormal triangles fixed to one.
///
/// `r'(k, e) = 1` exactly when `k` is a conormal triangle and `e` is a boundary edge.
pub fn build_pair_system(
    dict: &TriangleDictionary,
    problem: &BoundaryProblem,
) -> Result<ConstraintSystem> {
    problem.validate(dict, true)?;
    let n = dict.triangle_count();
    let row_of = |t: TriangleId, g: usize| -> usize {
        let k = dict.triangle_edges(t).iter().position(|&x| x == g).unwrap();
        3 * t + k
    };
    let rows = 3 * n;
    let mut columns: Vec<Vec<(usize, i8)>> = (0..n)
        .map(|t| (0..3).map(|k| (3 * t + k, 1)).collect())
        .collect();
    let mut variables: Vec<Variable> = (0..n).map(Variable::Triangle).collect();
    for q in quadrangles(dict) {
        columns.push(vec![(row_of(q.first, q.edge), -1), (row_of(q.second, q.edge), -1)]);
        variables.push(Variable::Quadrangle {
            first: q.first,
            second: q.second,
            edge: q.edge,
        });
    }
    let mut rhs = vec![0i64; rows];
    let boundary: BTreeSet<usize> = problem
        .directed(dict)
        .iter()
        .filter_map(|&[a, b]| dict.find_geometric_edge(a, b))
        .collect();
    let mut fixed = problem.conormal_triangles.clone();
    fixed.sort_unstable();
    for &t in &fixed {
        for g in dict.triangle_edges(t) {
            if boundary.contains(&g) {
                rhs[row_of(t, g)] = 1;
            }
        }
    }
    let labels = (0..rows)
        .map(|r| RowLabel::TriangleEdge {
            triangle: r / 3,
            edge: dict.triangle_edges(r / 3)[r % 3],
        })
        .collect();
    Ok(compress(SystemKind::Pair, columns, rows, rhs, fixed, variables, labels))
}

/// Values of the augmented vector, split into triangle and quadrangle parts.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedVector {
    pub triangle_part: Vec<f64>,
    pub quadrangle_part: Vec<f64>,
}

impl AugmentedVector {
    pub fn from_values(system: &ConstraintSystem, values: &[f64]) -> Result<Self> {
        if values.len() != system.cols() {
            return Err(Error::Dimension(format!(
                "vector has {} entries, system has {} columns",
                values.len(),
                system.cols()
            )));
        }
        let n = system.triangle_count();
        Ok(AugmentedVector {
            triangle_part: values[..n].to_vec(),
            quadrangle_part: values[n..].to_vec(),
        })
    }

    /// Lift a triangle indicator: every quadrangle gets `x_i * x_j`.
    pub fn lift(system: &ConstraintSystem, triangles: &[f64]) -> Self {
        let quadrangle_part = system.variables[system.triangle_count()..]
            .iter()
            .map(|v| match *v {
                Variable::Quadrangle { first, second, .. } => triangles[first] * triangles[second],
                Variable::Triangle(_) => unreachable!(),
            })
            .collect();
        AugmentedVector {
            triangle_part: triangles.to_vec(),
            quadrangle_part,
        }
    }

    pub fn len(&self) -> usize {
        self.triangle_part.len() + self.quadrangle_part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = self.triangle_part.clone();
        v.extend_from_slice(&self.quadrangle_part);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConsistencyReport {
    /// Rows with `D x^ != r'`, and the residual.
    pub violated_rows: Vec<(usize, i64)>,
    /// Fixed variables that are not one.
    pub unfixed: Vec<usize>,
    /// Quadrangles set to one while one of their triangles is zero.
    pub orphan_quadrangles: Vec<usize>,
    /// Quadrangles at zero although both triangles are one. This is legal when
    /// more than two selected triangles meet at an edge (self-intersection).
    pub unmatched_pairs: Vec<usize>,
    pub non_binary: Vec<usize>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violated_rows.is_empty()
            && self.unfixed.is_empty()
            && self.orphan_quadrangles.is_empty()
            && self.non_binary.is_empty()
    }
}

/// Verify feasibility of an integral augmented vector and the quadrangle pairing rule.
pub fn check_consistency(x: &AugmentedVector, system: &ConstraintSystem) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    let values = x.values();
    let ints: Vec<i64> = values.iter().map(|v| v.round() as i64).collect();
    for (j, (&v, &r)) in values.iter().zip(&ints).enumerate() {
        if (v - r as f64).abs() > 1e-9 || !(0..=1).contains(&r) {
            report.non_binary.push(j);
        }
    }
    if values.len() != system.cols() {
        report.violated_rows.push((usize::MAX, 0));
        return report;
    }
    report.violated_rows = system.violations(&ints);
    report.unfixed = system.fixed_ones.iter().copied().filter(|&j| ints[j] != 1).collect();
    let n = system.triangle_count();
    for (k, var) in system.variables[n..].iter().enumerate() {
        if let Variable::Quadrangle { first, second, .. } = *var {
            let both = ints[first] == 1 && ints[second] == 1;
            if ints[n + k] == 1 && !both {
                report.orphan_quadrangles.push(n + k);
            }
            if ints[n + k] == 0 && both {
                report.unmatched_pairs.push(n + k);
            }
        }
    }
    report
}
