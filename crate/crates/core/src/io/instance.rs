//! Instance files: line-oriented sections describing one boundary problem.
//!
//! ```text
//! [lattice]
//! resolution 1
//! box 2 2 1
//! max_edge 1.5
//! [boundary]
//! label square
//! edge 0 0 0  1 0 0
//! [conormal]
//! tri 0 0 0  1 0 0  1 1 0
//! [integrand]
//! kind willmore
//! [solver]
//! tol_int 1e-7
//! ```
//!
//! Coordinates are integer lattice indices. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::constraints::BoundaryProblem;
use crate::geometry::{Area, CostTable, Integrand, Willmore};
use crate::lattice::{LatticeSpec, TriangleDictionary};
use crate::{Error, Result};

pub type Coord = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrandKind {
    Willmore,
    Area,
    Custom,
}

impl IntegrandKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "willmore" => Some(IntegrandKind::Willmore),
            "area" => Some(IntegrandKind::Area),
            "custom" => Some(IntegrandKind::Custom),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntegrandKind::Willmore => "willmore",
            IntegrandKind::Area => "area",
            IntegrandKind::Custom => "custom",
        }
    }
}

/// Integrand selector. `Custom` is `willmore_weight * |H|^2 + phi_const` on
/// edges and a per-triangle cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandSpec {
    pub kind: IntegrandKind,
    pub willmore_weight: f64,
    pub phi_const: f64,
    pub default_cost: f64,
    pub costs: Vec<([Coord; 3], f64)>,
}

impl Default for IntegrandSpec {
    fn default() -> Self {
        IntegrandSpec {
            kind: IntegrandKind::Willmore,
            willmore_weight: 1.0,
            phi_const: 0.0,
            default_cost: 0.0,
            costs: Vec::new(),
        }
    }
}

impl IntegrandSpec {
    pub fn build(&self, dict: &TriangleDictionary) -> Result<Box<dyn Integrand>> {
        Ok(match self.kind {
            IntegrandKind::Willmore => Box::new(Willmore),
            IntegrandKind::Area => Box::new(Area),
            IntegrandKind::Custom => {
                let mut table = CostTable {
                    willmore_weight: self.willmore_weight,
                    constant: self.phi_const,
                    default_cost: self.default_cost,
                    ..Default::default()
                };
                for (tri, cost) in &self.costs {
                    let t = dict.find_triangle_at(*tri).ok_or_else(|| Error::Unknown {
                        kind: "triangle",
                        what: format!("{tri:?}"),
                    })?;
                    table.costs.insert(t, *cost);
                }
                Box::new(table)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub tol_int: f64,
    pub node_limit: usize,
    pub seed: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol_int: 1e-7,
            node_limit: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub lattice: LatticeSpec,
    pub label: String,
    /// Boundary chain as directed lattice segments.
    pub boundary: Vec<[Coord; 2]>,
    pub conormal: Vec<[Coord; 3]>,
    pub integrand: IntegrandSpec,
    pub solver: SolverSection,
}

fn ints<const N: usize>(toks: &[&str], path: &str, ln: usize) -> Result<[i64; N]> {
    if toks.len() != N {
        return Err(Error::parse(path, ln, format!("expected {N} integers, found {}", toks.len())));
    }
    let mut out = [0i64; N];
    for (o, t) in out.iter_mut().zip(toks) {
        *o = t
            .parse()
            .map_err(|_| Error::parse(path, ln, format!("`{t}` is not an integer")))?;
    }
    Ok(out)
}

fn coords<const N: usize>(toks: &[&str], path: &str, ln: usize) -> Result<[Coord; N]> {
    let flat: Vec<i64> = match N {
        2 => ints::<6>(toks, path, ln)?.to_vec(),
        3 => ints::<9>(toks, path, ln)?.to_vec(),
        _ => unreachable!(),
    };
    let mut out = [[0i64; 3]; N];
    for (k, p) in out.iter_mut().enumerate() {
        p.copy_from_slice(&flat[3 * k..3 * k + 3]);
    }
    Ok(out)
}

fn one<T: std::str::FromStr>(toks: &[&str], path: &str, ln: usize, key: &str) -> Result<T> {
    match toks {
        [v] => v
            .parse()
            .map_err(|_| Error::parse(path, ln, format!("bad value `{v}` for `{key}`"))),
        _ => Err(Error::parse(path, ln, format!("`{key}` takes one value"))),
    }
}

impl InstanceFile {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut resolution = None;
        let mut extents = None;
        let mut max_edge = None;
        let mut label = String::from("unnamed");
        let mut boundary = Vec::new();
        let mut conormal = Vec::new();
        let mut integrand = IntegrandSpec::default();
        let mut solver = SolverSection::default();
        let mut section = String::new();
        let mut lattice_line = 0;

        for (k, raw) in text.lines().enumerate() {
            let ln = k + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                match name {
                    "lattice" | "boundary" | "conormal" | "integrand" | "solver" => {
                        section = name.to_string();
                        if name == "lattice" {
                            lattice_line = ln;
                        }
                    }
                    _ => return Err(Error::parse(path, ln, format!("unknown section [{name}]"))),
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let (key, rest) = (toks[0], &toks[1..]);
            match (section.as_str(), key) {
                ("lattice", "resolution") => resolution = Some(one::<u32>(rest, path, ln, key)?),
                ("lattice", "box") => {
                    let b = ints::<3>(rest, path, ln)?;
                    if b.iter().any(|&v| v < 0 || v > u32::MAX as i64) {
                        return Err(Error::parse(path, ln, "box extents must be nonnegative"));
                    }
                    extents = Some(b.map(|v| v as u32));
                }
                ("lattice", "max_edge") => max_edge = Some(one::<f64>(rest, path, ln, key)?),
                ("boundary", "label") => label = rest.join(" "),
                ("boundary", "edge") => boundary.push(coords::<2>(rest, path, ln)?),
                ("conormal", "tri") => conormal.push(coords::<3>(rest, path, ln)?),
                ("integrand", "kind") => {
                    let v: String = one(rest, path, ln, key)?;
                    integrand.kind = IntegrandKind::parse(&v).ok_or_else(|| {
                        Error::parse(path, ln, format!("unknown integrand kind `{v}`"))
                    })?;
                }
                ("integrand", "willmore_weight") => {
                    integrand.willmore_weight = one(rest, path, ln, key)?
                }
                ("integrand", "phi_const") => integrand.phi_const = one(rest, path, ln, key)?,
                ("integrand", "default_cost") => integrand.default_cost = one(rest, path, ln, key)?,
                ("integrand", "cost") => {
                    if rest.len() != 10 {
                        return Err(Error::parse(path, ln, "`cost` takes 9 integers and a value"));
                    }
                    let tri = coords::<3>(&rest[..9], path, ln)?;
                    let v = one::<f64>(&rest[9..], path, ln, key)?;
                    integrand.costs.push((tri, v));
                }
                ("solver", "tol_int") => solver.tol_int = one(rest, path, ln, key)?,
                ("solver", "node_limit") => solver.node_limit = one(rest, path, ln, key)?,
                ("solver", "seed") => solver.seed = one(rest, path, ln, key)?,
                ("", _) => {
                    return Err(Error::parse(path, ln, format!("`{key}` outside of any section")))
                }
                (s, _) => {
                    return Err(Error::parse(path, ln, format!("unknown key `{key}` in [{s}]")))
                }
            }
        }
        let missing =
            |what: &str| Error::parse(path, lattice_line, format!("[lattice] is missing `{what}`"));
        let lattice = LatticeSpec::new(
            resolution.ok_or_else(|| missing("resolution"))?,
            extents.ok_or_else(|| missing("box"))?,
            max_edge.ok_or_else(|| missing("max_edge"))?,
        )
        .map_err(|e| Error::parse(path, lattice_line, e.to_string()))?;
        Ok(InstanceFile {
            lattice,
            label,
            boundary,
            conormal,
            integrand,
            solver,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let c = |p: &Coord| format!("{} {} {}", p[0], p[1], p[2]);
        let mut s = String::new();
        let l = &self.lattice;
        let _ = writeln!(s, "[lattice]");
        let _ = writeln!(s, "resolution {}", l.resolution);
        let _ = writeln!(s, "box {} {} {}", l.extents[0], l.extents[1], l.extents[2]);
        let _ = writeln!(s, "max_edge {}", l.max_edge_len);
        let _ = writeln!(s, "\n[boundary]");
        let _ = writeln!(s, "label {}", self.label);
        for [a, b] in &self.boundary {
            let _ = writeln!(s, "edge {}  {}", c(a), c(b));
        }
        let _ = writeln!(s, "\n[conormal]");
        for [a, b, d] in &self.conormal {
            let _ = writeln!(s, "tri {}  {}  {}", c(a), c(b), c(d));
        }
        let i = &self.integrand;
        let _ = writeln!(s, "\n[integrand]");
        let _ = writeln!(s, "kind {}", i.kind.as_str());
        if i.kind == IntegrandKind::Custom {
            let _ = writeln!(s, "willmore_weight {}", i.willmore_weight);
            let _ = writeln!(s, "phi_const {}", i.phi_const);
            let _ = writeln!(s, "default_cost {}", i.default_cost);
            for ([a, b, d], v) in &i.costs {
                let _ = writeln!(s, "cost {}  {}  {}  {}", c(a), c(b), c(d), v);
            }
        }
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "tol_int {}", self.solver.tol_int);
        let _ = writeln!(s, "node_limit {}", self.solver.node_limit);
        let _ = writeln!(s, "seed {}", self.solver.seed);
        s
    }

    /// Resolve lattice coordinates against a dictionary built from `self.lattice`.
    pub fn boundary_problem(&self, dict: &TriangleDictionary) -> Result<BoundaryProblem> {
        let spec = dict.spec();
        let vid = |p: &Coord| {
            spec.vertex_id(*p)
                .ok_or_else(|| Error::InvalidBoundary(format!("vertex {p:?} outside the box")))
        };
        let mut edges = Vec::with_capacity(self.boundary.len());
        for [a, b] in &self.boundary {
            let (va, vb) = (vid(a)?, vid(b)?);
            let e = dict.find_edge(va, vb).ok_or_else(|| {
                Error::InvalidBoundary(format!("segment {a:?} -> {b:?} is not a dictionary edge"))
            })?;
            edges.push((e, 1));
        }
        let mut conormal = Vec::with_capacity(self.conormal.len());
        for tri in &self.conormal {
            conormal.push(dict.find_triangle_at(*tri).ok_or_else(|| {
                Error::InvalidBoundary(format!("conormal triangle {tri:?} is not in the dictionary"))
            })?);
        }
        Ok(BoundaryProblem {
            boundary_edges: edges,
            conormal_triangles: conormal,
            label: self.label.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# unit square, both halves fixed
[lattice]
resolution 1
box 1 1 0
max_edge 1.5

[boundary]
label square
edge 0 0 0  1 0 0
edge 1 0 0  1 1 0
edge 1 1 0  0 1 0
edge 0 1 0  0 0 0

[conormal]
tri 0 0 0  1 0 0  1 1 0
tri 0 0 0  1 1 0  0 1 0

[integrand]
kind custom
willmore_weight 2
phi_const 0.5
default_cost 0.25
cost 0 0 0  1 0 0  1 1 0  1.5

[solver]
tol_int 1e-8
node_limit 50
seed 7
";

    #[test]
    fn parse_and_round_trip() {
        let f = InstanceFile::parse(SAMPLE, "sample").unwrap();
        assert_eq!(f.lattice.extents, [1, 1, 0]);
        assert_eq!(f.boundary.len(), 4);
        assert_eq!(f.conormal.len(), 2);
        assert_eq!(f.integrand.kind, IntegrandKind::Custom);
        assert_eq!(f.integrand.costs.len(), 1);
        assert_eq!(f.solver.seed, 7);
        let again = InstanceFile::parse(&f.to_text(), "again").unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn resolves_against_dictionary() {
        let f = InstanceFile::parse(SAMPLE, "sample").unwrap();
        let d = crate::lattice::generate_dictionary(&f.lattice).unwrap();
        let p = f.boundary_problem(&d).unwrap();
        p.validate(&d, true).unwrap();
        let phi = f.integrand.build(&d).unwrap();
        let t = d.find_triangle_at(f.integrand.costs[0].0).unwrap();
        let mesh = crate::geometry::TriMesh::from_dictionary(&d, &[t]);
        assert_eq!(phi.phi_tilde(&mesh.shape(0)), 1.5);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let bad = SAMPLE.replace("seed 7", "sede 7");
        let err = InstanceFile::parse(&bad, "f.inst").unwrap_err().to_string();
        assert!(err.starts_with("f.inst:28:"), "{err}");
        let bad = SAMPLE.replace("edge 1 0 0  1 1 0", "edge 1 0 0  1 1");
        let err = InstanceFile::parse(&bad, "f.inst").unwrap_err().to_string();
        assert!(err.starts_with("f.inst:10:"), "{err}");
        let bad = SAMPLE.replace("[solver]", "[solve]");
        assert!(InstanceFile::parse(&bad, "f").is_err());
        let bad = SAMPLE.replace("resolution 1\n", "");
        let err = InstanceFile::parse(&bad, "f").unwrap_err().to_string();
        assert!(err.contains("resolution"), "{err}");
    }
}
