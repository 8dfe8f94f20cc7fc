//! Dictionaries of oriented lattice triangles.
//!
//! Vertices live on the integer lattice `{0..=nx} x {0..=ny} x {0..=nz}` and
//! are scaled by `1 / resolution` only when geometric quantities are needed.
//! Vertex ids follow lexicographic coordinate order, triangles are stored in
//! canonical form (smallest vertex id first) and sorted, so two runs with the
//! same spec produce identical ids.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::par::{self, Execution};
use crate::{Error, Result};

pub type VertexId = usize;
pub type TriangleId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    /// `n` in `eps = 1/n`.
    pub resolution: u32,
    /// Inclusive upper lattice coordinate per axis; the box starts at the origin.
    pub extents: [u32; 3],
    /// Maximal admissible edge length, in lattice units.
    pub max_edge_len: f64,
}

impl LatticeSpec {
    pub fn new(resolution: u32, extents: [u32; 3], max_edge_len: f64) -> Result<Self> {
        let spec = LatticeSpec {
            resolution,
            extents,
            max_edge_len,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 {
            return Err(Error::InvalidSpec("resolution must be >= 1".into()));
        }
        if !self.max_edge_len.is_finite() || self.max_edge_len <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "max edge length must be positive and finite, got {}",
                self.max_edge_len
            )));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn vertex_count(&self) -> usize {
        self.extents.iter().map(|&e| e as usize + 1).product()
    }

    pub fn vertex_id(&self, p: [i64; 3]) -> Option<VertexId> {
        let [nx, ny, nz] = self.extents.map(|e| e as i64);
        if p[0] < 0 || p[1] < 0 || p[2] < 0 || p[0] > nx || p[1] > ny || p[2] > nz {
            return None;
        }
        Some(((p[0] * (ny + 1) + p[1]) * (nz + 1) + p[2]) as usize)
    }

    pub fn vertex_coords(&self, id: VertexId) -> [i64; 3] {
        let ny = self.extents[1] as usize + 1;
        let nz = self.extents[2] as usize + 1;
        [(id / (ny * nz)) as i64, ((id / nz) % ny) as i64, (id % nz) as i64]
    }

    fn max_len_sq(&self) -> f64 {
        // Lattice squared lengths are integers; the slack absorbs sqrt round-off in the input.
        self.max_edge_len * self.max_edge_len + 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedTriangle {
    pub id: TriangleId,
    /// Traversal order defines the orientation.
    pub vertices: [VertexId; 3],
}

impl OrientedTriangle {
    /// The three traversed edges `v0->v1`, `v1->v2`, `v2->v0`.
    pub fn directed_edges(&self) -> [[VertexId; 2]; 3] {
        let [a, b, c] = self.vertices;
        [[a, b], [b, c], [c, a]]
    }

    /// +1 if the triangle traverses `from -> to`, -1 if it traverses `to -> from`, 0 otherwise.
    pub fn incidence(&self, from: VertexId, to: VertexId) -> i8 {
        for [a, b] in self.directed_edges() {
            if a == from && b == to {
                return 1;
            }
            if a == to && b == from {
                return -1;
            }
        }
        0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub id: EdgeId,
    pub endpoints: [VertexId; 2],
}

/// Rotate a vertex triple so that the smallest id comes first, keeping orientation.
pub fn canonical_triple(v: [VertexId; 3]) -> [VertexId; 3] {
    let k = (0..3).min_by_key(|&i| v[i]).unwrap();
    [v[k], v[(k + 1) % 3], v[(k + 2) % 3]]
}

fn reversed(v: [VertexId; 3]) -> [VertexId; 3] {
    [v[0], v[2], v[1]]
}

#[derive(Debug, Clone)]
pub struct TriangleDictionary {
    spec: LatticeSpec,
    triangles: Vec<OrientedTriangle>,
    edges: Vec<OrientedEdge>,
    triangle_lookup: HashMap<[VertexId; 3], TriangleId>,
    edge_lookup: HashMap<[VertexId; 2], EdgeId>,
    /// Unoriented edges `[a, b]` with `a < b`; index is the geometric edge id.
    geometric_edges: Vec<[VertexId; 2]>,
    geometric_lookup: HashMap<[VertexId; 2], usize>,
    /// Triangles containing each geometric edge, ascending.
    edge_triangles: Vec<Vec<TriangleId>>,
    /// Geometric edge ids of each triangle, in traversal order.
    triangle_edges: Vec<[usize; 3]>,
    triangle_opposite: Vec<TriangleId>,
    edge_opposite: Vec<EdgeId>,
}

/// Generate every admissible oriented triangle of the lattice box.
pub fn generate_dictionary(spec: &LatticeSpec) -> Result<TriangleDictionary> {
    generate_dictionary_with(spec, Execution::default())
}

pub fn generate_dictionary_with(spec: &LatticeSpec, exec: Execution) -> Result<TriangleDictionary> {
    spec.validate()?;
    let max_sq = spec.max_len_sq();
    let reach = spec.max_edge_len.floor() as i64;
    let mut offsets = Vec::new();
    for dx in -reach..=reach {
        for dy in -reach..=reach {
            for dz in -reach..=reach {
                let d2 = (dx * dx + dy * dy + dz * dz) as f64;
                if d2 > 0.0 && d2 <= max_sq {
                    offsets.push([dx, dy, dz]);
                }
            }
        }
    }

    let per_vertex = par::map_range(exec, spec.vertex_count(), |a| {
        let pa = spec.vertex_coords(a);
        let mut nbrs: Vec<(VertexId, [i64; 3])> = offsets
            .iter()
            .filter_map(|d| {
                let p = [pa[0] + d[0], pa[1] + d[1], pa[2] + d[2]];
                spec.vertex_id(p).filter(|&b| b > a).map(|b| (b, p))
            })
            .collect();
        nbrs.sort_unstable();
        let mut out = Vec::new();
        for (i, &(b, pb)) in nbrs.iter().enumerate() {
            for &(c, pc) in &nbrs[i + 1..] {
                if (dist_sq(pb, pc) as f64) > max_sq {
                    continue;
                }
                let u = sub(pb, pa);
                let v = sub(pc, pa);
                if cross(u, v) == [0, 0, 0] {
                    continue;
                }
                out.push([a, b, c]);
                out.push([a, c, b]);
            }
        }
        out
    });
    let triples: Vec<[VertexId; 3]> = per_vertex.into_iter().flatten().collect();
    if triples.is_empty() {
        return Err(Error::EmptyDictionary {
            max_edge_len: spec.max_edge_len,
        });
    }
    Ok(TriangleDictionary::assemble(spec.clone(), triples))
}

impl TriangleDictionary {
    /// Build a dictionary from explicit vertex triples. Triples are canonicalised,
    /// deduplicated and closed under orientation reversal.
    pub fn from_triples(spec: LatticeSpec, triples: &[[VertexId; 3]]) -> Result<Self> {
        spec.validate()?;
        let n_vertices = spec.vertex_count();
        let mut all = Vec::with_capacity(triples.len() * 2);
        for &t in triples {
            if t.iter().any(|&v| v >= n_vertices) {
                return Err(Error::InvalidSpec(format!("vertex out of range in {t:?}")));
            }
            let p = t.map(|v| spec.vertex_coords(v));
            if cross(sub(p[1], p[0]), sub(p[2], p[0])) == [0, 0, 0] {
                return Err(Error::InvalidSpec(format!("degenerate triangle {t:?}")));
            }
            let c = canonical_triple(t);
            all.push(c);
            all.push(reversed(c));
        }
        if all.is_empty() {
            return Err(Error::EmptyDictionary {
                max_edge_len: spec.max_edge_len,
            });
        }
        Ok(Self::assemble(spec, all))
    }

    fn assemble(spec: LatticeSpec, mut triples: Vec<[VertexId; 3]>) -> Self {
        triples.sort_unstable();
        triples.dedup();
        let triangles: Vec<OrientedTriangle> = triples
            .iter()
            .enumerate()
            .map(|(id, &vertices)| OrientedTriangle { id, vertices })
            .collect();
        let triangle_lookup: HashMap<_, _> =
            triples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let triangle_opposite = triples
            .iter()
            .map(|&t| triangle_lookup[&reversed(t)])
            .collect();

        let mut directed: Vec<[VertexId; 2]> = triangles
            .iter()
            .flat_map(|t| t.directed_edges())
            .flat_map(|[a, b]| [[a, b], [b, a]])
            .collect();
        directed.sort_unstable();
        directed.dedup();
        let edges: Vec<OrientedEdge> = directed
            .iter()
            .enumerate()
            .map(|(id, &endpoints)| OrientedEdge { id, endpoints })
            .collect();
        let edge_lookup: HashMap<_, _> = directed.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let edge_opposite = directed.iter().map(|&[a, b]| edge_lookup[&[b, a]]).collect();

        let geometric_edges: Vec<[VertexId; 2]> =
            directed.iter().copied().filter(|[a, b]| a < b).collect();
        let geometric_lookup: HashMap<_, _> = geometric_edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect();
        let mut edge_triangles = vec![Vec::new(); geometric_edges.len()];
        let triangle_edges = triangles
            .iter()
            .map(|t| {
                t.directed_edges().map(|[a, b]| {
                    let g = geometric_lookup[&[a.min(b), a.max(b)]];
                    edge_triangles[g].push(t.id);
                    g
                })
            })
            .collect();

        TriangleDictionary {
            spec,
            triangles,
            edges,
            triangle_lookup,
            edge_lookup,
            geometric_edges,
            geometric_lookup,
            edge_triangles,
            triangle_edges,
            triangle_opposite,
            edge_opposite,
        }
    }

    /// Keep the triangles selected by `keep`; a triangle survives if it or its opposite is kept.
    pub fn restrict<F: Fn(&OrientedTriangle) -> bool>(&self, keep: F) -> Result<Self> {
        let triples: Vec<_> = self
            .triangles
            .iter()
            .filter(|t| keep(t) || keep(&self.triangles[self.triangle_opposite[t.id]]))
            .map(|t| t.vertices)
            .collect();
        Self::from_triples(self.spec.clone(), &triples)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon()
    }

    /// `N`, the number of oriented triangles.
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// `M`, the number of oriented edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn geometric_edge_count(&self) -> usize {
        self.geometric_edges.len()
    }

    pub fn triangles(&self) -> &[OrientedTriangle] {
        &self.triangles
    }

    pub fn triangle(&self, id: TriangleId) -> &OrientedTriangle {
        &self.triangles[id]
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &OrientedEdge {
        &self.edges[id]
    }

    pub fn opposite_triangle(&self, id: TriangleId) -> TriangleId {
        self.triangle_opposite[id]
    }

    pub fn opposite_edge(&self, id: EdgeId) -> EdgeId {
        self.edge_opposite[id]
    }

    /// Triangle with the given traversal, in any rotation.
    pub fn find_triangle(&self, v: [VertexId; 3]) -> Option<TriangleId> {
        self.triangle_lookup.get(&canonical_triple(v)).copied()
    }

    pub fn find_triangle_at(&self, p: [[i64; 3]; 3]) -> Option<TriangleId> {
        let v = [
            self.spec.vertex_id(p[0])?,
            self.spec.vertex_id(p[1])?,
            self.spec.vertex_id(p[2])?,
        ];
        self.find_triangle(v)
    }

    pub fn find_edge(&self, from: VertexId, to: VertexId) -> Option<EdgeId> {
        self.edge_lookup.get(&[from, to]).copied()
    }

    pub fn geometric_edge(&self, g: usize) -> [VertexId; 2] {
        self.geometric_edges[g]
    }

    pub fn find_geometric_edge(&self, a: VertexId, b: VertexId) -> Option<usize> {
        self.geometric_lookup.get(&[a.min(b), a.max(b)]).copied()
    }

    /// Triangles (both orientations) containing geometric edge `g`.
    pub fn triangles_on_edge(&self, g: usize) -> &[TriangleId] {
        &self.edge_triangles[g]
    }

    /// Geometric edge ids of a triangle, in traversal order.
    pub fn triangle_edges(&self, t: TriangleId) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn vertex_coords(&self, v: VertexId) -> [i64; 3] {
        self.spec.vertex_coords(v)
    }

    pub fn triangle_coords(&self, t: TriangleId) -> [[i64; 3]; 3] {
        self.triangles[t].vertices.map(|v| self.vertex_coords(v))
    }

    /// Vertex ids that appear in at least one triangle, ascending.
    pub fn used_vertices(&self) -> Vec<VertexId> {
        let mut v: Vec<_> = self.triangles.iter().flat_map(|t| t.vertices).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Text dump: `V id i j k`, `T id v1 v2 v3`, `E id a b`, one record per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# resolution {} box {} {} {} max_edge {}",
            self.spec.resolution,
            self.spec.extents[0],
            self.spec.extents[1],
            self.spec.extents[2],
            self.spec.max_edge_len
        );
        let _ = writeln!(
            s,
            "# N {} M {}",
            self.triangle_count(),
            self.edge_count()
        );
        for v in self.used_vertices() {
            let [i, j, k] = self.vertex_coords(v);
            let _ = writeln!(s, "V {v} {i} {j} {k}");
        }
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            let _ = writeln!(s, "T {} {a} {b} {c}", t.id);
        }
        for e in &self.edges {
            let [a, b] = e.endpoints;
            let _ = writeln!(s, "E {} {a} {b}", e.id);
        }
        s
    }
}

/// A pair of distinct, non-opposite oriented triangles sharing a geometric edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdjacentPair {
    pub first: TriangleId,
    pub second: TriangleId,
    /// Geometric edge id of the shared edge.
    pub edge: usize,
}

/// All adjacent pairs, `first < second`, sorted lexicographically.
pub fn adjacent_pairs(dict: &TriangleDictionary) -> Vec<AdjacentPair> {
    let mut pairs = Vec::new();
    for (g, tris) in dict.edge_triangles.iter().enumerate() {
        for (k, &i) in tris.iter().enumerate() {
            for &j in &tris[k + 1..] {
                if dict.opposite_triangle(i) != j {
                    pairs.push(AdjacentPair {
                        first: i,
                        second: j,
                        edge: g,
                    });
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

pub(crate) fn sub(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(u: [i64; 3], v: [i64; 3]) -> [i64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub(crate) fn dot(u: [i64; 3], v: [i64; 3]) -> i64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn dist_sq(a: [i64; 3], b: [i64; 3]) -> i64 {
    let d = sub(a, b);
    dot(d, d)
}
