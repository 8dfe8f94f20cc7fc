//! Hinge geometry, edge-based mean curvature and curvature energies.
//!
//! A hinge is a pair of triangles sharing an edge `e`. With `theta` the
//! dihedral angle (`pi` when flat) and `N_e` the unit bisector of the two
//! oriented triangle normals, the integrated mean curvature vector is
//! `|e| cos(theta/2) N_e` and its pointwise counterpart is
//! `3|e|/A_e cos(theta/2) N_e`, where `A_e` is the area of both triangles.
//! Mean curvature is the sum of principal curvatures (no 1/2 factor).

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::lattice::{TriangleDictionary, TriangleId, VertexId};
use crate::{Error, Result};

pub type Point = Point3<f64>;
pub type Vector = Vector3<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct HingeGeometry {
    pub edge_len: f64,
    /// In `[0, pi]`; `pi` means flat.
    pub dihedral_angle: f64,
    /// `cos(dihedral_angle / 2)`, computed so that a flat hinge gives exactly zero.
    pub cos_half: f64,
    pub bisecting_normal: Vector,
    pub total_area: f64,
    pub triangle_normals: [Vector; 2],
    pub triangle_areas: [f64; 2],
    pub midpoint: Point,
}

impl HingeGeometry {
    /// Hinge of two oriented triangles, given by their vertex positions in
    /// traversal order. Positions are multiplied by `scale` after the angular
    /// quantities are computed, so integer inputs keep exact flatness tests.
    pub fn from_triangles(ti: &[Point; 3], tj: &[Point; 3], scale: f64) -> Result<Self> {
        let shared: Vec<Point> = ti
            .iter()
            .filter(|p| tj.iter().any(|q| q == *p))
            .copied()
            .collect();
        if shared.len() != 2 {
            return Err(Error::NotAdjacent);
        }
        let ni = raw_normal(ti);
        let nj = raw_normal(tj);
        let (li, lj) = (ni.norm(), nj.norm());
        if li == 0.0 || lj == 0.0 {
            return Err(Error::DegenerateHinge);
        }
        let (ui, uj) = (ni / li, nj / lj);
        let sum = ui + uj;
        let sum_norm = sum.norm();
        if sum_norm < 1e-12 {
            return Err(Error::DegenerateHinge);
        }
        // Angle between normals; atan2 of raw vectors keeps coplanar inputs exact.
        let alpha = ni.cross(&nj).norm().atan2(ni.dot(&nj));
        let edge = shared[1] - shared[0];
        let mid = Point::from((shared[0].coords + shared[1].coords) * 0.5);
        Ok(HingeGeometry {
            edge_len: edge.norm() * scale,
            dihedral_angle: std::f64::consts::PI - alpha,
            cos_half: (0.5 * alpha).sin(),
            bisecting_normal: sum / sum_norm,
            total_area: 0.5 * (li + lj) * scale * scale,
            triangle_normals: [ui, uj],
            triangle_areas: [0.5 * li * scale * scale, 0.5 * lj * scale * scale],
            midpoint: Point::from(mid.coords * scale),
        })
    }

    pub fn is_flat(&self) -> bool {
        self.cos_half == 0.0
    }
}

fn raw_normal(t: &[Point; 3]) -> Vector {
    (t[1] - t[0]).cross(&(t[2] - t[0]))
}

/// Hinge of two dictionary triangles, computed in lattice units and scaled by `eps`.
pub fn hinge(dict: &TriangleDictionary, i: TriangleId, j: TriangleId) -> Result<HingeGeometry> {
    let ti = lattice_points(dict, i);
    let tj = lattice_points(dict, j);
    HingeGeometry::from_triangles(&ti, &tj, dict.epsilon())
}

fn lattice_points(dict: &TriangleDictionary, t: TriangleId) -> [Point; 3] {
    dict.triangle_coords(t)
        .map(|[x, y, z]| Point::new(x as f64, y as f64, z as f64))
}

/// Integrated mean curvature vector `|e| cos(theta/2) N_e`.
pub fn mean_curvature_edge(h: &HingeGeometry) -> Vector {
    h.bisecting_normal * (h.edge_len * h.cos_half)
}

/// Pointwise mean curvature vector `3|e|/A_e cos(theta/2) N_e`.
pub fn mean_curvature_pointwise(h: &HingeGeometry) -> Vector {
    h.bisecting_normal * (3.0 * h.edge_len / h.total_area * h.cos_half)
}

/// `3|e|^2 / A_e cos^2(theta/2)`.
pub fn willmore_edge_term(h: &HingeGeometry) -> f64 {
    3.0 * h.edge_len * h.edge_len / h.total_area * h.cos_half * h.cos_half
}

/// `A_e/3 * phi(midpoint, N_e, H_pw)`.
pub fn energy_edge_term(h: &HingeGeometry, integrand: &dyn Integrand) -> Result<f64> {
    let hpw = mean_curvature_pointwise(h);
    let v = integrand.phi(&h.midpoint, &h.bisecting_normal, &hpw);
    if !v.is_finite() || v < 0.0 {
        return Err(Error::BadIntegrand(v));
    }
    Ok(h.total_area / 3.0 * v)
}

/// Per-triangle data handed to the triangle term of an integrand.
#[derive(Debug, Clone)]
pub struct TriangleShape {
    pub id: usize,
    pub vertices: [Point; 3],
    pub normal: Vector,
    pub area: f64,
}

impl TriangleShape {
    pub fn new(id: usize, vertices: [Point; 3]) -> Self {
        let n = raw_normal(&vertices);
        let len = n.norm();
        TriangleShape {
            id,
            vertices,
            normal: if len > 0.0 { n / len } else { n },
            area: 0.5 * len,
        }
    }
}

/// A curvature integrand `phi(x, n, H)` plus a per-triangle term `phi_tilde(T, n)`.
pub trait Integrand: Sync {
    fn phi(&self, x: &Point, n: &Vector, h: &Vector) -> f64;

    fn phi_tilde(&self, _tri: &TriangleShape) -> f64 {
        0.0
    }
}

/// `phi = |H|^2`, no triangle term.
#[derive(Debug, Clone, Copy, Default)]
pub struct Willmore;

impl Integrand for Willmore {
    fn phi(&self, _x: &Point, _n: &Vector, h: &Vector) -> f64 {
        h.norm_squared()
    }
}

/// Surface area: `phi = 0`, `phi_tilde = area`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Area;

impl Integrand for Area {
    fn phi(&self, _x: &Point, _n: &Vector, _h: &Vector) -> f64 {
        0.0
    }

    fn phi_tilde(&self, tri: &TriangleShape) -> f64 {
        tri.area
    }
}

/// `phi = willmore_weight * |H|^2 + constant`, with tabulated triangle costs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostTable {
    pub willmore_weight: f64,
    pub constant: f64,
    pub default_cost: f64,
    pub costs: HashMap<usize, f64>,
}

impl Integrand for CostTable {
    fn phi(&self, _x: &Point, _n: &Vector, h: &Vector) -> f64 {
        self.willmore_weight * h.norm_squared() + self.constant
    }

    fn phi_tilde(&self, tri: &TriangleShape) -> f64 {
        self.costs.get(&tri.id).copied().unwrap_or(self.default_cost)
    }
}

/// Integrand from two closures.
pub struct FnIntegrand<F, G> {
    pub phi: F,
    pub phi_tilde: G,
}

impl<F, G> Integrand for FnIntegrand<F, G>
where
    F: Fn(&Point, &Vector, &Vector) -> f64 + Sync,
    G: Fn(&TriangleShape) -> f64 + Sync,
{
    fn phi(&self, x: &Point, n: &Vector, h: &Vector) -> f64 {
        (self.phi)(x, n, h)
    }

    fn phi_tilde(&self, tri: &TriangleShape) -> f64 {
        (self.phi_tilde)(tri)
    }
}

/// Triangle mesh with shared vertex indices. Positions are multiplied by
/// `scale`; lattice meshes store integer coordinates and `scale = eps`.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub positions: Vec<Point>,
    pub scale: f64,
    pub triangles: Vec<[usize; 3]>,
    /// Identifier passed to `phi_tilde` (dictionary id for lattice meshes).
    pub ids: Vec<usize>,
}

impl TriMesh {
    pub fn new(positions: Vec<Point>, scale: f64, triangles: Vec<[usize; 3]>) -> Self {
        let ids = (0..triangles.len()).collect();
        TriMesh {
            positions,
            scale,
            triangles,
            ids,
        }
    }

    /// Mesh made of the given dictionary triangles, in lattice coordinates.
    pub fn from_dictionary(dict: &TriangleDictionary, tris: &[TriangleId]) -> Self {
        let mut index: HashMap<VertexId, usize> = HashMap::new();
        let mut positions = Vec::new();
        let mut triangles = Vec::with_capacity(tris.len());
        for &t in tris {
            let local = dict.triangle(t).vertices.map(|v| {
                *index.entry(v).or_insert_with(|| {
                    let [x, y, z] = dict.vertex_coords(v);
                    positions.push(Point::new(x as f64, y as f64, z as f64));
                    positions.len() - 1
                })
            });
            triangles.push(local);
        }
        TriMesh {
            positions,
            scale: dict.epsilon(),
            triangles,
            ids: tris.to_vec(),
        }
    }

    fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.positions[v])
    }

    pub fn shape(&self, t: usize) -> TriangleShape {
        let p = self.corners(t).map(|p| Point::from(p.coords * self.scale));
        TriangleShape::new(self.ids[t], p)
    }

    pub fn hinge(&self, a: usize, b: usize) -> Result<HingeGeometry> {
        HingeGeometry::from_triangles(&self.corners(a), &self.corners(b), self.scale)
    }

    /// Triangles incident to each unoriented edge, keyed by sorted vertex pair.
    pub fn edge_map(&self) -> HashMap<[usize; 2], Vec<usize>> {
        let mut map: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                map.entry([p.min(q), p.max(q)]).or_default().push(t);
            }
        }
        map
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.shape(t).area).sum()
    }
}

/// Discrete energy of a manifold mesh: edge terms over inner edges plus triangle terms.
///
/// Edges with one incident triangle are boundary and contribute nothing; an
/// edge with three or more incident triangles is an error (use
/// [`paired_energy`] for self-intersecting surfaces with an explicit pairing).
pub fn mesh_energy(mesh: &TriMesh, integrand: &dyn Integrand) -> Result<f64> {
    let mut edges: Vec<([usize; 2], Vec<usize>)> = mesh.edge_map().into_iter().collect();
    edges.sort_unstable();
    let mut total = 0.0;
    for ([a, b], tris) in &edges {
        match tris.len() {
            1 => {}
            2 => total += energy_edge_term(&mesh.hinge(tris[0], tris[1])?, integrand)?,
            n => return Err(Error::NonManifoldEdge(*a, *b, n)),
        }
    }
    Ok(total + triangle_terms(mesh, integrand))
}

/// Energy with an explicit list of hinged triangle pairs (indices into the mesh).
pub fn paired_energy(
    mesh: &TriMesh,
    pairs: &[(usize, usize)],
    integrand: &dyn Integrand,
) -> Result<f64> {
    let mut total = 0.0;
    for &(a, b) in pairs {
        total += energy_edge_term(&mesh.hinge(a, b)?, integrand)?;
    }
    Ok(total + triangle_terms(mesh, integrand))
}

fn triangle_terms(mesh: &TriMesh, integrand: &dyn Integrand) -> f64 {
    (0..mesh.triangles.len())
        .map(|t| integrand.phi_tilde(&mesh.shape(t)))
        .sum()
}

/// [`mesh_energy`] of a set of dictionary triangles.
pub fn dictionary_mesh_energy(
    dict: &TriangleDictionary,
    tris: &[TriangleId],
    integrand: &dyn Integrand,
) -> Result<f64> {
    mesh_energy(&TriMesh::from_dictionary(dict, tris), integrand)
}
