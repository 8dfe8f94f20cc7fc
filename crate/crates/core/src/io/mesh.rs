//! Mesh files.
//!
//! Native format:
//!
//! ```text
//! resolution 2
//! v 0 0 0
//! v 0.5 0 0
//! v 0 0.5 0
//! f 0 1 2 1
//! ```
//!
//! Vertex coordinates are lattice positions times `eps = 1/resolution`; a
//! face lists three vertex indices in traversal order and an optional value in
//! `[0, 1]` (the solver's value for that triangle). PLY and OBJ writers are
//! provided for viewers; PLY carries the value as a face property.

use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::{Point, TriMesh};
use crate::lattice::{TriangleDictionary, TriangleId};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeshFile {
    pub resolution: u32,
    /// `eps`-scaled coordinates.
    pub positions: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub values: Option<Vec<f64>>,
}

impl MeshFile {
    /// Triangles of `dict` with value above `tol`, values carried along.
    pub fn from_values(dict: &TriangleDictionary, triangle_values: &[f64], tol: f64) -> Self {
        let tris: Vec<TriangleId> = (0..dict.triangle_count())
            .filter(|&t| triangle_values[t] > tol)
            .collect();
        let mut mf = Self::from_triangles(dict, &tris);
        mf.values = Some(tris.iter().map(|&t| triangle_values[t]).collect());
        mf
    }

    pub fn from_triangles(dict: &TriangleDictionary, tris: &[TriangleId]) -> Self {
        let mesh = TriMesh::from_dictionary(dict, tris);
        let eps = dict.epsilon();
        MeshFile {
            resolution: dict.spec().resolution,
            positions: mesh
                .positions
                .iter()
                .map(|p| [p.x * eps, p.y * eps, p.z * eps])
                .collect(),
            triangles: mesh.triangles,
            values: None,
        }
    }

    /// Mesh for energy evaluation. Positions that sit on the lattice are
    /// snapped back to integers so flatness stays exact.
    pub fn to_trimesh(&self) -> TriMesh {
        let n = self.resolution.max(1) as f64;
        let lattice: Option<Vec<Point>> = self
            .positions
            .iter()
            .map(|p| {
                let q = p.map(|c| c * n);
                let r = q.map(f64::round);
                (q.iter().zip(&r).all(|(a, b)| (a - b).abs() < 1e-9))
                    .then(|| Point::new(r[0], r[1], r[2]))
            })
            .collect();
        match lattice {
            Some(pts) => TriMesh::new(pts, 1.0 / n, self.triangles.clone()),
            None => TriMesh::new(
                self.positions.iter().map(|p| Point::new(p[0], p[1], p[2])).collect(),
                1.0,
                self.triangles.clone(),
            ),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "resolution {}", self.resolution);
        for p in &self.positions {
            let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
        }
        for (k, t) in self.triangles.iter().enumerate() {
            match &self.values {
                Some(v) => {
                    let _ = writeln!(s, "f {} {} {} {}", t[0], t[1], t[2], v[k]);
                }
                None => {
                    let _ = writeln!(s, "f {} {} {}", t[0], t[1], t[2]);
                }
            }
        }
        s
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut resolution = None;
        let mut positions = Vec::new();
        let mut triangles = Vec::new();
        let mut values: Vec<Option<f64>> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let ln = k + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |t: &str| -> Result<f64> {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, ln, format!("`{t}` is not a finite number")))
            };
            match toks[0] {
                "resolution" if toks.len() == 2 => {
                    resolution = Some(toks[1].parse::<u32>().ok().filter(|&r| r > 0).ok_or_else(
                        || Error::parse(path, ln, "resolution must be a positive integer"),
                    )?)
                }
                "v" if toks.len() == 4 => {
                    positions.push([num(toks[1])?, num(toks[2])?, num(toks[3])?]);
                }
                "f" if toks.len() == 4 || toks.len() == 5 => {
                    let mut t = [0usize; 3];
                    for (o, s) in t.iter_mut().zip(&toks[1..4]) {
                        *o = s
                            .parse()
                            .map_err(|_| Error::parse(path, ln, format!("bad vertex index `{s}`")))?;
                        if *o >= positions.len() {
                            return Err(Error::parse(path, ln, format!("vertex index {o} out of range")));
                        }
                    }
                    if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                        return Err(Error::parse(path, ln, "face repeats a vertex"));
                    }
                    let value = match toks.get(4) {
                        Some(s) => {
                            let v = num(s)?;
                            if !(0.0..=1.0).contains(&v) {
                                return Err(Error::parse(path, ln, format!("value {v} outside [0, 1]")));
                            }
                            Some(v)
                        }
                        None => None,
                    };
                    triangles.push(t);
                    values.push(value);
                }
                _ => return Err(Error::parse(path, ln, format!("unrecognized line `{line}`"))),
            }
        }
        let resolution = resolution.ok_or_else(|| Error::parse(path, 1, "missing `resolution`"))?;
        let values = if values.iter().all(Option::is_some) && !values.is_empty() {
            Some(values.into_iter().map(Option::unwrap).collect())
        } else if values.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::parse(path, 0, "either all faces carry a value or none"));
        };
        Ok(MeshFile {
            resolution,
            positions,
            triangles,
            values,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_ply(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ply\nformat ascii 1.0");
        let _ = writeln!(s, "element vertex {}", self.positions.len());
        let _ = writeln!(s, "property double x\nproperty double y\nproperty double z");
        let _ = writeln!(s, "element face {}", self.triangles.len());
        let _ = writeln!(s, "property list uchar int vertex_indices");
        if self.values.is_some() {
            let _ = writeln!(s, "property double value");
        }
        let _ = writeln!(s, "end_header");
        for p in &self.positions {
            let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
        }
        for (k, t) in self.triangles.iter().enumerate() {
            let _ = write!(s, "3 {} {} {}", t[0], t[1], t[2]);
            if let Some(v) = &self.values {
                let _ = write!(s, " {}", v[k]);
            }
            s.push('\n');
        }
        s
    }

    /// OBJ has no face attributes; values go into a comment before each face.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for p in &self.positions {
            let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
        }
        for (k, t) in self.triangles.iter().enumerate() {
            if let Some(v) = &self.values {
                let _ = writeln!(s, "# value {}", v[k]);
            }
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    /// Write in the format given by the extension: `.ply`, `.obj`, else native.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = match path.extension().and_then(|e| e.to_str()) {
            Some("ply") => self.to_ply(),
            Some("obj") => self.to_obj(),
            _ => self.to_text(),
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}
