//! Quadratic energy `<Q x, x>` over triangle indicators.
//!
//! Not solved, only evaluated: it is the reference the linear objective over
//! augmented vectors is checked against.

use crate::constraints::{ConstraintSystem, Variable};
use crate::geometry::{self, Integrand, TriMesh};
use crate::lattice::{TriangleDictionary, TriangleId};
use crate::par::{self, Execution};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEnergy {
    /// `q_ii = phi_tilde(T_i, N_i)`.
    pub diag: Vec<f64>,
    /// Off-diagonal entries `(i, j, q_ij)`; both `(i, j)` and `(j, i)` are stored.
    pub off: Vec<(TriangleId, TriangleId, f64)>,
}

/// `q_ij = 1/2 * A_ij/3 * phi(e_ij, N_ij, H_pw)` for adjacent pairs, `q_ii = phi_tilde`.
///
/// Degenerate hinges get no entry, matching their exclusion as quadrangles.
pub fn build_q(dict: &TriangleDictionary, integrand: &dyn Integrand) -> Result<QuadraticEnergy> {
    build_q_with(dict, integrand, Execution::default())
}

pub fn build_q_with(
    dict: &TriangleDictionary,
    integrand: &dyn Integrand,
    exec: Execution,
) -> Result<QuadraticEnergy> {
    let all: Vec<TriangleId> = (0..dict.triangle_count()).collect();
    let mesh = TriMesh::from_dictionary(dict, &all);
    let diag = par::map_range(exec, all.len(), |t| integrand.phi_tilde(&mesh.shape(t)));
    let pairs = crate::lattice::adjacent_pairs(dict);
    let terms = par::map(exec, &pairs, |p| match geometry::hinge(dict, p.first, p.second) {
        Ok(h) => geometry::energy_edge_term(&h, integrand).map(Some),
        Err(crate::Error::DegenerateHinge) => Ok(None),
        Err(e) => Err(e),
    });
    let mut off = Vec::with_capacity(2 * pairs.len());
    for (p, term) in pairs.iter().zip(terms) {
        if let Some(v) = term? {
            off.push((p.first, p.second, 0.5 * v));
            off.push((p.second, p.first, 0.5 * v));
        }
    }
    Ok(QuadraticEnergy { diag, off })
}

impl QuadraticEnergy {
    pub fn transpose(&self) -> Self {
        QuadraticEnergy {
            diag: self.diag.clone(),
            off: self.off.iter().map(|&(i, j, v)| (j, i, v)).collect(),
        }
    }

    /// `q_ij` (zero when absent).
    pub fn entry(&self, i: TriangleId, j: TriangleId) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.off
            .iter()
            .find(|&&(a, b, _)| a == i && b == j)
            .map_or(0.0, |e| e.2)
    }

    /// Linear weights over the columns of a pair system: `q_ii` for triangles and
    /// the full hinge term `q_ij + q_ji` for quadrangles.
    pub fn augmented_weights(&self, system: &ConstraintSystem) -> Vec<f64> {
        let mut pair_term = std::collections::HashMap::with_capacity(self.off.len());
        for &(i, j, v) in &self.off {
            *pair_term.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        system
            .variables
            .iter()
            .map(|var| match *var {
                Variable::Triangle(t) => self.diag[t],
                Variable::Quadrangle { first, second, .. } => {
                    pair_term.get(&(first, second)).copied().unwrap_or(0.0)
                }
            })
            .collect()
    }
}

/// `sum_ij q_ij x_i x_j`.
pub fn quadratic_energy(x: &[f64], q: &QuadraticEnergy) -> f64 {
    let d: f64 = q.diag.iter().zip(x).map(|(qi, xi)| qi * xi * xi).sum();
    let o: f64 = q.off.iter().map(|&(i, j, v)| v * x[i] * x[j]).sum();
    d + o
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Area, Willmore};
    use crate::lattice::{generate_dictionary, LatticeSpec};
    use approx::assert_relative_eq;

    fn cube() -> TriangleDictionary {
        generate_dictionary(&LatticeSpec::new(1, [1, 1, 1], 2f64.sqrt()).unwrap()).unwrap()
    }

    fn tri(d: &TriangleDictionary, p: [[i64; 3]; 3]) -> TriangleId {
        d.find_triangle_at(p).unwrap()
    }

    #[test]
    fn willmore_entries_match_closed_form() {
        let d = cube();
        let q = build_q(&d, &Willmore).unwrap();
        for &(i, j, v) in &q.off {
            let h = geometry::hinge(&d, i, j).unwrap();
            let closed = 3.0 * h.edge_len.powi(2) / (2.0 * h.total_area) * h.cos_half.powi(2);
            assert_relative_eq!(v, closed, max_relative = 1e-14);
            assert!(v >= 0.0);
        }
        assert!(q.diag.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flat_fold_and_non_adjacent_entries() {
        let d = cube();
        let q = build_q(&d, &Willmore).unwrap();
        let a = tri(&d, [[0, 0, 0], [1, 0, 0], [1, 1, 0]]);
        let b = tri(&d, [[0, 0, 0], [1, 1, 0], [0, 1, 0]]);
        assert_eq!(q.entry(a, b), 0.0);
        let f1 = tri(&d, [[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
        let f2 = tri(&d, [[1, 0, 0], [0, 0, 0], [0, 0, 1]]);
        assert_relative_eq!(q.entry(f1, f2), 0.75, epsilon = 1e-14);
        let h = geometry::hinge(&d, f1, f2).unwrap();
        assert_relative_eq!(
            q.entry(f1, f2) + q.entry(f2, f1),
            geometry::willmore_edge_term(&h),
            max_relative = 1e-15
        );
        let far = tri(&d, [[0, 0, 1], [1, 0, 1], [1, 1, 1]]);
        assert_eq!(q.entry(a, far), 0.0);
    }

    #[test]
    fn energy_of_simple_indicators() {
        let d = cube();
        let q = build_q(&d, &Willmore).unwrap();
        let n = d.triangle_count();
        assert_eq!(quadratic_energy(&vec![0.0; n], &q), 0.0);
        let mut x = vec![0.0; n];
        x[tri(&d, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])] = 1.0;
        x[tri(&d, [[1, 0, 0], [0, 0, 0], [0, 0, 1]])] = 1.0;
        assert_relative_eq!(quadratic_energy(&x, &q), 1.5, epsilon = 1e-14);
        assert_eq!(quadratic_energy(&x, &q), quadratic_energy(&x, &q.transpose()));

        let qa = build_q(&d, &Area).unwrap();
        let mut one = vec![0.0; n];
        one[0] = 1.0;
        let expect = TriMesh::from_dictionary(&d, &[0]).area();
        assert_relative_eq!(quadratic_energy(&one, &qa), expect);
    }

    #[test]
    fn modes_agree() {
        let d = cube();
        let a = build_q_with(&d, &Willmore, Execution::Sequential).unwrap();
        let b = build_q_with(&d, &Willmore, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
