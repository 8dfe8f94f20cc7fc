//! Discrete Willmore-type boundary problems on lattice triangle dictionaries.
//!
//! Surfaces are assembled from a finite dictionary of oriented triangles with
//! vertices on a scaled cubic lattice. A surface spanning an oriented boundary
//! chain is encoded either by triangle indicators subject to an oriented
//! incidence system, or by an augmented vector of triangle and adjacent-pair
//! ("quadrangle") indicators. The augmented form turns the edge-based
//! mean-curvature energy into a linear objective, giving an integer linear
//! program whose relaxation is solved with a bounded-variable simplex and
//! closed with branch-and-bound.
//!
//! Module map:
//! - [`lattice`]: dictionary generation and adjacency.
//! - [`geometry`]: hinges, edge mean curvature, energy terms.
//! - [`constraints`]: boundary problems and the two incidence systems.
//! - [`qp`]: quadratic energy matrices used as an objective oracle.
//! - [`solver`]: LP relaxation, branch-and-bound, integrality classification.
//! - [`tu`]: Camion certificates, Eulerian search, minor scans.
//! - [`io`]: instance, mesh, dump, triplet and LP files.
//! - [`experiment`]: resolution ladder harness.

pub mod constraints;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod par;
pub mod qp;
pub mod solver;
pub mod tu;

pub use error::{Error, Result};
pub use par::Execution;
