//! File formats: instances, meshes, LP files. Constraint triplets and
//! dictionary dumps live next to their types.

pub mod instance;
pub mod lp;
pub mod mesh;

pub use instance::{InstanceFile, IntegrandKind, IntegrandSpec, SolverSection};
pub use lp::{export_lp_file, import_lp_file, parse_lp, write_lp, LpFile};
pub use mesh::MeshFile;
