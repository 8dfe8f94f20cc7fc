use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),

    #[error("empty dictionary: no admissible triangle in the box with max edge length {max_edge_len}")]
    EmptyDictionary { max_edge_len: f64 },

    #[error("degenerate hinge: triangle normals are anti-parallel")]
    DegenerateHinge,

    #[error("triangles do not share exactly one edge")]
    NotAdjacent,

    #[error("integrand returned a non-finite or negative value ({0})")]
    BadIntegrand(f64),

    #[error("non-manifold edge ({0}, {1}) is shared by {2} triangles")]
    NonManifoldEdge(usize, usize, usize),

    #[error("invalid boundary problem: {0}")]
    InvalidBoundary(String),

    #[error("unknown {kind}: {what}")]
    Unknown { kind: &'static str, what: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
