use thiserror::Error;

use crate::graph::ValidationReport;

/// A JSON decoding failure located by its path inside the document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ParseError {
    pub path: String,
    pub message: String,
}

impl ParseError {
    pub(crate) fn from_path_error(err: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let mut path = err.path().to_string();
        let message = err.inner().to_string();
        // serde reports a missing field at its parent; point at the field itself.
        if let Some(rest) = message.strip_prefix("missing field `") {
            if let Some(field) = rest.split('`').next() {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
        }
        ParseError { path, message }
    }

    pub(crate) fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Invalid(ValidationReport),
    #[error("graph is not directed")]
    NotDirected,
    #[error("graph is not undirected")]
    NotUndirected,
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("inversion is incompatible with a j-symmetric numbering at edge {0}")]
    InconsistentInversion(String),
    #[error("invalid edge representation: {0}")]
    BadRepresentation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutError {
    #[error("automorphisms belong to different graphs")]
    GraphMismatch,
    #[error("brute-force oracle refuses {edges} edges (limit {limit})")]
    TooLarge { edges: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("generator {family} expects {expected} indices, got {got}")]
    Arity { family: String, expected: usize, got: usize },
    #[error("unknown generator family {0}")]
    UnknownFamily(String),
    #[error("malformed generator {0}")]
    Malformed(String),
    #[error("malformed coefficient {0}")]
    Coefficient(String),
    #[error("no value assigned to {0}")]
    MissingSymbol(String),
    #[error("matrix for {symbol} is {got}x{got2}, expected {expected}x{expected}")]
    Dimension { symbol: String, expected: usize, got: usize, got2: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresentationError {
    #[error("{kind} needs {requirement}")]
    KindMismatch { kind: String, requirement: &'static str },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown presentation kind {0}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("{candidates} candidates exceed the limit of {limit}")]
    TooManyCandidates { candidates: u128, limit: u128 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("missing generator {0}")]
    MissingGenerator(String),
    #[error("degree mismatch: graph is uniform of degree {expected}, got a {got}x{got} matrix")]
    Degree { expected: usize, got: usize },
    #[error("no S+ matrix supplied for pair ({0},{1})")]
    MissingPair(String, String),
    #[error("graph is not uniform")]
    NotUniform,
    #[error("input fails its own relations: {0}")]
    InvalidInput(String),
    #[error("witness needs a 4-vertex graph whose simple graph is a 4-cycle or two disjoint edges")]
    NotSquare,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CStarError {
    #[error("graph has a directed cycle: {0}")]
    CyclicGraph(String),
    #[error("graph is undirected; the path-space model needs a directed acyclic graph")]
    Undirected,
    #[error("representation does not match the graph: {0}")]
    GraphMismatch(String),
}
