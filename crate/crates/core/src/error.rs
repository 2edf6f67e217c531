use thiserror::Error;

/// Errors raised by the geometry kernel, the topology layer, the embedder and
/// the file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {value} outside domain [{min}, {max}]")]
    Domain { value: f64, min: f64, max: f64 },

    #[error("barycentric coordinates ({s}, {t}) outside the unit triangle")]
    Barycentric { s: f64, t: f64 },

    #[error("invalid knot vector: {0}")]
    Knots(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("knot {knot} would reach multiplicity {multiplicity} (degree {degree})")]
    Multiplicity {
        knot: f64,
        multiplicity: usize,
        degree: usize,
    },

    #[error("degree {found} exceeds the working degree {max}")]
    DegreeTooHigh { found: usize, max: usize },

    #[error("cannot lower degree from {from} to {to}")]
    DegreeLowering { from: usize, to: usize },

    #[error("quadtree depth {depth} reached the limit {max_depth}")]
    DepthLimit { depth: u32, max_depth: u32 },

    #[error("coordinate ({x}, {y}) out of range for depth {depth}")]
    Coordinate { x: u64, y: u64, depth: u32 },

    #[error("duplicate patch key ({x}, {y}) at depth {depth}")]
    DuplicatePatch { x: u32, y: u32, depth: u32 },

    #[error("topology: {0}")]
    Topology(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}{context}")]
    Shape {
        expected: Vec<usize>,
        found: Vec<usize>,
        context: String,
    },

    #[error("sequence of {len} items exceeds the limit of {max}")]
    SequenceTooLong { len: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn shape(expected: &[usize], found: &[usize], context: impl Into<String>) -> Self {
        let context = context.into();
        Error::Shape {
            expected: expected.to_vec(),
            found: found.to_vec(),
            context: if context.is_empty() {
                context
            } else {
                format!(" ({context})")
            },
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
