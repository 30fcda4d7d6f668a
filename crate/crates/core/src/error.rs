use std::fmt;

use crate::sets::Point;

pub type Result<T> = std::result::Result<T, Error>;

/// A composition escaping a level: `(x, y)` is controlled at `levels.0`,
/// `(y, z)` at `levels.1`, while `(x, z)` is not controlled at `escapes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionWitness {
    pub levels: (u32, u32),
    pub escapes: u32,
    pub x: Point,
    pub y: Point,
    pub z: Point,
    /// Group elements carrying a level member onto `{x, y}` and `{y, z}`.
    pub via_xy: Point,
    pub via_yz: Point,
}

impl fmt::Display for CompositionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x={:?} y={:?} z={:?} levels=({}, {}) escapes={}",
            self.x, self.y, self.z, self.levels.0, self.levels.1, self.escapes
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty box where a non-empty one is required")]
    EmptyBox,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("size bound exceeded: {0}")]
    TooLarge(String),
    #[error("map is not surjective: {0}")]
    NotSurjective(String),
    #[error("inconclusive within budget: {0}")]
    Inconclusive(String),
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("orbit-pair family is not a coarse base; first witness: {}", .0.first().map(|w| w.to_string()).unwrap_or_default())]
    BaseRefuted(Vec<CompositionWitness>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
