//! Tree-automatic presentations of the ordinals below `w^(w^n)`.

pub mod automata;
pub mod bundle;
pub mod codes;

use thiserror::Error;

use crate::automaton::AutomatonError;
use crate::fo::FoError;
use crate::tree::NodePath;

pub use automata::{add_automaton, dom_automaton, le_automaton};
pub use bundle::{
    build_presentation, build_presentation_with_ceiling, restrict, restrict_limited, PresentationBundle,
    DEFAULT_LEVEL_CEILING,
};
pub use codes::{decode, encode, in_range, level_bound};

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("not a level-{level} code: first bad node {node}")]
    NotACode { level: usize, node: NodePath },
    #[error("level {level} outside 1..={ceiling}")]
    Level { level: usize, ceiling: usize },
    #[error("bad bundle: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Fo(#[from] FoError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}
