//! Strongly incremental dependency parsing: sequence-labeling encodings,
//! the arc-eager transition system, an incrementality verifier, an averaged
//! perceptron scorer and evaluation.

pub mod conllu;
pub mod encodings;
pub mod error;
pub mod evaluation;
pub mod incrementality;
pub mod pipeline;
pub mod scorer;
pub mod stats;
pub mod synth;
pub mod transition;
pub mod tree;

pub use error::{Error, Result};
pub use tree::{DepArc, DepTree, Token};
