//! Corpus-level branching statistics.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::tree::{is_projective, DepTree};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreebankStats {
    pub n_sentences: usize,
    pub n_tokens: usize,
    /// Arcs whose head lies to the right of the dependent.
    pub pct_left_arcs: f64,
    /// Arcs whose head lies to the left of the dependent, root arcs included.
    pub pct_right_arcs: f64,
    pub pct_nonprojective_sentences: f64,
}

/// Direction percentages over all arcs of `trees`.
pub fn branching_stats(trees: &[DepTree]) -> Result<TreebankStats, EvalError> {
    let mut left = 0usize;
    let mut total = 0usize;
    let mut nonprojective = 0usize;
    for tree in trees {
        for tok in &tree.tokens {
            total += 1;
            if tok.head > tok.id {
                left += 1;
            }
        }
        if !is_projective(tree) {
            nonprojective += 1;
        }
    }
    if total == 0 {
        return Err(EvalError::Empty);
    }
    let pct_left = 100.0 * left as f64 / total as f64;
    Ok(TreebankStats {
        n_sentences: trees.len(),
        n_tokens: total,
        pct_left_arcs: pct_left,
        pct_right_arcs: 100.0 * (total - left) as f64 / total as f64,
        pct_nonprojective_sentences: 100.0 * nonprojective as f64 / trees.len() as f64,
    })
}
