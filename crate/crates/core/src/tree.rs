//! Dependency trees, arcs and tree-structural predicates.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;

/// A single syntactic word of a sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub upos: String,
    /// Head position, 0 for the artificial root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn new(
        id: usize,
        form: impl Into<String>,
        upos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            id,
            form: form.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
        }
    }
}

/// An unlabeled dependency arc between two nodes (0 is the artificial root).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DepArc {
    pub head: usize,
    pub dependent: usize,
}

impl DepArc {
    pub fn new(head: usize, dependent: usize) -> Self {
        DepArc { head, dependent }
    }

    /// Rightmost node touched by the arc.
    pub fn max_node(&self) -> usize {
        self.head.max(self.dependent)
    }

    pub fn min_node(&self) -> usize {
        self.head.min(self.dependent)
    }

    /// True when the head precedes the dependent (root arcs included).
    pub fn is_rightward(&self) -> bool {
        self.head < self.dependent
    }

    /// Signed displacement `dependent - head`.
    pub fn displacement(&self) -> isize {
        self.dependent as isize - self.head as isize
    }

    /// Strict interval crossing. Arcs sharing an endpoint never cross.
    pub fn crosses(&self, other: &DepArc) -> bool {
        let (a, b) = (self.min_node(), self.max_node());
        let (c, d) = (other.min_node(), other.max_node());
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    }
}

impl fmt::Display for DepArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.head, self.dependent)
    }
}

/// One sentence: tokens in order, an optional identifier and the comment
/// lines it was read with.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DepTree {
    pub tokens: Vec<Token>,
    pub sentence_id: Option<String>,
    pub comments: Vec<String>,
}

impl DepTree {
    pub fn new(tokens: Vec<Token>) -> Self {
        DepTree {
            tokens,
            sentence_id: None,
            comments: Vec::new(),
        }
    }

    /// Build a tree from head indices alone. Forms are `w1, w2, ...`, every
    /// token is tagged `X` and relations are `dep` (`root` for head 0).
    pub fn from_heads(heads: &[usize]) -> Self {
        let upos = vec!["X".to_string(); heads.len()];
        Self::from_heads_and_tags(heads, &upos)
    }

    pub fn from_heads_and_tags<S: AsRef<str>>(heads: &[usize], upos: &[S]) -> Self {
        let tokens = heads
            .iter()
            .zip(upos)
            .enumerate()
            .map(|(i, (&head, tag))| {
                let rel = if head == 0 { "root" } else { "dep" };
                Token::new(i + 1, format!("w{}", i + 1), tag.as_ref(), head, rel)
            })
            .collect();
        DepTree::new(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn deprels(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.deprel.as_str()).collect()
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    pub fn upos(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.upos.as_str()).collect()
    }

    /// Unlabeled arcs of the tree.
    pub fn arcs(&self) -> BTreeSet<DepArc> {
        self.tokens
            .iter()
            .map(|t| DepArc::new(t.head, t.id))
            .collect()
    }

    /// Human-readable name for error messages.
    pub fn display_id(&self, index: usize) -> String {
        match &self.sentence_id {
            Some(id) => id.clone(),
            None => format!("#{}", index + 1),
        }
    }

    /// Check every tree invariant: consecutive ids, heads in range, no
    /// self-loops, non-empty tags and relations, one root, no cycles.
    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.id != i + 1 {
                return Err(TreeError::BadId {
                    position: i + 1,
                    id: tok.id,
                });
            }
            if tok.head > n {
                return Err(TreeError::HeadOutOfRange {
                    token: tok.id,
                    head: tok.head,
                });
            }
            if tok.head == tok.id {
                return Err(TreeError::SelfLoop(tok.id));
            }
            if tok.upos.is_empty() || tok.deprel.is_empty() {
                return Err(TreeError::EmptyField(tok.id));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(TreeError::RootCount(roots));
        }
        if let Some(node) = find_cycle(&self.heads()) {
            return Err(TreeError::Cycle(node));
        }
        Ok(())
    }
}

/// Returns a node on a cycle of the head function, if any. `heads[i]` is the
/// head of token `i + 1`.
pub fn find_cycle(heads: &[usize]) -> Option<usize> {
    let n = heads.len();
    // 0 = unvisited, 1 = on current path, 2 = known to reach the root
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut node = start;
        while state[node] == 0 {
            state[node] = 1;
            path.push(node);
            let head = heads[node - 1];
            // out-of-range heads lead nowhere
            node = if head > n { 0 } else { head };
        }
        if state[node] == 1 {
            return Some(node);
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

/// `true` iff `ancestor` dominates `node` (reflexively) under `heads`.
fn dominates(heads: &[usize], ancestor: usize, mut node: usize) -> bool {
    let mut steps = 0;
    loop {
        if node == ancestor {
            return true;
        }
        if node == 0 || steps > heads.len() {
            return false;
        }
        node = heads[node - 1];
        steps += 1;
    }
}

/// An arc is projective when its head dominates every node strictly inside
/// its span.
fn arc_is_projective(heads: &[usize], head: usize, dependent: usize) -> bool {
    let (lo, hi) = (head.min(dependent), head.max(dependent));
    (lo + 1..hi).all(|k| dominates(heads, head, k))
}

/// Projectivity of a valid tree, with the artificial root at position 0.
pub fn is_projective(tree: &DepTree) -> bool {
    let heads = tree.heads();
    tree.tokens
        .iter()
        .all(|t| arc_is_projective(&heads, t.head, t.id))
}

/// Lift non-projective arcs to the grandparent until the tree is projective.
///
/// The shortest offending arc is lifted first (leftmost dependent on ties).
/// Relations are never rewritten.
pub fn projectivize(tree: &DepTree) -> DepTree {
    let mut out = tree.clone();
    let mut heads = out.heads();
    loop {
        let offending = (1..=heads.len())
            .filter(|&d| !arc_is_projective(&heads, heads[d - 1], d))
            .min_by_key(|&d| (heads[d - 1].abs_diff(d), d));
        match offending {
            None => break,
            Some(d) => {
                let h = heads[d - 1];
                // a root arc is always projective, so h >= 1 here
                heads[d - 1] = heads[h - 1];
            }
        }
    }
    for (tok, head) in out.tokens.iter_mut().zip(heads) {
        tok.head = head;
    }
    out
}
