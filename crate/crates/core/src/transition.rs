//! The arc-eager transition system.
//!
//! A configuration is a stack of nodes, a buffer that is always a suffix
//! `w_i .. w_n` of the sentence (so a single index describes it), and the set
//! of arcs built so far. Arcs are only ever added.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TransitionError;
use crate::tree::{is_projective, projectivize, DepArc, DepTree};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transition {
    Shift,
    LeftArc(String),
    RightArc(String),
    Reduce,
}

/// Transition without its relation, as used for legality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionKind {
    Shift,
    LeftArc,
    RightArc,
    Reduce,
}

impl Transition {
    pub fn kind(&self) -> TransitionKind {
        match self {
            Transition::Shift => TransitionKind::Shift,
            Transition::LeftArc(_) => TransitionKind::LeftArc,
            Transition::RightArc(_) => TransitionKind::RightArc,
            Transition::Reduce => TransitionKind::Reduce,
        }
    }

    pub fn deprel(&self) -> Option<&str> {
        match self {
            Transition::LeftArc(r) | Transition::RightArc(r) => Some(r),
            _ => None,
        }
    }

    /// Name without relation: `SH`, `LA`, `RA` or `RE`.
    pub fn name(&self) -> &'static str {
        match self.kind() {
            TransitionKind::Shift => "SH",
            TransitionKind::LeftArc => "LA",
            TransitionKind::RightArc => "RA",
            TransitionKind::Reduce => "RE",
        }
    }
}

/// `SH`, `RE`, `LA:rel`, `RA:rel`; the class names used by the scorer.
impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.deprel() {
            Some(r) => write!(f, "{}:{}", self.name(), r),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for Transition {
    type Err = TransitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rel) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        match (name, rel) {
            ("SH", None) => Ok(Transition::Shift),
            ("RE", None) => Ok(Transition::Reduce),
            ("LA", Some(r)) if !r.is_empty() => Ok(Transition::LeftArc(r.to_string())),
            ("RA", Some(r)) if !r.is_empty() => Ok(Transition::RightArc(r.to_string())),
            _ => Err(TransitionError::Syntax(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    /// Bottom to top; starts as `[0]`.
    pub stack: Vec<usize>,
    /// The buffer is `w_buffer_front .. w_n`.
    pub buffer_front: usize,
    pub n: usize,
    /// `heads[d]` / `deprels[d]` for every node `d` that has a head.
    heads: Vec<Option<usize>>,
    deprels: Vec<Option<String>>,
    /// Arcs in the order they were built.
    order: Vec<DepArc>,
}

/// The start configuration for a sentence of `n` tokens.
pub fn initial_config(n: usize) -> Result<Configuration, TransitionError> {
    if n == 0 {
        return Err(TransitionError::EmptySentence);
    }
    Ok(Configuration {
        stack: vec![0],
        buffer_front: 1,
        n,
        heads: vec![None; n + 1],
        deprels: vec![None; n + 1],
        order: Vec::new(),
    })
}

impl Configuration {
    pub fn stack_top(&self) -> Option<usize> {
        self.stack.last().copied()
    }

    /// First buffer word, if the buffer is not empty.
    pub fn buffer_head(&self) -> Option<usize> {
        (self.buffer_front <= self.n).then_some(self.buffer_front)
    }

    pub fn is_terminal(&self) -> bool {
        self.buffer_front > self.n
    }

    pub fn head_of(&self, node: usize) -> Option<usize> {
        self.heads.get(node).copied().flatten()
    }

    pub fn deprel_of(&self, node: usize) -> Option<&str> {
        self.deprels.get(node).and_then(|r| r.as_deref())
    }

    /// Dependents of `node` built so far, in order of position.
    pub fn dependents(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(move |&d| self.heads[d] == Some(node))
    }

    /// Arcs in build order.
    pub fn arcs_in_order(&self) -> &[DepArc] {
        &self.order
    }

    fn add_arc(&mut self, head: usize, dependent: usize, deprel: &str) {
        self.heads[dependent] = Some(head);
        self.deprels[dependent] = Some(deprel.to_string());
        self.order.push(DepArc::new(head, dependent));
    }
}

/// Transition kinds whose preconditions hold in `c`.
pub fn legal_transitions(c: &Configuration) -> BTreeSet<TransitionKind> {
    let mut legal = BTreeSet::new();
    let buffer = c.buffer_front <= c.n;
    let top = c.stack_top();
    let top_has_head = top.map(|t| c.head_of(t).is_some()).unwrap_or(false);
    if buffer {
        legal.insert(TransitionKind::Shift);
        legal.insert(TransitionKind::RightArc);
        if matches!(top, Some(t) if t != 0) && !top_has_head {
            legal.insert(TransitionKind::LeftArc);
        }
    }
    if top_has_head {
        legal.insert(TransitionKind::Reduce);
    }
    legal
}

/// Apply `t` to `c`, or explain which precondition fails.
pub fn apply_transition(
    c: &Configuration,
    t: &Transition,
) -> Result<Configuration, TransitionError> {
    let illegal = |reason| TransitionError::Illegal {
        transition: t.to_string(),
        reason,
    };
    let mut next = c.clone();
    let top = c.stack_top();
    match t {
        Transition::Shift => {
            if c.buffer_front > c.n {
                return Err(illegal("buffer is empty"));
            }
            next.stack.push(c.buffer_front);
            next.buffer_front += 1;
        }
        Transition::LeftArc(rel) => {
            if c.buffer_front > c.n {
                return Err(illegal("buffer is empty"));
            }
            let s = top.ok_or_else(|| illegal("stack is empty"))?;
            if s == 0 {
                return Err(illegal("the root cannot take a head"));
            }
            if c.head_of(s).is_some() {
                return Err(illegal("stack top already has a head"));
            }
            next.add_arc(c.buffer_front, s, rel);
            next.stack.pop();
        }
        Transition::RightArc(rel) => {
            if c.buffer_front > c.n {
                return Err(illegal("buffer is empty"));
            }
            let s = top.ok_or_else(|| illegal("stack is empty"))?;
            next.add_arc(s, c.buffer_front, rel);
            next.stack.push(c.buffer_front);
            next.buffer_front += 1;
        }
        Transition::Reduce => {
            let s = top.ok_or_else(|| illegal("stack is empty"))?;
            if c.head_of(s).is_none() {
                return Err(illegal("stack top has no head"));
            }
            next.stack.pop();
        }
    }
    Ok(next)
}

/// The committed arc set of `c`.
pub fn partial_parse(c: &Configuration) -> BTreeSet<DepArc> {
    c.order.iter().copied().collect()
}

/// The next correct transition towards the projective tree `gold`.
pub fn static_oracle(c: &Configuration, gold: &DepTree) -> Result<Transition, TransitionError> {
    if !is_projective(gold) {
        return Err(TransitionError::NonProjective);
    }
    Ok(oracle_step(c, gold))
}

fn oracle_step(c: &Configuration, gold: &DepTree) -> Transition {
    let tok = |i: usize| &gold.tokens[i - 1];
    let top = c.stack_top();
    if let (Some(s), Some(b)) = (top, c.buffer_head()) {
        if s != 0 && tok(s).head == b {
            return Transition::LeftArc(tok(s).deprel.clone());
        }
        if tok(b).head == s {
            return Transition::RightArc(tok(b).deprel.clone());
        }
    }
    if let Some(s) = top {
        let complete = c.head_of(s).is_some()
            && gold
                .tokens
                .iter()
                .filter(|t| t.head == s)
                .all(|t| c.head_of(t.id).is_some());
        if complete {
            return Transition::Reduce;
        }
    }
    Transition::Shift
}

/// Attach stack tokens that never got a head to the root, then keep only
/// the leftmost root token as root.
///
/// Returns the tree and the arcs this step added.
pub fn finalize(c: &Configuration, template: &DepTree) -> (DepTree, BTreeSet<DepArc>) {
    let n = c.n;
    let mut heads: Vec<usize> = Vec::with_capacity(n);
    let mut deprels: Vec<String> = Vec::with_capacity(n);
    for d in 1..=n {
        heads.push(c.head_of(d).unwrap_or(0));
        deprels.push(c.deprel_of(d).unwrap_or("root").to_string());
    }
    let root = heads.iter().position(|&h| h == 0).map(|i| i + 1);
    if let Some(root) = root {
        for (i, h) in heads.iter_mut().enumerate() {
            if *h == 0 && i + 1 != root {
                *h = root;
            }
        }
    }
    let committed = partial_parse(c);
    let mut tree = template.clone();
    for ((tok, h), r) in tree.tokens.iter_mut().zip(heads).zip(deprels) {
        tok.head = h;
        tok.deprel = r;
    }
    let added = tree
        .arcs()
        .into_iter()
        .filter(|a| !committed.contains(a))
        .collect();
    (tree, added)
}

/// Run the static oracle from the initial configuration. Non-projective
/// trees are projectivized first; the returned tree is what the transitions
/// build.
pub fn run_oracle(gold: &DepTree) -> Result<(Vec<Transition>, DepTree), TransitionError> {
    let target = if is_projective(gold) {
        gold.clone()
    } else {
        projectivize(gold)
    };
    let mut c = initial_config(target.len())?;
    let mut transitions = Vec::new();
    while !c.is_terminal() {
        let t = oracle_step(&c, &target);
        c = apply_transition(&c, &t)?;
        transitions.push(t);
    }
    let (tree, _) = finalize(&c, &target);
    Ok((transitions, tree))
}

/// Replay transitions on a sentence of `n` tokens.
pub fn replay(n: usize, transitions: &[Transition]) -> Result<Configuration, TransitionError> {
    let mut c = initial_config(n)?;
    for t in transitions {
        c = apply_transition(&c, t)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold_example() -> DepTree {
        let mut t = DepTree::from_heads(&[2, 0, 2]);
        t.tokens[0].deprel = "nsubj".into();
        t.tokens[2].deprel = "obj".into();
        t
    }

    fn names(ts: &[Transition]) -> Vec<&'static str> {
        ts.iter().map(|t| t.name()).collect()
    }

    #[test]
    fn initial_configuration() {
        let c = initial_config(3).unwrap();
        assert_eq!(c.stack, vec![0]);
        assert_eq!(c.buffer_front, 1);
        assert!(partial_parse(&c).is_empty());
        assert_eq!(initial_config(0), Err(TransitionError::EmptySentence));
    }

    #[test]
    fn legality() {
        use TransitionKind::*;
        let c = initial_config(3).unwrap();
        assert_eq!(legal_transitions(&c), BTreeSet::from([Shift, RightArc]));
        let c = apply_transition(&c, &Transition::Shift).unwrap();
        assert!(legal_transitions(&c).contains(&LeftArc));
        let c = apply_transition(&c, &Transition::RightArc("x".into())).unwrap();
        let c = apply_transition(&c, &Transition::RightArc("y".into())).unwrap();
        assert!(c.is_terminal());
        assert_eq!(legal_transitions(&c), BTreeSet::from([Reduce]));
    }

    #[test]
    fn apply_rules() {
        let c = initial_config(2).unwrap();
        let c = apply_transition(&c, &Transition::Shift).unwrap();
        assert_eq!((c.stack.clone(), c.buffer_front), (vec![0, 1], 2));
        let c = apply_transition(&c, &Transition::LeftArc("nsubj".into())).unwrap();
        assert_eq!((c.stack.clone(), c.buffer_front), (vec![0], 2));
        assert_eq!(partial_parse(&c), BTreeSet::from([DepArc::new(2, 1)]));
        assert_eq!(c.deprel_of(1), Some("nsubj"));
        let err = apply_transition(&c, &Transition::Reduce).unwrap_err();
        assert!(matches!(
            err,
            TransitionError::Illegal {
                reason: "stack top has no head",
                ..
            }
        ));
    }

    #[test]
    fn oracle_sequences() {
        let (ts, tree) = run_oracle(&gold_example()).unwrap();
        assert_eq!(names(&ts), ["SH", "LA", "RA", "RA"]);
        assert_eq!(ts[1], Transition::LeftArc("nsubj".into()));
        assert_eq!(tree, gold_example());

        let (ts, _) = run_oracle(&DepTree::from_heads(&[0])).unwrap();
        assert_eq!(names(&ts), ["RA"]);
        let (ts, _) = run_oracle(&DepTree::from_heads(&[2, 0])).unwrap();
        assert_eq!(names(&ts), ["SH", "LA", "RA"]);
    }

    #[test]
    fn oracle_partial_parses() {
        let gold = gold_example();
        let mut c = initial_config(3).unwrap();
        for _ in 0..2 {
            c = apply_transition(&c, &static_oracle(&c, &gold).unwrap()).unwrap();
        }
        assert_eq!(partial_parse(&c), BTreeSet::from([DepArc::new(2, 1)]));
        while !c.is_terminal() {
            c = apply_transition(&c, &static_oracle(&c, &gold).unwrap()).unwrap();
        }
        assert_eq!(partial_parse(&c), gold.arcs());
    }

    #[test]
    fn oracle_rejects_nonprojective_gold() {
        let gold = DepTree::from_heads(&[0, 4, 1, 1]);
        let c = initial_config(4).unwrap();
        assert_eq!(
            static_oracle(&c, &gold),
            Err(TransitionError::NonProjective)
        );
        let (_, tree) = run_oracle(&gold).unwrap();
        assert_eq!(tree, projectivize(&gold));
    }

    #[test]
    fn transition_names_round_trip() {
        for s in ["SH", "RE", "LA:nsubj", "RA:obl:tmod"] {
            assert_eq!(s.parse::<Transition>().unwrap().to_string(), s);
        }
        assert!("LA".parse::<Transition>().is_err());
    }
}
