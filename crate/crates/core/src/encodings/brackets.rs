//! Bracket-string labels for the 1-planar and 2-planar encodings.
//!
//! For a rightward arc `h -> d` (`h < d`) the head carries `/` and the
//! dependent carries `>`; for a leftward arc (`d < h`) the dependent carries
//! `<` and the head carries `\`. A root arc puts a lone `>` on the root token,
//! matched by an implicit `/` at node 0. Plane-2 symbols carry a trailing `*`.

use std::collections::VecDeque;
use std::fmt;

use crate::error::LabelError;
use crate::tree::{DepArc, DepTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BracketKind {
    /// `<`: this token's head is to its right.
    LeftOpen,
    /// `\`: closes a `<`; this token heads an earlier token.
    LeftClose,
    /// `/`: this token heads a later token.
    RightOpen,
    /// `>`: closes a `/`; this token's head is to its left.
    RightClose,
}

impl BracketKind {
    fn symbol(self) -> char {
        match self {
            BracketKind::LeftOpen => '<',
            BracketKind::LeftClose => '\\',
            BracketKind::RightOpen => '/',
            BracketKind::RightClose => '>',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '<' => Some(BracketKind::LeftOpen),
            '\\' => Some(BracketKind::LeftClose),
            '/' => Some(BracketKind::RightOpen),
            '>' => Some(BracketKind::RightClose),
            _ => None,
        }
    }

    pub fn is_closer(self) -> bool {
        matches!(self, BracketKind::LeftClose | BracketKind::RightClose)
    }
}

/// One bracket symbol on plane 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bracket {
    pub kind: BracketKind,
    pub plane: Plane,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Plane {
    First,
    Second,
}

impl Plane {
    pub fn index(self) -> usize {
        match self {
            Plane::First => 0,
            Plane::Second => 1,
        }
    }
}

impl Bracket {
    pub fn new(kind: BracketKind, plane: Plane) -> Self {
        Bracket { kind, plane }
    }
}

/// A canonically ordered bracket string: all `<`, then `\`, then `/`, then
/// `>`, with each plane-2 symbol right after its plane-1 counterpart.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BracketString(Vec<Bracket>);

impl BracketString {
    pub fn new(mut symbols: Vec<Bracket>) -> Self {
        symbols.sort();
        BracketString(symbols)
    }

    pub fn symbols(&self) -> &[Bracket] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn uses_second_plane(&self) -> bool {
        self.0.iter().any(|b| b.plane == Plane::Second)
    }

    /// Parse a bracket string. `_` denotes the empty string.
    pub fn parse(s: &str, token: usize) -> Result<Self, LabelError> {
        if s == "_" {
            return Ok(BracketString::default());
        }
        let mut symbols = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let kind = BracketKind::from_symbol(c).ok_or_else(|| LabelError::Alphabet {
                token,
                label: s.to_string(),
                symbol: c.to_string(),
            })?;
            let plane = if chars.peek() == Some(&'*') {
                chars.next();
                Plane::Second
            } else {
                Plane::First
            };
            symbols.push(Bracket::new(kind, plane));
        }
        Ok(BracketString::new(symbols))
    }
}

impl fmt::Display for BracketString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("_");
        }
        for b in &self.0 {
            write!(f, "{}", b.kind.symbol())?;
            if b.plane == Plane::Second {
                f.write_str("*")?;
            }
        }
        Ok(())
    }
}

fn conflict(a: &DepArc, b: &DepArc) -> bool {
    a.is_rightward() == b.is_rightward() && a.crosses(b)
}

/// Arcs of `tree` kept by the 1-planar encoding: visited by dependent index,
/// an arc is kept unless it crosses an already kept arc of the same direction.
pub fn one_planar_subset(tree: &DepTree) -> Vec<DepArc> {
    let mut kept: Vec<DepArc> = Vec::new();
    for tok in &tree.tokens {
        let arc = DepArc::new(tok.head, tok.id);
        if !kept.iter().any(|k| conflict(k, &arc)) {
            kept.push(arc);
        }
    }
    kept
}

/// Plane assignment for the 2-planar encoding.
///
/// Arcs are ordered by leftmost endpoint (then rightmost). Each connected
/// component of the same-direction crossing graph is 2-colored by BFS from its
/// first arc, which goes on plane 1. Components that are not bipartite fall
/// back to greedy placement (plane 1, else plane 2, else dropped).
pub fn two_planar_assignment(tree: &DepTree) -> Vec<(DepArc, Plane)> {
    let mut arcs: Vec<DepArc> = tree.arcs().into_iter().collect();
    arcs.sort_by_key(|a| (a.min_node(), a.max_node(), a.dependent));
    let m = arcs.len();
    let adjacency: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i && conflict(&arcs[i], &arcs[j]))
                .collect()
        })
        .collect();

    let mut plane: Vec<Option<Plane>> = vec![None; m];
    let mut seen = vec![false; m];
    for start in 0..m {
        if seen[start] {
            continue;
        }
        // collect the component in BFS order and try to 2-color it
        let mut component = Vec::new();
        let mut color = vec![None; m];
        let mut bipartite = true;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        color[start] = Some(Plane::First);
        while let Some(i) = queue.pop_front() {
            component.push(i);
            let other = match color[i] {
                Some(Plane::First) => Plane::Second,
                _ => Plane::First,
            };
            for &j in &adjacency[i] {
                match color[j] {
                    None => {
                        color[j] = Some(other);
                        seen[j] = true;
                        queue.push_back(j);
                    }
                    Some(c) if c != other => bipartite = false,
                    Some(_) => {}
                }
            }
        }
        if bipartite {
            for &i in &component {
                plane[i] = color[i];
            }
        } else {
            component.sort_unstable();
            for &i in &component {
                let fits = |p: Plane| adjacency[i].iter().all(|&j| plane[j] != Some(p));
                plane[i] = if fits(Plane::First) {
                    Some(Plane::First)
                } else if fits(Plane::Second) {
                    Some(Plane::Second)
                } else {
                    None
                };
            }
        }
    }
    arcs.into_iter()
        .zip(plane)
        .filter_map(|(a, p)| p.map(|p| (a, p)))
        .collect()
}

/// Turn planar arcs into one bracket string per token.
pub fn brackets_for(n: usize, arcs: &[(DepArc, Plane)]) -> Vec<BracketString> {
    let mut per_token: Vec<Vec<Bracket>> = vec![Vec::new(); n + 1];
    for &(arc, plane) in arcs {
        let DepArc { head, dependent } = arc;
        if head < dependent {
            if head > 0 {
                per_token[head].push(Bracket::new(BracketKind::RightOpen, plane));
            }
            per_token[dependent].push(Bracket::new(BracketKind::RightClose, plane));
        } else {
            per_token[dependent].push(Bracket::new(BracketKind::LeftOpen, plane));
            per_token[head].push(Bracket::new(BracketKind::LeftClose, plane));
        }
    }
    per_token
        .into_iter()
        .skip(1)
        .map(BracketString::new)
        .collect()
}
