use crate::tree::{find_cycle, DepArc};

use super::{BracketKind, Label, PosTarget, Scheme};

/// A head reference to a token that has not been read yet.
#[derive(Clone, Debug)]
enum Pending {
    /// Head at a fixed position.
    Index { dependent: usize, head: usize },
    /// Head is the `remaining`-th upcoming token tagged `upos`.
    Tag {
        dependent: usize,
        upos: String,
        remaining: usize,
    },
}

/// Left-to-right label reader.
///
/// Every arc is committed as soon as both of its endpoints have been read,
/// and committed arcs are never withdrawn. A token keeps the first head it
/// is given. Forward references still open at the end are left to
/// [`IncrementalDecoder::finish`].
#[derive(Clone, Debug)]
pub struct IncrementalDecoder {
    scheme: Scheme,
    /// 1-based; slot 0 is the root.
    heads: Vec<Option<usize>>,
    upos: Vec<String>,
    pending: Vec<Pending>,
    /// Per plane: stack of `/` openers (node 0 sits at the bottom).
    right: [Vec<usize>; 2],
    /// Per plane: stack of `<` openers.
    left: [Vec<usize>; 2],
    committed: Vec<DepArc>,
}

/// Result of a finished raw decode, before structural repairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDecode {
    /// `heads[i]` is the head of token `i + 1`, `None` if it got none.
    pub heads: Vec<Option<usize>>,
}

impl IncrementalDecoder {
    pub fn new(scheme: Scheme) -> Self {
        IncrementalDecoder {
            scheme,
            heads: vec![Some(0)],
            upos: vec![String::new()],
            pending: Vec::new(),
            right: [vec![0], vec![0]],
            left: [Vec::new(), Vec::new()],
            committed: Vec::new(),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of labels read so far.
    pub fn len(&self) -> usize {
        self.heads.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every arc committed so far, in commit order.
    pub fn committed(&self) -> &[DepArc] {
        &self.committed
    }

    /// Current head of token `i`, if any.
    pub fn head_of(&self, i: usize) -> Option<usize> {
        self.heads.get(i).copied().flatten()
    }

    /// Open `/` and `<` brackets on `plane`.
    pub fn open_brackets(&self, plane: usize) -> (usize, usize) {
        (self.right[plane].len(), self.left[plane].len())
    }

    fn commit(&mut self, head: usize, dependent: usize, out: &mut Vec<DepArc>) {
        if self.heads[dependent].is_none() {
            self.heads[dependent] = Some(head);
            let arc = DepArc::new(head, dependent);
            self.committed.push(arc);
            out.push(arc);
        }
    }

    /// Read the label of the next token, tagged `upos`. Returns the arcs this
    /// label (and the arrival of this token) committed.
    pub fn push(&mut self, label: &Label, upos: &str) -> Vec<DepArc> {
        let i = self.heads.len();
        self.heads.push(None);
        self.upos.push(upos.to_string());
        let mut out = Vec::new();

        // forward references waiting for this token
        let pending = std::mem::take(&mut self.pending);
        for p in pending {
            match p {
                Pending::Index { dependent, head } if head == i => {
                    self.commit(i, dependent, &mut out);
                }
                Pending::Tag {
                    dependent,
                    upos: tag,
                    remaining,
                } if tag == upos => {
                    if remaining == 1 {
                        self.commit(i, dependent, &mut out);
                    } else {
                        self.pending.push(Pending::Tag {
                            dependent,
                            upos: tag,
                            remaining: remaining - 1,
                        });
                    }
                }
                other => self.pending.push(other),
            }
        }

        match label {
            Label::Abs(h) => self.head_at(i, *h as isize, &mut out),
            Label::Rel(off) => self.head_at(i, i as isize + off, &mut out),
            Label::Pos(PosTarget::Root) => self.commit(0, i, &mut out),
            Label::Pos(PosTarget::Offset { k, upos: tag }) => {
                let k = *k;
                if k < 0 {
                    let wanted = k.unsigned_abs();
                    let head = (1..i)
                        .rev()
                        .filter(|&j| &self.upos[j] == tag)
                        .nth(wanted - 1)
                        .unwrap_or(0);
                    self.commit(head, i, &mut out);
                } else if k == 0 {
                    self.commit(0, i, &mut out);
                } else {
                    self.pending.push(Pending::Tag {
                        dependent: i,
                        upos: tag.clone(),
                        remaining: k as usize,
                    });
                }
            }
            Label::Brackets(b) => {
                // closers refer to earlier tokens, openers to later ones
                let symbols = b.symbols();
                for s in symbols.iter().filter(|s| s.kind.is_closer()) {
                    let p = s.plane.index();
                    match s.kind {
                        BracketKind::RightClose => {
                            if let Some(h) = self.right[p].pop() {
                                self.commit(h, i, &mut out);
                            }
                        }
                        BracketKind::LeftClose => {
                            if let Some(d) = self.left[p].pop() {
                                self.commit(i, d, &mut out);
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                for s in symbols.iter().filter(|s| !s.kind.is_closer()) {
                    let p = s.plane.index();
                    match s.kind {
                        BracketKind::RightOpen => self.right[p].push(i),
                        BracketKind::LeftOpen => self.left[p].push(i),
                        _ => unreachable!(),
                    }
                }
            }
        }
        out
    }

    /// Head given as a position: root, backwards, self-loop or forward.
    fn head_at(&mut self, i: usize, head: isize, out: &mut Vec<DepArc>) {
        if head < 0 || head as usize == i {
            // out of range to the left, or a self-loop
            self.commit(0, i, out);
        } else if (head as usize) < i {
            self.commit(head as usize, i, out);
        } else {
            self.pending.push(Pending::Index {
                dependent: i,
                head: head as usize,
            });
        }
    }

    /// End of sentence: forward references that never resolved point outside
    /// the sentence and go to the root. Tokens that still lack a head are
    /// reported as `None`.
    pub fn finish(mut self) -> RawDecode {
        for p in std::mem::take(&mut self.pending) {
            let dependent = match p {
                Pending::Index { dependent, .. } | Pending::Tag { dependent, .. } => dependent,
            };
            if self.heads[dependent].is_none() {
                self.heads[dependent] = Some(0);
            }
        }
        RawDecode {
            heads: self.heads.into_iter().skip(1).collect(),
        }
    }
}

/// Structural repairs, in order: headless tokens attach to the leftmost root
/// token (or become the root if there is none yet); each cycle is broken by
/// sending its leftmost node to the root; finally every root token but the
/// leftmost is attached to the leftmost.
pub fn repair(raw: RawDecode) -> Vec<usize> {
    let n = raw.heads.len();
    let mut first_root = raw.heads.iter().position(|h| *h == Some(0)).map(|i| i + 1);
    let mut heads: Vec<usize> = Vec::with_capacity(n);
    for (i, h) in raw.heads.iter().enumerate() {
        heads.push(match h {
            Some(h) => *h,
            None => match first_root {
                Some(r) => r,
                None => {
                    first_root = Some(i + 1);
                    0
                }
            },
        });
    }

    while let Some(node) = find_cycle(&heads) {
        let mut cycle = vec![node];
        let mut next = heads[node - 1];
        while next != node {
            cycle.push(next);
            next = heads[next - 1];
        }
        let leftmost = *cycle.iter().min().expect("cycle is non-empty");
        heads[leftmost - 1] = 0;
    }

    if let Some(root) = heads.iter().position(|&h| h == 0).map(|i| i + 1) {
        for (i, h) in heads.iter_mut().enumerate() {
            if *h == 0 && i + 1 != root {
                *h = root;
            }
        }
    }
    heads
}
