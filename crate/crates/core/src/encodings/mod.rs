//! Sequence-labeling tree encodings.
//!
//! Each token receives one label describing where its head is (head-based
//! schemes) or which arcs start and end at it (bracket schemes). Decoding is
//! a left-to-right pass, see [`IncrementalDecoder`], followed by the repairs
//! in [`repair`].

mod brackets;
mod decoder;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use brackets::{
    brackets_for, one_planar_subset, two_planar_assignment, Bracket, BracketKind, BracketString,
    Plane,
};
pub use decoder::{repair, IncrementalDecoder, RawDecode};

use crate::error::LabelError;
use crate::tree::{DepTree, Token};

/// The five label schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    AbsIdx,
    RelIdx,
    PosIdx,
    Bracket1P,
    Bracket2P,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::AbsIdx,
        Scheme::RelIdx,
        Scheme::PosIdx,
        Scheme::Bracket1P,
        Scheme::Bracket2P,
    ];

    /// Whether a token's label may point at a token to its right.
    pub fn forward_looking(self) -> bool {
        matches!(self, Scheme::AbsIdx | Scheme::RelIdx | Scheme::PosIdx)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::AbsIdx => "abs",
            Scheme::RelIdx => "rel",
            Scheme::PosIdx => "pos",
            Scheme::Bracket1P => "1p",
            Scheme::Bracket2P => "2p",
        }
    }

    pub fn is_bracket(self) -> bool {
        matches!(self, Scheme::Bracket1P | Scheme::Bracket2P)
    }
}

/// Free-function form of [`Scheme::forward_looking`].
pub fn forward_looking(scheme: Scheme) -> bool {
    scheme.forward_looking()
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abs" | "abs-idx" => Ok(Scheme::AbsIdx),
            "rel" | "rel-idx" => Ok(Scheme::RelIdx),
            "pos" | "pos-idx" => Ok(Scheme::PosIdx),
            "1p" => Ok(Scheme::Bracket1P),
            "2p" => Ok(Scheme::Bracket2P),
            other => Err(LabelError::UnknownScheme(other.to_string())),
        }
    }
}

/// PoS-idx payload: the head is the `k`-th token to the right (`k > 0`) or
/// left (`k < 0`) carrying tag `upos`, or the artificial root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosTarget {
    Root,
    Offset { k: isize, upos: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Head index.
    Abs(usize),
    /// Head index minus dependent index.
    Rel(isize),
    Pos(PosTarget),
    Brackets(BracketString),
}

impl Label {
    /// Parse the textual form of a label under `scheme`. `token` is only used
    /// in error messages.
    pub fn parse(s: &str, scheme: Scheme, token: usize) -> Result<Label, LabelError> {
        let syntax = || LabelError::Syntax {
            token,
            label: s.to_string(),
            scheme: scheme.name().to_string(),
        };
        match scheme {
            Scheme::AbsIdx => s.parse().map(Label::Abs).map_err(|_| syntax()),
            Scheme::RelIdx => s
                .trim_start_matches('+')
                .parse()
                .map(Label::Rel)
                .map_err(|_| syntax()),
            Scheme::PosIdx => {
                if s == "ROOT" {
                    return Ok(Label::Pos(PosTarget::Root));
                }
                let (k, tag) = s.split_once(',').ok_or_else(syntax)?;
                let k: isize = k.trim_start_matches('+').parse().map_err(|_| syntax())?;
                if tag.is_empty() {
                    return Err(syntax());
                }
                Ok(Label::Pos(PosTarget::Offset {
                    k,
                    upos: tag.to_string(),
                }))
            }
            Scheme::Bracket1P | Scheme::Bracket2P => {
                let b = BracketString::parse(s, token)?;
                if scheme == Scheme::Bracket1P && b.uses_second_plane() {
                    return Err(LabelError::Alphabet {
                        token,
                        label: s.to_string(),
                        symbol: "*".to_string(),
                    });
                }
                Ok(Label::Brackets(b))
            }
        }
    }

    /// Whether this label is a payload of `scheme`.
    pub fn fits(&self, scheme: Scheme) -> bool {
        match (self, scheme) {
            (Label::Abs(_), Scheme::AbsIdx)
            | (Label::Rel(_), Scheme::RelIdx)
            | (Label::Pos(_), Scheme::PosIdx) => true,
            (Label::Brackets(b), Scheme::Bracket1P) => !b.uses_second_plane(),
            (Label::Brackets(_), Scheme::Bracket2P) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Abs(h) => write!(f, "{h}"),
            Label::Rel(off) => write!(f, "{off:+}"),
            Label::Pos(PosTarget::Root) => f.write_str("ROOT"),
            Label::Pos(PosTarget::Offset { k, upos }) => write!(f, "{k:+},{upos}"),
            Label::Brackets(b) => write!(f, "{b}"),
        }
    }
}

/// One label per token, with the token annotations decoding needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSequence {
    pub scheme: Scheme,
    pub labels: Vec<Label>,
    /// Parallel UPOS tags; PoS-idx decoding counts on them.
    pub upos: Vec<String>,
    /// Parallel forms, copied into the decoded tree.
    pub forms: Vec<String>,
    /// Parallel relations, copied into the decoded tree.
    pub deprels: Vec<String>,
}

impl LabelSequence {
    /// A sequence with placeholder forms (`_`) and relations (`dep`).
    pub fn new(scheme: Scheme, labels: Vec<Label>, upos: Vec<String>) -> Self {
        let n = labels.len();
        LabelSequence {
            scheme,
            labels,
            upos,
            forms: vec!["_".to_string(); n],
            deprels: vec!["dep".to_string(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn check(&self) -> Result<(), LabelError> {
        let n = self.labels.len();
        for other in [self.upos.len(), self.forms.len(), self.deprels.len()] {
            if other != n {
                return Err(LabelError::LengthMismatch {
                    labels: n,
                    tags: other,
                });
            }
        }
        for (i, label) in self.labels.iter().enumerate() {
            if !label.fits(self.scheme) {
                return Err(match label {
                    Label::Brackets(b) => LabelError::Alphabet {
                        token: i + 1,
                        label: b.to_string(),
                        symbol: "*".to_string(),
                    },
                    _ => LabelError::SchemeMismatch {
                        token: i + 1,
                        scheme: self.scheme.name().to_string(),
                    },
                });
            }
        }
        Ok(())
    }
}

/// The head label of every token of `tree`. Head-based schemes are lossless;
/// bracket schemes drop arcs they cannot place (see [`coverage`]).
pub fn encode(tree: &DepTree, scheme: Scheme) -> LabelSequence {
    let n = tree.len();
    let heads = tree.heads();
    let upos: Vec<String> = tree.tokens.iter().map(|t| t.upos.clone()).collect();
    let labels = match scheme {
        Scheme::AbsIdx => heads.iter().map(|&h| Label::Abs(h)).collect(),
        Scheme::RelIdx => heads
            .iter()
            .enumerate()
            .map(|(i, &h)| Label::Rel(h as isize - (i + 1) as isize))
            .collect(),
        Scheme::PosIdx => (1..=n)
            .map(|d| Label::Pos(pos_target(&upos, d, heads[d - 1])))
            .collect(),
        Scheme::Bracket1P => {
            let arcs: Vec<_> = one_planar_subset(tree)
                .into_iter()
                .map(|a| (a, Plane::First))
                .collect();
            brackets_for(n, &arcs)
                .into_iter()
                .map(Label::Brackets)
                .collect()
        }
        Scheme::Bracket2P => brackets_for(n, &two_planar_assignment(tree))
            .into_iter()
            .map(Label::Brackets)
            .collect(),
    };
    LabelSequence {
        scheme,
        labels,
        upos,
        forms: tree.tokens.iter().map(|t| t.form.clone()).collect(),
        deprels: tree.tokens.iter().map(|t| t.deprel.clone()).collect(),
    }
}

/// `upos` is 0-based; `dependent` and `head` are 1-based positions.
fn pos_target(upos: &[String], dependent: usize, head: usize) -> PosTarget {
    if head == 0 {
        return PosTarget::Root;
    }
    let tag = &upos[head - 1];
    let k = if head > dependent {
        (dependent + 1..=head)
            .filter(|&j| &upos[j - 1] == tag)
            .count() as isize
    } else {
        -((head..dependent).filter(|&j| &upos[j - 1] == tag).count() as isize)
    };
    PosTarget::Offset {
        k,
        upos: tag.clone(),
    }
}

/// Decode labels into a well-formed tree, repairing whatever the labels do
/// not determine.
pub fn decode(seq: &LabelSequence) -> Result<DepTree, LabelError> {
    seq.check()?;
    let mut decoder = IncrementalDecoder::new(seq.scheme);
    for (label, tag) in seq.labels.iter().zip(&seq.upos) {
        decoder.push(label, tag);
    }
    let heads = repair(decoder.finish());
    let tokens = heads
        .into_iter()
        .enumerate()
        .map(|(i, head)| {
            Token::new(
                i + 1,
                seq.forms[i].clone(),
                seq.upos[i].clone(),
                head,
                seq.deprels[i].clone(),
            )
        })
        .collect();
    Ok(DepTree::new(tokens))
}

/// Fraction of gold arcs that survive `decode(encode(tree, scheme))`.
pub fn coverage(tree: &DepTree, scheme: Scheme) -> f64 {
    if tree.is_empty() {
        return 1.0;
    }
    let decoded = decode(&encode(tree, scheme)).expect("encoder output is well-formed");
    let correct = tree
        .tokens
        .iter()
        .zip(&decoded.tokens)
        .filter(|(g, p)| g.head == p.head)
        .count();
    correct as f64 / tree.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(seq: &LabelSequence) -> Vec<String> {
        seq.labels.iter().map(|l| l.to_string()).collect()
    }

    fn example() -> DepTree {
        DepTree::from_heads_and_tags(&[2, 0, 2], &["PRON", "VERB", "NOUN"])
    }

    #[test]
    fn encode_examples() {
        let t = example();
        assert_eq!(labels(&encode(&t, Scheme::AbsIdx)), ["2", "0", "2"]);
        assert_eq!(labels(&encode(&t, Scheme::RelIdx)), ["+1", "-2", "-1"]);
        assert_eq!(
            labels(&encode(&t, Scheme::PosIdx)),
            ["+1,VERB", "ROOT", "-1,VERB"]
        );
        assert_eq!(labels(&encode(&t, Scheme::Bracket1P)), ["<", "\\/>", ">"]);
        assert_eq!(labels(&encode(&t, Scheme::Bracket2P)), ["<", "\\/>", ">"]);
        assert_eq!(
            labels(&encode(&DepTree::from_heads(&[0]), Scheme::Bracket1P)),
            [">"]
        );
    }

    fn decode_heads(scheme: Scheme, raw: &[&str]) -> Vec<usize> {
        let labels = raw
            .iter()
            .enumerate()
            .map(|(i, s)| Label::parse(s, scheme, i + 1).unwrap())
            .collect();
        let seq = LabelSequence::new(scheme, labels, vec!["X".to_string(); raw.len()]);
        decode(&seq).unwrap().heads()
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_heads(Scheme::AbsIdx, &["2", "0", "2"]), [2, 0, 2]);
        assert_eq!(decode_heads(Scheme::AbsIdx, &["2", "1", "2"]), [0, 1, 2]);
        assert_eq!(
            decode_heads(Scheme::Bracket1P, &["<", "\\/>", ">"]),
            [2, 0, 2]
        );
        assert_eq!(decode_heads(Scheme::AbsIdx, &["9", "0"]), [0, 1]);
    }

    #[test]
    fn decode_rejects_bad_input() {
        let seq = LabelSequence::new(Scheme::AbsIdx, vec![Label::Abs(0)], vec![]);
        assert!(matches!(
            decode(&seq),
            Err(LabelError::LengthMismatch { .. })
        ));
        let seq = LabelSequence::new(
            Scheme::Bracket1P,
            vec![Label::parse(">*", Scheme::Bracket2P, 1).unwrap()],
            vec!["X".into()],
        );
        assert!(matches!(
            decode(&seq),
            Err(LabelError::Alphabet { token: 1, .. })
        ));
        assert!(matches!(
            Label::parse(">*", Scheme::Bracket1P, 4),
            Err(LabelError::Alphabet { token: 4, .. })
        ));
        assert!(matches!(
            Label::parse("3,", Scheme::PosIdx, 2),
            Err(LabelError::Syntax { token: 2, .. })
        ));
    }

    #[test]
    fn forward_lookingness() {
        assert!(forward_looking(Scheme::AbsIdx));
        assert!(forward_looking(Scheme::RelIdx));
        assert!(forward_looking(Scheme::PosIdx));
        assert!(!forward_looking(Scheme::Bracket1P));
        assert!(!forward_looking(Scheme::Bracket2P));
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(coverage(&example(), Scheme::AbsIdx), 1.0);
        assert_eq!(coverage(&example(), Scheme::Bracket1P), 1.0);
        // 1->3 and 2->4 are rightward and cross
        let crossing = DepTree::from_heads(&[0, 1, 1, 2]);
        assert!(coverage(&crossing, Scheme::Bracket1P) < 1.0);
        assert_eq!(coverage(&crossing, Scheme::Bracket2P), 1.0);
    }

    #[test]
    fn label_text_round_trip() {
        for (s, scheme) in [
            ("-3", Scheme::RelIdx),
            ("+2,NOUN", Scheme::PosIdx),
            ("ROOT", Scheme::PosIdx),
            ("<<\\*/>*", Scheme::Bracket2P),
            ("_", Scheme::Bracket1P),
            ("12", Scheme::AbsIdx),
        ] {
            assert_eq!(Label::parse(s, scheme, 1).unwrap().to_string(), s);
        }
    }
}
