use std::io;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TreeError {
    #[error("sentence has no tokens")]
    Empty,
    #[error("token at position {position} has id {id}")]
    BadId { position: usize, id: usize },
    #[error("token {token} has head {head} outside the sentence")]
    HeadOutOfRange { token: usize, head: usize },
    #[error("token {0} is its own head")]
    SelfLoop(usize),
    #[error("token {0} has an empty UPOS tag or relation")]
    EmptyField(usize),
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("head relation has a cycle through token {0}")]
    Cycle(usize),
}

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("sentence {sentence}: {source}")]
    Invalid {
        sentence: String,
        #[source]
        source: TreeError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum LabelError {
    #[error("token {token}: invalid symbol {symbol:?} in bracket label {label:?}")]
    Alphabet {
        token: usize,
        label: String,
        symbol: String,
    },
    #[error("token {token}: cannot parse label {label:?} for scheme {scheme}")]
    Syntax {
        token: usize,
        label: String,
        scheme: String,
    },
    #[error("token {token}: label kind does not match scheme {scheme}")]
    SchemeMismatch { token: usize, scheme: String },
    #[error("{labels} labels but {tags} PoS tags")]
    LengthMismatch { labels: usize, tags: usize },
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TransitionError {
    #[error("sentence must have at least one token")]
    EmptySentence,
    #[error("illegal {transition}: {reason}")]
    Illegal {
        transition: String,
        reason: &'static str,
    },
    #[error("gold tree is not projective; projectivize it first")]
    NonProjective,
    #[error("cannot parse transition {0:?}")]
    Syntax(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training instances mix tasks: {0} and {1}")]
    MixedTasks(String, String),
    #[error("legality mask excludes every class")]
    NoLegalClass,
    #[error("model format: {0}")]
    Format(String),
    #[error("model predicts {found}, expected {expected}")]
    TaskMismatch { expected: String, found: String },
    #[error("PoS tags required but none available")]
    MissingPos,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum EvalError {
    #[error("{gold} gold sentences but {pred} predicted sentences")]
    SentenceCount { gold: usize, pred: usize },
    #[error("sentence {sentence}: {gold} gold tokens but {pred} predicted tokens")]
    TokenCount {
        sentence: String,
        gold: usize,
        pred: usize,
    },
    #[error("nothing to evaluate")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TraceError {
    #[error("accessed token {accessed} while deciding position {position} with delay {delay}")]
    HorizonBreach {
        position: usize,
        accessed: usize,
        delay: usize,
    },
    #[error("accessed token {accessed} in a sentence of length {n}")]
    OutOfSentence { accessed: usize, n: usize },
    #[error("trace has {found} snapshots for a sentence of length {n}")]
    SnapshotCount { n: usize, found: usize },
}

/// Umbrella error for the end-to-end parsing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Conllu(#[from] ConlluError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
