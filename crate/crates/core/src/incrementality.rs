//! Parse traces and the checks for monotonicity and strong incrementality.
//!
//! A pipeline reports every token access to a [`TraceRecorder`] and every
//! arc it commits. Snapshot `i` is the committed arc set at the moment the
//! pipeline first accesses token `i + 1` (or finishes), so it is the partial
//! parse available after reading `w_1 .. w_i`.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::encodings::{decode, encode, IncrementalDecoder, Scheme};
use crate::error::TraceError;
use crate::transition::{apply_transition, initial_config, run_oracle, static_oracle};
use crate::tree::{is_projective, projectivize, DepArc, DepTree};

/// Committed partial parses of one sentence, indexed by tokens accessed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseTrace {
    pub sentence_id: Option<String>,
    pub n: usize,
    pub declared_delay: usize,
    /// `snapshots[i - 1]` is the committed arc set after accessing `w_1 .. w_i`.
    pub snapshots: Vec<BTreeSet<DepArc>>,
    /// Arcs of the finished tree.
    #[serde(rename = "final")]
    pub final_arcs: BTreeSet<DepArc>,
}

impl ParseTrace {
    /// Arcs added when the sentence was finished, after every token had been
    /// read (root attachment and decode repairs).
    pub fn finalization_arcs(&self) -> BTreeSet<DepArc> {
        let last = self.snapshots.last().cloned().unwrap_or_default();
        self.final_arcs.difference(&last).copied().collect()
    }
}

/// Records token accesses and commits of a running pipeline.
#[derive(Clone, Debug)]
pub struct TraceRecorder {
    n: usize,
    delay: usize,
    accessed: usize,
    committed: BTreeSet<DepArc>,
    snapshots: Vec<BTreeSet<DepArc>>,
}

impl TraceRecorder {
    pub fn new(n: usize, delay: usize) -> Self {
        TraceRecorder {
            n,
            delay,
            accessed: 0,
            committed: BTreeSet::new(),
            snapshots: Vec::with_capacity(n),
        }
    }

    /// Number of tokens accessed so far.
    pub fn accessed(&self) -> usize {
        self.accessed
    }

    /// The pipeline, deciding at position `anchor`, reads tokens up to
    /// `upto`. Fails if that goes past `anchor + delay` or past the sentence.
    pub fn access(&mut self, anchor: usize, upto: usize) -> Result<(), TraceError> {
        if upto > self.n {
            return Err(TraceError::OutOfSentence {
                accessed: upto,
                n: self.n,
            });
        }
        if upto > anchor + self.delay {
            return Err(TraceError::HorizonBreach {
                position: anchor,
                accessed: upto,
                delay: self.delay,
            });
        }
        while self.accessed < upto {
            if self.accessed >= 1 {
                self.snapshots.push(self.committed.clone());
            }
            self.accessed += 1;
        }
        Ok(())
    }

    pub fn commit<I: IntoIterator<Item = DepArc>>(&mut self, arcs: I) {
        self.committed.extend(arcs);
    }

    pub fn committed(&self) -> &BTreeSet<DepArc> {
        &self.committed
    }

    /// Close the trace. Snapshots for tokens never accessed (and the last
    /// one) are the current committed set.
    pub fn finish(mut self, final_tree: &DepTree) -> ParseTrace {
        while self.snapshots.len() < self.n {
            self.snapshots.push(self.committed.clone());
        }
        ParseTrace {
            sentence_id: final_tree.sentence_id.clone(),
            n: self.n,
            declared_delay: self.delay,
            snapshots: self.snapshots,
            final_arcs: final_tree.arcs(),
        }
    }
}

/// Outcome of a check; `index` is the first failing token position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail { index: usize },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Every snapshot contains the previous one, and the finished tree contains
/// the last snapshot (failures at the finished tree report index `n + 1`).
pub fn check_monotonic(trace: &ParseTrace) -> Verdict {
    for i in 1..trace.snapshots.len() {
        if !trace.snapshots[i - 1].is_subset(&trace.snapshots[i]) {
            return Verdict::Fail { index: i + 1 };
        }
    }
    match trace.snapshots.last() {
        Some(last) if !last.is_subset(&trace.final_arcs) => Verdict::Fail { index: trace.n + 1 },
        _ => Verdict::Pass,
    }
}

/// After reading `w_1 .. w_i`, every final arc among `0 .. i-k` is committed.
/// Arcs added at finalization are exempt (see
/// [`ParseTrace::finalization_arcs`]).
pub fn check_delay(trace: &ParseTrace, k: usize) -> Verdict {
    let finalization = trace.finalization_arcs();
    for (idx, snapshot) in trace.snapshots.iter().enumerate() {
        let i = idx + 1;
        let Some(limit) = i.checked_sub(k) else {
            continue;
        };
        let missing = trace
            .final_arcs
            .iter()
            .filter(|a| a.max_node() <= limit && !finalization.contains(a))
            .any(|a| !snapshot.contains(a));
        if missing {
            return Verdict::Fail { index: i };
        }
    }
    Verdict::Pass
}

/// Fraction of snapshots whose arcs connect all of `0 .. i` into one tree.
/// Informational only.
pub fn connectedness(trace: &ParseTrace) -> f64 {
    if trace.snapshots.is_empty() {
        return 1.0;
    }
    let connected = trace
        .snapshots
        .iter()
        .enumerate()
        .filter(|(idx, s)| {
            let i = idx + 1;
            // a forest on i + 1 nodes is connected iff it has i arcs
            s.iter().filter(|a| a.max_node() <= i).count() == i
        })
        .count();
    connected as f64 / trace.snapshots.len() as f64
}

/// Trace of decoding the gold labels of `tree` under `scheme`, with label
/// `i` emitted once tokens up to `i + k` have been read.
pub fn trace_gold_labels(
    tree: &DepTree,
    scheme: Scheme,
    k: usize,
) -> Result<ParseTrace, TraceError> {
    let n = tree.len();
    let seq = encode(tree, scheme);
    let mut rec = TraceRecorder::new(n, k);
    let mut decoder = IncrementalDecoder::new(scheme);
    for i in 1..=n {
        rec.access(i, (i + k).min(n))?;
        let arcs = decoder.push(&seq.labels[i - 1], &seq.upos[i - 1]);
        rec.commit(arcs);
    }
    let mut decoded = decode(&seq).expect("encoder output is well-formed");
    decoded.sentence_id = tree.sentence_id.clone();
    Ok(rec.finish(&decoded))
}

/// Trace of the static oracle with delay `k`: each transition is taken after
/// reading up to `k` buffer words past the first.
pub fn trace_oracle(tree: &DepTree, k: usize) -> Result<ParseTrace, TraceError> {
    let n = tree.len();
    let target = if is_projective(tree) {
        tree.clone()
    } else {
        projectivize(tree)
    };
    let mut rec = TraceRecorder::new(n, k);
    let mut c = initial_config(n).expect("trees are non-empty");
    while let Some(b) = c.buffer_head() {
        rec.access(b, (b + k).min(n))?;
        let t = static_oracle(&c, &target).expect("target is projective");
        let before = c.arcs_in_order().len();
        c = apply_transition(&c, &t).expect("oracle transitions are legal");
        rec.commit(c.arcs_in_order()[before..].iter().copied());
    }
    let (_, mut built) = run_oracle(&target).expect("trees are non-empty");
    built.sentence_id = tree.sentence_id.clone();
    Ok(rec.finish(&built))
}

#[derive(Serialize)]
struct TraceLine<'a> {
    sentence_id: Option<&'a str>,
    n: usize,
    delay: usize,
    snapshots: Vec<Vec<[usize; 2]>>,
    #[serde(rename = "final")]
    final_arcs: Vec<[usize; 2]>,
    monotonic: bool,
    delay_ok: bool,
}

fn pairs(arcs: &BTreeSet<DepArc>) -> Vec<[usize; 2]> {
    arcs.iter().map(|a| [a.head, a.dependent]).collect()
}

/// One JSON object per trace: snapshot arcs as `[head, dependent]` pairs
/// plus both verdicts.
pub fn write_traces_jsonl<W: Write>(traces: &[ParseTrace], mut out: W) -> std::io::Result<()> {
    for t in traces {
        let line = TraceLine {
            sentence_id: t.sentence_id.as_deref(),
            n: t.n,
            delay: t.declared_delay,
            snapshots: t.snapshots.iter().map(pairs).collect(),
            final_arcs: pairs(&t.final_arcs),
            monotonic: check_monotonic(t).passed(),
            delay_ok: check_delay(t, t.declared_delay).passed(),
        };
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out)?;
    }
    Ok(())
}
