//! Attachment scores, displacement curves and branching baselines.
//!
//! Every token is scored, punctuation included.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::tree::{DepArc, DepTree, Token};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub uas: f64,
    pub las: f64,
    pub n_tokens: usize,
}

fn check_aligned(gold: &[DepTree], pred: &[DepTree]) -> Result<(), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    for (idx, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::TokenCount {
                sentence: g.display_id(idx),
                gold: g.len(),
                pred: p.len(),
            });
        }
    }
    Ok(())
}

/// Unlabeled and labeled attachment scores over all tokens.
pub fn score(gold: &[DepTree], pred: &[DepTree]) -> Result<Metrics, EvalError> {
    check_aligned(gold, pred)?;
    let mut total = 0usize;
    let mut heads = 0usize;
    let mut labeled = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            total += 1;
            if gt.head == pt.head {
                heads += 1;
                if gt.deprel == pt.deprel {
                    labeled += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(EvalError::Empty);
    }
    Ok(Metrics {
        uas: heads as f64 / total as f64,
        las: labeled as f64 / total as f64,
        n_tokens: total,
    })
}

/// Unweighted mean over treebanks.
pub fn macro_average(per_treebank: &[Metrics]) -> Result<Metrics, EvalError> {
    if per_treebank.is_empty() {
        return Err(EvalError::Empty);
    }
    let m = per_treebank.len() as f64;
    Ok(Metrics {
        uas: per_treebank.iter().map(|x| x.uas).sum::<f64>() / m,
        las: per_treebank.iter().map(|x| x.las).sum::<f64>() / m,
        n_tokens: per_treebank.iter().map(|x| x.n_tokens).sum(),
    })
}

/// Displacement bucket: `dependent - head`, with root arcs kept apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    Root,
    Offset(isize),
}

impl Bucket {
    pub fn of(arc: &DepArc) -> Bucket {
        if arc.head == 0 {
            Bucket::Root
        } else {
            Bucket::Offset(arc.dependent as isize - arc.head as isize)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketScore {
    pub gold_count: usize,
    pub pred_count: usize,
    pub true_positives: usize,
}

impl BucketScore {
    pub fn precision(&self) -> f64 {
        ratio(self.true_positives, self.pred_count)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.true_positives, self.gold_count)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Per-bucket counts; precision, recall and F1 are derived.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DisplacementCurve {
    pub buckets: BTreeMap<Bucket, BucketScore>,
}

impl DisplacementCurve {
    /// Merge every bucket with `|d| >= limit` into the `±limit` tails.
    pub fn merged(&self, limit: isize) -> DisplacementCurve {
        let mut out = DisplacementCurve::default();
        for (b, s) in &self.buckets {
            let key = match *b {
                Bucket::Offset(d) if d.abs() >= limit => Bucket::Offset(limit * d.signum()),
                other => other,
            };
            let e = out.buckets.entry(key).or_default();
            e.gold_count += s.gold_count;
            e.pred_count += s.pred_count;
            e.true_positives += s.true_positives;
        }
        out
    }

    pub fn true_positives(&self) -> usize {
        self.buckets.values().map(|s| s.true_positives).sum()
    }

    /// CSV with columns displacement, precision, recall, f1, gold_count.
    /// With `tail` set, the outermost buckets are written as `<=-tail` and
    /// `>=tail`.
    pub fn write_csv<W: Write>(&self, mut out: W, tail: Option<isize>) -> std::io::Result<()> {
        writeln!(out, "displacement,precision,recall,f1,gold_count")?;
        for (b, s) in &self.buckets {
            let key = match (*b, tail) {
                (Bucket::Root, _) => "root".to_string(),
                (Bucket::Offset(d), Some(t)) if d <= -t => format!("<={}", -t),
                (Bucket::Offset(d), Some(t)) if d >= t => format!(">={t}"),
                (Bucket::Offset(d), _) => d.to_string(),
            };
            writeln!(
                out,
                "{key},{:.6},{:.6},{:.6},{}",
                s.precision(),
                s.recall(),
                s.f1(),
                s.gold_count
            )?;
        }
        Ok(())
    }
}

/// Unmerged displacement counts. A predicted arc is correct when the gold
/// tree has the same head for the same dependent.
pub fn displacement_curve(
    gold: &[DepTree],
    pred: &[DepTree],
) -> Result<DisplacementCurve, EvalError> {
    check_aligned(gold, pred)?;
    let mut curve = DisplacementCurve::default();
    for (g, p) in gold.iter().zip(pred) {
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            let garc = DepArc::new(gt.head, gt.id);
            let parc = DepArc::new(pt.head, pt.id);
            curve
                .buckets
                .entry(Bucket::of(&garc))
                .or_default()
                .gold_count += 1;
            let e = curve.buckets.entry(Bucket::of(&parc)).or_default();
            e.pred_count += 1;
            if garc == parc {
                e.true_positives += 1;
            }
        }
    }
    Ok(curve)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    /// Each token headed by its left neighbour.
    RightBranching,
    /// Each token headed by its right neighbour.
    LeftBranching,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::RightBranching => "right-branching",
            Baseline::LeftBranching => "left-branching",
        })
    }
}

/// Baseline trees with the same tokens as `trees`.
pub fn baseline_parse(trees: &[DepTree], strategy: Baseline) -> Vec<DepTree> {
    trees
        .iter()
        .map(|t| {
            let n = t.len();
            let tokens = t
                .tokens
                .iter()
                .enumerate()
                .map(|(idx, tok)| {
                    let i = idx + 1;
                    let head = match strategy {
                        Baseline::RightBranching => i - 1,
                        Baseline::LeftBranching if i == n => 0,
                        Baseline::LeftBranching => i + 1,
                    };
                    Token::new(i, tok.form.clone(), tok.upos.clone(), head, "dep")
                })
                .collect();
            DepTree {
                tokens,
                sentence_id: t.sentence_id.clone(),
                comments: t.comments.clone(),
            }
        })
        .collect()
}

/// Tab-separated `uas`, `las`, `n_tokens` with a header line, scores as
/// percentages.
pub fn write_metrics_tsv<W: Write>(m: &Metrics, mut out: W) -> std::io::Result<()> {
    writeln!(out, "uas\tlas\tn_tokens")?;
    writeln!(
        out,
        "{:.2}\t{:.2}\t{}",
        100.0 * m.uas,
        100.0 * m.las,
        m.n_tokens
    )
}
