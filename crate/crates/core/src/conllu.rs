//! CoNLL-U reading and writing.
//!
//! Only the basic dependency tree is kept: multiword-token ranges (`3-4`)
//! and empty nodes (`5.1`) are skipped. Columns other than ID, FORM, UPOS,
//! HEAD and DEPREL are written back as `_`.

use std::io::{BufRead, Write};

use log::warn;

use crate::error::{ConlluError, TreeError};
use crate::tree::{DepTree, Token};

/// What to do with a sentence that parses but violates tree invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InvalidPolicy {
    #[default]
    Fail,
    SkipAndWarn,
}

/// A sentence dropped under [`InvalidPolicy::SkipAndWarn`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub sentence: String,
    pub error: TreeError,
}

/// Read every sentence, failing on the first malformed or invalid one.
pub fn parse_conllu<R: BufRead>(input: R) -> Result<Vec<DepTree>, ConlluError> {
    parse_conllu_with(input, InvalidPolicy::Fail).map(|(trees, _)| trees)
}

/// Read every sentence. Malformed lines are always errors; tree-invariant
/// violations follow `policy`.
pub fn parse_conllu_with<R: BufRead>(
    input: R,
    policy: InvalidPolicy,
) -> Result<(Vec<DepTree>, Vec<Skipped>), ConlluError> {
    let mut trees = Vec::new();
    let mut skipped = Vec::new();
    let mut current = DepTree::default();
    let mut count = 0usize;

    let mut finish = |tree: DepTree,
                      trees: &mut Vec<DepTree>,
                      skipped: &mut Vec<Skipped>|
     -> Result<(), ConlluError> {
        let name = tree.display_id(count);
        count += 1;
        match tree.validate() {
            Ok(()) => trees.push(tree),
            Err(source) => match policy {
                InvalidPolicy::Fail => {
                    return Err(ConlluError::Invalid {
                        sentence: name,
                        source,
                    })
                }
                InvalidPolicy::SkipAndWarn => {
                    warn!("skipping sentence {name}: {source}");
                    skipped.push(Skipped {
                        sentence: name,
                        error: source,
                    });
                }
            },
        }
        Ok(())
    };

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            if !current.tokens.is_empty() {
                finish(std::mem::take(&mut current), &mut trees, &mut skipped)?;
            } else {
                current = DepTree::default();
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment
                .trim_start()
                .strip_prefix("sent_id")
                .and_then(|rest| rest.trim_start().strip_prefix('='))
            {
                current.sentence_id = Some(id.trim().to_string());
            }
            current.comments.push(line.to_string());
            continue;
        }
        if let Some(token) = parse_token_line(line, line_no)? {
            current.tokens.push(token);
        }
    }
    if !current.tokens.is_empty() {
        finish(current, &mut trees, &mut skipped)?;
    }
    Ok((trees, skipped))
}

fn parse_token_line(line: &str, line_no: usize) -> Result<Option<Token>, ConlluError> {
    let malformed = |message: String| ConlluError::Malformed {
        line: line_no,
        message,
    };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(malformed(format!(
            "expected 10 tab-separated columns, found {}",
            cols.len()
        )));
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let id: usize = id
        .parse()
        .map_err(|_| malformed(format!("token id {id:?} is not an integer")))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| malformed(format!("head {:?} is not an integer", cols[6])))?;
    Ok(Some(Token::new(id, cols[1], cols[3], head, cols[7])))
}

/// Write trees in CoNLL-U, one blank line after each sentence.
pub fn write_conllu<W: Write>(trees: &[DepTree], mut out: W) -> std::io::Result<()> {
    for tree in trees {
        let mut wrote_id = false;
        for comment in &tree.comments {
            writeln!(out, "{comment}")?;
            wrote_id |= comment
                .trim_start_matches('#')
                .trim_start()
                .starts_with("sent_id");
        }
        if let (false, Some(id)) = (wrote_id, &tree.sentence_id) {
            writeln!(out, "# sent_id = {id}")?;
        }
        for t in &tree.tokens {
            writeln!(
                out,
                "{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_",
                t.id, t.form, t.upos, t.head, t.deprel
            )?;
        }
        writeln!(out)?;
    }
    out.flush()
}
