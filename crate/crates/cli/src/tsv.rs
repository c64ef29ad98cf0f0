//! Label files: a header, then one row per token with columns
//! `sentence_id token_id form upos label [deprel]`. Rows of one sentence are
//! consecutive.

use std::io::{BufRead, Write};

use increparse::encodings::{Label, LabelSequence, Scheme};
use increparse::error::LabelError;

use crate::error::CliError;

pub const HEADER: &str = "sentence_id\ttoken_id\tform\tupos\tlabel\tdeprel";

pub fn write_sequence<W: Write>(
    out: &mut W,
    sentence: &str,
    seq: &LabelSequence,
) -> std::io::Result<()> {
    for i in 0..seq.len() {
        writeln!(
            out,
            "{sentence}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            seq.forms[i],
            seq.upos[i],
            seq.labels[i],
            seq.deprels[i]
        )?;
    }
    Ok(())
}

/// Sentence identifiers with their label sequences, in file order.
pub fn read_sequences<R: BufRead>(
    input: R,
    scheme: Scheme,
) -> Result<Vec<(String, LabelSequence)>, CliError> {
    let mut out: Vec<(String, LabelSequence)> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || (idx == 0 && line.starts_with("sentence_id\t")) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 5 {
            return Err(CliError::Malformed(format!(
                "line {}: expected at least 5 tab-separated columns, found {}",
                idx + 1,
                cols.len()
            )));
        }
        let token: usize = cols[1].parse().map_err(|_| {
            CliError::Malformed(format!(
                "line {}: token id {:?} is not an integer",
                idx + 1,
                cols[1]
            ))
        })?;
        let label = Label::parse(cols[4], scheme, token)?;
        if out.last().map(|(id, _)| id.as_str()) != Some(cols[0]) {
            out.push((
                cols[0].to_string(),
                LabelSequence::new(scheme, Vec::new(), Vec::new()),
            ));
        }
        let seq = &mut out.last_mut().expect("just pushed").1;
        if token != seq.len() + 1 {
            return Err(LabelError::Syntax {
                token,
                label: cols[1].to_string(),
                scheme: format!("{scheme} (token ids must count up from 1)"),
            }
            .into());
        }
        seq.labels.push(label);
        seq.forms.push(cols[2].to_string());
        seq.upos.push(cols[3].to_string());
        seq.deprels.push(cols.get(5).unwrap_or(&"dep").to_string());
    }
    Ok(out)
}
