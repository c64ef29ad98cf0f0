use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use increparse::conllu::{parse_conllu_with, write_conllu, InvalidPolicy};
use increparse::encodings::{coverage, decode as decode_labels, encode as encode_tree, Scheme};
use increparse::evaluation::{
    baseline_parse, displacement_curve, score, write_metrics_tsv, Baseline,
};
use increparse::incrementality::{
    check_delay, check_monotonic, trace_gold_labels, trace_oracle, write_traces_jsonl, ParseTrace,
};
use increparse::pipeline::{Parser, System, TrainConfig};
use increparse::stats::branching_stats;
use increparse::synth::synthetic_treebank;
use increparse::DepTree;
use log::info;

use crate::error::CliError;
use crate::tsv;
use crate::{
    system, DecodeArgs, EncodeArgs, EvalArgs, Input, ParseArgs, StatsArgs, SynthArgs, TrainArgs,
    VerifyArgs,
};

fn open(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Box::new(BufReader::new(f)))
}

fn create(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            let f = File::create(p).map_err(|source| CliError::File {
                path: p.to_path_buf(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn read_trees(input: &Input) -> Result<Vec<DepTree>, CliError> {
    read_path(&input.input, input.skip_invalid)
}

fn read_path(path: &Path, skip_invalid: bool) -> Result<Vec<DepTree>, CliError> {
    let policy = if skip_invalid {
        InvalidPolicy::SkipAndWarn
    } else {
        InvalidPolicy::Fail
    };
    let (trees, skipped) = parse_conllu_with(open(path)?, policy)?;
    if !skipped.is_empty() {
        log::warn!("skipped {} invalid sentences", skipped.len());
    }
    Ok(trees)
}

fn scheme_of(name: &str) -> Result<Scheme, CliError> {
    match system(name)? {
        System::Labels(s) => Ok(s),
        System::ArcEager => Err(CliError::Usage("arc-eager has no label encoding".into())),
    }
}

fn load_parser(path: &Path) -> Result<Parser, CliError> {
    Ok(Parser::read(open(path)?)?)
}

pub fn encode(a: &EncodeArgs) -> Result<(), CliError> {
    let scheme = scheme_of(&a.scheme)?;
    let trees = read_trees(&a.input)?;
    let mut out = create(a.output.out.as_deref())?;
    writeln!(out, "{}", tsv::HEADER)?;
    let mut covered = 0.0;
    let mut tokens = 0usize;
    for (idx, tree) in trees.iter().enumerate() {
        tsv::write_sequence(&mut out, &tree.display_id(idx), &encode_tree(tree, scheme))?;
        covered += coverage(tree, scheme) * tree.len() as f64;
        tokens += tree.len();
    }
    out.flush()?;
    let pct = if tokens == 0 {
        100.0
    } else {
        100.0 * covered / tokens as f64
    };
    eprintln!(
        "{scheme}: {} sentences, {tokens} tokens, {pct:.2}% of arcs encoded",
        trees.len()
    );
    Ok(())
}

pub fn decode(a: &DecodeArgs) -> Result<(), CliError> {
    let scheme = scheme_of(&a.scheme)?;
    let sequences = tsv::read_sequences(open(&a.input)?, scheme)?;
    let mut trees = Vec::with_capacity(sequences.len());
    for (id, seq) in sequences {
        let mut tree = decode_labels(&seq)?;
        tree.sentence_id = Some(id);
        trees.push(tree);
    }
    let out = create(a.output.out.as_deref())?;
    write_conllu(&trees, out)?;
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let system = system(&a.scheme)?;
    if a.epochs == 0 {
        return Err(CliError::Usage("--epochs must be at least 1".into()));
    }
    let trees = read_trees(&a.input)?;
    let cfg = TrainConfig {
        system,
        delay: a.delay,
        epochs: a.epochs,
        seed: a.seed,
    };
    let (parser, summary) = Parser::train(&trees, &cfg)?;
    let last =
        |r: &increparse::scorer::TrainReport| r.epoch_accuracy.last().copied().unwrap_or(0.0);
    info!(
        "trained {system} k={} on {} sentences: tagger {:.4}, main {:.4}",
        a.delay,
        trees.len(),
        last(&summary.tagger),
        last(&summary.main)
    );
    let mut out = create(Some(&a.out))?;
    parser.write(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn parse(a: &ParseArgs) -> Result<(), CliError> {
    let parser = load_parser(&a.model)?;
    let trees = read_trees(&a.input)?;
    let mut parsed = Vec::with_capacity(trees.len());
    let mut traces = Vec::with_capacity(trees.len());
    let mut steps = a
        .steps_out
        .as_deref()
        .map(|p| create(Some(p)))
        .transpose()?;
    if let Some(s) = steps.as_mut() {
        writeln!(s, "sentence_id\tstep\thorizon\toutput")?;
    }
    for (idx, tree) in trees.iter().enumerate() {
        let result = parser.parse(tree, a.gold_pos)?;
        if let Some(s) = steps.as_mut() {
            let id = tree.display_id(idx);
            for (j, step) in result.steps.iter().enumerate() {
                writeln!(s, "{id}\t{}\t{}\t{}", j + 1, step.horizon, step.output)?;
            }
        }
        parsed.push(result.tree);
        let mut trace = result.trace;
        trace.sentence_id = Some(tree.display_id(idx));
        traces.push(trace);
    }
    if let Some(mut s) = steps {
        s.flush()?;
    }
    write_conllu(&parsed, create(a.output.out.as_deref())?)?;
    if let Some(p) = &a.trace_out {
        let mut t = create(Some(p))?;
        write_traces_jsonl(&traces, &mut t)?;
        t.flush()?;
    }
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let gold = read_path(&a.gold, false)?;
    let pred = match (&a.pred, &a.baseline) {
        (Some(p), None) => read_path(p, false)?,
        (None, Some(b)) => {
            let strategy = match b.as_str() {
                "right-branching" | "right" => Baseline::RightBranching,
                "left-branching" | "left" => Baseline::LeftBranching,
                other => return Err(CliError::Usage(format!("unknown baseline {other:?}"))),
            };
            baseline_parse(&gold, strategy)
        }
        _ => {
            return Err(CliError::Usage(
                "give a predicted file or --baseline".into(),
            ))
        }
    };
    let metrics = score(&gold, &pred)?;
    let mut out = create(a.output.out.as_deref())?;
    if a.json {
        let v = serde_json::json!({
            "uas": 100.0 * metrics.uas,
            "las": 100.0 * metrics.las,
            "n_tokens": metrics.n_tokens,
        });
        serde_json::to_writer_pretty(&mut out, &v).map_err(io::Error::from)?;
        writeln!(out)?;
    } else {
        write_metrics_tsv(&metrics, &mut out)?;
    }
    out.flush()?;
    if let Some(path) = &a.curve {
        if a.tail < 1 {
            return Err(CliError::Usage("--tail must be positive".into()));
        }
        let curve = displacement_curve(&gold, &pred)?.merged(a.tail);
        let mut c = create(Some(path))?;
        curve.write_csv(&mut c, Some(a.tail))?;
        c.flush()?;
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let trees = read_trees(&a.input)?;
    let mut traces: Vec<ParseTrace> = Vec::with_capacity(trees.len());
    let delay;
    if let Some(model) = &a.model {
        let parser = load_parser(model)?;
        delay = a.delay.unwrap_or(parser.delay());
        for tree in &trees {
            traces.push(parser.parse(tree, a.gold_pos)?.trace);
        }
    } else {
        delay = a.delay.unwrap_or(0);
        let name = a
            .scheme
            .as_deref()
            .ok_or_else(|| CliError::Usage("give --scheme or --model".into()))?;
        for tree in &trees {
            traces.push(match system(name)? {
                System::Labels(s) => trace_gold_labels(tree, s, delay)?,
                System::ArcEager => trace_oracle(tree, delay)?,
            });
        }
    }
    let mut out = create(a.output.out.as_deref())?;
    writeln!(out, "sentence_id\tn\tmonotonic\tdelay_ok")?;
    let (mut monotonic, mut delay_ok) = (0usize, 0usize);
    for (idx, (trace, tree)) in traces.iter_mut().zip(&trees).enumerate() {
        trace.sentence_id = Some(tree.display_id(idx));
        let m = check_monotonic(trace).passed();
        let d = check_delay(trace, delay).passed();
        monotonic += m as usize;
        delay_ok += d as usize;
        writeln!(out, "{}\t{}\t{m}\t{d}", tree.display_id(idx), trace.n)?;
    }
    out.flush()?;
    if let Some(p) = &a.trace_out {
        let mut t = create(Some(p))?;
        write_traces_jsonl(&traces, &mut t)?;
        t.flush()?;
    }
    let n = traces.len();
    eprintln!(
        "{n} sentences, delay {delay}: monotonic {monotonic}/{n}, delay check {delay_ok}/{n}"
    );
    if monotonic < n || delay_ok < n {
        return Err(CliError::Contract(format!(
            "{} sentences not monotonic, {} breach delay {delay}",
            n - monotonic,
            n - delay_ok
        )));
    }
    Ok(())
}

pub fn stats(a: &StatsArgs) -> Result<(), CliError> {
    let trees = read_trees(&a.input)?;
    let s = branching_stats(&trees)?;
    let mut out = create(a.output.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &s).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let trees = synthetic_treebank(a.seed, a.count);
    write_conllu(&trees, create(a.output.out.as_deref())?)?;
    Ok(())
}
