//! Trainable left-to-right parsers: a PoS tagger plus either a label
//! predictor for one encoding scheme or a transition classifier for the
//! arc-eager system. Every parse is traced.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::encodings::{encode, repair, IncrementalDecoder, Label, Scheme};
use crate::error::{Error, LabelError, ModelError};
use crate::incrementality::{ParseTrace, TraceRecorder};
use crate::scorer::{
    extract_features_deprel, extract_features_pos, extract_features_sl, extract_features_tb, train,
    History, Instance, Model, SentenceView, TrainReport, TrainingSet,
};
use crate::transition::{
    apply_transition, finalize, initial_config, legal_transitions, static_oracle, Configuration,
    Transition, TransitionKind,
};
use crate::tree::{is_projective, projectivize, DepTree, Token};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;

const MAGIC: &str = "increparse-parser";
const VERSION: u32 = 1;

/// What the main classifier predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum System {
    Labels(Scheme),
    ArcEager,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Labels(s) => s.name(),
            System::ArcEager => "arc-eager",
        }
    }

    /// Every system, in a fixed order.
    pub fn all() -> Vec<System> {
        Scheme::ALL
            .iter()
            .map(|&s| System::Labels(s))
            .chain([System::ArcEager])
            .collect()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arc-eager" | "arceager" | "ae" => Ok(System::ArcEager),
            other => other.parse().map(System::Labels),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainConfig {
    pub system: System,
    pub delay: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(system: System, delay: usize) -> Self {
        TrainConfig {
            system,
            delay,
            epochs: 10,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainSummary {
    pub tagger: TrainReport,
    pub main: TrainReport,
    pub deprels: Option<TrainReport>,
}

/// One prediction made during a parse, with the furthest token read
/// before making it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub horizon: usize,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseOutput {
    pub tree: DepTree,
    pub trace: ParseTrace,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parser {
    system: System,
    delay: usize,
    tagger: Model,
    main: Model,
    deprels: Option<Model>,
    /// Transition masks indexed by legality code.
    masks: Vec<Vec<bool>>,
}

fn kind_bit(kind: TransitionKind) -> u8 {
    match kind {
        TransitionKind::Shift => 1,
        TransitionKind::LeftArc => 2,
        TransitionKind::RightArc => 4,
        TransitionKind::Reduce => 8,
    }
}

fn class_bit(class: &str) -> u8 {
    match class.split(':').next() {
        Some("SH") => 1,
        Some("LA") => 2,
        Some("RA") => 4,
        Some("RE") => 8,
        _ => 0,
    }
}

fn transition_admits(code: u8, class: &str) -> bool {
    code & class_bit(class) != 0
}

/// Legal kinds as a bit set. A second root attachment is never allowed, so
/// the parser never has to revise a committed root arc.
fn legality_code(c: &Configuration) -> u8 {
    let mut kinds: BTreeSet<TransitionKind> = legal_transitions(c);
    if c.stack_top() == Some(0) && c.dependents(0).next().is_some() {
        kinds.remove(&TransitionKind::RightArc);
    }
    kinds.into_iter().map(kind_bit).fold(0, |a, b| a | b)
}

fn prev_two(xs: &[String]) -> [Option<&str>; 2] {
    let n = xs.len();
    [
        n.checked_sub(1).map(|i| xs[i].as_str()),
        n.checked_sub(2).map(|i| xs[i].as_str()),
    ]
}

/// Decoder state visible before label `i` is read.
fn decoder_state(decoder: &IncrementalDecoder, i: usize) -> Vec<String> {
    let root = decoder.committed().iter().any(|a| a.head == 0);
    let mut state = vec![format!("root:{root}")];
    match decoder.scheme() {
        Scheme::AbsIdx => state.push(format!("pos:{i}")),
        Scheme::Bracket1P | Scheme::Bracket2P => {
            for plane in 0..2 {
                let (right, left) = decoder.open_brackets(plane);
                state.push(format!("open{plane}:{}:{}", right.min(4), left.min(4)));
            }
        }
        _ => {}
    }
    state
}

fn forms_of(tree: &DepTree) -> Vec<String> {
    tree.tokens.iter().map(|t| t.form.clone()).collect()
}

fn tags_of(tree: &DepTree) -> Vec<String> {
    tree.tokens.iter().map(|t| t.upos.clone()).collect()
}

fn tagger_instances(trees: &[DepTree], k: usize) -> TrainingSet {
    let mut set = TrainingSet::new("pos", k);
    for tree in trees {
        let n = tree.len();
        let forms = forms_of(tree);
        let tags = tags_of(tree);
        for i in 1..=n {
            let view = SentenceView::new(&forms[..(i + k).min(n)], &tags[..i - 1]);
            let hist = History {
                prev: prev_two(&tags[..i - 1]),
                state: Vec::new(),
            };
            set.instances.push(Instance {
                features: extract_features_pos(&view, i, k, &hist).into_inner(),
                gold: tags[i - 1].clone(),
                legal: 0,
            });
        }
    }
    set
}

fn label_instances(trees: &[DepTree], scheme: Scheme, k: usize) -> (TrainingSet, TrainingSet) {
    let mut labels = TrainingSet::new(format!("labels:{}", scheme.name()), k);
    let mut deprels = TrainingSet::new(format!("deprels:{}", scheme.name()), k);
    for tree in trees {
        let n = tree.len();
        let forms = forms_of(tree);
        let tags = tags_of(tree);
        let seq = encode(tree, scheme);
        let gold: Vec<String> = seq.labels.iter().map(|l| l.to_string()).collect();
        let mut decoder = IncrementalDecoder::new(scheme);
        for i in 1..=n {
            let view = SentenceView::new(&forms[..(i + k).min(n)], &tags[..i]);
            let hist = History {
                prev: prev_two(&gold[..i - 1]),
                state: decoder_state(&decoder, i),
            };
            labels.instances.push(Instance {
                features: extract_features_sl(&view, i, k, &hist).into_inner(),
                gold: gold[i - 1].clone(),
                legal: 0,
            });
            deprels.instances.push(Instance {
                features: extract_features_deprel(&view, i, k, &gold[i - 1]).into_inner(),
                gold: tree.tokens[i - 1].deprel.clone(),
                legal: 0,
            });
            decoder.push(&seq.labels[i - 1], &tags[i - 1]);
        }
    }
    (labels, deprels)
}

fn transition_instances(trees: &[DepTree], k: usize) -> TrainingSet {
    let mut set = TrainingSet::new("transitions", k);
    set.legality = Some(transition_admits);
    for tree in trees {
        let n = tree.len();
        let target = if is_projective(tree) {
            tree.clone()
        } else {
            projectivize(tree)
        };
        let forms = forms_of(tree);
        let tags = tags_of(tree);
        let mut c = initial_config(n).expect("trees are non-empty");
        let mut last: Option<String> = None;
        while let Some(b) = c.buffer_head() {
            let view = SentenceView::new(&forms[..(b + k).min(n)], &tags[..b]);
            let t = static_oracle(&c, &target).expect("target is projective");
            let name = t.to_string();
            set.instances.push(Instance {
                features: extract_features_tb(&view, &c, k, last.as_deref()).into_inner(),
                gold: name.clone(),
                legal: legality_code(&c),
            });
            c = apply_transition(&c, &t).expect("oracle transitions are legal");
            last = Some(name);
        }
    }
    set
}

impl Parser {
    pub fn system(&self) -> System {
        self.system
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    fn assemble(
        system: System,
        delay: usize,
        tagger: Model,
        main: Model,
        deprels: Option<Model>,
    ) -> Self {
        let masks = (0..16u8)
            .map(|code| main.mask(|class| transition_admits(code, class)))
            .collect();
        Parser {
            system,
            delay,
            tagger,
            main,
            deprels,
            masks,
        }
    }

    /// Train tagger and main classifier (and a relation classifier for label
    /// schemes) on gold trees.
    pub fn train(trees: &[DepTree], cfg: &TrainConfig) -> Result<(Parser, TrainSummary), Error> {
        if trees.iter().all(|t| t.is_empty()) {
            return Err(ModelError::EmptyCorpus.into());
        }
        let trees: Vec<DepTree> = trees.iter().filter(|t| !t.is_empty()).cloned().collect();
        let k = cfg.delay;
        let (tagger, tagger_report) = train(&tagger_instances(&trees, k), cfg.epochs, cfg.seed)?;
        let mut summary = TrainSummary {
            tagger: tagger_report,
            ..Default::default()
        };
        let parser = match cfg.system {
            System::Labels(scheme) => {
                let (labels, deprels) = label_instances(&trees, scheme, k);
                let (main, main_report) = train(&labels, cfg.epochs, cfg.seed)?;
                let (rels, rel_report) = train(&deprels, cfg.epochs, cfg.seed)?;
                summary.main = main_report;
                summary.deprels = Some(rel_report);
                Parser::assemble(cfg.system, k, tagger, main, Some(rels))
            }
            System::ArcEager => {
                let (main, main_report) =
                    train(&transition_instances(&trees, k), cfg.epochs, cfg.seed)?;
                summary.main = main_report;
                Parser::assemble(cfg.system, k, tagger, main, None)
            }
        };
        Ok((parser, summary))
    }

    /// Parse the forms of `input` (and its tags with `gold_pos`); heads and
    /// relations in `input` are ignored.
    pub fn parse(&self, input: &DepTree, gold_pos: bool) -> Result<ParseOutput, Error> {
        if input.is_empty() {
            return Err(crate::error::TransitionError::EmptySentence.into());
        }
        if gold_pos
            && input
                .tokens
                .iter()
                .any(|t| t.upos.is_empty() || t.upos == "_")
        {
            return Err(ModelError::MissingPos.into());
        }
        match self.system {
            System::Labels(scheme) => self.parse_labels(input, scheme, gold_pos),
            System::ArcEager => self.parse_transitions(input, gold_pos),
        }
    }

    fn tag(&self, forms: &[String], tags: &[String], j: usize) -> Result<String, Error> {
        let view = SentenceView::new(forms, tags);
        let hist = History {
            prev: prev_two(tags),
            state: Vec::new(),
        };
        let fv = extract_features_pos(&view, j, self.delay, &hist);
        Ok(self.tagger.predict(fv.as_slice(), None)?.to_string())
    }

    fn parse_labels(
        &self,
        input: &DepTree,
        scheme: Scheme,
        gold_pos: bool,
    ) -> Result<ParseOutput, Error> {
        let n = input.len();
        let k = self.delay;
        let forms = forms_of(input);
        let deprel_model = self
            .deprels
            .as_ref()
            .ok_or_else(|| ModelError::Format("label parser without a relation model".into()))?;
        let mut rec = TraceRecorder::new(n, k);
        let mut decoder = IncrementalDecoder::new(scheme);
        let mut tags: Vec<String> = Vec::with_capacity(n);
        let mut labels: Vec<String> = Vec::with_capacity(n);
        let mut deprels: Vec<String> = Vec::with_capacity(n);
        let mut steps = Vec::with_capacity(n);
        for i in 1..=n {
            let upto = (i + k).min(n);
            rec.access(i, upto)?;
            let visible = &forms[..upto];
            let tag = if gold_pos {
                input.tokens[i - 1].upos.clone()
            } else {
                self.tag(visible, &tags, i)?
            };
            tags.push(tag.clone());
            let view = SentenceView::new(visible, &tags);
            let hist = History {
                prev: prev_two(&labels),
                state: decoder_state(&decoder, i),
            };
            let fv = extract_features_sl(&view, i, k, &hist);
            let label_text = self.main.predict(fv.as_slice(), None)?.to_string();
            let label = Label::parse(&label_text, scheme, i)?;
            let rel_fv = extract_features_deprel(&view, i, k, &label_text);
            let rel = deprel_model.predict(rel_fv.as_slice(), None)?.to_string();
            rec.commit(decoder.push(&label, &tag));
            steps.push(Step {
                horizon: upto,
                output: format!("{tag} {label_text} {rel}"),
            });
            labels.push(label_text);
            deprels.push(rel);
        }
        let heads = repair(decoder.finish());
        let tokens = (0..n)
            .map(|idx| {
                let rel = if heads[idx] == 0 {
                    "root"
                } else {
                    deprels[idx].as_str()
                };
                Token::new(
                    idx + 1,
                    forms[idx].clone(),
                    tags[idx].clone(),
                    heads[idx],
                    rel,
                )
            })
            .collect();
        let tree = DepTree {
            tokens,
            sentence_id: input.sentence_id.clone(),
            comments: input.comments.clone(),
        };
        let trace = rec.finish(&tree);
        Ok(ParseOutput { tree, trace, steps })
    }

    fn parse_transitions(&self, input: &DepTree, gold_pos: bool) -> Result<ParseOutput, Error> {
        let n = input.len();
        let k = self.delay;
        let forms = forms_of(input);
        let mut rec = TraceRecorder::new(n, k);
        let mut tags: Vec<String> = Vec::with_capacity(n);
        let mut c = initial_config(n)?;
        let mut last: Option<String> = None;
        let mut steps = Vec::new();
        while let Some(b) = c.buffer_head() {
            let upto = (b + k).min(n);
            rec.access(b, upto)?;
            let visible = &forms[..upto];
            while tags.len() < b {
                let j = tags.len() + 1;
                let tag = if gold_pos {
                    input.tokens[j - 1].upos.clone()
                } else {
                    self.tag(&visible[..(j + k).min(n)], &tags, j)?
                };
                tags.push(tag);
            }
            let view = SentenceView::new(visible, &tags);
            let fv = extract_features_tb(&view, &c, k, last.as_deref());
            let code = legality_code(&c);
            let t = match self
                .main
                .predict(fv.as_slice(), Some(&self.masks[code as usize]))
            {
                Ok(name) => Transition::from_str(name)?,
                Err(ModelError::NoLegalClass) => fallback(code),
                Err(e) => return Err(e.into()),
            };
            let before = c.arcs_in_order().len();
            c = apply_transition(&c, &t)?;
            rec.commit(c.arcs_in_order()[before..].iter().copied());
            let name = t.to_string();
            steps.push(Step {
                horizon: upto,
                output: name.clone(),
            });
            last = Some(name);
        }
        let template = DepTree {
            tokens: (0..n)
                .map(|idx| Token::new(idx + 1, forms[idx].clone(), tags[idx].clone(), 0, "root"))
                .collect(),
            sentence_id: input.sentence_id.clone(),
            comments: input.comments.clone(),
        };
        let (tree, _) = finalize(&c, &template);
        let trace = rec.finish(&tree);
        Ok(ParseOutput { tree, trace, steps })
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC} {VERSION}")?;
        writeln!(out, "system {}", self.system)?;
        writeln!(out, "delay {}", self.delay)?;
        self.tagger.write(&mut out)?;
        self.main.write(&mut out)?;
        if let Some(d) = &self.deprels {
            d.write(&mut out)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(mut input: R) -> Result<Parser, Error> {
        let mut line = String::new();
        let mut header = Vec::new();
        for _ in 0..3 {
            line.clear();
            input.read_line(&mut line).map_err(ModelError::Io)?;
            header.push(line.trim_end().to_string());
        }
        let format_err = |m: String| Error::from(ModelError::Format(m));
        if header[0] != format!("{MAGIC} {VERSION}") {
            return Err(format_err(format!("not a parser file: {:?}", header[0])));
        }
        let system: System = header[1]
            .strip_prefix("system ")
            .ok_or_else(|| format_err(format!("expected system, found {:?}", header[1])))?
            .parse()?;
        let delay: usize = header[2]
            .strip_prefix("delay ")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| format_err(format!("expected delay, found {:?}", header[2])))?;
        let expect = |m: &Model, task: &str| -> Result<(), Error> {
            if m.task != task {
                return Err(ModelError::TaskMismatch {
                    expected: task.to_string(),
                    found: m.task.clone(),
                }
                .into());
            }
            if m.delay != delay {
                return Err(format_err(format!(
                    "{} model has delay {}, parser has {delay}",
                    m.task, m.delay
                )));
            }
            Ok(())
        };
        let tagger = Model::read(&mut input)?;
        expect(&tagger, "pos")?;
        let main = Model::read(&mut input)?;
        let deprels = match system {
            System::Labels(s) => {
                expect(&main, &format!("labels:{}", s.name()))?;
                let d = Model::read(&mut input)?;
                expect(&d, &format!("deprels:{}", s.name()))?;
                Some(d)
            }
            System::ArcEager => {
                expect(&main, "transitions")?;
                None
            }
        };
        Ok(Parser::assemble(system, delay, tagger, main, deprels))
    }
}

/// A legal transition when the model knows none: shift, else reduce, else
/// attach.
fn fallback(code: u8) -> Transition {
    if code & 1 != 0 {
        Transition::Shift
    } else if code & 8 != 0 {
        Transition::Reduce
    } else {
        Transition::RightArc("dep".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incrementality::{check_delay, check_monotonic};
    use crate::synth::synthetic_treebank;

    fn sentence() -> DepTree {
        let mut t = DepTree::from_heads_and_tags(
            &[2, 0, 4, 2, 2],
            &["PRON", "VERB", "DET", "NOUN", "PUNCT"],
        );
        for (tok, (f, r)) in t.tokens.iter_mut().zip([
            ("She", "nsubj"),
            ("reads", "root"),
            ("a", "det"),
            ("book", "obj"),
            (".", "punct"),
        ]) {
            tok.form = f.into();
            tok.deprel = r.into();
        }
        t
    }

    #[test]
    fn memorizes_a_single_sentence() {
        let gold = sentence();
        for system in System::all() {
            for k in 0..=2 {
                let cfg = TrainConfig::new(system, k);
                let (parser, _) = Parser::train(std::slice::from_ref(&gold), &cfg).unwrap();
                let out = parser.parse(&gold, false).unwrap();
                assert_eq!(out.tree, gold, "{system} k={k}");
                assert_eq!(out.trace.n, 5);
            }
        }
    }

    #[test]
    fn round_trips_through_text_and_is_deterministic() {
        let trees = synthetic_treebank(4, 40);
        for system in [System::Labels(Scheme::Bracket2P), System::ArcEager] {
            let cfg = TrainConfig::new(system, 1);
            let (a, _) = Parser::train(&trees, &cfg).unwrap();
            let (b, _) = Parser::train(&trees, &cfg).unwrap();
            let mut ba = Vec::new();
            let mut bb = Vec::new();
            a.write(&mut ba).unwrap();
            b.write(&mut bb).unwrap();
            assert_eq!(ba, bb);
            let back = Parser::read(ba.as_slice()).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn traced_parses_are_valid_and_arc_eager_is_monotone() {
        let trees = synthetic_treebank(5, 60);
        for k in 0..=2 {
            let (parser, _) =
                Parser::train(&trees[..40], &TrainConfig::new(System::ArcEager, k)).unwrap();
            for t in &trees[40..] {
                let out = parser.parse(t, false).unwrap();
                out.tree.validate().unwrap();
                assert!(check_monotonic(&out.trace).passed());
                assert!(check_delay(&out.trace, k).passed());
            }
        }
    }

    #[test]
    fn gold_pos_requires_tags() {
        let gold = sentence();
        let (parser, _) = Parser::train(
            std::slice::from_ref(&gold),
            &TrainConfig::new(System::ArcEager, 0),
        )
        .unwrap();
        let mut untagged = gold.clone();
        untagged.tokens[2].upos = "_".into();
        assert!(matches!(
            parser.parse(&untagged, true),
            Err(Error::Model(ModelError::MissingPos))
        ));
        assert!(parser.parse(&untagged, false).is_ok());
    }

    #[test]
    fn wrong_model_file_is_rejected() {
        let gold = sentence();
        let (parser, _) = Parser::train(
            std::slice::from_ref(&gold),
            &TrainConfig::new(System::Labels(Scheme::RelIdx), 0),
        )
        .unwrap();
        let mut bytes = Vec::new();
        parser.write(&mut bytes).unwrap();
        let text = String::from_utf8(bytes)
            .unwrap()
            .replacen("system rel", "system abs", 1);
        assert!(matches!(
            Parser::read(text.as_bytes()),
            Err(Error::Model(ModelError::TaskMismatch { .. }))
        ));
    }
}
