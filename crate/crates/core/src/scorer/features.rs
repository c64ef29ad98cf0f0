//! Hashed sparse features under the left-to-right contract.
//!
//! An extractor deciding position `i` with delay `k` only looks at tokens
//! `i-3 ..= i+k`. Tags are only read at positions `<= i`; lookahead tokens
//! contribute form, suffix and shape only.

use std::hash::Hasher;

use fnv::FnvHasher;

use crate::transition::Configuration;

const BOUNDARY: &str = "<s>";
const ROOT: &str = "<root>";
const LEFT_CONTEXT: isize = 3;

/// Sorted, deduplicated feature hashes; every feature has value 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureVector(Vec<u64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }
}

/// Collects features as (template, values) pairs.
#[derive(Default)]
struct Builder(Vec<u64>);

impl Builder {
    fn add(&mut self, template: u8, parts: &[&str]) {
        let mut h = FnvHasher::default();
        h.write_u8(template);
        for p in parts {
            h.write(p.as_bytes());
            h.write_u8(0xff);
        }
        self.0.push(h.finish());
    }

    fn finish(mut self) -> FeatureVector {
        self.0.sort_unstable();
        self.0.dedup();
        FeatureVector(self.0)
    }
}

/// The tokens a predictor may look at. `forms` may be a prefix of the
/// sentence; positions past its end read as a boundary. `upos` holds the
/// tags known so far (gold or already predicted).
#[derive(Clone, Copy, Debug)]
pub struct SentenceView<'a> {
    pub forms: &'a [String],
    pub upos: &'a [String],
}

impl<'a> SentenceView<'a> {
    pub fn new(forms: &'a [String], upos: &'a [String]) -> Self {
        SentenceView { forms, upos }
    }

    fn form(&self, j: isize) -> &'a str {
        if j < 1 {
            return BOUNDARY;
        }
        self.forms
            .get(j as usize - 1)
            .map_or(BOUNDARY, |s| s.as_str())
    }

    fn tag(&self, j: isize) -> &'a str {
        if j < 1 {
            return BOUNDARY;
        }
        self.upos
            .get(j as usize - 1)
            .map_or(BOUNDARY, |s| s.as_str())
    }
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn suffix(s: &str, len: usize) -> String {
    let chars: Vec<char> = s.chars().collect();
    let start = chars.len().saturating_sub(len);
    chars[start..].iter().collect::<String>().to_lowercase()
}

fn shape(s: &str) -> &'static str {
    let first = s.chars().next();
    match first {
        None => "empty",
        Some(_) if s == BOUNDARY => "boundary",
        Some(c) if c.is_uppercase() => "upper",
        Some(c) if c.is_numeric() => "digit",
        Some(c) if c.is_alphabetic() => "lower",
        Some(_) => "punct",
    }
}

/// Previous predictions available at position `i`.
#[derive(Clone, Debug, Default)]
pub struct History<'a> {
    /// Outputs for positions `i-1` and `i-2`, if any.
    pub prev: [Option<&'a str>; 2],
    /// Extra state strings (for instance decoder state).
    pub state: Vec<String>,
}

/// Lexical window features shared by taggers and labelers.
fn window(b: &mut Builder, view: &SentenceView, i: usize, k: usize, with_tags: bool) {
    let i = i as isize;
    let k = k as isize;
    b.add(0, &["bias"]);
    for o in -LEFT_CONTEXT..=k {
        let form = view.form(i + o);
        let os = o.to_string();
        b.add(1, &[&os, &lower(form)]);
        if o.abs() <= 2 {
            b.add(2, &[&os, &suffix(form, 3)]);
            b.add(3, &[&os, shape(form)]);
        }
        if with_tags && o <= 0 {
            b.add(4, &[&os, view.tag(i + o)]);
        }
    }
    let f0 = lower(view.form(i));
    b.add(5, &[&suffix(&f0, 2)]);
    b.add(6, &[&f0, &lower(view.form(i - 1))]);
    if k >= 1 {
        let f1 = lower(view.form(i + 1));
        b.add(7, &[&f0, &f1]);
        b.add(8, &[&suffix(&f1, 3), &suffix(&f0, 3)]);
        if with_tags {
            b.add(9, &[view.tag(i), &f1]);
            b.add(10, &[view.tag(i), &suffix(&f1, 3)]);
        }
    }
    if k >= 2 {
        let s1 = suffix(view.form(i + 1), 3);
        let s2 = suffix(view.form(i + 2), 3);
        b.add(11, &[&s1, &s2]);
        if with_tags {
            b.add(12, &[view.tag(i), &s1, &s2]);
        }
    }
    if with_tags {
        b.add(13, &[view.tag(i - 1), view.tag(i)]);
        b.add(14, &[view.tag(i - 2), view.tag(i - 1), view.tag(i)]);
    }
}

fn history(b: &mut Builder, h: &History, anchor: &str) {
    let p1 = h.prev[0].unwrap_or(BOUNDARY);
    let p2 = h.prev[1].unwrap_or(BOUNDARY);
    b.add(20, &[p1]);
    b.add(21, &[p1, p2]);
    b.add(22, &[p1, anchor]);
    for s in &h.state {
        b.add(23, &[s]);
        b.add(24, &[s, anchor]);
    }
}

/// Features for predicting the label of token `i` (1-based) with delay `k`.
pub fn extract_features_sl(
    view: &SentenceView,
    i: usize,
    k: usize,
    hist: &History,
) -> FeatureVector {
    let mut b = Builder::default();
    window(&mut b, view, i, k, true);
    let tag = view.tag(i as isize);
    history(&mut b, hist, tag);
    // decoder state against what comes next
    let p1 = hist.prev[0].unwrap_or(BOUNDARY);
    let right: Vec<String> = (1..=k.min(2) as isize)
        .map(|o| suffix(view.form(i as isize + o), 3))
        .collect();
    for s in &hist.state {
        b.add(25, &[s, tag, p1]);
        if let Some(r1) = right.first() {
            b.add(26, &[s, tag, r1]);
        }
        if let [r1, r2] = right.as_slice() {
            b.add(27, &[s, tag, r1, r2]);
        }
    }
    b.finish()
}

/// Features for tagging token `i`; `hist.prev` holds the previous tags.
pub fn extract_features_pos(
    view: &SentenceView,
    i: usize,
    k: usize,
    hist: &History,
) -> FeatureVector {
    let mut b = Builder::default();
    window(&mut b, view, i, k, false);
    history(&mut b, hist, &suffix(view.form(i as isize), 3));
    b.finish()
}

/// Features for the relation of token `i` once its label is known.
pub fn extract_features_deprel(
    view: &SentenceView,
    i: usize,
    k: usize,
    label: &str,
) -> FeatureVector {
    let mut b = Builder::default();
    window(&mut b, view, i, k, true);
    let f0 = lower(view.form(i as isize));
    b.add(30, &[label]);
    b.add(31, &[label, view.tag(i as isize)]);
    b.add(32, &[label, &f0]);
    b.add(33, &[label, view.tag(i as isize - 1), view.tag(i as isize)]);
    b.finish()
}

/// Features for the next transition from `c`: first stack word, first buffer
/// word, forms of the next `k` buffer words and relations already built.
pub fn extract_features_tb(
    view: &SentenceView,
    c: &Configuration,
    k: usize,
    last: Option<&str>,
) -> FeatureVector {
    let mut b = Builder::default();
    b.add(0, &["bias"]);
    let s0 = c.stack_top();
    let (s0f, s0p) = match s0 {
        None => (BOUNDARY.to_string(), BOUNDARY),
        Some(0) => (ROOT.to_string(), ROOT),
        Some(s) => (lower(view.form(s as isize)), view.tag(s as isize)),
    };
    let b0 = c.buffer_head();
    let (b0f, b0p) = match b0 {
        None => (BOUNDARY.to_string(), BOUNDARY),
        Some(j) => (lower(view.form(j as isize)), view.tag(j as isize)),
    };
    b.add(40, &[&s0f]);
    b.add(41, &[s0p]);
    b.add(42, &[&s0f, s0p]);
    b.add(43, &[&b0f]);
    b.add(44, &[b0p]);
    b.add(45, &[&b0f, b0p]);
    b.add(46, &[s0p, b0p]);
    b.add(47, &[&s0f, b0p]);
    b.add(48, &[s0p, &b0f]);
    b.add(49, &[&suffix(&b0f, 3), s0p]);

    let rel_of = |node: Option<usize>| -> &str { node.and_then(|n| c.deprel_of(n)).unwrap_or("-") };
    let s0_rel = match s0 {
        Some(s) if s > 0 => rel_of(Some(s)),
        _ => "-",
    };
    b.add(50, &[s0_rel]);
    b.add(51, &[s0_rel, s0p, b0p]);
    if let Some(s) = s0 {
        let deps: Vec<usize> = c.dependents(s).collect();
        let left = deps.iter().copied().find(|&d| d < s);
        let right = deps.iter().copied().rfind(|&d| d > s);
        b.add(52, &[rel_of(left), s0p]);
        b.add(53, &[rel_of(right), s0p, b0p]);
        b.add(54, &[&deps.len().min(4).to_string(), s0p]);
    }
    if let Some(j) = b0 {
        let left = c.dependents(j).next();
        b.add(55, &[rel_of(left), b0p]);
    }
    if let (Some(s), Some(j)) = (s0, b0) {
        let dist = (j - s).min(6).to_string();
        b.add(56, &[&dist]);
        b.add(57, &[&dist, s0p, b0p]);
    }
    let root_taken = c.dependents(0).next().is_some();
    b.add(
        58,
        &[if root_taken { "root-set" } else { "root-free" }, s0p, b0p],
    );
    let last = last.unwrap_or(BOUNDARY);
    b.add(59, &[last]);
    b.add(60, &[last, b0p]);

    if let Some(j) = b0 {
        for o in 1..=k {
            let pos = (j + o) as isize;
            let form = view.form(pos);
            let os = o.to_string();
            b.add(61, &[&os, &lower(form)]);
            b.add(62, &[&os, &suffix(form, 3)]);
            b.add(63, &[&os, shape(form)]);
            b.add(64, &[&os, &suffix(form, 3), b0p]);
            b.add(65, &[&os, &suffix(form, 3), s0p, b0p]);
        }
    }
    b.finish()
}
