//! Tree enumeration, random trees and a small synthetic treebank.
//!
//! The synthetic treebank comes from a toy English-like grammar with
//! left-attached determiners and modifiers, prepositional attachment
//! ambiguity, complement and relative clauses, coordination and an
//! occasional extraposed (non-projective) relative clause. It stands in for a
//! real treebank when none is available.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tree::{find_cycle, DepTree, Token};

const TAGS: [&str; 5] = ["NOUN", "VERB", "DET", "ADJ", "ADP"];

/// Every head vector of length `n` that forms a tree with exactly one root.
pub fn all_trees(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut heads = vec![0usize; n];
    loop {
        let roots = heads.iter().filter(|&&h| h == 0).count();
        let no_self = heads.iter().enumerate().all(|(i, &h)| h != i + 1);
        if roots == 1 && no_self && find_cycle(&heads).is_none() {
            out.push(heads.clone());
        }
        // odometer over [0, n]^n
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            heads[pos] += 1;
            if heads[pos] <= n {
                break;
            }
            heads[pos] = 0;
            pos += 1;
        }
    }
}

/// Random single-rooted tree over `n` tokens (possibly non-projective).
pub fn random_heads<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n];
    for j in 1..n {
        heads[order[j] - 1] = order[rng.gen_range(0..j)];
    }
    heads
}

/// Random projective single-rooted tree over `n` tokens.
pub fn random_projective_heads<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut heads = vec![0; n];
    if n == 0 {
        return heads;
    }
    let root = rng.gen_range(1..=n);
    fill_span(rng, &mut heads, 1, root - 1, root);
    fill_span(rng, &mut heads, root + 1, n, root);
    heads
}

/// Attach the tokens `a..=b` (all on one side of `head`) below `head`
/// without crossing arcs.
fn fill_span<R: Rng>(rng: &mut R, heads: &mut [usize], a: usize, b: usize, head: usize) {
    if a > b || a == 0 {
        return;
    }
    let c = rng.gen_range(a..=b);
    heads[c - 1] = head;
    // the side away from `head` hangs below c; the side between c and `head`
    // attaches to either
    let (outer, inner) = if c < head {
        ((a, c.saturating_sub(1)), (c + 1, b))
    } else {
        ((c + 1, b), (a, c - 1))
    };
    fill_span(rng, heads, outer.0, outer.1, c);
    let inner_head = if rng.gen_bool(0.5) { c } else { head };
    fill_span(rng, heads, inner.0, inner.1, inner_head);
}

/// Random tags from a small tag set, so PoS-based labels see repeated tags.
pub fn random_tags<R: Rng>(rng: &mut R, n: usize) -> Vec<&'static str> {
    (0..n).map(|_| TAGS[rng.gen_range(0..TAGS.len())]).collect()
}

/// A tree over `heads` with random tags and relations derived from the tags.
pub fn tree_with_random_tags<R: Rng>(rng: &mut R, heads: &[usize]) -> DepTree {
    let tags = random_tags(rng, heads.len());
    let mut tree = DepTree::from_heads_and_tags(heads, &tags);
    for tok in &mut tree.tokens {
        if tok.head != 0 {
            tok.deprel = format!("{}-dep", tok.upos.to_lowercase());
        }
    }
    tree
}

struct Lexicon {
    nouns: Vec<String>,
    verbs: Vec<String>,
    adjs: Vec<String>,
    advs: Vec<String>,
    propns: Vec<String>,
}

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ren", "to", "sa", "bel", "dor", "fi", "gan", "hu", "jel", "mor", "ni", "pa",
    "qua", "ros", "sil", "tav", "ul", "ve", "wen", "yor", "zi",
];

fn make_words(rng: &mut ChaCha8Rng, count: usize, suffixes: &[&str]) -> Vec<String> {
    let mut words = Vec::with_capacity(count);
    while words.len() < count {
        let syllables = rng.gen_range(1..=3);
        let mut w: String = (0..syllables)
            .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
            .collect();
        w.push_str(suffixes[rng.gen_range(0..suffixes.len())]);
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

impl Lexicon {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut nouns = make_words(rng, 400, &["", "s", "er", "ion", "ity"]);
        let verbs = make_words(rng, 200, &["ed", "es", "s", "ize", ""]);
        // a few noun/verb homographs
        nouns.extend(verbs.iter().take(25).cloned());
        Lexicon {
            nouns,
            verbs,
            adjs: make_words(rng, 120, &["ous", "ful", "ic", "al", ""]),
            advs: make_words(rng, 50, &["ly"]),
            propns: make_words(rng, 80, &[""])
                .into_iter()
                .map(|w| {
                    let mut c = w.chars();
                    match c.next() {
                        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
                        None => w,
                    }
                })
                .collect(),
        }
    }
}

const DETS: [&str; 6] = ["the", "a", "this", "every", "some", "no"];
const ADPS: [&str; 9] = ["in", "on", "with", "of", "from", "to", "at", "by", "for"];
const PRONS: [&str; 6] = ["he", "she", "they", "it", "we", "you"];
const AUXS: [&str; 5] = ["will", "can", "must", "has", "did"];
const CCONJS: [&str; 3] = ["and", "or", "but"];

/// Sentence under construction: tokens in surface order with heads as
/// builder indices (`None` for the root).
struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    lex: &'a Lexicon,
    forms: Vec<String>,
    upos: Vec<&'static str>,
    heads: Vec<Option<usize>>,
    deprels: Vec<&'static str>,
}

impl Builder<'_> {
    fn push(&mut self, form: impl Into<String>, upos: &'static str) -> usize {
        self.forms.push(form.into());
        self.upos.push(upos);
        self.heads.push(None);
        self.deprels.push("root");
        self.forms.len() - 1
    }

    fn attach(&mut self, dependent: usize, head: usize, rel: &'static str) {
        self.heads[dependent] = Some(head);
        self.deprels[dependent] = rel;
    }

    fn pick<'s>(&mut self, words: &'s [String]) -> &'s str {
        &words[self.rng.gen_range(0..words.len())]
    }

    fn pick_static(&mut self, words: &[&'static str]) -> &'static str {
        words[self.rng.gen_range(0..words.len())]
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Noun phrase; returns the head noun.
    fn noun_phrase(&mut self, depth: usize, allow_relative: bool) -> usize {
        let lex = self.lex;
        if self.chance(0.12) {
            let w = self.pick(&lex.propns).to_string();
            return self.push(w, "PROPN");
        }
        let mut left = Vec::new();
        if self.chance(0.75) {
            let d = self.pick_static(&DETS);
            left.push((self.push(d, "DET"), "det"));
        }
        if self.chance(0.1) {
            let num = self.rng.gen_range(2..100).to_string();
            left.push((self.push(num, "NUM"), "nummod"));
        }
        while left.len() < 4 && self.chance(0.3) {
            if self.chance(0.2) {
                let a = self.pick(&lex.advs).to_string();
                let adv = self.push(a, "ADV");
                let w = self.pick(&lex.adjs).to_string();
                let adj = self.push(w, "ADJ");
                self.attach(adv, adj, "advmod");
                left.push((adj, "amod"));
            } else {
                let w = self.pick(&lex.adjs).to_string();
                left.push((self.push(w, "ADJ"), "amod"));
            }
        }
        if self.chance(0.1) {
            let w = self.pick(&lex.nouns).to_string();
            left.push((self.push(w, "NOUN"), "compound"));
        }
        let w = self.pick(&lex.nouns).to_string();
        let noun = self.push(w, "NOUN");
        for (dep, rel) in left {
            self.attach(dep, noun, rel);
        }
        if depth < 2 && self.chance(0.18) {
            let pp = self.prep_phrase(depth + 1, true);
            self.attach(pp, noun, "nmod");
        }
        if allow_relative && depth < 2 && self.chance(0.1) {
            let rel = self.relative_clause(depth + 1);
            self.attach(rel, noun, "acl:relcl");
        }
        noun
    }

    /// `ADP NP`; returns the noun, with the preposition attached to it.
    fn prep_phrase(&mut self, depth: usize, nominal: bool) -> usize {
        let adp = if nominal && self.chance(0.5) {
            "of"
        } else {
            self.pick_static(&ADPS[..])
        };
        let case = self.push(adp, "ADP");
        let noun = self.noun_phrase(depth, false);
        self.attach(case, noun, "case");
        noun
    }

    /// `that VERB NP`; returns the verb.
    fn relative_clause(&mut self, depth: usize) -> usize {
        let lex = self.lex;
        let that = self.push("that", "PRON");
        let w = self.pick(&lex.verbs).to_string();
        let verb = self.push(w, "VERB");
        self.attach(that, verb, "nsubj");
        if self.chance(0.7) {
            let obj = self.noun_phrase(depth + 1, false);
            self.attach(obj, verb, "obj");
        }
        verb
    }

    /// Subject, optional auxiliary and adverb, verb, complements.
    fn clause(&mut self, depth: usize) -> usize {
        let lex = self.lex;
        let extrapose = depth == 0 && self.chance(0.06);
        let subj = if self.chance(0.3) {
            let p = self.pick_static(&PRONS);
            self.push(p, "PRON")
        } else {
            self.noun_phrase(depth + 1, !extrapose)
        };
        let aux = if self.chance(0.3) {
            let a = self.pick_static(&AUXS);
            Some(self.push(a, "AUX"))
        } else {
            None
        };
        let adv = if self.chance(0.15) {
            let a = self.pick(&lex.advs).to_string();
            Some(self.push(a, "ADV"))
        } else {
            None
        };
        let w = self.pick(&lex.verbs).to_string();
        let verb = self.push(w, "VERB");
        self.attach(subj, verb, "nsubj");
        if let Some(a) = aux {
            self.attach(a, verb, "aux");
        }
        if let Some(a) = adv {
            self.attach(a, verb, "advmod");
        }
        if self.chance(0.65) {
            let obj = self.noun_phrase(depth + 1, true);
            self.attach(obj, verb, "obj");
        }
        let mut pps = 0;
        while pps < 2 && self.chance(0.35) {
            let pp = self.prep_phrase(depth + 1, false);
            self.attach(pp, verb, "obl");
            pps += 1;
        }
        if depth < 1 && self.chance(0.12) {
            let mark = self.push("that", "SCONJ");
            let inner = self.clause(depth + 1);
            self.attach(mark, inner, "mark");
            self.attach(inner, verb, "ccomp");
        }
        if self.chance(0.15) {
            let a = self.pick(&lex.advs).to_string();
            let adv = self.push(a, "ADV");
            self.attach(adv, verb, "advmod");
        }
        if extrapose && self.upos[subj] == "NOUN" {
            let rel = self.relative_clause(depth + 1);
            self.attach(rel, subj, "acl:relcl");
        }
        verb
    }

    fn sentence(&mut self) -> usize {
        let root = self.clause(0);
        if self.chance(0.15) {
            let comma = self.push(",", "PUNCT");
            let c = self.pick_static(&CCONJS);
            let cc = self.push(c, "CCONJ");
            let second = self.clause(1);
            self.attach(comma, second, "punct");
            self.attach(cc, second, "cc");
            self.attach(second, root, "conj");
        }
        let p = if self.chance(0.9) { "." } else { "!" };
        let punct = self.push(p, "PUNCT");
        self.attach(punct, root, "punct");
        root
    }
}

/// `count` sentences from the toy grammar. Same seed, same treebank.
pub fn synthetic_treebank(seed: u64, count: usize) -> Vec<DepTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = Lexicon::new(&mut rng);
    let mut trees = Vec::with_capacity(count);
    while trees.len() < count {
        let mut b = Builder {
            rng: &mut rng,
            lex: &lex,
            forms: Vec::new(),
            upos: Vec::new(),
            heads: Vec::new(),
            deprels: Vec::new(),
        };
        let root = b.sentence();
        if b.forms.len() > 60 {
            continue;
        }
        let tokens = (0..b.forms.len())
            .map(|i| {
                let head = if i == root {
                    0
                } else {
                    b.heads[i].expect("every non-root token is attached") + 1
                };
                Token::new(i + 1, b.forms[i].clone(), b.upos[i], head, b.deprels[i])
            })
            .collect();
        let mut tree = DepTree::new(tokens);
        let id = format!("synth-{}", trees.len() + 1);
        tree.comments.push(format!("# sent_id = {id}"));
        tree.sentence_id = Some(id);
        trees.push(tree);
    }
    trees
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::is_projective;

    #[test]
    fn tree_counts() {
        // single-rooted trees over n labeled nodes: n^(n-1)
        for n in 1..=5 {
            assert_eq!(all_trees(n).len(), n.pow(n as u32 - 1), "n = {n}");
        }
    }

    #[test]
    fn random_trees_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..30 {
            let t = DepTree::from_heads(&random_heads(&mut rng, n));
            t.validate().unwrap();
            let p = DepTree::from_heads(&random_projective_heads(&mut rng, n));
            p.validate().unwrap();
            assert!(is_projective(&p));
        }
    }

    #[test]
    fn synthetic_treebank_is_valid_and_seeded() {
        let a = synthetic_treebank(9, 300);
        assert_eq!(a, synthetic_treebank(9, 300));
        for t in &a {
            t.validate().unwrap();
        }
        let nonprojective = a.iter().filter(|t| !is_projective(t)).count();
        assert!(nonprojective > 0 && nonprojective < 60, "{nonprojective}");
    }
}
