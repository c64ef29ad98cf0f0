//! Averaged multiclass perceptron over hashed binary features.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use fnv::FnvHashMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;

const MAGIC: &str = "increparse-model";
const VERSION: u32 = 1;

/// One training example.
#[derive(Clone, Debug)]
pub struct Instance {
    pub features: Vec<u64>,
    pub gold: String,
    /// Opaque legality code handed to [`TrainingSet::legality`]; 0 when
    /// unused.
    pub legal: u8,
}

/// Instances for a single prediction task at a single delay.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    pub task: String,
    pub delay: usize,
    pub instances: Vec<Instance>,
    /// Which classes are admissible for a legality code. `None` admits all.
    pub legality: Option<fn(u8, &str) -> bool>,
}

impl TrainingSet {
    pub fn new(task: impl Into<String>, delay: usize) -> Self {
        TrainingSet {
            task: task.into(),
            delay,
            instances: Vec::new(),
            legality: None,
        }
    }

    /// Append the instances of `other`, which must be for the same task and
    /// delay.
    pub fn extend(&mut self, other: TrainingSet) -> Result<(), ModelError> {
        if other.task != self.task || other.delay != self.delay {
            return Err(ModelError::MixedTasks(
                format!("{} (delay {})", self.task, self.delay),
                format!("{} (delay {})", other.task, other.delay),
            ));
        }
        self.instances.extend(other.instances);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Cell {
    weight: f64,
    total: f64,
    stamp: u64,
}

impl Cell {
    fn update(&mut self, delta: f64, now: u64) {
        self.total += (now - self.stamp) as f64 * self.weight;
        self.stamp = now;
        self.weight += delta;
    }

    fn average(&self, now: u64) -> f64 {
        (self.total + (now - self.stamp) as f64 * self.weight) / now as f64
    }
}

/// Accuracy on the training data while each epoch was running.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_accuracy: Vec<f64>,
}

/// A trained classifier: averaged weights and a closed, sorted class list.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub task: String,
    pub delay: usize,
    classes: Vec<String>,
    /// feature -> (class index, weight), class indices ascending
    weights: FnvHashMap<u64, Vec<(u32, f32)>>,
}

/// Best admissible class; the first in class order wins ties.
fn argmax(scores: &[f64], mask: Option<&[bool]>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (c, &s) in scores.iter().enumerate() {
        if mask.is_some_and(|m| !m[c]) {
            continue;
        }
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(c);
        }
    }
    best
}

/// Train with the examples visited in a seeded shuffled order each epoch.
pub fn train(
    set: &TrainingSet,
    epochs: usize,
    seed: u64,
) -> Result<(Model, TrainReport), ModelError> {
    if set.instances.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let classes: Vec<String> = set
        .instances
        .iter()
        .map(|i| i.gold.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: FnvHashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let gold: Vec<usize> = set
        .instances
        .iter()
        .map(|i| index[i.gold.as_str()])
        .collect();

    // masks per legality code actually used
    let mut masks: FnvHashMap<u8, Vec<bool>> = FnvHashMap::default();
    if let Some(legal) = set.legality {
        for inst in &set.instances {
            masks
                .entry(inst.legal)
                .or_insert_with(|| classes.iter().map(|c| legal(inst.legal, c)).collect());
        }
    }

    let mut cells: FnvHashMap<u64, Vec<(u32, Cell)>> = FnvHashMap::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..set.instances.len()).collect();
    let mut now: u64 = 0;
    let mut report = TrainReport::default();

    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut correct = 0usize;
        for &idx in &order {
            now += 1;
            let inst = &set.instances[idx];
            let mut scores = vec![0.0; classes.len()];
            for f in &inst.features {
                if let Some(row) = cells.get(f) {
                    for (c, cell) in row {
                        scores[*c as usize] += cell.weight;
                    }
                }
            }
            let truth = gold[idx];
            // the strongest rival; a tie with it counts as a mistake
            let mut rival_mask: Vec<bool> = match masks.get(&inst.legal) {
                Some(m) => m.clone(),
                None => vec![true; classes.len()],
            };
            rival_mask[truth] = false;
            let Some(guess) = argmax(&scores, Some(&rival_mask)) else {
                correct += 1;
                continue;
            };
            if scores[truth] > scores[guess] {
                correct += 1;
                continue;
            }
            for &f in &inst.features {
                let row = cells.entry(f).or_default();
                for (class, delta) in [(truth, 1.0), (guess, -1.0)] {
                    let class = class as u32;
                    let pos = match row.binary_search_by_key(&class, |(c, _)| *c) {
                        Ok(p) => p,
                        Err(p) => {
                            row.insert(p, (class, Cell::default()));
                            p
                        }
                    };
                    row[pos].1.update(delta, now);
                }
            }
        }
        let acc = correct as f64 / order.len() as f64;
        log::info!(
            "{} epoch {}: training accuracy {:.4}",
            set.task,
            epoch + 1,
            acc
        );
        report.epoch_accuracy.push(acc);
    }

    let now = now.max(1);
    let mut weights: FnvHashMap<u64, Vec<(u32, f32)>> = FnvHashMap::default();
    for (f, row) in cells {
        let averaged: Vec<(u32, f32)> = row
            .iter()
            .map(|(c, cell)| (*c, cell.average(now) as f32))
            .filter(|(_, w)| *w != 0.0)
            .collect();
        if !averaged.is_empty() {
            weights.insert(f, averaged);
        }
    }
    Ok((
        Model {
            task: set.task.clone(),
            delay: set.delay,
            classes,
            weights,
        },
        report,
    ))
}

impl Model {
    /// A model with the given classes and no weights.
    pub fn untrained(task: impl Into<String>, delay: usize, classes: Vec<String>) -> Self {
        let mut classes = classes;
        classes.sort();
        classes.dedup();
        Model {
            task: task.into(),
            delay,
            classes,
            weights: FnvHashMap::default(),
        }
    }

    /// Set the weight of `(feature, class)`; unknown classes are ignored.
    pub fn set_weight(&mut self, feature: u64, class: &str, weight: f32) {
        let Some(c) = self.class_index(class) else {
            return;
        };
        let row = self.weights.entry(feature).or_default();
        match row.binary_search_by_key(&(c as u32), |(k, _)| *k) {
            Ok(p) => row[p].1 = weight,
            Err(p) => row.insert(p, (c as u32, weight)),
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(class))
            .ok()
    }

    /// Mask over the classes, true where `admit` holds.
    pub fn mask(&self, admit: impl Fn(&str) -> bool) -> Vec<bool> {
        self.classes.iter().map(|c| admit(c)).collect()
    }

    pub fn scores(&self, features: &[u64]) -> Vec<f64> {
        let mut scores = vec![0.0; self.classes.len()];
        for f in features {
            if let Some(row) = self.weights.get(f) {
                for &(c, w) in row {
                    scores[c as usize] += w as f64;
                }
            }
        }
        scores
    }

    /// Highest-scoring admissible class.
    pub fn predict(&self, features: &[u64], mask: Option<&[bool]>) -> Result<&str, ModelError> {
        let scores = self.scores(features);
        argmax(&scores, mask)
            .map(|c| self.classes[c].as_str())
            .ok_or(ModelError::NoLegalClass)
    }

    /// Text serialization; identical models give identical bytes.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC} {VERSION}")?;
        writeln!(out, "task {}", self.task)?;
        writeln!(out, "delay {}", self.delay)?;
        writeln!(out, "classes {}", self.classes.len())?;
        for c in &self.classes {
            writeln!(out, "{c}")?;
        }
        let mut features: Vec<&u64> = self.weights.keys().collect();
        features.sort_unstable();
        writeln!(out, "weights {}", features.len())?;
        for f in features {
            write!(out, "{f:016x}")?;
            for (c, w) in &self.weights[f] {
                write!(out, " {c}:{w}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "end")
    }

    /// Read a model written by [`Model::write`], leaving the lines after its
    /// `end` marker unread.
    pub fn read<R: BufRead>(input: &mut R) -> Result<Model, ModelError> {
        let mut line = String::new();
        let mut next = |what: &str| -> Result<String, ModelError> {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(ModelError::Format(format!(
                    "unexpected end of file, expected {what}"
                )));
            }
            Ok(line.trim_end_matches(['\n', '\r']).to_string())
        };
        let header = next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| ModelError::Format(format!("not a model file: {header:?}")))?;
        if version != VERSION.to_string() {
            return Err(ModelError::Format(format!("unsupported version {version}")));
        }
        let field = |line: String, key: &str| -> Result<String, ModelError> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| ModelError::Format(format!("expected {key}, found {line:?}")))
        };
        let count = |s: String| -> Result<usize, ModelError> {
            s.parse()
                .map_err(|_| ModelError::Format(format!("bad count {s:?}")))
        };
        let task = field(next("task")?, "task")?;
        let delay = count(field(next("delay")?, "delay")?)?;
        let n_classes = count(field(next("classes")?, "classes")?)?;
        let mut classes = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            classes.push(next("class")?);
        }
        let n_features = count(field(next("weights")?, "weights")?)?;
        let mut weights = FnvHashMap::default();
        for _ in 0..n_features {
            let row = next("weight row")?;
            let mut parts = row.split(' ');
            let bad = || ModelError::Format(format!("bad weight row {row:?}"));
            let f = u64::from_str_radix(parts.next().ok_or_else(bad)?, 16).map_err(|_| bad())?;
            let mut entries = Vec::new();
            for p in parts {
                let (c, w) = p.split_once(':').ok_or_else(bad)?;
                let c: u32 = c.parse().map_err(|_| bad())?;
                let w: f32 = w.parse().map_err(|_| bad())?;
                if c as usize >= classes.len() {
                    return Err(bad());
                }
                entries.push((c, w));
            }
            weights.insert(f, entries);
        }
        if next("end")? != "end" {
            return Err(ModelError::Format("missing end marker".into()));
        }
        Ok(Model {
            task,
            delay,
            classes,
            weights,
        })
    }
}
