//! First-order sequence labeler for parameter values.
//!
//! Averaged structured perceptron over BILOU tags with exact Viterbi decoding.
//! Tags are scoped per intent (`B-moveEvent.newDate`), and decoding for an
//! intent only considers `O` plus that intent's tags, so one model serves all
//! intents while sharing the `O` evidence between them.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tokenize::Token;

pub const EPOCHS: usize = 10;
pub const SHUFFLE_SEED: u64 = 42;

const OUTSIDE: &str = "O";
const START: &str = "<S>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Begin,
    Inside,
    Last,
    Unit,
}

/// A BILOU tag: `None` for outside, otherwise position + scoped label.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tag {
    pos: Option<Position>,
    label: String,
}

impl Tag {
    fn outside() -> Self {
        Tag {
            pos: None,
            label: String::new(),
        }
    }

    fn name(&self) -> String {
        match self.pos {
            None => OUTSIDE.to_string(),
            Some(Position::Begin) => format!("B-{}", self.label),
            Some(Position::Inside) => format!("I-{}", self.label),
            Some(Position::Last) => format!("L-{}", self.label),
            Some(Position::Unit) => format!("U-{}", self.label),
        }
    }

    /// Whether this tag closes any open entity.
    fn closes(&self) -> bool {
        matches!(self.pos, None | Some(Position::Last) | Some(Position::Unit))
    }
}

fn valid_transition(prev: Option<&Tag>, cur: &Tag) -> bool {
    match prev {
        None => matches!(cur.pos, None | Some(Position::Begin) | Some(Position::Unit)),
        Some(p) if p.closes() => matches!(cur.pos, None | Some(Position::Begin) | Some(Position::Unit)),
        Some(p) => matches!(cur.pos, Some(Position::Inside) | Some(Position::Last)) && cur.label == p.label,
    }
}

/// Scoped label for a parameter of an intent.
pub fn scoped_label(intent: &str, parameter: &str) -> String {
    format!("{intent}.{parameter}")
}

fn tag_set(labels: &[String]) -> Vec<Tag> {
    let mut tags = vec![Tag::outside()];
    for l in labels {
        for pos in [Position::Begin, Position::Inside, Position::Last, Position::Unit] {
            tags.push(Tag {
                pos: Some(pos),
                label: l.clone(),
            });
        }
    }
    tags
}

/// Emission features for every token of a sentence.
pub fn token_features(tokens: &[Token]) -> Vec<Vec<String>> {
    let lower: Vec<String> = tokens.iter().map(Token::lower).collect();
    (0..tokens.len())
        .map(|i| {
            let w = &lower[i];
            let chars: Vec<char> = w.chars().collect();
            let prefix: String = chars.iter().take(3).collect();
            let suffix: String = chars[chars.len().saturating_sub(3)..].iter().collect();
            let mut f = vec![format!("w={w}"), format!("p3={prefix}"), format!("s3={suffix}")];
            if !w.is_empty() && w.chars().all(|c| c.is_ascii_digit()) {
                f.push("digit".into());
            }
            if tokens[i].surface.chars().next().is_some_and(char::is_uppercase) {
                f.push("cap".into());
            }
            f.push(format!("w-1={}", if i == 0 { "<s>" } else { lower[i - 1].as_str() }));
            f.push(format!("w+1={}", lower.get(i + 1).map_or("</s>", String::as_str)));
            f
        })
        .collect()
}

/// Gold BILOU tag names for tokens given token-index spans `(first, last, label)`.
pub fn bilou_tags(n_tokens: usize, spans: &[(usize, usize, String)]) -> Vec<String> {
    let mut tags = vec![OUTSIDE.to_string(); n_tokens];
    for (first, last, label) in spans {
        if first == last {
            tags[*first] = format!("U-{label}");
        } else {
            tags[*first] = format!("B-{label}");
            for t in tags.iter_mut().take(*last).skip(first + 1) {
                *t = format!("I-{label}");
            }
            tags[*last] = format!("L-{label}");
        }
    }
    tags
}

/// Decoded entity as token indices `(first, last_inclusive, label)`.
pub type TokenSpan = (usize, usize, String);

fn spans_from_tags(tags: &[Tag]) -> Vec<TokenSpan> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, t) in tags.iter().enumerate() {
        match t.pos {
            Some(Position::Unit) => out.push((i, i, t.label.clone())),
            Some(Position::Begin) => open = Some(i),
            Some(Position::Last) => {
                if let Some(s) = open.take() {
                    out.push((s, i, t.label.clone()));
                }
            }
            _ => {}
        }
    }
    out
}

/// One training sentence.
#[derive(Debug, Clone)]
pub struct Example {
    pub tokens: Vec<Token>,
    /// Labels allowed while decoding this example (its intent's parameters).
    pub labels: Vec<String>,
    pub gold: Vec<TokenSpan>,
}

/// Averaged weights: feature → tag name → weight. Transitions use the
/// feature key `t={prev tag}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequenceLabeler {
    pub weights: BTreeMap<String, BTreeMap<String, f64>>,
}

fn transition_key(prev: Option<&Tag>) -> String {
    format!("t={}", prev.map_or(START.to_string(), Tag::name))
}

trait Scorer {
    fn score(&self, feature: &str, tag: &str) -> f64;
}

impl Scorer for SequenceLabeler {
    fn score(&self, feature: &str, tag: &str) -> f64 {
        self.weights
            .get(feature)
            .and_then(|m| m.get(tag))
            .copied()
            .unwrap_or(0.0)
    }
}

fn viterbi(scorer: &impl Scorer, feats: &[Vec<String>], labels: &[String]) -> Vec<Tag> {
    let tags = tag_set(labels);
    let names: Vec<String> = tags.iter().map(Tag::name).collect();
    let n = feats.len();
    if n == 0 {
        return Vec::new();
    }
    let emission = |i: usize, k: usize| -> f64 { feats[i].iter().map(|f| scorer.score(f, &names[k])).sum() };

    let mut best: Vec<Vec<f64>> = vec![vec![f64::NEG_INFINITY; tags.len()]; n];
    let mut back: Vec<Vec<usize>> = vec![vec![0; tags.len()]; n];
    let start_key = transition_key(None);
    for (k, tag) in tags.iter().enumerate() {
        if valid_transition(None, tag) {
            best[0][k] = emission(0, k) + scorer.score(&start_key, &names[k]);
        }
    }
    let trans_keys: Vec<String> = tags.iter().map(|t| transition_key(Some(t))).collect();
    for i in 1..n {
        for (k, tag) in tags.iter().enumerate() {
            let mut top = f64::NEG_INFINITY;
            let mut arg = 0;
            for (j, prev) in tags.iter().enumerate() {
                if best[i - 1][j] == f64::NEG_INFINITY || !valid_transition(Some(prev), tag) {
                    continue;
                }
                let s = best[i - 1][j] + scorer.score(&trans_keys[j], &names[k]);
                // Strict comparison keeps the lowest tag index on ties, which favors O.
                if s > top {
                    top = s;
                    arg = j;
                }
            }
            if top > f64::NEG_INFINITY {
                best[i][k] = top + emission(i, k);
                back[i][k] = arg;
            }
        }
    }
    let mut last = 0;
    let mut top = f64::NEG_INFINITY;
    for (k, tag) in tags.iter().enumerate() {
        if tag.closes() && best[n - 1][k] > top {
            top = best[n - 1][k];
            last = k;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = back[i][path[i]];
    }
    path.into_iter().map(|k| tags[k].clone()).collect()
}

#[derive(Default, Clone, Copy)]
struct Cell {
    weight: i64,
    total: i64,
    stamp: u64,
}

/// Perceptron weights with lazy averaging.
#[derive(Default)]
struct Trainer {
    cells: HashMap<String, HashMap<String, Cell>>,
    clock: u64,
}

impl Scorer for Trainer {
    fn score(&self, feature: &str, tag: &str) -> f64 {
        self.cells
            .get(feature)
            .and_then(|m| m.get(tag))
            .map_or(0.0, |c| c.weight as f64)
    }
}

impl Trainer {
    fn update(&mut self, feature: &str, tag: &str, delta: i64) {
        let now = self.clock;
        let cell = self
            .cells
            .entry(feature.to_string())
            .or_default()
            .entry(tag.to_string())
            .or_default();
        cell.total += cell.weight * (now - cell.stamp) as i64;
        cell.stamp = now;
        cell.weight += delta;
    }

    fn current(&self) -> SequenceLabeler {
        let mut weights: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (feature, tags) in &self.cells {
            for (tag, cell) in tags {
                if cell.weight != 0 {
                    weights
                        .entry(feature.clone())
                        .or_default()
                        .insert(tag.clone(), cell.weight as f64);
                }
            }
        }
        SequenceLabeler { weights }
    }

    fn averaged(&self) -> SequenceLabeler {
        let mut weights: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let clock = self.clock.max(1);
        for (feature, tags) in &self.cells {
            for (tag, cell) in tags {
                let total = cell.total + cell.weight * (clock - cell.stamp) as i64;
                if total != 0 {
                    weights
                        .entry(feature.clone())
                        .or_default()
                        .insert(tag.clone(), total as f64 / clock as f64);
                }
            }
        }
        SequenceLabeler { weights }
    }
}

impl SequenceLabeler {
    /// Trains with a fixed shuffle seed; identical input gives identical weights.
    ///
    /// Returns the averaged weights unless the final weights reproduce more
    /// training sentences exactly.
    pub fn train(examples: &[Example]) -> Self {
        let prepared: Vec<(Vec<Vec<String>>, Vec<String>)> = examples
            .iter()
            .map(|ex| {
                let feats = token_features(&ex.tokens);
                let gold = bilou_tags(ex.tokens.len(), &ex.gold);
                (feats, gold)
            })
            .collect();
        let mut trainer = Trainer::default();
        let mut rng = ChaCha8Rng::seed_from_u64(SHUFFLE_SEED);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        for _ in 0..EPOCHS {
            order.shuffle(&mut rng);
            for &idx in &order {
                trainer.clock += 1;
                let (feats, gold) = &prepared[idx];
                let predicted: Vec<String> = viterbi(&trainer, feats, &examples[idx].labels)
                    .iter()
                    .map(Tag::name)
                    .collect();
                if &predicted == gold {
                    continue;
                }
                for i in 0..gold.len() {
                    let gold_prev = if i == 0 { START } else { gold[i - 1].as_str() };
                    let pred_prev = if i == 0 { START } else { predicted[i - 1].as_str() };
                    if gold[i] != predicted[i] {
                        for f in &feats[i] {
                            trainer.update(f, &gold[i], 1);
                            trainer.update(f, &predicted[i], -1);
                        }
                    }
                    if gold[i] != predicted[i] || gold_prev != pred_prev {
                        trainer.update(&format!("t={gold_prev}"), &gold[i], 1);
                        trainer.update(&format!("t={pred_prev}"), &predicted[i], -1);
                    }
                }
            }
        }
        // Averaging can blur a fit the final weights achieve on tiny data sets.
        let averaged = trainer.averaged();
        let fitted = |model: &SequenceLabeler| {
            prepared
                .iter()
                .zip(examples)
                .filter(|((feats, gold), ex)| {
                    viterbi(model, feats, &ex.labels)
                        .iter()
                        .map(Tag::name)
                        .eq(gold.iter().cloned())
                })
                .count()
        };
        let averaged_fit = fitted(&averaged);
        if averaged_fit == examples.len() {
            return averaged;
        }
        let current = trainer.current();
        if fitted(&current) > averaged_fit {
            current
        } else {
            averaged
        }
    }

    /// Best-scoring entity spans for `tokens`, restricted to `labels`.
    pub fn decode(&self, tokens: &[Token], labels: &[String]) -> Vec<TokenSpan> {
        let feats = token_features(tokens);
        spans_from_tags(&viterbi(self, &feats, labels))
    }
}
