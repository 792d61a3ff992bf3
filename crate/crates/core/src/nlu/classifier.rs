//! Few-shot intent classifier: TF-IDF bag of words, one unit-norm centroid per
//! intent, cosine similarity, and a softmax turned into confidences.
//!
//! The softmax is blended with the smoothing floor by the utterance's
//! vocabulary coverage:
//!
//! ```text
//! conf_i = c * softmax_i(cos / T) + (1 - c) * floor
//! c      = |v_known|^2 / (|v_known|^2 + |v_unknown|^2)
//! ```
//!
//! `v_known` is the raw TF-IDF vector over in-vocabulary terms and
//! `v_unknown` weights each out-of-vocabulary term as if it had been seen in a
//! single training utterance (`idf = ln N + 1`). Zero overlap gives `c = 0`
//! and every intent gets exactly `floor`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;

/// Softmax temperature applied to cosine similarities.
pub const TEMPERATURE: f64 = 0.2;

/// Minimum confidence for the top intent to be acted upon.
pub const ACCEPT_THRESHOLD: f64 = 0.5;

/// Confidence every intent receives when the utterance shares no vocabulary
/// with the training data.
pub fn smoothing_floor(num_intents: usize) -> f64 {
    1.0 / (10.0 * num_intents.max(1) as f64)
}

/// Lowercased word tokens used as bag-of-words terms. Pure punctuation is dropped.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text)
        .tokens
        .iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.lower())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CentroidClassifier {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    /// Number of training utterances.
    pub document_count: usize,
    /// One row per intent label, unit-normalized.
    pub centroid_matrix: Vec<Vec<f64>>,
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

impl CentroidClassifier {
    /// `docs[i]` holds the training utterances of intent `i`.
    pub fn fit(docs: &[Vec<String>]) -> Self {
        let tokenized: Vec<Vec<Vec<String>>> = docs
            .iter()
            .map(|utts| utts.iter().map(|u| terms(u)).collect())
            .collect();

        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0usize;
        for utt in tokenized.iter().flatten() {
            n_docs += 1;
            let mut uniq = utt.clone();
            uniq.sort();
            uniq.dedup();
            for t in uniq {
                *df.entry(t).or_default() += 1;
            }
        }
        // BTreeMap iteration is sorted, so indices follow lexical order.
        let vocabulary: BTreeMap<String, usize> = df.keys().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        // Unsmoothed idf is invariant under duplicating the whole training set.
        let idf: Vec<f64> = df.values().map(|&d| (n_docs as f64 / d as f64).ln() + 1.0).collect();

        let mut model = CentroidClassifier {
            vocabulary,
            idf,
            document_count: n_docs,
            centroid_matrix: Vec::new(),
        };
        model.centroid_matrix = tokenized
            .iter()
            .map(|utts| {
                let mut centroid = vec![0.0; model.idf.len()];
                for utt in utts {
                    let v = model.vectorize_terms(utt);
                    for (c, x) in centroid.iter_mut().zip(&v) {
                        *c += x;
                    }
                }
                let count = utts.len().max(1) as f64;
                centroid.iter_mut().for_each(|c| *c /= count);
                normalize(&mut centroid);
                centroid
            })
            .collect();
        model
    }

    fn vectorize_terms(&self, terms: &[String]) -> Vec<f64> {
        let mut v = vec![0.0; self.idf.len()];
        for t in terms {
            if let Some(&i) = self.vocabulary.get(t) {
                v[i] += self.idf[i];
            }
        }
        normalize(&mut v);
        v
    }

    /// Unit-norm TF-IDF vector; all zeros when nothing is in vocabulary.
    pub fn vectorize(&self, text: &str) -> Vec<f64> {
        self.vectorize_terms(&terms(text))
    }

    /// Cosine similarity of `text` against every centroid, in label order.
    pub fn cosines(&self, text: &str) -> Vec<f64> {
        let q = self.vectorize(text);
        self.centroid_matrix
            .iter()
            .map(|row| row.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>().clamp(0.0, 1.0))
            .collect()
    }

    /// Share of the utterance's TF-IDF mass that falls on known vocabulary.
    pub fn coverage(&self, text: &str) -> f64 {
        let unseen_idf = (self.document_count.max(1) as f64).ln() + 1.0;
        let mut known = vec![0.0; self.idf.len()];
        let mut unknown: BTreeMap<String, f64> = BTreeMap::new();
        for t in terms(text) {
            match self.vocabulary.get(&t) {
                Some(&i) => known[i] += self.idf[i],
                None => *unknown.entry(t).or_default() += unseen_idf,
            }
        }
        let k: f64 = known.iter().map(|x| x * x).sum();
        let u: f64 = unknown.values().map(|x| x * x).sum();
        if k + u == 0.0 {
            0.0
        } else {
            k / (k + u)
        }
    }

    /// Confidence per label, in label order.
    pub fn confidences(&self, text: &str) -> Vec<f64> {
        confidences_from_cosines(&self.cosines(text), self.coverage(text))
    }
}

pub fn confidences_from_cosines(cos: &[f64], coverage: f64) -> Vec<f64> {
    let floor = smoothing_floor(cos.len());
    if coverage <= 0.0 || cos.is_empty() {
        return vec![floor; cos.len()];
    }
    let strongest = cos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = cos.iter().map(|c| ((c - strongest) / TEMPERATURE).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter()
        .map(|e| (coverage * e / total + (1.0 - coverage) * floor).clamp(0.0, 1.0))
        .collect()
}
