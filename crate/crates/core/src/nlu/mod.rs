//! Natural-language understanding: intent ranking and parameter extraction
//! trained from a project's labeled example utterances.

pub mod builtin;
pub mod classifier;
pub mod extractor;
pub mod tokenize;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{BuiltinKind, Project, SchemaViolation};
use builtin::{recognize_builtin, resolve_overlaps, BuiltinHit, RecognizerKind};
use classifier::{CentroidClassifier, ACCEPT_THRESHOLD};
use extractor::{scoped_label, Example, SequenceLabeler};
use tokenize::tokenize;

pub use builtin::recognize_builtin as recognize;
pub use tokenize::{tokenize as tokenize_text, Token, TokenizedUtterance};

/// File name of the serialized model, stored beside `geno.json`.
pub const MODEL_FILE: &str = "geno.model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NluError {
    #[error("insufficient training data: {0}")]
    InsufficientData(String),
    #[error("unknown intent {0:?}")]
    UnknownIntent(String),
    #[error(transparent)]
    SchemaViolation(#[from] SchemaViolation),
    #[error("malformed model file {path}: {message}")]
    MalformedModel { path: PathBuf, message: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelParameter {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin_kind: Option<BuiltinKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainedModel {
    pub format_version: u32,
    pub intent_labels: Vec<String>,
    /// Parameter schema per intent label, same order as `intent_labels`.
    pub intent_parameters: Vec<Vec<ModelParameter>>,
    #[serde(flatten)]
    pub classifier: CentroidClassifier,
    pub extractor_weights: SequenceLabeler,
    /// Fingerprint of the project the model was trained from.
    pub trained_at_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedIntent {
    pub intent: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentRanking {
    pub ranked: Vec<RankedIntent>,
}

impl IntentRanking {
    pub fn top(&self) -> Option<&RankedIntent> {
        self.ranked.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EntitySource {
    Learned,
    BuiltinDate,
    BuiltinNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractedEntity {
    pub parameter_name: String,
    /// Exactly the utterance substring covered by the span.
    pub value: String,
    pub start_char: usize,
    pub end_char_exclusive: usize,
    pub source: EntitySource,
    /// Recognizer output for builtin hits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<String>,
}

/// Trains the classifier and the extractor from every intent's utterances.
pub fn train(project: &Project) -> Result<TrainedModel, NluError> {
    project.validate()?;
    if project.intents.is_empty() {
        return Err(NluError::InsufficientData("project has no intents".into()));
    }
    if let Some(empty) = project.intents.iter().find(|i| i.utterances.is_empty()) {
        return Err(NluError::InsufficientData(format!(
            "intent {:?} has no example utterances",
            empty.name
        )));
    }

    let docs: Vec<Vec<String>> = project
        .intents
        .iter()
        .map(|i| i.utterances.iter().map(|u| u.text.clone()).collect())
        .collect();
    let classifier = CentroidClassifier::fit(&docs);

    let mut examples = Vec::new();
    for intent in &project.intents {
        let labels: Vec<String> = intent
            .parameters
            .iter()
            .map(|p| scoped_label(&intent.name, &p.name))
            .collect();
        for utt in &intent.utterances {
            let tokens = tokenize(&utt.text);
            let gold = utt
                .spans
                .iter()
                .map(|s| {
                    // Spans are validated as token-aligned.
                    let first = tokens.token_starting_at(s.start_char).expect("aligned span");
                    let last = tokens.token_ending_at(s.end_char_exclusive).expect("aligned span");
                    (first, last, scoped_label(&intent.name, &s.parameter_name))
                })
                .collect();
            examples.push(Example {
                tokens: tokens.tokens,
                labels: labels.clone(),
                gold,
            });
        }
    }
    // Other intents' utterances decoded under this intent's labels must stay
    // empty, which keeps sentence position alone from implying an entity.
    for intent in project.intents.iter().filter(|i| !i.parameters.is_empty()) {
        let labels: Vec<String> = intent
            .parameters
            .iter()
            .map(|p| scoped_label(&intent.name, &p.name))
            .collect();
        for other in project.intents.iter().filter(|o| o.name != intent.name) {
            for utt in &other.utterances {
                examples.push(Example {
                    tokens: tokenize(&utt.text).tokens,
                    labels: labels.clone(),
                    gold: Vec::new(),
                });
            }
        }
    }
    let extractor_weights = SequenceLabeler::train(&examples);

    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        intent_labels: project.intent_names(),
        intent_parameters: project
            .intents
            .iter()
            .map(|i| {
                i.parameters
                    .iter()
                    .map(|p| ModelParameter {
                        name: p.name.clone(),
                        builtin_kind: p.builtin_kind,
                    })
                    .collect()
            })
            .collect(),
        classifier,
        extractor_weights,
        trained_at_version: project.fingerprint(),
    })
}

/// Ranks every trained intent by confidence, highest first. Ties keep label order.
pub fn classify(model: &TrainedModel, utterance: &str) -> IntentRanking {
    let conf = model.classifier.confidences(utterance);
    let mut ranked: Vec<RankedIntent> = model
        .intent_labels
        .iter()
        .zip(conf)
        .map(|(intent, confidence)| RankedIntent {
            intent: intent.clone(),
            confidence,
        })
        .collect();
    ranked.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    IntentRanking { ranked }
}

/// The top intent when its confidence reaches the 0.5 gate.
pub fn accept_intent(ranking: &IntentRanking) -> Option<&str> {
    ranking
        .top()
        .filter(|top| top.confidence >= ACCEPT_THRESHOLD)
        .map(|top| top.intent.as_str())
}

fn recognizer_for(kind: BuiltinKind) -> Option<RecognizerKind> {
    match kind {
        BuiltinKind::Date => Some(RecognizerKind::Date),
        BuiltinKind::Number => Some(RecognizerKind::Number),
        BuiltinKind::FreeText => None,
    }
}

/// Whether the span, or a token right next to it, is training vocabulary.
/// Sentence position alone is not evidence for an entity.
fn anchored(model: &TrainedModel, tokens: &[Token], first: usize, last: usize) -> bool {
    let lo = first.saturating_sub(1);
    let hi = (last + 1).min(tokens.len() - 1);
    tokens[lo..=hi]
        .iter()
        .any(|t| model.classifier.vocabulary.contains_key(&t.lower()))
}

/// Extracts parameter values for `intent_name` from `utterance`.
///
/// Learned spans come first. Parameters with a builtin kind that the learned
/// model left empty are then filled from recognizer hits that do not overlap
/// any learned span, in declaration order.
pub fn extract_entities(
    model: &TrainedModel,
    intent_name: &str,
    utterance: &str,
) -> Result<Vec<ExtractedEntity>, NluError> {
    let idx = model
        .intent_labels
        .iter()
        .position(|l| l == intent_name)
        .ok_or_else(|| NluError::UnknownIntent(intent_name.to_string()))?;
    let params = &model.intent_parameters[idx];
    let labels: Vec<String> = params.iter().map(|p| scoped_label(intent_name, &p.name)).collect();
    let tokens = tokenize(utterance);

    let mut entities: Vec<ExtractedEntity> = model
        .extractor_weights
        .decode(&tokens.tokens, &labels)
        .into_iter()
        .filter(|(first, last, _)| anchored(model, &tokens.tokens, *first, *last))
        .filter_map(|(first, last, label)| {
            let param = params.iter().find(|p| scoped_label(intent_name, &p.name) == label)?;
            let (start, end) = (tokens.tokens[first].start, tokens.tokens[last].end);
            Some(ExtractedEntity {
                parameter_name: param.name.clone(),
                value: tokenize::char_slice(utterance, start, end),
                start_char: start,
                end_char_exclusive: end,
                source: EntitySource::Learned,
                normalized: None,
            })
        })
        .collect();

    let wanted: Vec<(&ModelParameter, RecognizerKind)> = params
        .iter()
        .filter(|p| !entities.iter().any(|e| e.parameter_name == p.name))
        .filter_map(|p| p.builtin_kind.and_then(recognizer_for).map(|k| (p, k)))
        .collect();
    let mut kinds: Vec<RecognizerKind> = Vec::new();
    for (_, k) in &wanted {
        if !kinds.contains(k) {
            kinds.push(*k);
        }
    }
    let candidates: Vec<BuiltinHit> = kinds
        .iter()
        .flat_map(|k| recognize_builtin(*k, utterance))
        .filter(|h| !entities.iter().any(|e| h.overlaps(e.start_char, e.end_char_exclusive)))
        .collect();
    let mut hits = resolve_overlaps(candidates);
    for (param, kind) in wanted {
        if let Some(pos) = hits.iter().position(|h| h.kind == kind) {
            let hit = hits.remove(pos);
            entities.push(ExtractedEntity {
                parameter_name: param.name.clone(),
                value: hit.text,
                start_char: hit.start,
                end_char_exclusive: hit.end,
                source: match kind {
                    RecognizerKind::Date => EntitySource::BuiltinDate,
                    RecognizerKind::Number => EntitySource::BuiltinNumber,
                },
                normalized: Some(hit.normalized),
            });
        }
    }
    entities.sort_by_key(|e| e.start_char);
    Ok(entities)
}

impl TrainedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("model serializes");
        out.push(b'\n');
        out
    }

    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self, NluError> {
        let model: TrainedModel = serde_json::from_slice(bytes).map_err(|e| NluError::MalformedModel {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(NluError::MalformedModel {
                path: origin.to_path_buf(),
                message: format!("unsupported model format version {}", model.format_version),
            });
        }
        if model.intent_parameters.len() != model.intent_labels.len()
            || model.classifier.centroid_matrix.len() != model.intent_labels.len()
        {
            return Err(NluError::MalformedModel {
                path: origin.to_path_buf(),
                message: "label, parameter and centroid tables disagree in length".into(),
            });
        }
        Ok(model)
    }

    /// Whether this model was trained from exactly `project`.
    pub fn is_current_for(&self, project: &Project) -> bool {
        self.trained_at_version == project.fingerprint()
    }

    pub fn save(&self, path: &Path) -> Result<(), NluError> {
        fs::write(path, self.to_bytes()).map_err(|source| NluError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, NluError> {
        let bytes = fs::read(path).map_err(|source| NluError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes, path)
    }
}
