//! Project data model and the `geno.json` intents file.
//!
//! A [`Project`] is an immutable value: edits go through [`upsert_intent`] and
//! friends, which validate and return a new project. Every value that leaves
//! [`load_project`] or enters [`save_project`] has passed [`Project::validate`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::context::ContextThresholds;
use crate::nlu::tokenize::{char_len, char_slice, tokenize};

/// File name of the intents file at the project root.
pub const PROJECT_FILE: &str = "geno.json";

/// Format versions this build can read.
pub const SUPPORTED_VERSIONS: &[u32] = &[1];
pub const CURRENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Project {
    pub name: String,
    pub version: u32,
    #[serde(default)]
    pub intents: Vec<Intent>,
    #[serde(default, skip_serializing_if = "Settings::is_default")]
    pub settings: Settings,
}

/// Optional per-project tuning knobs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Settings {
    #[serde(default)]
    pub context_thresholds: ContextThresholds,
}

impl Settings {
    fn is_default(&self) -> bool {
        *self == Settings::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Intent {
    pub name: String,
    #[serde(default)]
    pub utterances: Vec<LabeledUtterance>,
    #[serde(default)]
    pub parameters: Vec<ParameterSpec>,
    pub target: TargetAction,
    #[serde(default)]
    pub context_filters: BTreeMap<String, ContextFilter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BuiltinKind {
    Date,
    Number,
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", from = "RawParameterSpec")]
pub struct ParameterSpec {
    pub name: String,
    pub prompt_question: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin_kind: Option<BuiltinKind>,
}

// A missing promptQuestion gets the default; an explicit empty one is kept so
// validation can reject it.
#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawParameterSpec {
    name: String,
    prompt_question: Option<String>,
    builtin_kind: Option<BuiltinKind>,
}

impl From<RawParameterSpec> for ParameterSpec {
    fn from(raw: RawParameterSpec) -> Self {
        let prompt_question = raw.prompt_question.unwrap_or_else(|| default_prompt(&raw.name));
        ParameterSpec {
            name: raw.name,
            prompt_question,
            builtin_kind: raw.builtin_kind,
        }
    }
}

pub fn default_prompt(parameter: &str) -> String {
    format!("What is {parameter}?")
}

impl ParameterSpec {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        ParameterSpec {
            prompt_question: default_prompt(&name),
            name,
            builtin_kind: None,
        }
    }

    pub fn with_kind(mut self, kind: BuiltinKind) -> Self {
        self.builtin_kind = Some(kind);
        self
    }

    pub fn with_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.prompt_question = prompt.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LabeledUtterance {
    pub text: String,
    #[serde(default)]
    pub spans: Vec<Span>,
}

/// A labeled entity: `[start_char, end_char_exclusive)` names `parameter_name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Span {
    pub start_char: usize,
    pub end_char_exclusive: usize,
    pub parameter_name: String,
}

impl Span {
    pub fn new(start: usize, end: usize, parameter: impl Into<String>) -> Self {
        Span {
            start_char: start,
            end_char_exclusive: end,
            parameter_name: parameter.into(),
        }
    }
}

impl LabeledUtterance {
    pub fn new(text: impl Into<String>) -> Self {
        LabeledUtterance {
            text: text.into(),
            spans: Vec::new(),
        }
    }

    /// Labels the first occurrence of `needle` as `parameter`.
    ///
    /// Panics if `needle` does not occur; meant for fixtures and tests.
    pub fn label(mut self, needle: &str, parameter: &str) -> Self {
        let byte = self
            .text
            .find(needle)
            .unwrap_or_else(|| panic!("{needle:?} not in {:?}", self.text));
        let start = self.text[..byte].chars().count();
        let end = start + needle.chars().count();
        self.spans.push(Span::new(start, end, parameter));
        self
    }

    pub fn span_text(&self, span: &Span) -> String {
        char_slice(&self.text, span.start_char, span.end_char_exclusive)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum TargetAction {
    #[serde(rename = "FunctionTarget", rename_all = "camelCase")]
    Function {
        function_name: String,
        argument_order: Vec<String>,
        source_file: String,
    },
    #[serde(rename = "DemonstrationTarget")]
    Demonstration { steps: Vec<RecordedStep> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ContextFilter {
    pub tag_name: String,
    #[serde(default)]
    pub required_classes: BTreeSet<String>,
    pub attribute_to_extract: String,
    #[serde(default)]
    pub multi_select: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RecordedStep {
    Click { tag: String, index: usize },
    TextEntry { tag: String, index: usize, text: String },
}

impl RecordedStep {
    pub fn tag(&self) -> &str {
        match self {
            RecordedStep::Click { tag, .. } | RecordedStep::TextEntry { tag, .. } => tag,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            RecordedStep::Click { index, .. } | RecordedStep::TextEntry { index, .. } => *index,
        }
    }
}

/// Names of the invariants a project file can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Invariant {
    UnsupportedVersion,
    DuplicateIntentName,
    InvalidIdentifier,
    DuplicateParameterName,
    EmptyPromptQuestion,
    SpanOutOfBounds,
    SpanOverlap,
    SpanNotTokenAligned,
    UnknownSpanParameter,
    UnknownFilterParameter,
    EmptyFilterField,
    ArgumentOrderNotPermutation,
    DemonstrationHasParameters,
    EmptyStepTag,
}

impl Invariant {
    pub fn code(self) -> &'static str {
        match self {
            Invariant::UnsupportedVersion => "unsupported-version",
            Invariant::DuplicateIntentName => "duplicate-intent-name",
            Invariant::InvalidIdentifier => "invalid-identifier",
            Invariant::DuplicateParameterName => "duplicate-parameter-name",
            Invariant::EmptyPromptQuestion => "empty-prompt-question",
            Invariant::SpanOutOfBounds => "span-out-of-bounds",
            Invariant::SpanOverlap => "span-overlap",
            Invariant::SpanNotTokenAligned => "span-not-token-aligned",
            Invariant::UnknownSpanParameter => "unknown-span-parameter",
            Invariant::UnknownFilterParameter => "unknown-filter-parameter",
            Invariant::EmptyFilterField => "empty-filter-field",
            Invariant::ArgumentOrderNotPermutation => "argument-order-not-permutation",
            Invariant::DemonstrationHasParameters => "demonstration-has-parameters",
            Invariant::EmptyStepTag => "empty-step-tag",
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{invariant} at {location}: {detail}")]
pub struct SchemaViolation {
    pub invariant: Invariant,
    /// Path-like pointer to the offending value, e.g. `intents[0].utterances[1]`.
    pub location: String,
    pub detail: String,
}

impl SchemaViolation {
    fn new(invariant: Invariant, location: impl Into<String>, detail: impl Into<String>) -> Self {
        SchemaViolation {
            invariant,
            location: location.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed intents file {path}: {source}")]
    MalformedFile {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("schema violation: {0}")]
    SchemaViolation(#[from] SchemaViolation),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

type Check = Result<(), SchemaViolation>;

fn ensure(cond: bool, inv: Invariant, at: impl FnOnce() -> String, detail: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(SchemaViolation::new(inv, at(), detail()))
    }
}

impl Project {
    pub fn new(name: impl Into<String>) -> Self {
        Project {
            name: name.into(),
            version: CURRENT_VERSION,
            intents: Vec::new(),
            settings: Settings::default(),
        }
    }

    pub fn intent(&self, name: &str) -> Option<&Intent> {
        self.intents.iter().find(|i| i.name == name)
    }

    pub fn intent_names(&self) -> Vec<String> {
        self.intents.iter().map(|i| i.name.clone()).collect()
    }

    /// Checks every type invariant; reports the first violation found.
    pub fn validate(&self) -> Check {
        ensure(
            self.version >= 1 && SUPPORTED_VERSIONS.contains(&self.version),
            Invariant::UnsupportedVersion,
            || "version".into(),
            || format!("version {} is not supported", self.version),
        )?;
        let mut seen = HashSet::new();
        for (i, intent) in self.intents.iter().enumerate() {
            let at = format!("intents[{i}]");
            ensure(
                seen.insert(intent.name.as_str()),
                Invariant::DuplicateIntentName,
                || at.clone(),
                || format!("intent {:?} defined twice", intent.name),
            )?;
            intent.validate_at(&at)?;
        }
        Ok(())
    }

    /// Stable content hash used to tie a trained model to its training data.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("project serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

impl Intent {
    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.parameters.iter().map(|p| p.name.clone()).collect()
    }

    pub fn validate(&self) -> Check {
        self.validate_at(&format!("intent {:?}", self.name))
    }

    fn validate_at(&self, at: &str) -> Check {
        ensure(
            is_identifier(&self.name),
            Invariant::InvalidIdentifier,
            || format!("{at}.name"),
            || format!("{:?} is not a valid identifier", self.name),
        )?;

        let mut params = HashSet::new();
        for (k, p) in self.parameters.iter().enumerate() {
            let pat = format!("{at}.parameters[{k}]");
            ensure(
                is_identifier(&p.name),
                Invariant::InvalidIdentifier,
                || pat.clone(),
                || format!("{:?} is not a valid identifier", p.name),
            )?;
            ensure(
                params.insert(p.name.as_str()),
                Invariant::DuplicateParameterName,
                || pat.clone(),
                || format!("parameter {:?} declared twice", p.name),
            )?;
            ensure(
                !p.prompt_question.trim().is_empty(),
                Invariant::EmptyPromptQuestion,
                || pat.clone(),
                || format!("parameter {:?} has an empty prompt question", p.name),
            )?;
        }

        for (u, utt) in self.utterances.iter().enumerate() {
            validate_utterance(utt, &params, &format!("{at}.utterances[{u}]"))?;
        }

        for (param, filter) in &self.context_filters {
            let fat = format!("{at}.contextFilters.{param}");
            ensure(
                params.contains(param.as_str()),
                Invariant::UnknownFilterParameter,
                || fat.clone(),
                || format!("context filter for undeclared parameter {param:?}"),
            )?;
            ensure(
                !filter.tag_name.trim().is_empty() && !filter.attribute_to_extract.trim().is_empty(),
                Invariant::EmptyFilterField,
                || fat.clone(),
                || "tagName and attributeToExtract must be non-empty".into(),
            )?;
        }

        match &self.target {
            TargetAction::Function {
                function_name,
                argument_order,
                ..
            } => {
                ensure(
                    is_identifier(function_name),
                    Invariant::InvalidIdentifier,
                    || format!("{at}.target.functionName"),
                    || format!("{function_name:?} is not a valid identifier"),
                )?;
                let order: Vec<&str> = argument_order.iter().map(String::as_str).collect();
                let mut sorted_order = order.clone();
                sorted_order.sort_unstable();
                let mut sorted_params: Vec<&str> = self.parameters.iter().map(|p| p.name.as_str()).collect();
                sorted_params.sort_unstable();
                ensure(
                    sorted_order == sorted_params,
                    Invariant::ArgumentOrderNotPermutation,
                    || format!("{at}.target.argumentOrder"),
                    || format!("{order:?} is not a permutation of the parameters {sorted_params:?}"),
                )?;
            }
            TargetAction::Demonstration { steps } => {
                ensure(
                    self.parameters.is_empty(),
                    Invariant::DemonstrationHasParameters,
                    || format!("{at}.parameters"),
                    || "demonstration targets are nonparametric".into(),
                )?;
                for (s, step) in steps.iter().enumerate() {
                    ensure(
                        !step.tag().trim().is_empty(),
                        Invariant::EmptyStepTag,
                        || format!("{at}.target.steps[{s}]"),
                        || "step tag is empty".into(),
                    )?;
                }
            }
        }
        Ok(())
    }
}

fn validate_utterance(utt: &LabeledUtterance, params: &HashSet<&str>, at: &str) -> Check {
    let len = char_len(&utt.text);
    let tokens = tokenize(&utt.text);
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(utt.spans.len());
    for span in &utt.spans {
        let (s, e) = (span.start_char, span.end_char_exclusive);
        let describe = || format!("span [{s},{e}) {:?} in {:?}", span.parameter_name, utt.text);
        ensure(
            params.contains(span.parameter_name.as_str()),
            Invariant::UnknownSpanParameter,
            || at.to_string(),
            || format!("{} labels an undeclared parameter", describe()),
        )?;
        ensure(
            s < e && e <= len,
            Invariant::SpanOutOfBounds,
            || at.to_string(),
            describe,
        )?;
        ensure(
            tokens.is_aligned(s, e),
            Invariant::SpanNotTokenAligned,
            || at.to_string(),
            || format!("{} does not start and end on token boundaries", describe()),
        )?;
        ranges.push((s, e));
    }
    ranges.sort_unstable();
    for w in ranges.windows(2) {
        ensure(
            w[0].1 <= w[1].0,
            Invariant::SpanOverlap,
            || at.to_string(),
            || format!("spans {:?} and {:?} overlap in {:?}", w[0], w[1], utt.text),
        )?;
    }
    Ok(())
}

/// Parses and validates project JSON text. `origin` is used in error messages.
pub fn parse_project(text: &str, origin: &Path) -> Result<Project, StoreError> {
    let project: Project = serde_json::from_str(text).map_err(|source| StoreError::MalformedFile {
        path: origin.to_path_buf(),
        source,
    })?;
    project.validate()?;
    Ok(project)
}

/// Accepts either the intents file itself or the directory containing it.
pub fn project_file_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(PROJECT_FILE)
    } else {
        path.to_path_buf()
    }
}

pub fn load_project(path: &Path) -> Result<Project, StoreError> {
    let file = project_file_path(path);
    let text = fs::read_to_string(&file).map_err(|source| StoreError::IoFailure {
        path: file.clone(),
        source,
    })?;
    parse_project(&text, &file)
}

pub fn to_json(project: &Project) -> String {
    let mut text = serde_json::to_string_pretty(project).expect("project serializes");
    text.push('\n');
    text
}

/// Writes the project under an exclusive advisory lock, via a temp file + rename.
pub fn save_project(project: &Project, path: &Path) -> Result<(), StoreError> {
    project.validate()?;
    let file = project_file_path(path);
    let io = |source| StoreError::IoFailure {
        path: file.clone(),
        source,
    };
    let dir = file
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let lock_path = dir.join(".geno.lock");
    let lock = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&lock_path)
        .map_err(io)?;
    lock.lock().map_err(io)?;

    let tmp = dir.join(format!(".{PROJECT_FILE}.tmp"));
    let result = (|| {
        let mut out = File::create(&tmp)?;
        out.write_all(to_json(project).as_bytes())?;
        out.sync_all()?;
        fs::rename(&tmp, &file)
    })();
    let _ = lock.unlock();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Replaces the same-named intent or appends a new one.
pub fn upsert_intent(project: &Project, intent: Intent) -> Result<Project, SchemaViolation> {
    intent.validate()?;
    let mut next = project.clone();
    match next.intents.iter_mut().find(|i| i.name == intent.name) {
        Some(slot) => *slot = intent,
        None => next.intents.push(intent),
    }
    next.validate()?;
    Ok(next)
}

/// Removes an intent by name; `None` if it does not exist.
pub fn remove_intent(project: &Project, name: &str) -> Option<Project> {
    let pos = project.intents.iter().position(|i| i.name == name)?;
    let mut next = project.clone();
    next.intents.remove(pos);
    Some(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn move_event() -> Intent {
        Intent {
            name: "moveEvent".into(),
            utterances: vec![
                LabeledUtterance::new("Move this to next Tuesday")
                    .label("this", "eventName")
                    .label("next Tuesday", "newDate"),
                LabeledUtterance::new("shift Group Meeting to Friday")
                    .label("Group Meeting", "eventName")
                    .label("Friday", "newDate"),
            ],
            parameters: vec![ParameterSpec::new("eventName"), ParameterSpec::new("newDate")],
            target: TargetAction::Function {
                function_name: "moveEvent".into(),
                argument_order: vec!["eventName".into(), "newDate".into()],
                source_file: "main.js".into(),
            },
            context_filters: BTreeMap::new(),
        }
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("moveEvent"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("move-event"));
    }

    #[test]
    fn default_prompt_is_filled_on_parse() {
        let p: ParameterSpec = serde_json::from_str(r#"{"name":"eventName"}"#).unwrap();
        assert_eq!(p.prompt_question, "What is eventName?");
    }

    #[test]
    fn empty_project_parses() {
        let p = parse_project(r#"{"name":"p","version":1,"intents":[]}"#, Path::new("x")).unwrap();
        assert_eq!(p, Project::new("p"));
    }

    #[test]
    fn unknown_version_rejected() {
        let err = parse_project(r#"{"name":"p","version":2,"intents":[]}"#, Path::new("x")).unwrap_err();
        assert!(matches!(err, StoreError::SchemaViolation(v) if v.invariant == Invariant::UnsupportedVersion));
        let err = parse_project(r#"{"name":"p","version":0,"intents":[]}"#, Path::new("x")).unwrap_err();
        assert!(matches!(err, StoreError::SchemaViolation(v) if v.invariant == Invariant::UnsupportedVersion));
    }

    #[test]
    fn syntax_error_is_malformed() {
        let err = parse_project("{\"name\":", Path::new("x")).unwrap_err();
        assert!(matches!(err, StoreError::MalformedFile { .. }));
    }

    #[test]
    fn upsert_appends_then_replaces() {
        let p = upsert_intent(&Project::new("cal"), move_event()).unwrap();
        assert_eq!(p.intents.len(), 1);
        let mut again = move_event();
        again
            .utterances
            .push(LabeledUtterance::new("reschedule this to next week"));
        let p = upsert_intent(&p, again).unwrap();
        assert_eq!(p.intents.len(), 1);
        assert_eq!(p.intents[0].utterances.len(), 3);
    }

    #[test]
    fn upsert_rejects_incomplete_argument_order() {
        let mut bad = move_event();
        if let TargetAction::Function { argument_order, .. } = &mut bad.target {
            argument_order.pop();
        }
        let err = upsert_intent(&Project::new("cal"), bad).unwrap_err();
        assert_eq!(err.invariant, Invariant::ArgumentOrderNotPermutation);
    }

    #[test]
    fn mid_token_span_rejected() {
        let mut bad = move_event();
        bad.utterances[0].spans[1].start_char += 1;
        assert_eq!(bad.validate().unwrap_err().invariant, Invariant::SpanNotTokenAligned);
    }

    #[test]
    fn remove() {
        let p = upsert_intent(&Project::new("cal"), move_event()).unwrap();
        assert!(remove_intent(&p, "nope").is_none());
        assert!(remove_intent(&p, "moveEvent").unwrap().intents.is_empty());
    }
}
