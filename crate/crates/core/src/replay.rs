//! Recording demonstrated GUI interactions and turning them into replay
//! directives addressed by `(tag, index)`.
//!
//! The index is the element's ordinal among same-tag elements in document
//! order at record time. The browser re-resolves it at replay time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::ElementSnapshot;
use crate::store::RecordedStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InteractionKind {
    Click,
    Input,
}

/// An element as reported by the recorder, with its clickability and per-tag index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordedElement {
    #[serde(flatten)]
    pub snapshot: ElementSnapshot,
    pub is_clickable: bool,
    pub dom_index_by_tag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawInteractionEvent {
    pub kind: InteractionKind,
    pub element: RecordedElement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DemoRecording {
    pub steps: Vec<RecordedStep>,
    pub started_at_ms: i64,
    pub ended_at_ms: i64,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("malformed replay script: {0}")]
    MalformedScript(String),
}

impl DemoRecording {
    pub fn new(started_at_ms: i64) -> Self {
        DemoRecording {
            steps: Vec::new(),
            started_at_ms,
            ended_at_ms: started_at_ms,
        }
    }
}

/// Appends the step an interaction event produces, if any.
///
/// Clicks on non-clickable elements are dropped. Repeated text entry into the
/// same field keeps only the final value.
pub fn record_step(mut recording: DemoRecording, event: &RawInteractionEvent) -> DemoRecording {
    let tag = event.element.snapshot.tag.clone();
    let index = event.element.dom_index_by_tag;
    match event.kind {
        InteractionKind::Click => {
            if event.element.is_clickable {
                recording.steps.push(RecordedStep::Click { tag, index });
            }
        }
        InteractionKind::Input => {
            let text = event.text.clone().unwrap_or_default();
            match recording.steps.last_mut() {
                Some(RecordedStep::TextEntry {
                    tag: last_tag,
                    index: last_index,
                    text: last_text,
                }) if *last_tag == tag && *last_index == index => *last_text = text,
                _ => recording.steps.push(RecordedStep::TextEntry { tag, index, text }),
            }
        }
    }
    recording
}

pub fn serialize_recording(recording: &DemoRecording) -> String {
    serde_json::to_string(&recording.steps).expect("steps serialize")
}

pub fn deserialize_recording(stored: &str) -> Result<DemoRecording, ReplayError> {
    let steps: Vec<RecordedStep> =
        serde_json::from_str(stored).map_err(|e| ReplayError::MalformedScript(e.to_string()))?;
    if let Some(bad) = steps.iter().find(|s| s.tag().trim().is_empty()) {
        return Err(ReplayError::MalformedScript(format!("step {bad:?} has an empty tag")));
    }
    Ok(DemoRecording {
        steps,
        ..DemoRecording::default()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagIndex {
    pub tag: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "then", rename_all = "camelCase")]
pub enum DirectiveAction {
    Click,
    SetText { text: String },
}

/// Select the `index`-th element with `tag`, then act on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Directive {
    pub select_by_tag_index: TagIndex,
    #[serde(flatten)]
    pub action: DirectiveAction,
}

/// One directive per step, in recorded order.
pub fn replay_plan(steps: &[RecordedStep]) -> Vec<Directive> {
    steps
        .iter()
        .map(|step| {
            let select_by_tag_index = TagIndex {
                tag: step.tag().to_string(),
                index: step.index(),
            };
            let action = match step {
                RecordedStep::Click { .. } => DirectiveAction::Click,
                RecordedStep::TextEntry { text, .. } => DirectiveAction::SetText { text: text.clone() },
            };
            Directive {
                select_by_tag_index,
                action,
            }
        })
        .collect()
}
