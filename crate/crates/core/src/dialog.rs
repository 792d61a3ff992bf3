//! Frame-filling dialog: classify an utterance, fill each parameter from the
//! utterance, then from pointer context, then by asking, and emit an
//! [`ActionPlan`] once the frame is complete.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{match_filter, ContextEvent, ParameterValue};
use crate::nlu::builtin::{normalize_whole, recognize_builtin, RecognizerKind};
use crate::nlu::tokenize::tokenize;
use crate::nlu::{accept_intent, classify, extract_entities, EntitySource, ExtractedEntity, NluError, TrainedModel};
use crate::replay::{replay_plan, Directive};
use crate::store::{BuiltinKind, Intent, Project, RecordedStep, TargetAction};

/// Spoken when no intent passes the confidence gate.
pub const FALLBACK_TEXT: &str = "Sorry, I didn't understand. Could you try again?";

const SINGULAR_DEIXIS: [&str; 3] = ["this", "that", "it"];
const PLURAL_DEIXIS: [&str; 2] = ["these", "those"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SessionState {
    Idle,
    Filling,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub session_id: String,
    pub state: SessionState,
    pub intent_name: Option<String>,
    pub slots: BTreeMap<String, Option<ParameterValue>>,
    pub pending_parameter: Option<String>,
    pub transcript: Vec<TranscriptEntry>,
}

impl Session {
    pub fn new(session_id: impl Into<String>) -> Self {
        Session {
            session_id: session_id.into(),
            state: SessionState::Idle,
            intent_name: None,
            slots: BTreeMap::new(),
            pending_parameter: None,
            transcript: Vec::new(),
        }
    }

    fn say(&mut self, speaker: Speaker, text: impl Into<String>) {
        self.transcript.push(TranscriptEntry {
            speaker,
            text: text.into(),
        });
    }

    fn filled(&self) -> BTreeMap<String, ParameterValue> {
        self.slots
            .iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.clone(), v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ActionPlan {
    #[serde(rename_all = "camelCase")]
    InvokeFunction {
        function_name: String,
        source_file: String,
        ordered_arguments: Vec<ParameterValue>,
    },
    ReplayDemonstration {
        steps: Vec<RecordedStep>,
        directives: Vec<Directive>,
    },
    Speak {
        text: String,
    },
}

/// Result of one dialog step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DialogTurn {
    pub session: Session,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<ActionPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

#[derive(Debug, Error)]
pub enum DialogError {
    #[error("model was not trained from this project; retrain")]
    ModelProjectMismatch,
    #[error("session is {0:?}, expected filling")]
    WrongState(SessionState),
    #[error("unknown intent {0:?}")]
    UnknownIntent(String),
    #[error("slot {0:?} is not filled")]
    UnfilledSlot(String),
    #[error(transparent)]
    Nlu(#[from] NluError),
}

/// Which kinds of demonstrative pronoun an utterance contains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Deixis {
    pub singular: bool,
    pub plural: bool,
}

impl Deixis {
    pub fn of(utterance: &str) -> Self {
        let mut d = Deixis::default();
        for t in tokenize(utterance).tokens {
            let w = t.lower();
            d.singular |= SINGULAR_DEIXIS.contains(&w.as_str());
            d.plural |= PLURAL_DEIXIS.contains(&w.as_str());
        }
        d
    }

    pub fn any(&self) -> bool {
        self.singular || self.plural
    }

    fn admits(&self, multi_select: bool) -> bool {
        if multi_select {
            self.plural
        } else {
            self.singular
        }
    }
}

/// True when every word of `value` is a demonstrative pronoun: such a span
/// refers to GUI context instead of carrying a value.
fn is_deictic(value: &str) -> bool {
    let words: Vec<String> = tokenize(value)
        .tokens
        .iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.lower())
        .collect();
    !words.is_empty()
        && words
            .iter()
            .all(|w| SINGULAR_DEIXIS.contains(&w.as_str()) || PLURAL_DEIXIS.contains(&w.as_str()))
}

fn recognizer(kind: Option<BuiltinKind>) -> Option<RecognizerKind> {
    match kind? {
        BuiltinKind::Date => Some(RecognizerKind::Date),
        BuiltinKind::Number => Some(RecognizerKind::Number),
        BuiltinKind::FreeText => None,
    }
}

/// Wraps a normalized recognizer output; number-kind values become JSON numbers.
fn normalized_value(kind: Option<BuiltinKind>, normalized: String) -> ParameterValue {
    if kind == Some(BuiltinKind::Number) {
        if let Ok(n) = normalized.parse::<serde_json::Number>() {
            return ParameterValue::Number(n);
        }
    }
    ParameterValue::Single(normalized)
}

fn entity_value(entity: &ExtractedEntity, kind: Option<BuiltinKind>) -> ParameterValue {
    if entity.source != EntitySource::Learned {
        if let Some(n) = &entity.normalized {
            let hit_kind = match entity.source {
                EntitySource::BuiltinNumber => Some(BuiltinKind::Number),
                _ => Some(BuiltinKind::Date),
            };
            return normalized_value(hit_kind, n.clone());
        }
    }
    if let Some(normalized) = recognizer(kind).and_then(|k| normalize_whole(k, &entity.value)) {
        return normalized_value(kind, normalized);
    }
    ParameterValue::Single(entity.value.clone())
}

fn check_model(model: &TrainedModel, project: &Project) -> Result<(), DialogError> {
    if model.is_current_for(project) {
        Ok(())
    } else {
        Err(DialogError::ModelProjectMismatch)
    }
}

fn lookup<'p>(project: &'p Project, name: &str) -> Result<&'p Intent, DialogError> {
    project
        .intent(name)
        .ok_or_else(|| DialogError::UnknownIntent(name.to_string()))
}

/// Starts a new command with a freshly generated session id.
pub fn start_command(
    model: &TrainedModel,
    project: &Project,
    utterance: &str,
    context: Option<&ContextEvent>,
) -> Result<DialogTurn, DialogError> {
    start_command_with_id(uuid::Uuid::new_v4().to_string(), model, project, utterance, context)
}

pub fn start_command_with_id(
    session_id: impl Into<String>,
    model: &TrainedModel,
    project: &Project,
    utterance: &str,
    context: Option<&ContextEvent>,
) -> Result<DialogTurn, DialogError> {
    check_model(model, project)?;
    let mut session = Session::new(session_id);
    session.say(Speaker::User, utterance);

    let ranking = classify(model, utterance);
    let Some(intent_name) = accept_intent(&ranking) else {
        session.state = SessionState::Failed;
        session.say(Speaker::System, FALLBACK_TEXT);
        return Ok(DialogTurn {
            session,
            plan: Some(ActionPlan::Speak {
                text: FALLBACK_TEXT.to_string(),
            }),
            prompt: None,
        });
    };
    let intent = lookup(project, intent_name)?;
    session.intent_name = Some(intent.name.clone());

    let entities = extract_entities(model, &intent.name, utterance)?;
    let deixis = Deixis::of(utterance);
    let mut context = context;
    for param in &intent.parameters {
        let from_utterance = entities
            .iter()
            .find(|e| e.parameter_name == param.name && !is_deictic(&e.value))
            .map(|e| entity_value(e, param.builtin_kind));
        let value = from_utterance.or_else(|| {
            let filter = intent.context_filters.get(&param.name)?;
            if !deixis.admits(filter.multi_select) {
                return None;
            }
            let v = match_filter(context?, filter)?;
            // One pointer gesture fills at most one parameter.
            context = None;
            Some(v)
        });
        session.slots.insert(param.name.clone(), value);
    }
    advance(session, project, intent)
}

/// Fills the pending parameter from a spoken answer and moves on.
pub fn answer_follow_up(
    session: &Session,
    project: &Project,
    model: &TrainedModel,
    answer: &str,
) -> Result<DialogTurn, DialogError> {
    if session.state != SessionState::Filling {
        return Err(DialogError::WrongState(session.state));
    }
    check_model(model, project)?;
    let intent_name = session.intent_name.clone().unwrap_or_default();
    let intent = lookup(project, &intent_name)?;
    let pending = session
        .pending_parameter
        .clone()
        .ok_or(DialogError::WrongState(session.state))?;
    let param = intent
        .parameter(&pending)
        .ok_or_else(|| DialogError::UnfilledSlot(pending.clone()))?;

    let mut session = session.clone();
    session.say(Speaker::User, answer);
    let trimmed = answer.trim();
    if trimmed.is_empty() {
        session.state = SessionState::Failed;
        session.pending_parameter = None;
        session.say(Speaker::System, FALLBACK_TEXT);
        return Ok(DialogTurn {
            session,
            plan: Some(ActionPlan::Speak {
                text: FALLBACK_TEXT.to_string(),
            }),
            prompt: None,
        });
    }
    let value = match recognizer(param.builtin_kind).and_then(|k| recognize_builtin(k, trimmed).into_iter().next()) {
        Some(hit) => normalized_value(param.builtin_kind, hit.normalized),
        None => ParameterValue::Single(trimmed.to_string()),
    };
    session.slots.insert(pending, Some(value));
    session.pending_parameter = None;
    advance(session, project, intent)
}

/// Asks for the first unfilled parameter, or plans the action when none is left.
fn advance(mut session: Session, project: &Project, intent: &Intent) -> Result<DialogTurn, DialogError> {
    let missing = intent
        .parameters
        .iter()
        .find(|p| session.slots.get(&p.name).is_none_or(Option::is_none));
    if let Some(param) = missing {
        session.state = SessionState::Filling;
        session.pending_parameter = Some(param.name.clone());
        session.say(Speaker::System, &param.prompt_question);
        return Ok(DialogTurn {
            session,
            plan: None,
            prompt: Some(param.prompt_question.clone()),
        });
    }
    let plan = plan_for(project, &intent.name, &session.filled())?;
    session.state = SessionState::Done;
    session.pending_parameter = None;
    Ok(DialogTurn {
        session,
        plan: Some(plan),
        prompt: None,
    })
}

/// Builds the executable plan for a completely filled frame.
pub fn plan_for(
    project: &Project,
    intent_name: &str,
    slots: &BTreeMap<String, ParameterValue>,
) -> Result<ActionPlan, DialogError> {
    let intent = lookup(project, intent_name)?;
    if let Some(p) = intent.parameters.iter().find(|p| !slots.contains_key(&p.name)) {
        return Err(DialogError::UnfilledSlot(p.name.clone()));
    }
    Ok(match &intent.target {
        TargetAction::Function {
            function_name,
            argument_order,
            source_file,
        } => ActionPlan::InvokeFunction {
            function_name: function_name.clone(),
            source_file: source_file.clone(),
            ordered_arguments: argument_order.iter().map(|a| slots[a].clone()).collect(),
        },
        TargetAction::Demonstration { steps } => ActionPlan::ReplayDemonstration {
            steps: steps.clone(),
            directives: replay_plan(steps),
        },
    })
}
