//! Small projects built in code for dialog scenarios.

use std::collections::BTreeMap;

use geno_core::context::{BoundingBox, ContextEvent, ElementSnapshot, ParameterValue};
use geno_core::dialog::{start_command, ActionPlan};
use geno_core::nlu::train;
use geno_core::store::{
    upsert_intent, BuiltinKind, ContextFilter, Intent, LabeledUtterance, ParameterSpec, Project, TargetAction,
};

use super::files::fixture;

/// Utterances outside both fixture domains.
pub const OUT_OF_DOMAIN: [&str; 10] = [
    "what's the weather like",
    "order a pizza",
    "tell me a joke",
    "how tall is mount everest",
    "send an email to bob",
    "turn on the lights",
    "what time is it in tokyo",
    "book a flight to paris",
    "who won the game last night",
    "translate hello into french",
];

pub fn event_span(title: &str) -> ElementSnapshot {
    ElementSnapshot::new("span", BoundingBox::new(100.0, 40.0, 80.0, 20.0))
        .class("fc-title")
        .attr("innerText", title)
}

pub fn hover(element: ElementSnapshot) -> ContextEvent {
    ContextEvent::Hover {
        element,
        at: (110.0, 50.0),
    }
}

pub fn utt(text: &str, labels: &[(&str, &str)]) -> LabeledUtterance {
    labels
        .iter()
        .fold(LabeledUtterance::new(text), |u, (needle, param)| u.label(needle, param))
}

/// A function intent whose arguments follow parameter declaration order.
pub fn function_intent(name: &str, parameters: Vec<ParameterSpec>, utterances: Vec<LabeledUtterance>) -> Intent {
    Intent {
        name: name.into(),
        utterances,
        target: TargetAction::Function {
            function_name: name.into(),
            argument_order: parameters.iter().map(|p| p.name.clone()).collect(),
            source_file: "app.js".into(),
        },
        parameters,
        context_filters: BTreeMap::new(),
    }
}

pub fn demo_intent(name: &str, utterances: &[&str]) -> Intent {
    Intent {
        name: name.into(),
        utterances: utterances.iter().map(|u| LabeledUtterance::new(*u)).collect(),
        parameters: vec![],
        target: TargetAction::Demonstration { steps: vec![] },
        context_filters: BTreeMap::new(),
    }
}

pub fn filter(tag: &str, class: &str, multi: bool) -> ContextFilter {
    ContextFilter {
        tag_name: tag.into(),
        required_classes: [class.to_string()].into(),
        attribute_to_extract: "innerText".into(),
        multi_select: multi,
    }
}

pub fn doc_title(title: &str) -> ElementSnapshot {
    ElementSnapshot::new("span", BoundingBox::new(0.0, 0.0, 120.0, 18.0))
        .class("doc-title")
        .attr("innerText", title)
}

/// One parameter with a context filter; every utterance used by the fusion
/// matrix is a training utterance, so extraction is exact.
pub fn fusion_project() -> Project {
    let mut open = function_intent(
        "openDoc",
        vec![ParameterSpec::new("doc")],
        vec![
            utt("open budget", &[("budget", "doc")]),
            utt("open report", &[("report", "doc")]),
            utt("open budget from this folder", &[("budget", "doc")]),
            utt("open this", &[("this", "doc")]),
            utt("open", &[]),
        ],
    );
    open.context_filters
        .insert("doc".into(), filter("span", "doc-title", false));
    let mut p = Project::new("docs");
    p = upsert_intent(&p, open).unwrap();
    upsert_intent(&p, demo_intent("closeAll", &["close everything", "close all windows"])).unwrap()
}

pub const THREE_PROMPTS: [&str; 3] = ["What should it be called?", "When is it?", "Where is it?"];

/// An intent with three parameters that no training utterance mentions.
pub fn three_parameter_project() -> Project {
    let params = ["title", "date", "location"]
        .iter()
        .zip(THREE_PROMPTS)
        .map(|(n, q)| ParameterSpec::new(*n).with_prompt(q))
        .collect();
    let create = function_intent(
        "createEvent",
        params,
        vec![
            utt("create an event", &[]),
            utt("add a new event", &[]),
            utt("schedule an event", &[]),
        ],
    );
    let mut p = Project::new("planner");
    p = upsert_intent(&p, create).unwrap();
    upsert_intent(
        &p,
        demo_intent("clearAll", &["clear the calendar", "delete all events"]),
    )
    .unwrap()
}

/// The calendar fixture plus `postponeEvent(eventName, days)` with a numeric `days`.
pub fn postpone_project() -> Project {
    let mut postpone = function_intent(
        "postponeEvent",
        vec![
            ParameterSpec::new("eventName"),
            ParameterSpec::new("days").with_kind(BuiltinKind::Number),
        ],
        vec![
            utt("postpone this by two days", &[("this", "eventName"), ("two", "days")]),
            utt(
                "delay Group Meeting by 4 days",
                &[("Group Meeting", "eventName"), ("4", "days")],
            ),
            utt(
                "postpone Birthday Party by 2 days",
                &[("Birthday Party", "eventName"), ("2", "days")],
            ),
        ],
    );
    postpone
        .context_filters
        .insert("eventName".into(), filter("span", "fc-title", false));
    upsert_intent(&fixture("calendar"), postpone).unwrap()
}

#[derive(Debug, PartialEq)]
pub enum Outcome {
    Filled(String),
    Prompted(String),
}

/// The resolution table: entity, else context when the utterance points, else ask.
pub fn resolution_table(entity: Option<&str>, deixis: bool, context: Option<&str>) -> Outcome {
    match (entity, deixis, context) {
        (Some(e), _, _) => Outcome::Filled(e.into()),
        (None, true, Some(c)) => Outcome::Filled(c.into()),
        _ => Outcome::Prompted("What is doc?".into()),
    }
}

pub struct Cell {
    pub label: String,
    pub want: Outcome,
    pub got: Outcome,
}

/// Runs {entity, no entity} x {deixis, none} x {context, none} through
/// `start_command` on [`fusion_project`].
pub fn run_fusion_matrix() -> Vec<Cell> {
    let project = fusion_project();
    let model = train(&project).unwrap();
    let on_screen = "Q3 Forecast";
    let rows = [
        ("open budget from this folder", Some("budget"), true),
        ("open budget", Some("budget"), false),
        ("open this", None, true),
        ("open", None, false),
    ];
    let mut cells = Vec::new();
    for (utterance, entity, deixis) in rows {
        for context in [Some(on_screen), None] {
            let event = context.map(|c| hover(doc_title(c)));
            let turn = start_command(&model, &project, utterance, event.as_ref()).unwrap();
            let got = match (&turn.plan, &turn.prompt) {
                (Some(ActionPlan::InvokeFunction { ordered_arguments, .. }), None) => {
                    match ordered_arguments.as_slice() {
                        [ParameterValue::Single(v)] => Outcome::Filled(v.clone()),
                        other => Outcome::Filled(format!("{other:?}")),
                    }
                }
                (None, Some(prompt)) => Outcome::Prompted(prompt.clone()),
                other => Outcome::Filled(format!("unexpected {other:?}")),
            };
            cells.push(Cell {
                label: format!(
                    "entity={} deixis={deixis} context={}",
                    entity.is_some(),
                    context.is_some()
                ),
                want: resolution_table(entity, deixis, context),
                got,
            });
        }
    }
    cells
}
