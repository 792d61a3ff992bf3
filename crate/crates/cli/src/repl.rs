//! `geno test`: a read-eval loop over typed utterances.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::Context;
use geno_core::context::{ContextEvent, ElementSnapshot};
use geno_core::dialog::{ActionPlan, DialogTurn, SessionState};
use geno_core::nlu::{classify, extract_entities};
use geno_server::wire::{AnswerRequest, ParseRequest};
use geno_server::{ApiError, Engine, ErrorCode};
use serde_json::Value;

use crate::remote::Remote;
use crate::{invalid, Cli};

const NO_MODEL: &str = "no trained model for the current intents; run `geno train` first";

enum Backend {
    Local(Engine),
    Remote(Remote),
}

impl Backend {
    fn parse(&self, request: &ParseRequest) -> anyhow::Result<Result<DialogTurn, ApiError>> {
        match self {
            Backend::Local(engine) => Ok(engine.parse(request)),
            Backend::Remote(remote) => remote.post("/parse", serde_json::to_string(request)?),
        }
    }

    fn answer(&self, session_id: &str, request: &AnswerRequest) -> anyhow::Result<Result<DialogTurn, ApiError>> {
        match self {
            Backend::Local(engine) => Ok(engine.answer(session_id, request)),
            Backend::Remote(remote) => remote.post(
                &format!("/session/{session_id}/answer"),
                serde_json::to_string(request)?,
            ),
        }
    }
}

/// Reads a snapshot file: a context event, a single element (hovered at its
/// center) or a pointer trace.
fn load_snapshot(path: &Path) -> anyhow::Result<(Option<Value>, Option<Value>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: not JSON: {e}", path.display())))?;
    if value.is_array() {
        return Ok((None, Some(value)));
    }
    if value.get("type").is_some() {
        return Ok((Some(value), None));
    }
    let element: ElementSnapshot = serde_json::from_value(value).map_err(|e| {
        invalid(format!(
            "{}: not a context event, element or trace: {e}",
            path.display()
        ))
    })?;
    let b = element.bounding_box;
    let hover = ContextEvent::Hover {
        element,
        at: (b.x + b.width / 2.0, b.y + b.height / 2.0),
    };
    Ok((Some(serde_json::to_value(hover)?), None))
}

fn describe(plan: &ActionPlan) -> String {
    match plan {
        ActionPlan::InvokeFunction {
            function_name,
            source_file,
            ordered_arguments,
        } => {
            let args: Vec<String> = ordered_arguments
                .iter()
                .map(|a| serde_json::to_string(a).expect("value serializes"))
                .collect();
            format!("call {function_name}({}) in {source_file}", args.join(", "))
        }
        ActionPlan::ReplayDemonstration { steps, .. } => {
            let steps: Vec<String> = steps
                .iter()
                .map(|s| match s {
                    geno_core::store::RecordedStep::Click { tag, index } => format!("click {tag}[{index}]"),
                    geno_core::store::RecordedStep::TextEntry { tag, index, text } => {
                        format!("type {text:?} into {tag}[{index}]")
                    }
                })
                .collect();
            format!("replay {}", steps.join(", "))
        }
        ActionPlan::Speak { text } => format!("say {text:?}"),
    }
}

/// Local-only diagnostics: the intent ranking and extracted entities.
fn explain(engine: &Engine, utterance: &str, out: &mut impl Write) -> anyhow::Result<()> {
    let Some(model) = engine.snapshot().model.clone() else {
        return Ok(());
    };
    let ranking = classify(&model, utterance);
    let parts: Vec<String> = ranking
        .ranked
        .iter()
        .map(|r| format!("{} {:.3}", r.intent, r.confidence))
        .collect();
    writeln!(out, "ranking: {}", parts.join(", "))?;
    if let Some(name) = geno_core::nlu::accept_intent(&ranking) {
        let entities = extract_entities(&model, name, utterance)?;
        let parts: Vec<String> = entities
            .iter()
            .map(|e| {
                format!(
                    "{}={:?} [{},{})",
                    e.parameter_name, e.value, e.start_char, e.end_char_exclusive
                )
            })
            .collect();
        writeln!(
            out,
            "entities: {}",
            if parts.is_empty() { "-".into() } else { parts.join(", ") }
        )?;
    }
    Ok(())
}

pub fn run(cli: &Cli, input: impl BufRead, out: &mut impl Write) -> anyhow::Result<()> {
    let backend = match &cli.server {
        Some(url) => Backend::Remote(Remote::new(url)),
        None => {
            let engine = Engine::open(&cli.project)?;
            if engine.health().stale {
                return Err(invalid(NO_MODEL));
            }
            Backend::Local(engine)
        }
    };

    let mut commands = 0;
    let mut pending: Option<String> = None;
    for line in input.lines() {
        let line = line.context("reading stdin")?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        writeln!(out, "> {line}")?;
        let (utterance, snapshot) = match line.rsplit_once(" @ ") {
            Some((u, file)) => (u.trim(), Some(Path::new(file.trim()))),
            None => (line, None),
        };

        let reply = match &pending {
            Some(session_id) => {
                if snapshot.is_some() {
                    writeln!(out, "note: snapshot ignored while answering a question")?;
                }
                backend.answer(
                    session_id,
                    &AnswerRequest {
                        utterance: utterance.to_string(),
                    },
                )?
            }
            None => {
                commands += 1;
                let (context, trace) = match snapshot {
                    Some(path) => load_snapshot(path)?,
                    None => (None, None),
                };
                if let Backend::Local(engine) = &backend {
                    explain(engine, utterance, out)?;
                }
                backend.parse(&ParseRequest {
                    utterance: utterance.to_string(),
                    context,
                    trace,
                    session_id: Some(format!("test-{commands}")),
                })?
            }
        };

        match reply {
            Ok(turn) => {
                if let Some(prompt) = &turn.prompt {
                    writeln!(out, "prompt: {prompt}")?;
                }
                if let Some(plan) = &turn.plan {
                    writeln!(out, "plan: {}", describe(plan))?;
                }
                writeln!(out, "response: {}", serde_json::to_string(&turn)?)?;
                pending = (turn.session.state == SessionState::Filling).then(|| turn.session.session_id.clone());
            }
            Err(e) if e.code == ErrorCode::ModelStale => return Err(invalid(NO_MODEL)),
            Err(e) => {
                writeln!(out, "error: {:?}: {}", e.code, e.message)?;
                pending = None;
            }
        }
    }
    Ok(())
}
