//! Commands that edit geno.json. Each loads, applies one store operation and saves.

use std::fs;
use std::path::Path;

use anyhow::Context;
use geno_core::codegen::scan_functions;
use geno_core::context::{build_filter_from_demonstration, ElementSnapshot};
use geno_core::nlu::tokenize_text;
use geno_core::replay::deserialize_recording;
use geno_core::store::{
    load_project, remove_intent, save_project, upsert_intent, BuiltinKind, Intent, LabeledUtterance, ParameterSpec,
    Project, Span, TargetAction,
};

use crate::{invalid, Cli, ContextCommand, IntentCommand, LabelArgs, UtteranceCommand};

pub fn load(dir: &Path) -> anyhow::Result<Project> {
    Ok(load_project(dir)?)
}

fn find<'p>(project: &'p Project, name: &str) -> anyhow::Result<&'p Intent> {
    project
        .intent(name)
        .ok_or_else(|| invalid(format!("no intent {name:?}; see `geno intent list`")))
}

/// Validates the edited intent into the project and saves it.
fn store(dir: &Path, project: &Project, intent: Intent) -> anyhow::Result<()> {
    let next = upsert_intent(project, intent).map_err(|v| invalid(v.to_string()))?;
    save_project(&next, dir)?;
    Ok(())
}

pub fn init(dir: &Path, name: Option<&str>, force: bool) -> anyhow::Result<()> {
    let file = dir.join(geno_core::store::PROJECT_FILE);
    if file.exists() && !force {
        return Err(invalid(format!(
            "{} already exists; use --force to reset it",
            file.display()
        )));
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = match name {
        Some(n) => n.to_string(),
        None => fs::canonicalize(dir)
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "app".into()),
    };
    save_project(&Project::new(name), dir)?;
    println!("initialized {}", file.display());
    Ok(())
}

pub fn intent(cli: &Cli, command: &IntentCommand) -> anyhow::Result<()> {
    let dir = &cli.project;
    match command {
        IntentCommand::Add {
            name,
            function,
            file,
            demo,
        } => {
            let project = load(dir)?;
            if project.intent(name).is_some() {
                return Err(invalid(format!("intent {name:?} already exists")));
            }
            let (target, parameters, summary) = match (file, demo) {
                (Some(file), None) => {
                    let function = function.as_deref().unwrap_or(name);
                    let path = cli.app_root().join(file);
                    let source = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let source_file = file.to_string_lossy().replace('\\', "/");
                    let report = scan_functions(&source, &source_file);
                    let Some(sig) = report.signatures.iter().find(|s| s.name == function) else {
                        let found: Vec<_> = report.signatures.iter().map(|s| s.name.as_str()).collect();
                        return Err(invalid(format!(
                            "function {function:?} not found in {source_file} (found: {})",
                            found.join(", ")
                        )));
                    };
                    let summary = format!("function {}({}) in {source_file}", sig.name, sig.parameters.join(", "));
                    (
                        TargetAction::Function {
                            function_name: sig.name.clone(),
                            argument_order: sig.parameters.clone(),
                            source_file,
                        },
                        sig.parameters.iter().map(ParameterSpec::new).collect(),
                        summary,
                    )
                }
                (None, Some(demo)) => {
                    let text = fs::read_to_string(demo).with_context(|| format!("reading {}", demo.display()))?;
                    let recording = deserialize_recording(&text).map_err(|e| invalid(e.to_string()))?;
                    let summary = format!("demonstration with {} steps", recording.steps.len());
                    (
                        TargetAction::Demonstration { steps: recording.steps },
                        Vec::new(),
                        summary,
                    )
                }
                _ => return Err(invalid("give --file (with optional --function) or --demo")),
            };
            let intent = Intent {
                name: name.clone(),
                utterances: Vec::new(),
                parameters,
                target,
                context_filters: Default::default(),
            };
            store(dir, &project, intent)?;
            println!("added intent {name}: {summary}");
        }
        IntentCommand::Remove { name } => {
            let project = load(dir)?;
            let next = remove_intent(&project, name).ok_or_else(|| invalid(format!("no intent {name:?}")))?;
            save_project(&next, dir)?;
            println!("removed intent {name}");
        }
        IntentCommand::List => {
            for intent in load(dir)?.intents {
                let target = match &intent.target {
                    TargetAction::Function {
                        function_name,
                        argument_order,
                        source_file,
                    } => format!(
                        "function {function_name}({}) in {source_file}",
                        argument_order.join(", ")
                    ),
                    TargetAction::Demonstration { steps } => format!("demonstration with {} steps", steps.len()),
                };
                println!("{}\t{}\t{} utterances", intent.name, target, intent.utterances.len());
            }
        }
    }
    Ok(())
}

pub fn utterance(dir: &Path, command: &UtteranceCommand) -> anyhow::Result<()> {
    let project = load(dir)?;
    match command {
        UtteranceCommand::Add { intent, text } => {
            let mut edited = find(&project, intent)?.clone();
            edited.utterances.push(LabeledUtterance::new(text.as_str()));
            let index = edited.utterances.len() - 1;
            store(dir, &project, edited)?;
            println!("added utterance {index} to {intent}");
        }
        UtteranceCommand::List { intent } => {
            for (i, utt) in find(&project, intent)?.utterances.iter().enumerate() {
                let spans: Vec<String> = utt
                    .spans
                    .iter()
                    .map(|s| format!("{}={:?}", s.parameter_name, utt.span_text(s)))
                    .collect();
                println!("{i}\t{}\t{}", utt.text, spans.join(" "));
            }
        }
    }
    Ok(())
}

pub fn param(
    dir: &Path,
    intent: &str,
    name: &str,
    kind: Option<BuiltinKind>,
    prompt: Option<&str>,
) -> anyhow::Result<()> {
    let project = load(dir)?;
    let mut edited = find(&project, intent)?.clone();
    let added = match edited.parameters.iter_mut().find(|p| p.name == name) {
        Some(p) => {
            if kind.is_some() {
                p.builtin_kind = kind;
            }
            if let Some(q) = prompt {
                p.prompt_question = q.to_string();
            }
            false
        }
        None => {
            let mut p = ParameterSpec::new(name);
            p.builtin_kind = kind;
            if let Some(q) = prompt {
                p.prompt_question = q.to_string();
            }
            edited.parameters.push(p);
            if let TargetAction::Function { argument_order, .. } = &mut edited.target {
                argument_order.push(name.to_string());
            }
            true
        }
    };
    store(dir, &project, edited)?;
    println!("{} parameter {intent}.{name}", if added { "added" } else { "updated" });
    Ok(())
}

pub fn label(dir: &Path, args: &LabelArgs) -> anyhow::Result<()> {
    let project = load(dir)?;
    let mut edited = find(&project, &args.intent)?.clone();
    let count = edited.utterances.len();
    let utt = edited.utterances.get_mut(args.utterance_index).ok_or_else(|| {
        invalid(format!(
            "{} has {count} utterances; index {} is out of range",
            args.intent, args.utterance_index
        ))
    })?;
    if args.show_tokens {
        for (i, t) in tokenize_text(&utt.text).tokens.iter().enumerate() {
            println!("{i}\t{}\t{}\t{}", t.start, t.end, t.surface);
        }
        return Ok(());
    }
    let (Some(start), Some(end), Some(param)) = (args.start, args.end, args.param.as_deref()) else {
        return Err(invalid("label needs START END PARAM"));
    };
    let span = Span::new(start, end, param);
    utt.spans
        .retain(|s| s.start_char != start || s.end_char_exclusive != end);
    utt.spans.push(span.clone());
    utt.spans.sort();
    let text = utt.span_text(&span);
    store(dir, &project, edited)?;
    println!("labeled {text:?} as {param}");
    Ok(())
}

pub fn context(dir: &Path, command: &ContextCommand) -> anyhow::Result<()> {
    let project = load(dir)?;
    match command {
        ContextCommand::Set {
            intent,
            param,
            from_snapshot,
            attribute,
            multi,
        } => {
            let text =
                fs::read_to_string(from_snapshot).with_context(|| format!("reading {}", from_snapshot.display()))?;
            let snapshot: ElementSnapshot = serde_json::from_str(&text)
                .map_err(|e| invalid(format!("{} is not an element snapshot: {e}", from_snapshot.display())))?;
            let filter =
                build_filter_from_demonstration(&snapshot, attribute, *multi).map_err(|e| invalid(e.to_string()))?;
            let mut edited = find(&project, intent)?.clone();
            let classes: Vec<&str> = filter.required_classes.iter().map(String::as_str).collect();
            let summary = format!(
                "<{}{}> {}{}",
                filter.tag_name,
                classes.iter().map(|c| format!(".{c}")).collect::<String>(),
                filter.attribute_to_extract,
                if filter.multi_select { " (multi)" } else { "" }
            );
            edited.context_filters.insert(param.clone(), filter);
            store(dir, &project, edited)?;
            println!("context for {intent}.{param}: {summary}");
        }
        ContextCommand::Clear { intent, param } => {
            let mut edited = find(&project, intent)?.clone();
            if edited.context_filters.remove(param).is_none() {
                return Err(invalid(format!("{intent}.{param} has no context filter")));
            }
            store(dir, &project, edited)?;
            println!("cleared context for {intent}.{param}");
        }
    }
    Ok(())
}
