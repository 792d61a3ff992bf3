use crate::store::{Intent, TargetAction};

use super::scanner::scan_functions;
use super::CodegenError;

/// How [`insert_skeleton`] treats a function that already exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertMode {
    /// Leave the file untouched.
    Idempotent,
    /// Fail with [`CodegenError::FunctionAlreadyExists`].
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted(String),
    AlreadyPresent,
}

fn function_target(intent: &Intent) -> Result<(&str, &[String]), CodegenError> {
    match &intent.target {
        TargetAction::Function {
            function_name,
            argument_order,
            ..
        } => Ok((function_name, argument_order)),
        TargetAction::Demonstration { .. } => Err(CodegenError::NotAFunctionTarget(intent.name.clone())),
    }
}

pub fn generate_skeleton(intent: &Intent) -> Result<String, CodegenError> {
    let (name, args) = function_target(intent)?;
    Ok(format!(
        "function {name}({}) {{\n  // TODO: implement\n}}\n",
        args.join(", ")
    ))
}

/// Appends the intent's skeleton to `source` unless a function of that name
/// is already defined there.
pub fn insert_skeleton(
    source: &str,
    file_path: &str,
    intent: &Intent,
    mode: InsertMode,
) -> Result<InsertOutcome, CodegenError> {
    let (name, _) = function_target(intent)?;
    let exists = scan_functions(source, file_path)
        .signatures
        .iter()
        .any(|s| s.name == name);
    if exists {
        return match mode {
            InsertMode::Idempotent => Ok(InsertOutcome::AlreadyPresent),
            InsertMode::Strict => Err(CodegenError::FunctionAlreadyExists {
                name: name.to_string(),
                file: file_path.to_string(),
            }),
        };
    }
    let skeleton = generate_skeleton(intent)?;
    let mut out = source.to_string();
    if !out.is_empty() {
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(&skeleton);
    Ok(InsertOutcome::Inserted(out))
}
