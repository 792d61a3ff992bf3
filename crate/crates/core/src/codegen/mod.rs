//! Source scanning, skeleton generation and runtime artifact emission.

use std::path::PathBuf;

use thiserror::Error;

mod emit;
pub mod lexer;
mod scanner;
mod skeleton;

pub use emit::{
    emit_runtime_artifacts, insert_script_include, shim_source, Manifest, ManifestEntry, RuntimeConfig, ARTIFACT_DIR,
    ENTRY_HTML, SCRIPT_INCLUDE, SHIM_FILE,
};
pub use scanner::{scan_functions, Diagnostic, FunctionSignature, ScanReport, Severity};
pub use skeleton::{generate_skeleton, insert_skeleton, InsertMode, InsertOutcome};

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("function `{name}` already exists in {file}")]
    FunctionAlreadyExists { name: String, file: String },
    #[error("intent `{0}` does not target a function")]
    NotAFunctionTarget(String),
    #[error("entry HTML not found at {0}")]
    EntryHtmlNotFound(PathBuf),
    #[error("i/o failure at {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CodegenError {
    pub fn code(&self) -> &'static str {
        match self {
            CodegenError::FunctionAlreadyExists { .. } => "FunctionAlreadyExists",
            CodegenError::NotAFunctionTarget(_) => "NotAFunctionTarget",
            CodegenError::EntryHtmlNotFound(_) => "EntryHtmlNotFound",
            CodegenError::IoFailure { .. } => "IoFailure",
        }
    }
}
