use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::nlu::{TrainedModel, MODEL_FILE};
use crate::store::{to_json, Project, PROJECT_FILE};

use super::CodegenError;

pub const ARTIFACT_DIR: &str = "geno";
pub const SHIM_FILE: &str = "geno.js";
pub const ENTRY_HTML: &str = "index.html";
pub const SCRIPT_INCLUDE: &str = r#"<script src="geno/geno.js"></script>"#;

const SHIM_ASSET: &str = include_str!("../../assets/geno.js");

/// Settings baked into the emitted shim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuntimeConfig {
    pub server_url: String,
    pub shortcut: String,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            server_url: "http://127.0.0.1:7311".into(),
            shortcut: "Ctrl+`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestEntry {
    /// Path relative to the app root, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
    pub entry_html: String,
    pub script_inserted: bool,
}

impl Manifest {
    pub fn changed_paths(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .files
            .iter()
            .filter(|f| f.changed)
            .map(|f| f.path.as_str())
            .collect();
        if self.script_inserted {
            out.push(&self.entry_html);
        }
        out
    }
}

/// The shim bundle with its configuration line prepended.
pub fn shim_source(config: &RuntimeConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    format!("window.GENO_CONFIG = {json};\n{SHIM_ASSET}")
}

/// Adds the script include before `</body>` (or at the end) unless present.
pub fn insert_script_include(html: &str) -> Option<String> {
    if html.contains(SCRIPT_INCLUDE) {
        return None;
    }
    let lower = html.to_ascii_lowercase();
    let mut out = String::with_capacity(html.len() + SCRIPT_INCLUDE.len() + 1);
    match lower.rfind("</body>") {
        Some(pos) => {
            let line_start = html[..pos].rfind('\n').map_or(0, |n| n + 1);
            let before_tag = &html[line_start..pos];
            if before_tag.trim().is_empty() {
                // `</body>` starts its own line: add ours above it, same indent.
                out.push_str(&html[..line_start]);
                out.push_str(before_tag);
                out.push_str(SCRIPT_INCLUDE);
                out.push('\n');
                out.push_str(&html[line_start..]);
            } else {
                out.push_str(&html[..pos]);
                out.push_str(SCRIPT_INCLUDE);
                out.push_str(&html[pos..]);
            }
        }
        None => {
            out.push_str(html);
            if !html.is_empty() && !html.ends_with('\n') {
                out.push('\n');
            }
            out.push_str(SCRIPT_INCLUDE);
            out.push('\n');
        }
    }
    Some(out)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CodegenError + '_ {
    move |source| CodegenError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

fn write_if_changed(path: &Path, contents: &[u8]) -> Result<bool, CodegenError> {
    match fs::read(path) {
        Ok(existing) if existing == contents => return Ok(false),
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(io_err(path)(e)),
    }
    fs::write(path, contents).map_err(io_err(path))?;
    Ok(true)
}

/// Writes `geno/geno.js`, `geno/geno.json` and `geno/geno.model` under
/// `app_root` and links the shim from the entry HTML.
///
/// Files whose content is unchanged are not rewritten.
pub fn emit_runtime_artifacts(
    project: &Project,
    model: &TrainedModel,
    app_root: &Path,
    config: &RuntimeConfig,
) -> Result<Manifest, CodegenError> {
    let html_path = app_root.join(ENTRY_HTML);
    if !html_path.is_file() {
        return Err(CodegenError::EntryHtmlNotFound(html_path));
    }
    let html = fs::read_to_string(&html_path).map_err(io_err(&html_path))?;

    let dir = app_root.join(ARTIFACT_DIR);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let outputs: [(&str, Vec<u8>); 3] = [
        (SHIM_FILE, shim_source(config).into_bytes()),
        (PROJECT_FILE, to_json(project).into_bytes()),
        (MODEL_FILE, model.to_bytes()),
    ];
    let mut files = Vec::with_capacity(outputs.len());
    for (name, bytes) in outputs {
        let path: PathBuf = dir.join(name);
        let changed = write_if_changed(&path, &bytes)?;
        files.push(ManifestEntry {
            path: format!("{ARTIFACT_DIR}/{name}"),
            sha256: hex::encode(Sha256::digest(&bytes)),
            changed,
        });
    }

    let script_inserted = match insert_script_include(&html) {
        Some(updated) => {
            fs::write(&html_path, updated).map_err(io_err(&html_path))?;
            true
        }
        None => false,
    };
    Ok(Manifest {
        files,
        entry_html: ENTRY_HTML.to_string(),
        script_inserted,
    })
}
