//! Fixture paths and file-tree helpers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use geno_core::store::{load_project, Project};
use sha2::{Digest, Sha256};

pub fn fixture(name: &str) -> Project {
    load_project(&fixtures().join(name)).unwrap()
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub type Expected = BTreeMap<String, Vec<(String, Vec<String>, usize)>>;

pub fn expected() -> Expected {
    let text = fs::read_to_string(fixtures().join("js/expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn tree_hashes(root: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let digest = hex::encode(Sha256::digest(fs::read(&path).unwrap()));
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), digest);
            }
        }
    }
    out
}

pub fn copy_app(to: &Path) {
    for f in ["index.html", "main.js"] {
        fs::copy(fixtures().join("calendar/app").join(f), to.join(f)).unwrap();
    }
}
