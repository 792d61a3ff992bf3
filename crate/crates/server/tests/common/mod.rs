#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use geno_server::{serve, Engine};
use serde_json::{json, Value};
use tempfile::TempDir;

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

/// A scratch project directory holding a copy of a fixture's `geno.json`.
pub fn project_dir(name: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture_dir(name).join("geno.json"), dir.path().join("geno.json")).unwrap();
    dir
}

/// A server running on an ephemeral port for the rest of the test process.
pub struct Server {
    pub base: String,
    pub agent: ureq::Agent,
}

pub struct Reply {
    pub status: u16,
    pub body: Value,
    pub headers: Vec<(String, String)>,
}

impl Reply {
    pub fn payload(&self) -> &Value {
        assert_eq!(self.status, 200, "{}", self.body);
        &self.body["payload"]
    }

    pub fn code(&self) -> &str {
        self.body["error"]["code"].as_str().unwrap_or("")
    }
}

pub fn start(engine: Engine) -> Server {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            serve(listener, Arc::new(engine)).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    Server {
        base: format!("http://{addr}"),
        agent,
    }
}

pub fn start_dir(dir: &Path) -> Server {
    start(Engine::open(dir).unwrap())
}

fn reply(mut resp: ureq::http::Response<ureq::Body>) -> Reply {
    let status = resp.status().as_u16();
    let headers = resp
        .headers()
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_str().unwrap_or("").to_string()))
        .collect();
    let text = resp.body_mut().read_to_string().unwrap();
    let body = serde_json::from_str(&text).unwrap_or(Value::String(text));
    Reply { status, body, headers }
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn get(&self, path: &str) -> Reply {
        reply(self.agent.get(self.url(path)).call().unwrap())
    }

    pub fn delete(&self, path: &str) -> Reply {
        reply(self.agent.delete(self.url(path)).call().unwrap())
    }

    pub fn post_raw(&self, path: &str, body: &str) -> Reply {
        reply(
            self.agent
                .post(self.url(path))
                .header("content-type", "application/json")
                .send(body)
                .unwrap(),
        )
    }

    pub fn post(&self, path: &str, body: &Value) -> Reply {
        self.post_raw(path, &body.to_string())
    }

    pub fn put(&self, path: &str, body: &Value) -> Reply {
        reply(
            self.agent
                .put(self.url(path))
                .header("content-type", "application/json")
                .send(body.to_string())
                .unwrap(),
        )
    }

    pub fn train(&self) -> String {
        self.post_raw("/train", "").payload()["modelVersion"]
            .as_str()
            .unwrap()
            .to_string()
    }
}

pub fn event_span(title: &str) -> Value {
    json!({
        "tag": "span",
        "classes": ["fc-title"],
        "attributes": {"innerText": title},
        "boundingBox": {"x": 100.0, "y": 40.0, "width": 80.0, "height": 20.0}
    })
}

pub fn hover(element: Value) -> Value {
    json!({"type": "Hover", "element": element, "at": [110.0, 50.0]})
}
