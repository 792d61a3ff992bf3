//! Minimal client for a running geno server.

use geno_server::wire::Envelope;
use geno_server::ApiError;
use serde::de::DeserializeOwned;

use crate::{fail, UNREACHABLE};

pub struct Remote {
    base: String,
    agent: ureq::Agent,
}

impl Remote {
    pub fn new(base: &str) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Remote {
            base: base.trim_end_matches('/').to_string(),
            agent,
        }
    }

    /// Posts a JSON body. Transport failures are errors; API errors are returned.
    pub fn post<T: DeserializeOwned>(&self, path: &str, body: String) -> anyhow::Result<Result<T, ApiError>> {
        let url = format!("{}{path}", self.base);
        let mut resp = self
            .agent
            .post(&url)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| fail(UNREACHABLE, format!("cannot reach {url}: {e}")))?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| fail(UNREACHABLE, format!("reading reply from {url}: {e}")))?;
        let envelope: Envelope<T> = serde_json::from_str(&text)
            .map_err(|e| fail(UNREACHABLE, format!("{url} did not answer with a geno reply: {e}")))?;
        Ok(envelope.into_result())
    }
}
