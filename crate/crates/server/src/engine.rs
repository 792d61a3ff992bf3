//! Transport-independent request handling shared by the HTTP server and the CLI.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use geno_core::codegen::{shim_source, RuntimeConfig};
use geno_core::context::{detect_context, ContextEvent, PointerEvent};
use geno_core::dialog::{answer_follow_up, start_command_with_id, DialogError, DialogTurn, Session};
use geno_core::nlu::{train, NluError, TrainedModel, MODEL_FILE};
use geno_core::replay::{record_step, DemoRecording, RawInteractionEvent};
use geno_core::store::{
    load_project, remove_intent, save_project, to_json, upsert_intent, Intent, Project, StoreError,
};
use serde::{Deserialize, Serialize};

use crate::wire::{
    AnswerRequest, ApiError, ErrorCode, Health, MutationResponse, ParseRequest, RecordingStarted, TrainResponse,
};

/// A project together with the model trained from it, swapped as one value.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub project: Project,
    pub model: Option<Arc<TrainedModel>>,
}

impl Snapshot {
    fn current_model(&self) -> Result<Arc<TrainedModel>, ApiError> {
        match &self.model {
            None => Err(ApiError::new(
                ErrorCode::ModelStale,
                "no trained model; run train first",
            )),
            Some(m) if !m.is_current_for(&self.project) => Err(ApiError::new(
                ErrorCode::ModelStale,
                "intents changed since the last training; run train again",
            )),
            Some(m) => Ok(m.clone()),
        }
    }
}

#[derive(Default)]
struct SessionSlot {
    session: Option<Session>,
    /// Replies to earlier /parse requests on this session, keyed by request.
    replies: HashMap<String, DialogTurn>,
}

pub struct Engine {
    /// Directory holding `geno.json` and `geno.model`; `None` keeps everything in memory.
    dir: Option<PathBuf>,
    runtime: RuntimeConfig,
    current: RwLock<Arc<Snapshot>>,
    writes: Mutex<()>,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionSlot>>>>,
    recordings: Mutex<HashMap<String, DemoRecording>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn now_ms() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0)
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::MalformedFile { .. } => ErrorCode::MalformedRequest,
            StoreError::SchemaViolation(_) => ErrorCode::SchemaViolation,
            StoreError::IoFailure { .. } => ErrorCode::IoFailure,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<NluError> for ApiError {
    fn from(e: NluError) -> Self {
        let code = match e {
            NluError::InsufficientData(_) => ErrorCode::InsufficientData,
            NluError::SchemaViolation(_) => ErrorCode::SchemaViolation,
            NluError::Io { .. } => ErrorCode::IoFailure,
            NluError::UnknownIntent(_) | NluError::MalformedModel { .. } => ErrorCode::Internal,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<DialogError> for ApiError {
    fn from(e: DialogError) -> Self {
        let code = match e {
            DialogError::ModelProjectMismatch => ErrorCode::ModelStale,
            DialogError::WrongState(_) => ErrorCode::WrongState,
            DialogError::Nlu(e) => return e.into(),
            DialogError::UnknownIntent(_) | DialogError::UnfilledSlot(_) => ErrorCode::Internal,
        };
        ApiError::new(code, e.to_string())
    }
}

/// Parses a request body, mapping syntax and shape errors to `MalformedRequest`.
pub fn decode<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(ErrorCode::MalformedRequest, e.to_string()))
}

#[derive(Serialize)]
struct ReplyKey<'a> {
    model: &'a str,
    utterance: &'a str,
    context: &'a Option<serde_json::Value>,
    trace: &'a Option<serde_json::Value>,
}

impl Engine {
    /// An engine over an in-memory project; nothing is written to disk.
    pub fn in_memory(project: Project, model: Option<TrainedModel>) -> Self {
        Engine {
            dir: None,
            runtime: RuntimeConfig::default(),
            current: RwLock::new(Arc::new(Snapshot {
                project,
                model: model.map(Arc::new),
            })),
            writes: Mutex::new(()),
            sessions: Mutex::new(HashMap::new()),
            recordings: Mutex::new(HashMap::new()),
        }
    }

    /// Loads `geno.json` and, when present and readable, `geno.model` from `dir`.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let project = load_project(dir)?;
        let model = TrainedModel::load(&dir.join(MODEL_FILE)).ok();
        let mut engine = Engine::in_memory(project, model);
        engine.dir = Some(dir.to_path_buf());
        Ok(engine)
    }

    pub fn with_runtime(mut self, runtime: RuntimeConfig) -> Self {
        self.runtime = runtime;
        self
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn swap(&self, next: Snapshot) {
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
    }

    pub fn health(&self) -> Health {
        let snap = self.snapshot();
        let project_version = snap.project.fingerprint();
        let model_version = snap.model.as_ref().map(|m| m.trained_at_version.clone());
        Health {
            status: "ok".into(),
            project_name: snap.project.name.clone(),
            stale: model_version.as_deref() != Some(project_version.as_str()),
            project_version,
            model_version,
        }
    }

    /// Trains from `project` (or the current one), persists, then swaps in
    /// the result. Trains run one at a time; the last to finish wins.
    pub fn train(&self, project: Option<Project>) -> Result<TrainResponse, ApiError> {
        let _guard = lock(&self.writes);
        let replace = project.is_some();
        let project = match project {
            Some(p) => {
                p.validate().map_err(StoreError::from)?;
                p
            }
            None => self.snapshot().project.clone(),
        };
        let model = train(&project)?;
        if let Some(dir) = &self.dir {
            if replace {
                save_project(&project, dir)?;
            }
            model.save(&dir.join(MODEL_FILE))?;
        }
        let model_version = model.trained_at_version.clone();
        self.swap(Snapshot {
            project,
            model: Some(Arc::new(model)),
        });
        Ok(TrainResponse { model_version })
    }

    /// Starts a command. Replaying an identical request on the same session
    /// returns the cached reply and puts the session back in the state that
    /// reply describes.
    pub fn parse(&self, request: &ParseRequest) -> Result<DialogTurn, ApiError> {
        let snap = self.snapshot();
        let model = snap.current_model()?;
        let context = resolve_context(&snap.project, request)?;

        let session_id = request
            .session_id
            .clone()
            .unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        let slot = lock(&self.sessions).entry(session_id.clone()).or_default().clone();
        let mut slot = lock(&slot);
        let key = serde_json::to_string(&ReplyKey {
            model: &model.trained_at_version,
            utterance: &request.utterance,
            context: &request.context,
            trace: &request.trace,
        })
        .expect("key serializes");
        if let Some(turn) = slot.replies.get(&key).cloned() {
            slot.session = Some(turn.session.clone());
            return Ok(turn);
        }
        let turn = start_command_with_id(session_id, &model, &snap.project, &request.utterance, context.as_ref())?;
        slot.session = Some(turn.session.clone());
        slot.replies.insert(key, turn.clone());
        Ok(turn)
    }

    /// Answers the pending follow-up question of a session.
    pub fn answer(&self, session_id: &str, request: &AnswerRequest) -> Result<DialogTurn, ApiError> {
        let unknown = || ApiError::new(ErrorCode::UnknownSession, format!("no session {session_id:?}"));
        let slot = lock(&self.sessions).get(session_id).cloned().ok_or_else(unknown)?;
        let mut slot = lock(&slot);
        let session = slot.session.as_ref().ok_or_else(unknown)?;
        let snap = self.snapshot();
        if session.state != geno_core::dialog::SessionState::Filling {
            return Err(DialogError::WrongState(session.state).into());
        }
        let model = snap.current_model()?;
        let turn = answer_follow_up(session, &snap.project, &model, &request.utterance)?;
        slot.session = Some(turn.session.clone());
        Ok(turn)
    }

    pub fn intents(&self) -> Vec<Intent> {
        self.snapshot().project.intents.clone()
    }

    /// Inserts or replaces the intent called `name`. The model is stale until
    /// the next training.
    pub fn put_intent(&self, name: &str, intent: Intent) -> Result<MutationResponse, ApiError> {
        if intent.name != name {
            return Err(ApiError::new(
                ErrorCode::SchemaViolation,
                format!("body names intent {:?} but the path names {name:?}", intent.name),
            ));
        }
        let _guard = lock(&self.writes);
        let snap = self.snapshot();
        let project = upsert_intent(&snap.project, intent).map_err(StoreError::from)?;
        self.commit(project, snap.model.clone())
    }

    pub fn delete_intent(&self, name: &str) -> Result<MutationResponse, ApiError> {
        let _guard = lock(&self.writes);
        let snap = self.snapshot();
        let project = remove_intent(&snap.project, name)
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no intent {name:?}")))?;
        self.commit(project, snap.model.clone())
    }

    fn commit(&self, project: Project, model: Option<Arc<TrainedModel>>) -> Result<MutationResponse, ApiError> {
        if let Some(dir) = &self.dir {
            save_project(&project, dir)?;
        }
        let project_version = project.fingerprint();
        let stale = model.as_ref().is_none_or(|m| m.trained_at_version != project_version);
        self.swap(Snapshot { project, model });
        Ok(MutationResponse { project_version, stale })
    }

    pub fn start_recording(&self) -> RecordingStarted {
        let recording_id = uuid::Uuid::new_v4().to_string();
        lock(&self.recordings).insert(recording_id.clone(), DemoRecording::new(now_ms()));
        RecordingStarted { recording_id }
    }

    pub fn record_event(&self, id: &str, event: &RawInteractionEvent) -> Result<DemoRecording, ApiError> {
        let mut recordings = lock(&self.recordings);
        let rec = recordings
            .get_mut(id)
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no recording {id:?}")))?;
        let mut next = record_step(std::mem::take(rec), event);
        next.ended_at_ms = now_ms().max(next.started_at_ms);
        *rec = next.clone();
        Ok(next)
    }

    pub fn stop_recording(&self, id: &str) -> Result<DemoRecording, ApiError> {
        let mut rec = lock(&self.recordings)
            .remove(id)
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no recording {id:?}")))?;
        rec.ended_at_ms = now_ms().max(rec.started_at_ms);
        Ok(rec)
    }

    pub fn shim_js(&self) -> String {
        shim_source(&self.runtime)
    }

    pub fn project_json(&self) -> String {
        to_json(&self.snapshot().project)
    }

    pub fn model_bytes(&self) -> Result<Vec<u8>, ApiError> {
        let snap = self.snapshot();
        Ok(snap.current_model()?.to_bytes())
    }
}

fn resolve_context(project: &Project, request: &ParseRequest) -> Result<Option<ContextEvent>, ApiError> {
    let malformed = |m: String| ApiError::new(ErrorCode::MalformedContext, m);
    match (&request.context, &request.trace) {
        (Some(_), Some(_)) => Err(ApiError::new(
            ErrorCode::MalformedRequest,
            "give either context or trace, not both",
        )),
        (Some(value), None) => {
            let event: ContextEvent = serde_json::from_value(value.clone()).map_err(|e| malformed(e.to_string()))?;
            event.validate().map_err(malformed)?;
            Ok(Some(event))
        }
        (None, Some(value)) => {
            let trace: Vec<PointerEvent> =
                serde_json::from_value(value.clone()).map_err(|e| malformed(e.to_string()))?;
            for event in trace.iter().filter_map(|e| e.element.as_ref()) {
                event.validate().map_err(malformed)?;
            }
            detect_context(&trace, &project.settings.context_thresholds).map_err(|e| malformed(e.to_string()))
        }
        (None, None) => Ok(None),
    }
}
