use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use geno_core::nlu::TrainedModel;
use geno_core::store::{load_project, Project, Span};
use serde_json::{json, Value};
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn geno(project: &Path, args: &[&str]) -> Output {
    geno_with_input(project, args, "")
}

fn geno_with_input(project: &Path, args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_geno"))
        .arg("--project")
        .arg(project)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A scratch copy of a fixture project; the calendar app files go under `app/`.
fn copy_fixture(name: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join(name).join("geno.json"), dir.path().join("geno.json")).unwrap();
    let app = fixtures().join(name).join("app");
    if app.is_dir() {
        fs::create_dir(dir.path().join("app")).unwrap();
        for f in fs::read_dir(app).unwrap() {
            let f = f.unwrap();
            fs::copy(f.path(), dir.path().join("app").join(f.file_name())).unwrap();
        }
    }
    dir
}

/// Character offsets of the first occurrence of `needle`.
fn offsets(text: &str, needle: &str) -> (usize, usize) {
    let byte = text.find(needle).unwrap();
    let start = text[..byte].chars().count();
    (start, start + needle.chars().count())
}

fn label(dir: &Path, intent: &str, index: usize, text: &str, needle: &str, param: &str) {
    let (s, e) = offsets(text, needle);
    ok(&geno(
        dir,
        &[
            "label",
            intent,
            &index.to_string(),
            &s.to_string(),
            &e.to_string(),
            param,
        ],
    ));
}

const SNAPSHOT: &str = r#"{"tag":"span","classes":["fc-title"],"attributes":{"innerText":"Birthday Party"},"boundingBox":{"x":100,"y":40,"width":80,"height":20}}"#;

#[test]
fn init_refuses_then_forces() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("proj");
    ok(&geno(&dir, &["init", "--name", "demo"]));
    let fresh = load_project(&dir).unwrap();
    assert_eq!(fresh, Project::new("demo"));

    let again = geno(&dir, &["init"]);
    assert_eq!(again.status.code(), Some(2));
    assert!(stderr(&again).contains("--force"));

    fs::write(dir.join("a.js"), "function go(where) {}\n").unwrap();
    ok(&geno(&dir, &["intent", "add", "go", "--file", "a.js"]));
    assert_eq!(load_project(&dir).unwrap().intents.len(), 1);
    ok(&geno(&dir, &["init", "--force", "--name", "demo"]));
    assert_eq!(load_project(&dir).unwrap(), fresh);
}

#[test]
fn authoring_steps_rebuild_the_calendar_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&geno(dir, &["init", "--name", "calendar"]));
    fs::create_dir(dir.join("app")).unwrap();
    fs::copy(fixtures().join("calendar/app/main.js"), dir.join("app/main.js")).unwrap();

    let app = dir.join("app");
    let app = app.to_str().unwrap();
    let added = ok(&geno(
        dir,
        &["--app", app, "intent", "add", "moveEvent", "--file", "main.js"],
    ));
    assert_eq!(
        added,
        "added intent moveEvent: function moveEvent(eventName, newDate) in main.js\n"
    );

    let script = dir.join("week.json");
    fs::write(&script, r#"[{"type":"Click","tag":"button","index":2}]"#).unwrap();
    ok(&geno(
        dir,
        &["intent", "add", "weekView", "--demo", script.to_str().unwrap()],
    ));

    let moves = [
        ("Move this to next Tuesday", "this", "next Tuesday"),
        ("move Birthday Party to 6PM today", "Birthday Party", "6PM today"),
        ("shift Group Meeting to Friday", "Group Meeting", "Friday"),
    ];
    for (i, (text, event, date)) in moves.iter().enumerate() {
        ok(&geno(dir, &["utterance", "add", "moveEvent", text]));
        label(dir, "moveEvent", i, text, event, "eventName");
        label(dir, "moveEvent", i, text, date, "newDate");
    }
    for text in [
        "change to week view",
        "show the week view",
        "switch to the weekly calendar",
    ] {
        ok(&geno(dir, &["utterance", "add", "weekView", text]));
    }
    let snap = dir.join("snap.json");
    fs::write(&snap, SNAPSHOT).unwrap();
    let set = ok(&geno(
        dir,
        &[
            "context",
            "set",
            "moveEvent",
            "eventName",
            "--from-snapshot",
            snap.to_str().unwrap(),
            "--attribute",
            "innerText",
        ],
    ));
    assert_eq!(set, "context for moveEvent.eventName: <span.fc-title> innerText\n");

    let built = load_project(dir).unwrap();
    let fixture = load_project(&fixtures().join("calendar")).unwrap();
    assert_eq!(built, fixture);

    let trained = ok(&geno(dir, &["train"]));
    assert_eq!(trained, format!("trained model {}\n", fixture.fingerprint()));

    let listed = ok(&geno(dir, &["intent", "list"]));
    assert_eq!(
        listed,
        "moveEvent\tfunction moveEvent(eventName, newDate) in main.js\t3 utterances\n\
         weekView\tdemonstration with 1 steps\t3 utterances\n"
    );
}

#[test]
fn authoring_errors() {
    let dir = copy_fixture("calendar");
    let dir = dir.path();
    let dup = geno(dir, &["intent", "add", "weekView", "--demo", "nope.json"]);
    assert_eq!(dup.status.code(), Some(2));
    assert!(stderr(&dup).contains("already exists"));

    // "Move this to next Tuesday": [6, 9) starts inside "this".
    let mid = geno(dir, &["label", "moveEvent", "0", "6", "9", "eventName"]);
    assert_eq!(mid.status.code(), Some(2));
    assert!(stderr(&mid).contains("token boundaries"), "{}", stderr(&mid));

    let past = geno(dir, &["label", "moveEvent", "0", "20", "40", "newDate"]);
    assert_eq!(past.status.code(), Some(2));
    let missing = geno(dir, &["label", "moveEvent", "7", "0", "4", "newDate"]);
    assert_eq!(missing.status.code(), Some(2));
    let unknown_param = geno(dir, &["label", "moveEvent", "0", "0", "4", "when"]);
    assert_eq!(unknown_param.status.code(), Some(2));
    let no_fn = geno(dir, &["--app", "app", "intent", "add", "nothing", "--file", "main.js"]);
    assert_eq!(no_fn.status.code(), Some(2), "{}", stderr(&no_fn));
    assert!(stderr(&no_fn).contains("findEvent"));

    // None of the rejected edits reached the file.
    assert_eq!(
        load_project(dir).unwrap(),
        load_project(&fixtures().join("calendar")).unwrap()
    );
}

#[test]
fn show_tokens_matches_whitespace_offsets() {
    let dir = copy_fixture("calendar");
    let text = "shift Group Meeting to Friday";
    let out = ok(&geno(dir.path(), &["label", "moveEvent", "2", "--show-tokens"]));
    let mut want = String::new();
    let mut pos = 0;
    for (i, word) in text.split(' ').enumerate() {
        let n = word.chars().count();
        want.push_str(&format!("{i}\t{pos}\t{}\t{word}\n", pos + n));
        pos += n + 1;
    }
    assert_eq!(out, want);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = geno(&tmp.path().join("absent"), &["intent", "list"]);
    assert_eq!(missing.status.code(), Some(3));

    let dir = copy_fixture("calendar");
    let unreachable = geno(dir.path(), &["--server", "http://127.0.0.1:1", "train"]);
    assert_eq!(unreachable.status.code(), Some(4), "{}", stderr(&unreachable));

    let no_model = geno_with_input(dir.path(), &["test"], "Move this to Friday\n");
    assert_eq!(no_model.status.code(), Some(2));
    assert!(stderr(&no_model).contains("run `geno train`"), "{}", stderr(&no_model));
    let no_build = geno(dir.path(), &["--app", "app", "build"]);
    assert_eq!(no_build.status.code(), Some(2));
}

#[test]
fn postpone_by_three_days_is_numeric() {
    let dir = copy_fixture("calendar");
    let dir = dir.path();
    let js = dir.join("app/main.js");
    let mut source = fs::read_to_string(&js).unwrap();
    source.push_str("\nfunction postponeEvent(eventName, days) {\n  moveEvent(eventName, `+${days}d`);\n}\n");
    fs::write(&js, source).unwrap();

    ok(&geno(
        dir,
        &["--app", "app", "intent", "add", "postponeEvent", "--file", "main.js"],
    ));
    ok(&geno(dir, &["param", "postponeEvent", "days", "--kind", "number"]));
    let utterances = [
        ("postpone this by two days", "this", "two"),
        ("delay Group Meeting by 4 days", "Group Meeting", "4"),
        ("postpone Birthday Party by 2 days", "Birthday Party", "2"),
    ];
    for (i, (text, event, days)) in utterances.iter().enumerate() {
        ok(&geno(dir, &["utterance", "add", "postponeEvent", text]));
        label(dir, "postponeEvent", i, text, event, "eventName");
        label(dir, "postponeEvent", i, text, days, "days");
    }
    let snap = dir.join("snap.json");
    fs::write(&snap, SNAPSHOT).unwrap();
    ok(&geno(
        dir,
        &[
            "context",
            "set",
            "postponeEvent",
            "eventName",
            "--from-snapshot",
            snap.to_str().unwrap(),
            "--attribute",
            "innerText",
        ],
    ));
    ok(&geno(dir, &["train"]));
    let out = ok(&geno_with_input(
        dir,
        &["test"],
        &format!("Postpone this by three days @ {}\n", snap.display()),
    ));
    assert!(
        out.contains("plan: call postponeEvent(\"Birthday Party\", 3) in main.js\n"),
        "{out}"
    );
    let response: Value =
        serde_json::from_str(out.lines().find_map(|l| l.strip_prefix("response: ")).unwrap()).unwrap();
    assert_eq!(response["plan"]["orderedArguments"], json!(["Birthday Party", 3]));
}

#[test]
fn test_loop_transcript() {
    let dir = copy_fixture("calendar");
    ok(&geno(dir.path(), &["train"]));
    let out = ok(&geno_with_input(
        dir.path(),
        &["test"],
        "# comment\n\nMove this to Friday\nBirthday Party\nchange to week view\nblorp zing quux\n",
    ));
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with("response: ")).collect();
    assert_eq!(lines[0], "> Move this to Friday");
    assert!(lines[1].starts_with("ranking: moveEvent 0."));
    assert_eq!(
        lines[2],
        "entities: eventName=\"this\" [5,9), newDate=\"Friday\" [13,19)"
    );
    assert_eq!(lines[3], "prompt: What is eventName?");
    assert_eq!(lines[4], "> Birthday Party");
    assert_eq!(
        lines[5],
        "plan: call moveEvent(\"Birthday Party\", \"Friday\") in main.js"
    );
    assert_eq!(lines[6], "> change to week view");
    assert_eq!(lines[9], "plan: replay click button[2]");
    assert_eq!(lines[10], "> blorp zing quux");
    assert_eq!(
        lines.last().unwrap(),
        &"plan: say \"Sorry, I didn't understand. Could you try again?\""
    );
}

/// A `geno serve` child on an ephemeral port, killed on drop.
struct Served {
    child: Child,
    url: String,
}

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn serve(dir: &Path) -> Served {
    let mut child = Command::new(env!("CARGO_BIN_EXE_geno"))
        .arg("--project")
        .arg(dir)
        .args(["serve", "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();
    Served { child, url }
}

fn responses(out: &str) -> Vec<&str> {
    out.lines().filter_map(|l| l.strip_prefix("response: ")).collect()
}

#[test]
fn test_loop_matches_the_server() {
    let dir = copy_fixture("calendar");
    let dir = dir.path();
    ok(&geno(dir, &["train"]));
    let snap = dir.join("snap.json");
    fs::write(&snap, SNAPSHOT).unwrap();
    let snap = snap.display();
    let script = format!(
        "Move this to next Tuesday @ {snap}\n\
         Move this to Friday\n\
         Group Meeting\n\
         move this @ {snap}\n\
         next Tuesday\n\
         show the week view\n\
         blorp zing quux\n\
         shift Group Meeting to Friday @ {snap}\n"
    );

    let local = ok(&geno_with_input(dir, &["test"], &script));
    let server = serve(dir);
    let remote = ok(&geno_with_input(dir, &["--server", &server.url, "test"], &script));
    assert_eq!(responses(&local), responses(&remote));
    assert_eq!(responses(&local).len(), 8);

    // Direct requests to a fresh server give the same payloads.
    let fresh = serve(dir);
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let post = |path: &str, body: Value| -> Value {
        let text = agent
            .post(format!("{}{path}", fresh.url))
            .send(body.to_string())
            .unwrap()
            .into_body()
            .read_to_string()
            .unwrap();
        serde_json::from_str::<Value>(&text).unwrap()["payload"].clone()
    };
    let snapshot: Value = serde_json::from_str(SNAPSHOT).unwrap();
    let hover = json!({"type": "Hover", "element": snapshot, "at": [140.0, 50.0]});
    let direct = [
        post(
            "/parse",
            json!({"utterance": "Move this to next Tuesday", "context": hover, "sessionId": "test-1"}),
        ),
        post(
            "/parse",
            json!({"utterance": "Move this to Friday", "sessionId": "test-2"}),
        ),
        post("/session/test-2/answer", json!({"utterance": "Group Meeting"})),
        post(
            "/parse",
            json!({"utterance": "move this", "context": hover, "sessionId": "test-3"}),
        ),
        post("/session/test-3/answer", json!({"utterance": "next Tuesday"})),
        post(
            "/parse",
            json!({"utterance": "show the week view", "sessionId": "test-4"}),
        ),
        post("/parse", json!({"utterance": "blorp zing quux", "sessionId": "test-5"})),
        post(
            "/parse",
            json!({"utterance": "shift Group Meeting to Friday", "context": hover, "sessionId": "test-6"}),
        ),
    ];
    let from_cli: Vec<Value> = responses(&local)
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(from_cli, direct);
    assert_eq!(
        direct[0]["plan"]["orderedArguments"],
        json!(["Birthday Party", "next Tuesday"])
    );
}

#[test]
fn remote_train_uses_the_local_project() {
    let dir = copy_fixture("calendar");
    let server_dir = copy_fixture("calendar");
    // The server starts on a different project and is retrained with ours.
    fs::copy(fixtures().join("music/geno.json"), server_dir.path().join("geno.json")).unwrap();
    let server = serve(server_dir.path());
    let out = ok(&geno(dir.path(), &["--server", &server.url, "train"]));
    let fingerprint = load_project(dir.path()).unwrap().fingerprint();
    assert_eq!(out, format!("trained model {fingerprint}\n"));
    let model = TrainedModel::load(&server_dir.path().join("geno.model")).unwrap();
    assert_eq!(model.trained_at_version, fingerprint);
}

#[test]
fn build_emits_and_reaches_a_fixpoint() {
    let dir = copy_fixture("calendar");
    let dir = dir.path();
    ok(&geno(dir, &["train"]));
    let first = ok(&geno(dir, &["--app", "app", "build"]));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 4);
    for (line, name) in lines.iter().zip(["geno/geno.js", "geno/geno.json", "geno/geno.model"]) {
        assert!(line.starts_with(&format!("wrote {name} sha256 ")), "{line}");
    }
    assert_eq!(lines[3], "linked geno/geno.js from index.html");
    let html = fs::read_to_string(dir.join("app/index.html")).unwrap();
    assert!(html.contains("<script src=\"geno/geno.js\"></script>\n  </body>"));
    let js = fs::read_to_string(dir.join("app/geno/geno.js")).unwrap();
    assert!(js.starts_with("window.GENO_CONFIG = {\"serverUrl\":\"http://127.0.0.1:7311\""));

    let second = ok(&geno(dir, &["--app", "app", "build"]));
    assert!(second.lines().all(|l| l.starts_with("unchanged ")), "{second}");
    assert_eq!(second.lines().count(), 3);

    let custom = ok(&geno(
        dir,
        &["--app", "app", "build", "--server-url", "http://10.0.0.2:9000"],
    ));
    assert!(custom.starts_with("wrote geno/geno.js"));
}

#[test]
fn scan_and_skeleton() {
    let out = ok(&geno(
        Path::new("."),
        &["scan", fixtures().join("js/01_calendar.js").to_str().unwrap()],
    ));
    assert!(out.starts_with("moveEvent(eventName, newDate)\t"), "{out}");
    assert!(out.trim_end().ends_with("01_calendar.js:1"));

    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&geno(dir, &["init"]));
    fs::write(dir.join("lib.js"), "function setVolume(level) {}\n").unwrap();
    ok(&geno(dir, &["intent", "add", "setVolume", "--file", "lib.js"]));
    ok(&geno(
        dir,
        &[
            "param",
            "setVolume",
            "level",
            "--kind",
            "number",
            "--prompt",
            "How loud?",
        ],
    ));
    let intent = load_project(dir).unwrap().intents[0].clone();
    assert_eq!(intent.parameters[0].prompt_question, "How loud?");

    // A function intent whose function does not exist yet gets a skeleton.
    let mut project = load_project(dir).unwrap();
    let mut mute = intent.clone();
    mute.name = "muteAll".into();
    if let geno_core::store::TargetAction::Function {
        function_name,
        source_file,
        argument_order,
    } = &mut mute.target
    {
        *function_name = "muteAll".into();
        *source_file = "new.js".into();
        *argument_order = vec!["level".into()];
    }
    project.intents.push(mute);
    geno_core::store::save_project(&project, dir).unwrap();

    let printed = ok(&geno(dir, &["skeleton", "muteAll", "--print"]));
    assert_eq!(printed, "function muteAll(level) {\n  // TODO: implement\n}\n");
    let first = ok(&geno(dir, &["skeleton", "muteAll"]));
    assert_eq!(first, "inserted skeleton for muteAll into new.js\n");
    let scanned = ok(&geno(dir, &["scan", dir.join("new.js").to_str().unwrap()]));
    assert!(scanned.starts_with("muteAll(level)\t"));
    let second = ok(&geno(dir, &["skeleton", "muteAll"]));
    assert_eq!(second, "new.js already defines the function for muteAll\n");
    let existing = ok(&geno(dir, &["skeleton", "setVolume"]));
    assert!(existing.contains("already defines"));
}

#[test]
fn utterance_list_shows_labels() {
    let dir = copy_fixture("calendar");
    let out = ok(&geno(dir.path(), &["utterance", "list", "moveEvent"]));
    assert_eq!(
        out.lines().next().unwrap(),
        "0\tMove this to next Tuesday\teventName=\"this\" newDate=\"next Tuesday\""
    );
    // Relabeling the same range replaces the label.
    let before = load_project(dir.path()).unwrap();
    ok(&geno(dir.path(), &["label", "moveEvent", "0", "5", "9", "eventName"]));
    assert_eq!(load_project(dir.path()).unwrap(), before);
    let spans = &before.intents[0].utterances[0].spans;
    assert_eq!(spans[0], Span::new(5, 9, "eventName"));
}
