//! Training, building, scanning, skeletons and serving.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use geno_core::codegen::{
    emit_runtime_artifacts, generate_skeleton, insert_skeleton, scan_functions, CodegenError, InsertMode,
    InsertOutcome, RuntimeConfig, Severity,
};
use geno_core::nlu::{TrainedModel, MODEL_FILE};
use geno_core::store::{to_json, TargetAction};
use geno_server::wire::TrainResponse;
use geno_server::{ApiError, Engine, ErrorCode};

use crate::edit::load;
use crate::remote::Remote;
use crate::{fail, invalid, Cli, IO};

fn api(e: ApiError) -> anyhow::Error {
    match e.code {
        ErrorCode::IoFailure => fail(IO, e.message),
        _ => invalid(format!("{:?}: {}", e.code, e.message)),
    }
}

pub fn train(cli: &Cli) -> anyhow::Result<()> {
    let reply = match &cli.server {
        Some(url) => {
            let project = load(&cli.project)?;
            Remote::new(url).post::<TrainResponse>("/train", to_json(&project))?
        }
        None => Engine::open(&cli.project)?.train(None),
    };
    let trained = reply.map_err(api)?;
    println!("trained model {}", trained.model_version);
    Ok(())
}

pub fn build(cli: &Cli, server_url: Option<&str>) -> anyhow::Result<()> {
    let project = load(&cli.project)?;
    let model_path = cli.project.join(MODEL_FILE);
    let model = TrainedModel::load(&model_path)
        .ok()
        .filter(|m| m.is_current_for(&project))
        .ok_or_else(|| invalid("no trained model for the current intents; run `geno train` first"))?;
    let mut config = RuntimeConfig::default();
    if let Some(url) = server_url {
        config.server_url = url.to_string();
    }
    let manifest = emit_runtime_artifacts(&project, &model, &cli.app_root(), &config).map_err(|e| match e {
        CodegenError::IoFailure { .. } => anyhow::Error::from(e),
        other => invalid(other.to_string()),
    })?;
    for f in &manifest.files {
        let verb = if f.changed { "wrote" } else { "unchanged" };
        println!("{verb} {} sha256 {}", f.path, f.sha256);
    }
    if manifest.script_inserted {
        println!("linked {} from {}", manifest.files[0].path, manifest.entry_html);
    }
    Ok(())
}

pub fn scan(file: &Path) -> anyhow::Result<()> {
    let source = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let name = file.to_string_lossy();
    let report = scan_functions(&source, &name);
    for sig in &report.signatures {
        println!(
            "{}({})\t{}:{}",
            sig.name,
            sig.parameters.join(", "),
            sig.source_file,
            sig.line_number
        );
    }
    for d in &report.diagnostics {
        let severity = match d.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        println!("{severity}: {name}:{}: {}", d.line, d.message);
    }
    Ok(())
}

pub fn skeleton(cli: &Cli, intent: &str, file: Option<&Path>, print: bool) -> anyhow::Result<()> {
    let project = load(&cli.project)?;
    let intent = project
        .intent(intent)
        .ok_or_else(|| invalid(format!("no intent {intent:?}")))?;
    let code = |e: CodegenError| invalid(e.to_string());
    if print {
        print!("{}", generate_skeleton(intent).map_err(code)?);
        return Ok(());
    }
    let relative = match (file, &intent.target) {
        (Some(f), _) => f.to_string_lossy().replace('\\', "/"),
        (None, TargetAction::Function { source_file, .. }) => source_file.clone(),
        (None, TargetAction::Demonstration { .. }) => {
            return Err(invalid(format!("intent {:?} does not target a function", intent.name)))
        }
    };
    let path = cli.app_root().join(&relative);
    let source = match fs::read_to_string(&path) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(anyhow::Error::from(e).context(format!("reading {}", path.display()))),
    };
    match insert_skeleton(&source, &relative, intent, InsertMode::Idempotent).map_err(code)? {
        InsertOutcome::Inserted(updated) => {
            fs::write(&path, updated).with_context(|| format!("writing {}", path.display()))?;
            println!("inserted skeleton for {} into {relative}", intent.name);
        }
        InsertOutcome::AlreadyPresent => println!("{relative} already defines the function for {}", intent.name),
    }
    Ok(())
}

pub fn serve(cli: &Cli, host: &str, port: u16) -> anyhow::Result<()> {
    let engine = Engine::open(&cli.project)?;
    let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        let addr = listener.local_addr()?;
        let engine = engine.with_runtime(RuntimeConfig {
            server_url: format!("http://{addr}"),
            ..RuntimeConfig::default()
        });
        println!("listening on http://{addr}");
        geno_server::serve(listener, Arc::new(engine)).await?;
        Ok(())
    })
}
