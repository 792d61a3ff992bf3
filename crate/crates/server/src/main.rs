use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use geno_core::codegen::RuntimeConfig;
use geno_server::{serve, Engine, DEFAULT_HOST, DEFAULT_PORT};

#[derive(Parser)]
#[command(name = "geno-server", about = "Serve a geno project over HTTP")]
struct Args {
    #[arg(long, default_value = DEFAULT_HOST)]
    host: String,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Project directory containing geno.json.
    #[arg(long, default_value = ".")]
    project: PathBuf,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
        .await
        .with_context(|| format!("binding {}:{}", args.host, args.port))?;
    let addr = listener.local_addr()?;
    let runtime = RuntimeConfig {
        server_url: format!("http://{addr}"),
        ..RuntimeConfig::default()
    };
    let engine = Engine::open(&args.project)
        .with_context(|| format!("opening project {}", args.project.display()))?
        .with_runtime(runtime);
    println!("listening on http://{addr}");
    serve(listener, Arc::new(engine)).await?;
    Ok(())
}
