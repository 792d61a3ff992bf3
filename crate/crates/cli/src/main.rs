use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geno_core::codegen::CodegenError;
use geno_core::nlu::NluError;
use geno_core::store::{BuiltinKind, StoreError};

mod edit;
mod remote;
mod repl;
mod tools;

pub const VALIDATION: u8 = 2;
pub const IO: u8 = 3;
pub const UNREACHABLE: u8 = 4;

/// An error with a chosen exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn fail(code: u8, message: impl Into<String>) -> anyhow::Error {
    Failure {
        code,
        message: message.into(),
    }
    .into()
}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    fail(VALIDATION, message)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        let io = cause.is::<std::io::Error>()
            || matches!(cause.downcast_ref::<StoreError>(), Some(StoreError::IoFailure { .. }))
            || matches!(cause.downcast_ref::<NluError>(), Some(NluError::Io { .. }))
            || matches!(
                cause.downcast_ref::<CodegenError>(),
                Some(CodegenError::IoFailure { .. })
            );
        if io {
            return IO;
        }
    }
    VALIDATION
}

#[derive(Parser)]
#[command(
    name = "geno",
    version,
    about = "Author, train, build and test voice + pointer commands for a web app"
)]
pub struct Cli {
    /// Project directory holding geno.json.
    #[arg(long, global = true, default_value = ".")]
    pub project: PathBuf,
    /// App root that source files and index.html are relative to; relative
    /// paths resolve against the project directory [default: the project directory].
    #[arg(long, global = true)]
    pub app: Option<PathBuf>,
    /// Talk to a running server instead of working in-process (train, test).
    #[arg(long, global = true)]
    pub server: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn app_root(&self) -> PathBuf {
        match &self.app {
            Some(app) => self.project.join(app),
            None => self.project.clone(),
        }
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Create an empty geno.json.
    Init {
        #[arg(long)]
        name: Option<String>,
        /// Overwrite an existing project.
        #[arg(long)]
        force: bool,
    },
    #[command(subcommand)]
    Intent(IntentCommand),
    #[command(subcommand)]
    Utterance(UtteranceCommand),
    /// Set or add a parameter of an intent.
    Param {
        intent: String,
        name: String,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long)]
        prompt: Option<String>,
    },
    /// Label characters [start, end) of an utterance as a parameter value.
    Label(LabelArgs),
    #[command(subcommand)]
    Context(ContextCommand),
    /// Train the model from geno.json.
    Train,
    /// Write geno/geno.js, geno/geno.json and geno/geno.model into the app and link the shim.
    Build {
        /// Server URL the shim should call.
        #[arg(long)]
        server_url: Option<String>,
    },
    /// Read utterances from stdin and print how each is handled.
    ///
    /// Each line is `utterance` or `utterance @ snapshot-file`. While a
    /// question is pending, the next line answers it.
    Test,
    /// List the functions a JavaScript file declares.
    Scan { file: PathBuf },
    /// Append a function skeleton for an intent to its source file.
    Skeleton {
        intent: String,
        /// Target file relative to the app root [default: the intent's source file].
        #[arg(long)]
        file: Option<PathBuf>,
        /// Print the skeleton instead of writing it.
        #[arg(long)]
        print: bool,
    },
    /// Run the HTTP server for this project.
    Serve {
        #[arg(long, default_value = geno_server::DEFAULT_HOST)]
        host: String,
        #[arg(long, default_value_t = geno_server::DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Subcommand)]
pub enum IntentCommand {
    /// Add an intent targeting a scanned function or a recorded demonstration.
    Add {
        name: String,
        /// Function to call [default: the intent name].
        #[arg(long, requires = "file")]
        function: Option<String>,
        /// JavaScript file declaring the function, relative to the app root.
        #[arg(long, conflicts_with = "demo")]
        file: Option<PathBuf>,
        /// Demonstration script: a JSON list of recorded steps.
        #[arg(long)]
        demo: Option<PathBuf>,
    },
    Remove {
        name: String,
    },
    List,
}

#[derive(Subcommand)]
pub enum UtteranceCommand {
    Add { intent: String, text: String },
    List { intent: String },
}

#[derive(Args)]
pub struct LabelArgs {
    pub intent: String,
    pub utterance_index: usize,
    #[arg(required_unless_present = "show_tokens")]
    pub start: Option<usize>,
    #[arg(required_unless_present = "show_tokens")]
    pub end: Option<usize>,
    #[arg(required_unless_present = "show_tokens")]
    pub param: Option<String>,
    /// Print token offsets of the utterance instead of labeling.
    #[arg(long)]
    pub show_tokens: bool,
}

#[derive(Subcommand)]
pub enum ContextCommand {
    /// Fill a parameter from a hovered or selected element's attribute.
    Set {
        intent: String,
        param: String,
        /// JSON element snapshot of an example element.
        #[arg(long)]
        from_snapshot: PathBuf,
        #[arg(long)]
        attribute: String,
        /// Accept a marquee selection of several elements.
        #[arg(long)]
        multi: bool,
    },
    /// Remove a parameter's context filter.
    Clear { intent: String, param: String },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Kind {
    Date,
    Number,
    FreeText,
}

impl From<Kind> for BuiltinKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Date => BuiltinKind::Date,
            Kind::Number => BuiltinKind::Number,
            Kind::FreeText => BuiltinKind::FreeText,
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Init { name, force } => edit::init(&cli.project, name.as_deref(), *force),
        Command::Intent(c) => edit::intent(cli, c),
        Command::Utterance(c) => edit::utterance(&cli.project, c),
        Command::Param {
            intent,
            name,
            kind,
            prompt,
        } => edit::param(&cli.project, intent, name, kind.map(Into::into), prompt.as_deref()),
        Command::Label(args) => edit::label(&cli.project, args),
        Command::Context(c) => edit::context(&cli.project, c),
        Command::Train => tools::train(cli),
        Command::Build { server_url } => tools::build(cli, server_url.as_deref()),
        Command::Test => repl::run(cli, std::io::stdin().lock(), &mut std::io::stdout().lock()),
        Command::Scan { file } => tools::scan(file),
        Command::Skeleton { intent, file, print } => tools::skeleton(cli, intent, file.as_deref(), *print),
        Command::Serve { host, port } => tools::serve(cli, host, *port),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
