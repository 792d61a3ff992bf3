//! HTTP front end for a geno project: training, parsing, follow-up answers,
//! intent editing, demonstration recording and artifact download.
//!
//! [`Engine`] holds the request logic and is also used in-process by the CLI,
//! so both produce identical replies. [`router`] wraps it in JSON over HTTP.

pub mod engine;
pub mod http;
pub mod wire;

pub use engine::{Engine, Snapshot};
pub use http::{router, serve};
pub use wire::{ApiError, Envelope, ErrorCode};

/// Default bind address.
pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 7311;
