//! Std companion to `framegen-core`: release loading, JSONL formats, HTTP
//! backends, the end-to-end pipeline and the command line.

pub mod cli;
pub mod formats;
pub mod http;
pub mod pipeline;
pub mod protocol;
pub mod release;
pub mod splits;

pub use framegen_core as core;
