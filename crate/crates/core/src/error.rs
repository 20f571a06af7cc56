use alloc::string::String;

use crate::lexicon::{FeId, FrameId, LuId, RecordId, SentenceId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown frame id {0}")]
    UnknownFrame(FrameId),
    #[error("unknown frame element id {0}")]
    UnknownFe(FeId),
    #[error("unknown lexical unit id {0}")]
    UnknownLu(LuId),
    #[error("unknown lexical unit {0:?}")]
    UnknownLuName(String),
    #[error("unknown record id {0}")]
    UnknownRecord(RecordId),
    #[error("unknown sentence id {0}")]
    UnknownSentence(SentenceId),
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("duplicate {kind} {name:?}")]
    Duplicate { kind: &'static str, name: String },
    #[error("invalid span [{start}, {end}) for text of length {len}")]
    InvalidSpan { start: usize, end: usize, len: usize },
    #[error("lexicon contains no lexical units")]
    EmptyLexicon,
    #[error("LU {target} cannot replace {donor}: {reason}")]
    Mismatch { donor: LuId, target: LuId, reason: &'static str },
    #[error("no alignment between target LU {lemma:?} and donor token(s)")]
    Unaligned { lemma: String },
    #[error("nothing to generate: instance has no candidate FE spans")]
    NothingToGenerate,
    #[error("expected {expected} fills, got {got}")]
    FillCount { expected: usize, got: usize },
    #[error("fill {index} is empty")]
    EmptyFill { index: usize },
    #[error("span index {index} out of range ({len} spans)")]
    SpanIndex { index: usize, len: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendErrorKind {
    /// Network or server failure; retried by transports.
    Transport,
    /// The backend answered with something outside the protocol.
    Protocol,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind:?} error for request {request_id}: {message}")]
pub struct BackendError {
    pub request_id: String,
    pub kind: BackendErrorKind,
    pub message: String,
}

impl BackendError {
    pub fn transport(request_id: impl Into<String>, message: impl Into<String>) -> Self {
        BackendError {
            request_id: request_id.into(),
            kind: BackendErrorKind::Transport,
            message: message.into(),
        }
    }

    pub fn protocol(request_id: impl Into<String>, message: impl Into<String>) -> Self {
        BackendError {
            request_id: request_id.into(),
            kind: BackendErrorKind::Protocol,
            message: message.into(),
        }
    }
}
