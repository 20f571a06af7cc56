//! Core algorithms for expanding a FrameNet-style lexical database with
//! generated, frame-semantically annotated sentences.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches the
//! filesystem, the network or a command line lives in the `framegen` crate;
//! model backends are reached through the traits in [`genfilter`] and
//! [`metrics`].

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod expand;
pub mod genfilter;
pub mod inflect;
pub mod lexicon;
pub mod metrics;
pub mod mock;
pub mod relations;
pub mod srl;
pub mod text;

pub use error::{BackendError, BackendErrorKind, Error, Result};
pub use lexicon::{
    AnnotatedSentence, Corpus, CorpusSentence, Coreness, DocId, FeId, FeSpan, Frame, FrameElement,
    FrameId, LexicalUnit, Lexicon, LexiconBuilder, LuAnnotation, LuId, Pos, RecordId, SentenceId,
    Source, Span, Split,
};
pub use relations::{FeRelationEdge, FrameRelationEdge, RelationType};
