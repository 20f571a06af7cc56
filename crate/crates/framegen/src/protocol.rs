//! JSON bodies of the generator, classifier and scorer endpoints.

use framegen_core::expand::ConditioningMode;
use framegen_core::genfilter::{ClassifierRequest, Decoding, GeneratorRequest};
use framegen_core::metrics::ScoreRequest;
use framegen_core::Span;
use serde::{Deserialize, Serialize};

pub use framegen_core::genfilter::{ClassifierResponse as ClassifyResponse, GeneratorResponse as GenerateResponse};
pub use framegen_core::metrics::ScoreResponse;

/// POST /generate
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub request_id: String,
    pub mode: ConditioningMode,
    pub frame: String,
    pub lu: String,
    /// Masked sentence in the mode's template.
    pub sentence_masked: String,
    pub fe_names: Vec<String>,
    pub n: usize,
    pub decoding: Decoding,
    /// Rendered few-shot prompt for instruction-following backends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

impl GenerateRequest {
    pub fn new(request_id: &str, r: &GeneratorRequest, prompt: Option<String>) -> Self {
        GenerateRequest {
            request_id: request_id.into(),
            mode: r.mode,
            frame: r.frame_name.clone(),
            lu: r.lu_lemma_pos.clone(),
            sentence_masked: r.surface.clone(),
            fe_names: r.masked_fes.clone(),
            n: r.n,
            decoding: r.decoding.clone(),
            prompt,
        }
    }
}

/// POST /classify. Spans are `[start, end)` character offsets into `text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub request_id: String,
    pub text: String,
    pub frame: String,
    pub lu_span: [usize; 2],
    pub fe_span: [usize; 2],
    /// `text` with LU and FE delimiter tokens, frame name appended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoded: Option<String>,
}

impl ClassifyRequest {
    pub fn new(request_id: &str, r: &ClassifierRequest) -> Self {
        ClassifyRequest {
            request_id: request_id.into(),
            text: r.text.clone(),
            frame: r.frame.clone(),
            lu_span: [r.lu_span.start, r.lu_span.end],
            fe_span: [r.fe_span.start, r.fe_span.end],
            encoded: Some(r.encoded()),
        }
    }

    pub fn to_core(&self) -> ClassifierRequest {
        ClassifierRequest {
            text: self.text.clone(),
            frame: self.frame.clone(),
            lu_span: Span::new(self.lu_span[0], self.lu_span[1]),
            fe_span: Span::new(self.fe_span[0], self.fe_span[1]),
        }
    }
}

/// POST /score
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreWireRequest {
    pub request_id: String,
    #[serde(flatten)]
    pub body: ScoreRequest,
}
