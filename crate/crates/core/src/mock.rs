//! In-process backends for tests and offline runs: an identity generator,
//! a seeded mutating generator, a gold-lookup classifier and a fixed-rate
//! scorer.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BackendError;
use crate::expand::{MaskedInstance, ReplacementInstance};
use crate::genfilter::{
    ClassifierRequest, ClassifierResponse, Classifier, Generator, GeneratorRequest, GeneratorResponse,
    RawCandidate, NOT_AN_FE,
};
use crate::lexicon::{AnnotatedSentence, Lexicon, Span};
use crate::metrics::{ScoreItem, ScoreRequest, ScoreResponse, Scorer, ScoreMode};
use crate::text::{char_len, slice};

/// FNV-1a, used to derive per-request seeds.
pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Fills every placeholder with the span text it replaced.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityGenerator;

impl Generator for IdentityGenerator {
    fn id(&self) -> String {
        "mock-identity".into()
    }

    fn generate(
        &self,
        request_id: &str,
        request: &GeneratorRequest,
        instance: &MaskedInstance,
    ) -> Result<GeneratorResponse, BackendError> {
        let fills: Vec<String> = instance.masked_fes.iter().map(|m| m.original_span_text.clone()).collect();
        Ok(GeneratorResponse {
            request_id: request_id.into(),
            candidates: (0..request.n).map(|_| RawCandidate { fills: Some(fills.clone()), text: None }).collect(),
        })
    }
}

/// Replaces each fill with a nonsense token at `mutation_rate`, and emits a
/// sample with the wrong fill count at `malformed_rate`.
#[derive(Debug, Clone, Copy)]
pub struct MutatingGenerator {
    pub seed: u64,
    pub mutation_rate: f64,
    pub malformed_rate: f64,
}

impl MutatingGenerator {
    pub fn new(seed: u64, mutation_rate: f64) -> Self {
        MutatingGenerator { seed, mutation_rate, malformed_rate: 0.0 }
    }
}

impl Generator for MutatingGenerator {
    fn id(&self) -> String {
        format!("mock-mutating-{}", self.seed)
    }

    fn generate(
        &self,
        request_id: &str,
        request: &GeneratorRequest,
        instance: &MaskedInstance,
    ) -> Result<GeneratorResponse, BackendError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(request_id));
        let mut candidates = Vec::with_capacity(request.n);
        for _ in 0..request.n {
            if rng.gen_bool(self.malformed_rate.clamp(0.0, 1.0)) {
                candidates.push(RawCandidate { fills: Some(Vec::new()), text: None });
                continue;
            }
            let fills = instance
                .masked_fes
                .iter()
                .map(|m| {
                    if rng.gen_bool(self.mutation_rate.clamp(0.0, 1.0)) {
                        format!("zq{:06x}", rng.gen_range(0..0x100_0000u32))
                    } else {
                        m.original_span_text.clone()
                    }
                })
                .collect();
            candidates.push(RawCandidate { fills: Some(fills), text: None });
        }
        Ok(GeneratorResponse { request_id: request_id.into(), candidates })
    }
}

/// Gold-annotation lookup. A span is labeled by exact (text, span) match
/// first, then by its surface string when that string carries a single FE
/// label within the frame; anything else is "Not an FE".
#[derive(Debug, Clone, Default)]
pub struct OracleClassifier {
    exact: BTreeMap<(String, usize, usize), String>,
    by_surface: BTreeMap<(String, String), Option<String>>,
}

impl OracleClassifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<'a>(&mut self, frame: &str, text: &str, spans: impl IntoIterator<Item = (Span, &'a str)>) {
        for (span, label) in spans {
            self.exact.insert((text.to_string(), span.start, span.end), label.to_string());
            if let Some(surface) = slice(text, span) {
                let key = (frame.to_string(), surface.to_string());
                match self.by_surface.get(&key) {
                    None => {
                        self.by_surface.insert(key, Some(label.to_string()));
                    }
                    Some(Some(l)) if l != label => {
                        self.by_surface.insert(key, None);
                    }
                    _ => {}
                }
            }
        }
    }

    pub fn from_instances<'a>(instances: impl IntoIterator<Item = &'a ReplacementInstance>) -> Self {
        let mut o = Self::new();
        for i in instances {
            o.add(&i.frame_name, &i.text, i.fes.iter().map(|f| (f.span, f.name.as_str())));
        }
        o
    }

    /// Gold spans of lexicon-validated records; records referencing unknown
    /// ids are skipped.
    pub fn from_records<'a>(lexicon: &Lexicon, records: impl IntoIterator<Item = &'a AnnotatedSentence>) -> Self {
        let mut o = Self::new();
        for r in records {
            let Ok(frame) = lexicon.lu_frame(r.lu) else { continue };
            let labels: Vec<(Span, String)> = r
                .fes
                .iter()
                .filter_map(|f| lexicon.fe(f.fe).ok().map(|fe| (f.span, fe.name.clone())))
                .collect();
            o.add(&frame.name, &r.text, labels.iter().map(|(s, l)| (*s, l.as_str())));
        }
        o
    }

    pub fn label(&self, request: &ClassifierRequest) -> String {
        let key = (request.text.clone(), request.fe_span.start, request.fe_span.end);
        if let Some(l) = self.exact.get(&key) {
            return l.clone();
        }
        slice(&request.text, request.fe_span)
            .and_then(|s| self.by_surface.get(&(request.frame.clone(), s.to_string())))
            .and_then(|l| l.clone())
            .unwrap_or_else(|| NOT_AN_FE.to_string())
    }
}

impl Classifier for OracleClassifier {
    fn classify(&self, request_id: &str, request: &ClassifierRequest) -> Result<ClassifierResponse, BackendError> {
        Ok(ClassifierResponse { request_id: request_id.into(), label: self.label(request), score: 1.0 })
    }
}

/// Reports `nll_per_char` nats per character, one token per whitespace word.
#[derive(Debug, Clone, Copy)]
pub struct UniformScorer {
    pub nll_per_char: f64,
}

impl Scorer for UniformScorer {
    fn score(&self, request_id: &str, request: &ScoreRequest) -> Result<ScoreResponse, BackendError> {
        let items = match request.mode {
            ScoreMode::Nll => request
                .texts
                .iter()
                .map(|t| ScoreItem::Nll {
                    nll: self.nll_per_char * char_len(t) as f64,
                    token_count: t.split_whitespace().count(),
                })
                .collect(),
            ScoreMode::Pairwise => {
                let refs = request.references.as_deref().unwrap_or(&[]);
                if refs.len() != request.texts.len() {
                    return Err(BackendError::protocol(request_id, "pairwise needs one reference per text"));
                }
                request
                    .texts
                    .iter()
                    .zip(refs)
                    .map(|(t, r)| ScoreItem::Score {
                        score: -self.nll_per_char * (char_len(t) as f64 - char_len(r) as f64).abs(),
                    })
                    .collect()
            }
        };
        Ok(ScoreResponse { request_id: request_id.into(), items })
    }
}
