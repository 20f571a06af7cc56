//! Generator requests and prompts, response parsing, splicing of fills into
//! sentences, and the strict FE-fidelity filter.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{BackendError, Error, Result};
use crate::expand::{ConditioningMode, LabeledSpan, MaskedInstance};
use crate::lexicon::{Lexicon, LuId, RecordId, Span};
use crate::text::{char_len, CharIndex};

/// Label a classifier returns for a span that realizes no FE.
pub const NOT_AN_FE: &str = "Not an FE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub max_span_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding { temperature: 0.7, max_span_tokens: 24, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRequest {
    pub mode: ConditioningMode,
    pub frame_name: String,
    pub lu_lemma_pos: String,
    /// Masked sentence in the mode's template.
    pub surface: String,
    /// Masked sentence with bare placeholders.
    pub plain_surface: String,
    pub masked_fes: Vec<String>,
    pub n: usize,
    pub decoding: Decoding,
}

impl GeneratorRequest {
    pub fn new(instance: &MaskedInstance, n: usize, decoding: Decoding) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("candidate count n must be at least 1".into()));
        }
        if instance.masked_fes.is_empty() {
            return Err(Error::NothingToGenerate);
        }
        Ok(GeneratorRequest {
            mode: instance.mode,
            frame_name: instance.source.frame_name.clone(),
            lu_lemma_pos: instance.source.lu_name.clone(),
            surface: instance.surface.clone(),
            plain_surface: instance.plain_surface(),
            masked_fes: instance.fe_names(),
            n,
            decoding,
        })
    }
}

/// One worked example for the few-shot prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub frame: String,
    pub lu: String,
    pub sentence: String,
    pub fe_types: Vec<String>,
    pub output: Vec<String>,
}

pub fn default_exemplars() -> Vec<Exemplar> {
    serde_json::from_str(include_str!("../data/prompt_exemplars.json"))
        .expect("bundled exemplars are valid JSON")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptExample {
    pub input: String,
    pub output: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub title: String,
    pub definition: String,
    pub instructions: String,
    pub exemplars: Vec<PromptExample>,
    pub task_input: String,
}

fn uses_fe(mode: ConditioningMode) -> bool {
    mode != ConditioningMode::NoConditioning
}

fn uses_frame(mode: ConditioningMode) -> bool {
    mode == ConditioningMode::FrameFeConditioning
}

fn task_line(mode: ConditioningMode, frame: &str, lu: &str, sentence: &str, fes: &[String]) -> String {
    let mut out = String::new();
    if uses_frame(mode) {
        out.push_str(&format!("Frame: {frame}. "));
    }
    out.push_str(&format!("Lexical Unit: {lu}. Sentence: {sentence}"));
    if uses_fe(mode) {
        out.push_str(&format!(" FE Type: {}.", fes.join(", ")));
    }
    out
}

const ORDINALS: [&str; 10] =
    ["first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"];

fn quoted_list(items: &[String]) -> String {
    let q: Vec<String> = items.iter().map(|s| format!("\"{s}\"")).collect();
    match q.len() {
        0 => String::new(),
        1 => q[0].clone(),
        n => format!("{} and {}", q[..n - 1].join(", "), q[n - 1]),
    }
}

fn reason(mode: ConditioningMode, ex: &Exemplar) -> String {
    let mut parts = Vec::new();
    if uses_frame(mode) {
        let noun = if ex.fe_types.len() == 1 { "frame element" } else { "frame elements" };
        parts.push(format!(
            "The frame \"{}\" is associated with {noun} {}.",
            ex.frame,
            quoted_list(&ex.fe_types)
        ));
    }
    for (i, fill) in ex.output.iter().enumerate() {
        let ord = ORDINALS.get(i).copied().unwrap_or("next");
        let mut s = format!("The answer \"{fill}\" fills up the {ord} blank");
        if uses_fe(mode) {
            let fe = ex.fe_types.get(i).map(String::as_str).unwrap_or("");
            if i == 0 {
                s.push_str(&format!(" because it is a frame element (FE) of type \"{fe}\""));
            } else {
                s.push_str(&format!(" because it is an FE of type \"{fe}\""));
            }
        }
        s.push('.');
        parts.push(s);
    }
    parts.join(" ")
}

/// Few-shot prompt for instruction-following generators. Frame lines only
/// appear under Frame+FE conditioning; FE-type lines under FE and Frame+FE.
pub fn build_prompt(request: &GeneratorRequest, exemplars: &[Exemplar]) -> Prompt {
    let mode = request.mode;
    let mut definition =
        String::from("You need to complete the given sentence containing one or multiple blanks (<mask>).");
    if uses_fe(mode) {
        definition.push_str(" Your answer must be of the frame element type specified in FE Type.");
    }
    let provided = match mode {
        ConditioningMode::NoConditioning => "lexical unit",
        ConditioningMode::FeConditioning => "lexical unit and FE type",
        ConditioningMode::FrameFeConditioning => "frame, lexical unit and FE type",
    };
    let instructions = format!(
        "Fill in the blanks in the sentence based on the provided {provided}. Generate the spans that fill up the blanks ONLY. Do NOT generate the whole sentence or existing parts of the sentence. Separate the generated spans of different blanks by a comma. Generate the output of the task instance ONLY. Do NOT include existing words or phrases before or after the blank."
    );
    Prompt {
        title: "Sentence completion using frame elements".into(),
        definition,
        instructions,
        exemplars: exemplars
            .iter()
            .map(|ex| PromptExample {
                input: task_line(mode, &ex.frame, &ex.lu, &ex.sentence, &ex.fe_types),
                output: ex.output.join(", "),
                reason: reason(mode, ex),
            })
            .collect(),
        task_input: task_line(
            mode,
            &request.frame_name,
            &request.lu_lemma_pos,
            &request.plain_surface,
            &request.masked_fes,
        ),
    }
}

impl Prompt {
    pub fn render(&self) -> String {
        let mut out = format!("Title: {}\nDefinition: {}\n", self.title, self.definition);
        for ex in &self.exemplars {
            out.push_str(&format!(
                "Example Input: {}\nExample Output: {}\nReason: {}\n",
                ex.input, ex.output, ex.reason
            ));
        }
        out.push_str(&format!("Prompt: {}\nTask Input: {}\nTask Output:", self.instructions, self.task_input));
        out
    }
}

/// A backend sample: either pre-split fills or raw comma-separated text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawCandidate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fills: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorResponse {
    pub request_id: String,
    pub candidates: Vec<RawCandidate>,
}

pub trait Generator {
    fn id(&self) -> String;

    /// One call asking for `request.n` samples.
    fn generate(
        &self,
        request_id: &str,
        request: &GeneratorRequest,
        instance: &MaskedInstance,
    ) -> core::result::Result<GeneratorResponse, BackendError>;
}

/// Split a comma-separated answer into exactly `k` fields. Commas beyond
/// the first `k - 1` stay inside the last field. `None` when there are
/// fewer than `k` fields.
pub fn parse_response(text: &str, k: usize) -> Option<Vec<String>> {
    if k == 0 {
        return None;
    }
    let text = text.trim();
    let mut parts = Vec::with_capacity(k);
    let mut rest = text;
    for _ in 0..k - 1 {
        let (head, tail) = rest.split_once(',')?;
        parts.push(head.trim().to_string());
        rest = tail;
    }
    parts.push(rest.trim().to_string());
    Some(parts)
}

/// Normalize a backend sample into `k` fills.
pub fn candidate_fills(raw: &RawCandidate, k: usize) -> Option<Vec<String>> {
    match (&raw.fills, &raw.text) {
        (Some(f), _) if f.len() == k => Some(f.iter().map(|s| s.trim().to_string()).collect()),
        (Some(f), _) if f.len() == 1 => parse_response(&f[0], k),
        (Some(_), _) => None,
        (None, Some(t)) => parse_response(t, k),
        (None, None) => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationCandidate {
    pub instance_id: String,
    pub index: usize,
    pub fills: Vec<String>,
    pub original_fills: Vec<String>,
    pub text: String,
    pub targets: Vec<Span>,
    pub fes: Vec<LabeledSpan>,
    /// Positions in `fes` of the generated spans, in placeholder order.
    pub generated: Vec<usize>,
    pub generator_id: String,
    pub frame_name: String,
    pub target_lu: LuId,
    pub lu_name: String,
    pub donor_lu_name: String,
    pub donor_id: RecordId,
    pub mode: ConditioningMode,
}

impl GenerationCandidate {
    pub fn id(&self) -> String {
        format!("{}#{}", self.instance_id, self.index)
    }

    pub fn span_text(&self, span: Span) -> Option<&str> {
        crate::text::slice(&self.text, span)
    }
}

/// Substitute fills for placeholders left to right and recompute every span.
pub fn splice(
    masked: &MaskedInstance,
    fills: &[String],
    generator_id: &str,
    index: usize,
) -> Result<GenerationCandidate> {
    let k = masked.masked_fes.len();
    if fills.len() != k {
        return Err(Error::FillCount { expected: k, got: fills.len() });
    }
    let fills: Vec<String> = fills.iter().map(|f| f.trim().to_string()).collect();
    if let Some(i) = fills.iter().position(|f| f.is_empty()) {
        return Err(Error::EmptyFill { index: i });
    }
    let src = &masked.source;

    // (old span, new length) per masked FE, in text order
    let edits: Vec<(Span, usize)> = masked
        .masked_fes
        .iter()
        .zip(&fills)
        .map(|(m, f)| (src.fes[m.fe_index].span, char_len(f)))
        .collect();
    let shift = |p: usize| -> usize {
        let mut delta: isize = 0;
        for &(old, new_len) in &edits {
            if p >= old.end {
                delta += new_len as isize - old.len() as isize;
            }
        }
        (p as isize + delta) as usize
    };

    let mut text = String::new();
    for (i, seg) in masked.segments.iter().enumerate() {
        text.push_str(seg);
        if let Some(f) = fills.get(i) {
            text.push_str(f);
        }
    }

    let mut fes = src.fes.clone();
    let mut generated = Vec::with_capacity(k);
    for f in fes.iter_mut() {
        f.span = Span::new(shift(f.span.start), shift(f.span.end));
    }
    for (m, &(_, new_len)) in masked.masked_fes.iter().zip(&edits) {
        let f = &mut fes[m.fe_index];
        f.span = Span::new(f.span.start, f.span.start + new_len);
        generated.push(m.fe_index);
    }
    let targets = src.targets.iter().map(|t| Span::new(shift(t.start), shift(t.end))).collect();

    Ok(GenerationCandidate {
        instance_id: masked.id.clone(),
        index,
        original_fills: masked.masked_fes.iter().map(|m| m.original_span_text.clone()).collect(),
        fills,
        text,
        targets,
        fes,
        generated,
        generator_id: generator_id.into(),
        frame_name: src.frame_name.clone(),
        target_lu: src.target_lu,
        lu_name: src.lu_name.clone(),
        donor_lu_name: src.donor_lu_name.clone(),
        donor_id: src.donor_id,
        mode: masked.mode,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overgeneration {
    pub candidates: Vec<GenerationCandidate>,
    /// Samples dropped for a wrong fill count, an empty fill, or exceeding `n`.
    pub dropped: usize,
}

/// Ask the backend once for `request.n` samples and splice each parseable one.
pub fn overgenerate(
    masked: &MaskedInstance,
    request: &GeneratorRequest,
    backend: &dyn Generator,
    request_id: &str,
) -> Result<Overgeneration> {
    let resp = backend.generate(request_id, request, masked)?;
    if resp.request_id != request_id {
        return Err(BackendError::protocol(
            request_id,
            format!("response echoes request id {:?}", resp.request_id),
        )
        .into());
    }
    let k = masked.masked_fes.len();
    let generator_id = backend.id();
    let mut out = Overgeneration::default();
    for (i, raw) in resp.candidates.iter().enumerate() {
        if i >= request.n {
            out.dropped += 1;
            continue;
        }
        match candidate_fills(raw, k).map(|f| splice(masked, &f, &generator_id, out.candidates.len())) {
            Some(Ok(c)) => out.candidates.push(c),
            _ => out.dropped += 1,
        }
    }
    Ok(out)
}

/// A span query for the FE classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRequest {
    pub text: String,
    pub frame: String,
    pub lu_span: Span,
    pub fe_span: Span,
}

pub const LU_START: &str = "<LU_START>";
pub const LU_END: &str = "<LU_END>";
pub const FE_START: &str = "<FE_START>";
pub const FE_END: &str = "<FE_END>";

impl ClassifierRequest {
    /// Classifier input: delimiters around the LU and the queried span, the
    /// frame name appended at the end.
    pub fn encoded(&self) -> String {
        let idx = CharIndex::new(&self.text);
        let mut marks: Vec<(usize, u8, &str)> = alloc::vec![
            (self.lu_span.start, 1, LU_START),
            (self.lu_span.end, 0, LU_END),
            (self.fe_span.start, 1, FE_START),
            (self.fe_span.end, 0, FE_END),
        ];
        // closing marks before opening marks at the same offset
        marks.sort_by_key(|m| (m.0, m.1));
        let mut out = String::new();
        let mut cursor = 0;
        for (pos, opening, tok) in marks {
            let pos = pos.min(idx.len());
            let piece = idx.slice(Span::new(cursor, pos)).unwrap_or("");
            out.push_str(piece);
            if opening == 1 {
                if !out.is_empty() && !out.ends_with(' ') {
                    out.push(' ');
                }
                out.push_str(tok);
                out.push(' ');
            } else {
                while out.ends_with(' ') {
                    out.pop();
                }
                out.push(' ');
                out.push_str(tok);
            }
            cursor = pos;
        }
        let tail = idx.slice(Span::new(cursor, idx.len())).unwrap_or("");
        if !tail.is_empty() && !tail.starts_with(' ') && !tail.starts_with(|c: char| c.is_ascii_punctuation()) {
            out.push(' ');
        }
        out.push_str(tail);
        out.push(' ');
        out.push_str(&self.frame);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResponse {
    pub request_id: String,
    pub label: String,
    pub score: f64,
}

pub trait Classifier {
    fn classify(
        &self,
        request_id: &str,
        request: &ClassifierRequest,
    ) -> core::result::Result<ClassifierResponse, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanPrediction {
    pub fe_predicted: String,
    pub score: f64,
}

fn frame_labels(lexicon: &Lexicon, frame: &str) -> Result<BTreeSet<String>> {
    let frame = lexicon
        .frame_by_name(frame)
        .ok_or_else(|| Error::Dangling(format!("unknown frame {frame:?}")))?;
    let mut labels = BTreeSet::new();
    for id in &frame.fes {
        labels.insert(lexicon.fe(*id)?.name.clone());
    }
    labels.insert(NOT_AN_FE.into());
    Ok(labels)
}

/// Classify `candidate.fes[span_index]`.
pub fn classify_span(
    lexicon: &Lexicon,
    candidate: &GenerationCandidate,
    span_index: usize,
    backend: &dyn Classifier,
) -> Result<SpanPrediction> {
    let f = candidate
        .fes
        .get(span_index)
        .ok_or(Error::SpanIndex { index: span_index, len: candidate.fes.len() })?;
    let labels = frame_labels(lexicon, &candidate.frame_name)?;
    let request = ClassifierRequest {
        text: candidate.text.clone(),
        frame: candidate.frame_name.clone(),
        lu_span: Span::hull(&candidate.targets).unwrap_or(Span::new(0, 0)),
        fe_span: f.span,
    };
    let request_id = format!("{}/{}", candidate.id(), span_index);
    let resp = backend.classify(&request_id, &request)?;
    if resp.request_id != request_id {
        return Err(BackendError::protocol(&request_id, format!("response echoes {:?}", resp.request_id)).into());
    }
    if !labels.contains(&resp.label) {
        return Err(BackendError::protocol(
            &request_id,
            format!("label {:?} is not an FE of {} nor {NOT_AN_FE:?}", resp.label, candidate.frame_name),
        )
        .into());
    }
    if !(0.0..=1.0).contains(&resp.score) {
        return Err(BackendError::protocol(&request_id, format!("score {} outside [0, 1]", resp.score)).into());
    }
    Ok(SpanPrediction { fe_predicted: resp.label, score: resp.score })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanVerdict {
    pub fe_expected: String,
    pub fe_predicted: String,
    pub score: f64,
}

impl SpanVerdict {
    pub fn matches(&self) -> bool {
        self.fe_expected == self.fe_predicted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub per_span: Vec<SpanVerdict>,
    pub passed: bool,
    pub fidelity: f64,
}

impl FilterVerdict {
    pub fn from_spans(per_span: Vec<SpanVerdict>) -> Self {
        let matched = per_span.iter().filter(|s| s.matches()).count();
        let fidelity = if per_span.is_empty() { 0.0 } else { matched as f64 / per_span.len() as f64 };
        FilterVerdict { passed: !per_span.is_empty() && matched == per_span.len(), fidelity, per_span }
    }

    pub fn mismatches(&self) -> usize {
        self.per_span.iter().filter(|s| !s.matches()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Scored(FilterVerdict),
    Unverifiable { error: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Scored(v) if v.passed)
    }

    pub fn scored(&self) -> Option<&FilterVerdict> {
        match self {
            Verdict::Scored(v) => Some(v),
            Verdict::Unverifiable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub candidate_id: String,
    pub verdict: Verdict,
}

/// Classify every generated span of one candidate. Classifier failures make
/// the candidate unverifiable rather than failing the batch.
pub fn verify_candidate(lexicon: &Lexicon, candidate: &GenerationCandidate, backend: &dyn Classifier) -> Verdict {
    let mut per_span = Vec::with_capacity(candidate.generated.len());
    for &i in &candidate.generated {
        match classify_span(lexicon, candidate, i, backend) {
            Ok(p) => per_span.push(SpanVerdict {
                fe_expected: candidate.fes[i].name.clone(),
                fe_predicted: p.fe_predicted,
                score: p.score,
            }),
            Err(e) => return Verdict::Unverifiable { error: e.to_string() },
        }
    }
    if per_span.is_empty() {
        return Verdict::Unverifiable { error: "candidate has no generated spans".into() };
    }
    Verdict::Scored(FilterVerdict::from_spans(per_span))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub retained: Vec<GenerationCandidate>,
    pub verdicts: Vec<CandidateVerdict>,
}

impl FilterOutcome {
    /// Pair candidates with their verdicts; keeps passing ones in input order.
    pub fn from_verdicts(candidates: &[GenerationCandidate], verdicts: Vec<Verdict>) -> Self {
        let mut out = FilterOutcome::default();
        for (c, v) in candidates.iter().zip(verdicts) {
            if v.passed() {
                out.retained.push(c.clone());
            }
            out.verdicts.push(CandidateVerdict { candidate_id: c.id(), verdict: v });
        }
        out
    }

    pub fn unverifiable(&self) -> usize {
        self.verdicts.iter().filter(|v| v.verdict.scored().is_none()).count()
    }

    pub fn scored(&self) -> impl Iterator<Item = &FilterVerdict> {
        self.verdicts.iter().filter_map(|v| v.verdict.scored())
    }
}

/// Keep only candidates whose every generated span is classified as the
/// FE it replaced.
pub fn strict_filter(
    lexicon: &Lexicon,
    candidates: &[GenerationCandidate],
    backend: &dyn Classifier,
) -> FilterOutcome {
    let verdicts = candidates.iter().map(|c| verify_candidate(lexicon, c, backend)).collect();
    FilterOutcome::from_verdicts(candidates, verdicts)
}

/// Span-level share of generated spans whose predicted FE matches.
pub fn fe_fidelity<'a>(verdicts: impl IntoIterator<Item = &'a FilterVerdict>) -> Result<f64> {
    let (mut matched, mut total) = (0usize, 0usize);
    for v in verdicts {
        total += v.per_span.len();
        matched += v.per_span.iter().filter(|s| s.matches()).count();
    }
    if total == 0 {
        return Err(Error::EmptyInput("no span verdicts"));
    }
    Ok(matched as f64 / total as f64)
}

/// Count per outcome; handy for ledgers.
pub fn outcome_counts(outcome: &FilterOutcome) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    m.insert("retained", outcome.retained.len());
    m.insert("unverifiable", outcome.unverifiable());
    m.insert("dropped", outcome.verdicts.len() - outcome.retained.len() - outcome.unverifiable());
    m
}

#[cfg(test)]
mod tests {
    use crate::mock::*;
    use super::*;
    use crate::expand::{build_masked, Expander, SelectionConfig};
    use crate::lexicon::fixtures::*;
    use crate::text::slice;

    fn masked(mode: ConditioningMode) -> (Lexicon, MaskedInstance) {
        let lex = lexicon();
        let inst = Expander::new(&lex, SelectionConfig::default()).replace_lu(&growing_up(), LuId(2002)).unwrap();
        let m = build_masked(&inst, mode).unwrap();
        (lex, m)
    }

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn response_parsing_follows_comma_grammar() {
        // oracle: manual split at the first comma
        assert_eq!(parse_response("boys, for good grades", 2), Some(s(&["boys", "for good grades"])));
        assert_eq!(parse_response("boys", 2), None);
        assert_eq!(parse_response("a, b, c, d", 2), Some(s(&["a", "b, c, d"])));
        assert_eq!(parse_response("x, y", 1), Some(s(&["x, y"])));
        let raw = RawCandidate { fills: Some(s(&["boys, girls"])), text: None };
        assert_eq!(candidate_fills(&raw, 2), Some(s(&["boys", "girls"])));
        let raw = RawCandidate { fills: Some(s(&["a", "b", "c"])), text: None };
        assert_eq!(candidate_fills(&raw, 2), None);
    }

    #[test]
    fn splice_identity_and_shifted_offsets() {
        let (_, m) = masked(ConditioningMode::NoConditioning);
        let ident = splice(&m, &s(&["boys", "for breaking the rules"]), "g", 0).unwrap();
        assert_eq!(ident.text, "Growing up, boys are rewarded for breaking the rules.");
        assert_eq!(ident.text, m.source.text);
        assert_eq!(ident.fes, m.source.fes);

        let c = splice(&m, &s(&["the younger children", "for good grades"]), "g", 1).unwrap();
        assert_eq!(c.text, "Growing up, the younger children are rewarded for good grades.");
        for f in &c.fes {
            let t = slice(&c.text, f.span).unwrap();
            match f.name.as_str() {
                "Time" => assert_eq!(t, "Growing up"),
                "Evaluee" => assert_eq!(t, "the younger children"),
                "Reason" => assert_eq!(t, "for good grades"),
                _ => unreachable!(),
            }
        }
        assert_eq!(slice(&c.text, c.targets[0]), Some("rewarded"));
        assert!(matches!(splice(&m, &s(&["boys", "  "]), "g", 2), Err(Error::EmptyFill { index: 1 })));
        assert!(matches!(splice(&m, &s(&["boys"]), "g", 2), Err(Error::FillCount { .. })));
    }

    #[test]
    fn prompt_lines_depend_on_mode() {
        let (_, m) = masked(ConditioningMode::FrameFeConditioning);
        let req = GeneratorRequest::new(&m, 3, Decoding::default()).unwrap();
        let p = build_prompt(&req, &default_exemplars());
        assert_eq!(
            p.task_input,
            "Frame: Rewards_and_punishments. Lexical Unit: reward.v. Sentence: Growing up, <mask> are rewarded <mask>. FE Type: Evaluee, Reason."
        );
        assert_eq!(
            p.exemplars[0].input,
            "Frame: Rewards_and_Punishments. Lexical Unit: discipline.v. Sentence: Growing up, <mask> are disciplined <mask>. FE Type: Evaluee, Reason."
        );
        assert_eq!(p.exemplars[0].output, "boys, for breaking the rules");
        assert_eq!(
            p.exemplars[0].reason,
            "The frame \"Rewards_and_Punishments\" is associated with frame elements \"Evaluee\" and \"Reason\". The answer \"boys\" fills up the first blank because it is a frame element (FE) of type \"Evaluee\". The answer \"for breaking the rules\" fills up the second blank because it is an FE of type \"Reason\"."
        );
        assert!(p.instructions.contains("based on the provided frame, lexical unit and FE type."));
        assert!(p.render().ends_with("Task Output:"));

        let mut fe_req = req.clone();
        fe_req.mode = ConditioningMode::FeConditioning;
        let p = build_prompt(&fe_req, &default_exemplars());
        assert!(!p.task_input.contains("Frame:"));
        assert!(p.task_input.contains("FE Type: Evaluee, Reason."));
        assert!(p.definition.ends_with("specified in FE Type."));

        let mut none = req;
        none.mode = ConditioningMode::NoConditioning;
        let p = build_prompt(&none, &default_exemplars());
        assert!(!p.task_input.contains("Frame:") && !p.task_input.contains("FE Type"));
        assert!(!p.definition.contains("FE Type"));
        assert!(p.exemplars.iter().all(|e| !e.input.contains("FE Type") && !e.reason.contains("FE")));
        assert_eq!(p.exemplars[0].reason, "The answer \"boys\" fills up the first blank. The answer \"for breaking the rules\" fills up the second blank.");
        assert!(p.instructions.contains("based on the provided lexical unit."));
    }

    #[test]
    fn request_requires_positive_n() {
        let (_, m) = masked(ConditioningMode::NoConditioning);
        assert!(GeneratorRequest::new(&m, 0, Decoding::default()).is_err());
    }

    #[test]
    fn overgenerate_with_identity_backend() {
        let (_, m) = masked(ConditioningMode::FeConditioning);
        let req = GeneratorRequest::new(&m, 1, Decoding::default()).unwrap();
        let out = overgenerate(&m, &req, &IdentityGenerator, "r1").unwrap();
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.candidates[0].text, m.source.text);
    }

    #[test]
    fn overgenerate_drops_malformed_and_excess() {
        struct Fixed;
        impl Generator for Fixed {
            fn id(&self) -> String {
                "fixed".into()
            }
            fn generate(&self, id: &str, _: &GeneratorRequest, _: &MaskedInstance) -> core::result::Result<GeneratorResponse, BackendError> {
                Ok(GeneratorResponse {
                    request_id: id.into(),
                    candidates: alloc::vec![
                        RawCandidate { text: Some("boys, for good grades".into()), fills: None },
                        RawCandidate { text: Some("just one".into()), fills: None },
                        RawCandidate { fills: Some(s(&["a", "b"])), text: None },
                        RawCandidate { fills: Some(s(&["c", "d"])), text: None },
                    ],
                })
            }
        }
        let (_, m) = masked(ConditioningMode::NoConditioning);
        let req = GeneratorRequest::new(&m, 3, Decoding::default()).unwrap();
        let out = overgenerate(&m, &req, &Fixed, "r").unwrap();
        assert_eq!(out.candidates.len(), 2);
        assert_eq!(out.dropped, 2);
        assert_eq!(out.candidates[0].fills, s(&["boys", "for good grades"]));
        assert_eq!(out.candidates[1].index, 1);
    }

    #[test]
    fn request_id_must_echo() {
        struct Wrong;
        impl Generator for Wrong {
            fn id(&self) -> String {
                "w".into()
            }
            fn generate(&self, _: &str, _: &GeneratorRequest, _: &MaskedInstance) -> core::result::Result<GeneratorResponse, BackendError> {
                Ok(GeneratorResponse { request_id: "other".into(), candidates: alloc::vec![] })
            }
        }
        let (_, m) = masked(ConditioningMode::NoConditioning);
        let req = GeneratorRequest::new(&m, 1, Decoding::default()).unwrap();
        assert!(matches!(overgenerate(&m, &req, &Wrong, "r"), Err(Error::Backend(_))));
    }

    #[test]
    fn classifier_input_encoding() {
        let req = ClassifierRequest {
            text: "Growing up, boys are rewarded for breaking the rules.".into(),
            frame: "Rewards_and_punishments".into(),
            lu_span: Span::new(21, 29),
            fe_span: Span::new(12, 16),
        };
        assert_eq!(
            req.encoded(),
            "Growing up, <FE_START> boys <FE_END> are <LU_START> rewarded <LU_END> for breaking the rules. Rewards_and_punishments"
        );
        let req = ClassifierRequest { fe_span: Span::new(30, 52), ..req };
        assert_eq!(
            req.encoded(),
            "Growing up, boys are <LU_START> rewarded <LU_END> <FE_START> for breaking the rules <FE_END>. Rewards_and_punishments"
        );
    }

    #[test]
    fn oracle_classifier_contract() {
        let (lex, m) = masked(ConditioningMode::NoConditioning);
        let oracle = OracleClassifier::from_instances([&m.source]);
        let c = splice(&m, &s(&["boys", "for breaking the rules"]), "g", 0).unwrap();
        for (i, f) in c.fes.iter().enumerate() {
            assert_eq!(classify_span(&lex, &c, i, &oracle).unwrap().fe_predicted, f.name);
        }
        // a random non-constituent span is not an FE
        let mut odd = c.clone();
        odd.fes[0].span = Span::new(3, 14);
        assert_eq!(classify_span(&lex, &odd, 0, &oracle).unwrap().fe_predicted, NOT_AN_FE);
    }

    #[test]
    fn strict_filter_keeps_only_perfect_fidelity() {
        let (lex, m) = masked(ConditioningMode::NoConditioning);
        let oracle = OracleClassifier::from_instances([&m.source]);
        let good = splice(&m, &s(&["boys", "for breaking the rules"]), "g", 0).unwrap();
        let half = splice(&m, &s(&["boys", "yesterday"]), "g", 1).unwrap();
        let out = strict_filter(&lex, &[good.clone(), half], &oracle);
        assert_eq!(out.retained, [good]);
        let v = out.verdicts[1].verdict.scored().unwrap();
        assert!(!v.passed);
        assert_eq!(v.fidelity, 0.5);
        assert_eq!(fe_fidelity(out.scored()).unwrap(), 0.75);
        assert_eq!(fe_fidelity(out.retained.iter().filter_map(|_| None::<&FilterVerdict>)).is_err(), true);
    }

    #[test]
    fn classifier_errors_make_candidates_unverifiable() {
        struct Broken;
        impl Classifier for Broken {
            fn classify(&self, id: &str, _: &ClassifierRequest) -> core::result::Result<ClassifierResponse, BackendError> {
                Err(BackendError::transport(id, "down"))
            }
        }
        struct Rogue;
        impl Classifier for Rogue {
            fn classify(&self, id: &str, _: &ClassifierRequest) -> core::result::Result<ClassifierResponse, BackendError> {
                Ok(ClassifierResponse { request_id: id.into(), label: "Theme".into(), score: 0.9 })
            }
        }
        let (lex, m) = masked(ConditioningMode::NoConditioning);
        let good = splice(&m, &s(&["boys", "for breaking the rules"]), "g", 0).unwrap();
        for backend in [&Broken as &dyn Classifier, &Rogue] {
            let out = strict_filter(&lex, core::slice::from_ref(&good), backend);
            assert!(out.retained.is_empty());
            assert_eq!(out.unverifiable(), 1);
        }
    }

    #[test]
    fn fidelity_arithmetic() {
        let sv = |e: &str, p: &str| SpanVerdict { fe_expected: e.into(), fe_predicted: p.into(), score: 1.0 };
        let all = FilterVerdict::from_spans(alloc::vec![sv("A", "A"), sv("B", "B")]);
        assert_eq!(fe_fidelity([&all]).unwrap(), 1.0);
        let three_of_four = [
            FilterVerdict::from_spans(alloc::vec![sv("A", "A"), sv("B", "X")]),
            FilterVerdict::from_spans(alloc::vec![sv("A", "A"), sv("B", "B")]),
        ];
        assert_eq!(fe_fidelity(&three_of_four).unwrap(), 0.75);
        assert!(fe_fidelity(core::iter::empty()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn splice_keeps_spans_on_their_text(
            a in "[a-zA-Z\u{e9}\u{4e2d}][a-zA-Z \u{e9}\u{4e2d}]{0,12}[a-z\u{e9}]",
            b in "[a-z\u{4e2d}]{1,8}",
        ) {
            let (_, m) = masked(ConditioningMode::FeConditioning);
            let fills = [a, b];
            let c = splice(&m, &fills[..m.masked_fes.len()], "p", 0).unwrap();
            for (i, &g) in c.generated.iter().enumerate() {
                proptest::prop_assert_eq!(slice(&c.text, c.fes[g].span), Some(fills[i].as_str()));
            }
            for (k, f) in c.fes.iter().enumerate().filter(|(k, _)| !c.generated.contains(k)) {
                proptest::prop_assert_eq!(slice(&c.text, f.span), slice(&m.source.text, m.source.fes[k].span));
            }
            for (t, o) in c.targets.iter().zip(&m.source.targets) {
                proptest::prop_assert_eq!(slice(&c.text, *t), slice(&m.source.text, *o));
            }
        }
    }
}
