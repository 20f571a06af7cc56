//! Intrinsic metrics: FE fidelity aggregation, ROUGE-1/ROUGE-L, self-BLEU,
//! delegated perplexity and pairwise scores, and review sheets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BackendError, Error, Result};
use crate::genfilter::{fe_fidelity, FilterOutcome, GenerationCandidate};
use crate::text::{metric_tokens, CharIndex};
use crate::lexicon::Span;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
}

fn f1(overlap: usize, cand: usize, reference: usize) -> f64 {
    if overlap == 0 || cand == 0 || reference == 0 {
        return 0.0;
    }
    let p = overlap as f64 / cand as f64;
    let r = overlap as f64 / reference as f64;
    2.0 * p * r / (p + r)
}

fn unigram_overlap(a: &[String], b: &[String]) -> usize {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in b {
        *counts.entry(t).or_default() += 1;
    }
    let mut hit = 0;
    for t in a {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                hit += 1;
            }
        }
    }
    hit
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = alloc::vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-1 and ROUGE-L F1 between two strings.
pub fn rouge_pair(candidate: &str, reference: &str) -> Result<RougeScores> {
    let c = metric_tokens(candidate);
    let r = metric_tokens(reference);
    if r.is_empty() {
        return Err(Error::EmptyInput("reference has no tokens"));
    }
    Ok(RougeScores {
        rouge1: f1(unigram_overlap(&c, &r), c.len(), r.len()),
        rouge_l: f1(lcs_len(&c, &r), c.len(), r.len()),
    })
}

/// Per-instance ROUGE: mean over aligned fill pairs.
pub fn rouge<S: AsRef<str>, T: AsRef<str>>(candidate_fills: &[S], reference_fills: &[T]) -> Result<RougeScores> {
    if candidate_fills.len() != reference_fills.len() {
        return Err(Error::FillCount { expected: reference_fills.len(), got: candidate_fills.len() });
    }
    if reference_fills.is_empty() {
        return Err(Error::EmptyInput("no reference fills"));
    }
    let (mut r1, mut rl) = (0.0, 0.0);
    for (c, r) in candidate_fills.iter().zip(reference_fills) {
        let s = rouge_pair(c.as_ref(), r.as_ref())?;
        r1 += s.rouge1;
        rl += s.rouge_l;
    }
    let n = reference_fills.len() as f64;
    Ok(RougeScores { rouge1: r1 / n, rouge_l: rl / n })
}

/// Mean of per-candidate ROUGE against the fills they replaced.
pub fn rouge_corpus(candidates: &[GenerationCandidate]) -> Result<RougeScores> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no candidates"));
    }
    let (mut r1, mut rl) = (0.0, 0.0);
    for c in candidates {
        let s = rouge(&c.fills, &c.original_fills)?;
        r1 += s.rouge1;
        rl += s.rouge_l;
    }
    let n = candidates.len() as f64;
    Ok(RougeScores { rouge1: r1 / n, rouge_l: rl / n })
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut m = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_default() += 1;
        }
    }
    m
}

/// BLEU of one tokenized hypothesis against a set of references. Clipping
/// uses the maximum count over references; the brevity penalty uses the
/// reference length closest to the hypothesis (shorter on ties). Precisions
/// for n > 1 are add-one smoothed; a zero unigram precision gives 0.
pub fn sentence_bleu(hypothesis: &[String], references: &[Vec<String>], max_n: usize) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::EmptyInput("no references"));
    }
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    let c = hypothesis.len();
    if c == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let hyp = ngram_counts(hypothesis, n);
        let mut max_ref: BTreeMap<&[String], usize> = BTreeMap::new();
        for r in references {
            for (g, k) in ngram_counts(r, n) {
                let e = max_ref.entry(g).or_default();
                *e = (*e).max(k);
            }
        }
        let clipped: usize = hyp.iter().map(|(g, k)| (*k).min(max_ref.get(g).copied().unwrap_or(0))).sum();
        let total = c.saturating_sub(n - 1);
        let p = if n == 1 {
            if clipped == 0 {
                return Ok(0.0);
            }
            clipped as f64 / total as f64
        } else {
            (clipped as f64 + 1.0) / (total as f64 + 1.0)
        };
        log_sum += libm::log(p);
    }
    let r = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);
    let bp = if c > r { 1.0 } else { libm::exp(1.0 - r as f64 / c as f64) };
    Ok(bp * libm::exp(log_sum / max_n as f64))
}

/// Mean BLEU of each text against all other texts of the list. A text's
/// own duplicates elsewhere in the list count as references, so a list in
/// which every text occurs twice scores 1.0.
pub fn self_bleu<S: AsRef<str>>(texts: &[S], max_n: usize) -> Result<f64> {
    if texts.len() < 2 {
        return Err(Error::EmptyInput("self-BLEU needs at least two texts"));
    }
    let toks: Vec<Vec<String>> = texts.iter().map(|t| metric_tokens(t.as_ref())).collect();
    let mut sum = 0.0;
    for i in 0..toks.len() {
        let refs: Vec<Vec<String>> =
            toks.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.clone()).collect();
        sum += sentence_bleu(&toks[i], &refs, max_n)?;
    }
    Ok(sum / toks.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    Nll,
    Pairwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub texts: Vec<String>,
    pub mode: ScoreMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreItem {
    Nll { nll: f64, token_count: usize },
    Score { score: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub request_id: String,
    pub items: Vec<ScoreItem>,
}

pub trait Scorer {
    fn score(&self, request_id: &str, request: &ScoreRequest) -> core::result::Result<ScoreResponse, BackendError>;
}

/// exp(total NLL / total tokens) over `(nll, token_count)` pairs.
pub fn perplexity_from_items(items: &[(f64, usize)]) -> Result<f64> {
    let tokens: usize = items.iter().map(|i| i.1).sum();
    if tokens == 0 {
        return Err(Error::EmptyInput("zero tokens"));
    }
    let nll: f64 = items.iter().map(|i| i.0).sum();
    Ok(libm::exp(nll / tokens as f64))
}

fn checked_call(scorer: &dyn Scorer, request_id: &str, req: &ScoreRequest) -> Result<Vec<ScoreItem>> {
    let resp = scorer.score(request_id, req)?;
    if resp.request_id != request_id {
        return Err(BackendError::protocol(request_id, format!("response echoes {:?}", resp.request_id)).into());
    }
    if resp.items.len() != req.texts.len() {
        return Err(BackendError::protocol(
            request_id,
            format!("{} items for {} texts", resp.items.len(), req.texts.len()),
        )
        .into());
    }
    Ok(resp.items)
}

pub fn perplexity<S: AsRef<str>>(texts: &[S], scorer: &dyn Scorer, request_id: &str) -> Result<f64> {
    let req = ScoreRequest {
        texts: texts.iter().map(|t| t.as_ref().to_string()).collect(),
        mode: ScoreMode::Nll,
        references: None,
    };
    let items = checked_call(scorer, request_id, &req)?;
    let mut pairs = Vec::with_capacity(items.len());
    for it in items {
        match it {
            ScoreItem::Nll { nll, token_count } => pairs.push((nll, token_count)),
            ScoreItem::Score { .. } => {
                return Err(BackendError::protocol(request_id, "nll mode returned a pairwise score").into())
            }
        }
    }
    perplexity_from_items(&pairs)
}

/// Mean backend pairwise score of texts against references.
pub fn pairwise_score(texts: &[String], references: &[String], scorer: &dyn Scorer, request_id: &str) -> Result<f64> {
    if texts.is_empty() {
        return Err(Error::EmptyInput("no texts"));
    }
    if texts.len() != references.len() {
        return Err(Error::InvalidArgument("one reference per text is required".into()));
    }
    let req = ScoreRequest { texts: texts.to_vec(), mode: ScoreMode::Pairwise, references: Some(references.to_vec()) };
    let mut sum = 0.0;
    for it in checked_call(scorer, request_id, &req)? {
        match it {
            ScoreItem::Score { score } => sum += score,
            ScoreItem::Nll { .. } => {
                return Err(BackendError::protocol(request_id, "pairwise mode returned an nll item").into())
            }
        }
    }
    Ok(sum / texts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Span-level fidelity over every scored candidate, before filtering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fe_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fe_fidelity_retained: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rouge1: Option<f64>,
    #[serde(default, rename = "rougeL", skip_serializing_if = "Option::is_none")]
    pub rouge_l: Option<f64>,
    /// Over retained texts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_bleu: Option<f64>,
    /// Over the pre-mask sentences of the retained candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_bleu_source: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bart_score: Option<f64>,
    pub n_before: usize,
    pub n_after: usize,
    pub n_unverifiable: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ReportInputs<'a> {
    pub candidates: &'a [GenerationCandidate],
    pub outcome: Option<&'a FilterOutcome>,
    /// Pre-mask sentence per retained candidate, same order.
    pub source_texts: Option<&'a [String]>,
    pub reference_based: bool,
    pub perplexity: Option<f64>,
    pub bart_score: Option<f64>,
    pub self_bleu_max_n: usize,
}

/// Combine run artifacts. Metrics that cannot be computed are left absent.
pub fn assemble_report(inputs: &ReportInputs<'_>) -> MetricsReport {
    let max_n = if inputs.self_bleu_max_n == 0 { 4 } else { inputs.self_bleu_max_n };
    let (n_after, n_unverifiable, fe_before, fe_after, retained_texts) = match inputs.outcome {
        Some(o) => {
            let retained_ids: alloc::collections::BTreeSet<String> = o.retained.iter().map(|c| c.id()).collect();
            let after = o.verdicts.iter().filter(|v| retained_ids.contains(&v.candidate_id)).filter_map(|v| v.verdict.scored());
            (
                o.retained.len(),
                o.unverifiable(),
                fe_fidelity(o.scored()).ok(),
                fe_fidelity(after).ok(),
                o.retained.iter().map(|c| c.text.clone()).collect::<Vec<_>>(),
            )
        }
        None => (inputs.candidates.len(), 0, None, None, inputs.candidates.iter().map(|c| c.text.clone()).collect()),
    };
    let rouge = if inputs.reference_based { rouge_corpus(inputs.candidates).ok() } else { None };
    MetricsReport {
        fe_fidelity: fe_before,
        fe_fidelity_retained: fe_after,
        perplexity: inputs.perplexity,
        rouge1: rouge.map(|r| r.rouge1),
        rouge_l: rouge.map(|r| r.rouge_l),
        self_bleu: self_bleu(&retained_texts, max_n).ok(),
        self_bleu_source: inputs.source_texts.and_then(|t| self_bleu(t, max_n).ok()),
        bart_score: inputs.bart_score,
        n_before: inputs.candidates.len(),
        n_after,
        n_unverifiable,
    }
}

pub const REVIEW_HEADER: [&str; 7] = [
    "frame",
    "lu_replacement",
    "sentence_with_markup",
    "original_fes",
    "generated_fes",
    "coherent",
    "fe_preserved",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRow {
    pub frame: String,
    pub lu_replacement: String,
    pub sentence_with_markup: String,
    pub original_fes: String,
    pub generated_fes: String,
    pub checkbox_coherence: String,
    pub checkbox_fe_preservation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewSheet {
    pub rows: Vec<ReviewRow>,
}

/// Sentence with the replacement LU in `*...*` and each generated span as
/// `[span]<FE_name>`.
pub fn review_markup(c: &GenerationCandidate) -> String {
    let idx = CharIndex::new(&c.text);
    let mut marks: Vec<(Span, String)> = c.targets.iter().map(|t| (*t, String::from("*"))).collect();
    for &i in &c.generated {
        marks.push((c.fes[i].span, format!("]<{}>", c.fes[i].name)));
    }
    marks.sort_by_key(|m| (m.0.start, m.0.end));
    let mut out = String::new();
    let mut cursor = 0;
    for (span, close) in marks {
        if span.start < cursor {
            continue;
        }
        out.push_str(idx.slice(Span::new(cursor, span.start)).unwrap_or(""));
        let open = if close == "*" { "*" } else { "[" };
        out.push_str(open);
        out.push_str(idx.slice(span).unwrap_or(""));
        out.push_str(&close);
        cursor = span.end;
    }
    out.push_str(idx.slice(Span::new(cursor, idx.len())).unwrap_or(""));
    out
}

fn tsv_field(s: &str) -> String {
    s.chars().map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c }).collect()
}

/// Sample `k` candidates with a fixed seed, kept in input order.
pub fn emit_review_sheet(sample: &[GenerationCandidate], k: usize, seed: u64) -> Result<ReviewSheet> {
    if k == 0 {
        return Err(Error::InvalidArgument("review sheet needs k >= 1".into()));
    }
    if k > sample.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds sample of {}", sample.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, sample.len(), k).into_vec();
    picked.sort_unstable();
    let rows = picked
        .into_iter()
        .map(|i| {
            let c = &sample[i];
            ReviewRow {
                frame: c.frame_name.clone(),
                lu_replacement: format!("{} ({})", c.donor_lu_name, c.lu_name),
                sentence_with_markup: review_markup(c),
                original_fes: c.original_fills.join(", "),
                generated_fes: c.fills.join(", "),
                checkbox_coherence: String::new(),
                checkbox_fe_preservation: String::new(),
            }
        })
        .collect();
    Ok(ReviewSheet { rows })
}

impl ReviewSheet {
    pub fn to_tsv(&self) -> String {
        let mut out = REVIEW_HEADER.join("\t");
        out.push('\n');
        for r in &self.rows {
            let fields = [
                &r.frame,
                &r.lu_replacement,
                &r.sentence_with_markup,
                &r.original_fes,
                &r.generated_fes,
                &r.checkbox_coherence,
                &r.checkbox_fe_preservation,
            ];
            let line: Vec<String> = fields.iter().map(|f| tsv_field(f)).collect();
            out.push_str(&line.join("\t"));
            out.push('\n');
        }
        out
    }
}
