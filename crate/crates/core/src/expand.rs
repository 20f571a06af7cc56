//! Sister-LU replacement, candidate FE selection and masking.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inflect::{self, Form};
use crate::lexicon::{
    AnnotatedSentence, Coreness, FeId, FeSpan, FrameId, Lexicon, LexicalUnit, LuId, Pos, RecordId,
    SentenceId, Span,
};
use crate::relations::RelationSet;
use crate::text::CharIndex;

/// Criteria for picking FE spans to regenerate. A span qualifies when its
/// FE is core and it either has no Agent/Self_mover ancestry or is a PP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Also treat Core-Unexpressed FEs as core.
    #[serde(default)]
    pub include_core_unexpressed: bool,
    #[serde(default)]
    pub ancestor_relations: RelationSet,
    #[serde(default = "default_pp_tag")]
    pub pp_tag: String,
}

fn default_pp_tag() -> String {
    "PP".into()
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            include_core_unexpressed: false,
            ancestor_relations: RelationSet::inheritance(),
            pp_tag: default_pp_tag(),
        }
    }
}

impl SelectionConfig {
    pub fn is_core(&self, c: Coreness) -> bool {
        c == Coreness::Core || (self.include_core_unexpressed && c == Coreness::CoreUnexpressed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningMode {
    NoConditioning,
    FeConditioning,
    FrameFeConditioning,
}

impl ConditioningMode {
    pub const ALL: [ConditioningMode; 3] = [
        ConditioningMode::NoConditioning,
        ConditioningMode::FeConditioning,
        ConditioningMode::FrameFeConditioning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditioningMode::NoConditioning => "no_conditioning",
            ConditioningMode::FeConditioning => "fe_conditioning",
            ConditioningMode::FrameFeConditioning => "frame_fe_conditioning",
        }
    }
}

impl core::str::FromStr for ConditioningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" | "no" | "no_conditioning" => Ok(ConditioningMode::NoConditioning),
            "fe" | "fe_conditioning" => Ok(ConditioningMode::FeConditioning),
            "frame_fe" | "framefe" | "frame+fe" | "frame_fe_conditioning" => {
                Ok(ConditioningMode::FrameFeConditioning)
            }
            _ => Err(Error::InvalidArgument(format!("unknown conditioning mode {s:?}"))),
        }
    }
}

/// An FE span with its name resolved, as carried by generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSpan {
    pub fe: FeId,
    pub name: String,
    pub span: Span,
    pub phrase_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammatical_function: Option<String>,
    /// Selected for regeneration.
    #[serde(default)]
    pub candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacementInstance {
    pub donor_id: RecordId,
    pub donor_sentence: SentenceId,
    pub donor_lu: LuId,
    pub donor_lu_name: String,
    pub target_lu: LuId,
    pub lu_name: String,
    pub frame: FrameId,
    pub frame_name: String,
    pub text: String,
    pub targets: Vec<Span>,
    /// Left to right.
    pub fes: Vec<LabeledSpan>,
    /// The donor form could not be recognized and the bare lemma was used.
    #[serde(default)]
    pub inflection_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedFe {
    pub fe_name: String,
    pub frame_name: String,
    pub original_span_text: String,
    /// Index into `source.fes`.
    pub fe_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedInstance {
    pub id: String,
    pub source: ReplacementInstance,
    pub masked_fes: Vec<MaskedFe>,
    /// Verbatim text around the placeholders; one more than `masked_fes`.
    pub segments: Vec<String>,
    pub surface: String,
    pub mode: ConditioningMode,
}

pub const MASK: &str = "<mask>";

fn placeholder(mode: ConditioningMode, frame: &str, fe: &str) -> String {
    match mode {
        ConditioningMode::NoConditioning => MASK.into(),
        ConditioningMode::FeConditioning => format!("<FE: {fe}> {MASK} </FE: {fe}>"),
        ConditioningMode::FrameFeConditioning => {
            format!("<Frame: {frame} + FE: {fe}> {MASK} </Frame: {frame} + FE: {fe}>")
        }
    }
}

impl MaskedInstance {
    fn render(&self, mode: ConditioningMode) -> String {
        let mut out = String::new();
        for (i, seg) in self.segments.iter().enumerate() {
            out.push_str(seg);
            if let Some(m) = self.masked_fes.get(i) {
                out.push_str(&placeholder(mode, &m.frame_name, &m.fe_name));
            }
        }
        out
    }

    /// The sentence with bare `<mask>` placeholders, whatever the mode.
    pub fn plain_surface(&self) -> String {
        self.render(ConditioningMode::NoConditioning)
    }

    pub fn fe_names(&self) -> Vec<String> {
        self.masked_fes.iter().map(|m| m.fe_name.clone()).collect()
    }
}

/// Mask every candidate span of `instance` that does not overlap a target.
pub fn build_masked(instance: &ReplacementInstance, mode: ConditioningMode) -> Result<MaskedInstance> {
    let idx = CharIndex::new(&instance.text);
    let chosen: Vec<usize> = instance
        .fes
        .iter()
        .enumerate()
        .filter(|(_, f)| f.candidate && !instance.targets.iter().any(|t| t.overlaps(&f.span)))
        .map(|(i, _)| i)
        .collect();
    if chosen.is_empty() {
        return Err(Error::NothingToGenerate);
    }
    let mut segments = Vec::with_capacity(chosen.len() + 1);
    let mut masked_fes = Vec::with_capacity(chosen.len());
    let mut cursor = 0;
    for &i in &chosen {
        let f = &instance.fes[i];
        let seg = idx.slice(Span::new(cursor, f.span.start)).ok_or(Error::InvalidSpan {
            start: cursor,
            end: f.span.start,
            len: idx.len(),
        })?;
        segments.push(seg.to_string());
        let original = idx.slice(f.span).ok_or(Error::InvalidSpan {
            start: f.span.start,
            end: f.span.end,
            len: idx.len(),
        })?;
        masked_fes.push(MaskedFe {
            fe_name: f.name.clone(),
            frame_name: instance.frame_name.clone(),
            original_span_text: original.to_string(),
            fe_index: i,
        });
        cursor = f.span.end;
    }
    segments.push(idx.slice(Span::new(cursor, idx.len())).unwrap_or_default().to_string());
    let mut m = MaskedInstance {
        id: format!("lu{}-r{}", instance.target_lu, instance.donor_id),
        source: instance.clone(),
        masked_fes,
        segments,
        surface: String::new(),
        mode,
    };
    m.surface = m.render(mode);
    Ok(m)
}

/// Donor candidates indexed by LU.
pub struct DonorIndex<'a> {
    by_lu: BTreeMap<LuId, Vec<&'a AnnotatedSentence>>,
}

impl<'a> DonorIndex<'a> {
    pub fn new(records: impl IntoIterator<Item = &'a AnnotatedSentence>) -> Self {
        let mut by_lu: BTreeMap<LuId, Vec<&'a AnnotatedSentence>> = BTreeMap::new();
        for r in records {
            by_lu.entry(r.lu).or_default().push(r);
        }
        DonorIndex { by_lu }
    }

    pub fn records(&self, lu: LuId) -> &[&'a AnnotatedSentence] {
        self.by_lu.get(&lu).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Candidate selection, replacement and masking bound to one lexicon.
pub struct Expander<'a> {
    pub lexicon: &'a Lexicon,
    pub config: SelectionConfig,
}

impl<'a> Expander<'a> {
    pub fn new(lexicon: &'a Lexicon, config: SelectionConfig) -> Self {
        Expander { lexicon, config }
    }

    fn is_candidate(&self, f: &FeSpan) -> Result<bool> {
        let fe = self.lexicon.fe(f.fe)?;
        if !self.config.is_core(fe.coreness) {
            return Ok(false);
        }
        if f.phrase_type == self.config.pp_tag {
            return Ok(true);
        }
        Ok(!self.lexicon.has_forbidden_ancestor(f.fe, self.config.ancestor_relations)?)
    }

    /// Positions (into `sentence.fes`) of candidate spans, left to right.
    pub fn candidate_indices(&self, sentence: &AnnotatedSentence) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, f) in sentence.fes.iter().enumerate() {
            if self.is_candidate(f)? {
                out.push(i);
            }
        }
        out.sort_by_key(|&i| sentence.fes[i].span);
        Ok(out)
    }

    pub fn select_candidate_fes(&self, sentence: &AnnotatedSentence) -> Result<Vec<FeSpan>> {
        Ok(self
            .candidate_indices(sentence)?
            .into_iter()
            .map(|i| sentence.fes[i].clone())
            .collect())
    }

    pub fn count_candidates(&self, sentence: &AnnotatedSentence) -> Result<usize> {
        let mut n = 0;
        for f in &sentence.fes {
            if self.is_candidate(f)? {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Substitute `target` for the donor's LU, re-inflecting to the donor's
    /// surface form and shifting every span.
    pub fn replace_lu(&self, donor: &AnnotatedSentence, target: LuId) -> Result<ReplacementInstance> {
        let donor_lu = self.lexicon.lu(donor.lu)?;
        let target_lu = self.lexicon.lu(target)?;
        if donor_lu.frame != target_lu.frame {
            return Err(Error::Mismatch { donor: donor_lu.id, target, reason: "different frames" });
        }
        if donor_lu.pos != target_lu.pos {
            return Err(Error::Mismatch { donor: donor_lu.id, target, reason: "different POS" });
        }
        let frame = self.lexicon.frame(donor_lu.frame)?;
        let idx = CharIndex::new(&donor.text);
        let mut targets = donor.targets.clone();
        targets.sort();

        let (text, new_targets, edits, fallback) = if target == donor.lu {
            (donor.text.clone(), targets.clone(), Vec::new(), false)
        } else {
            let (surfaces, fallback) = replacement_surfaces(&donor.text, &idx, &targets, donor_lu, target_lu)?;
            let mut text = String::with_capacity(donor.text.len() + 16);
            let mut cursor = 0;
            let mut new_targets = Vec::with_capacity(targets.len());
            let mut edits = Vec::with_capacity(targets.len());
            let mut delta: isize = 0;
            for (t, s) in targets.iter().zip(&surfaces) {
                text.push_str(idx.slice(Span::new(cursor, t.start)).unwrap_or_default());
                text.push_str(s);
                let new_len = s.chars().count();
                let start = (t.start as isize + delta) as usize;
                new_targets.push(Span::new(start, start + new_len));
                delta += new_len as isize - t.len() as isize;
                edits.push((*t, new_len));
                cursor = t.end;
            }
            text.push_str(idx.slice(Span::new(cursor, idx.len())).unwrap_or_default());
            (text, new_targets, edits, fallback)
        };

        let candidates = self.candidate_indices(donor)?;
        let mut fes = Vec::with_capacity(donor.fes.len());
        for (i, f) in donor.fes.iter().enumerate() {
            let span = Span::new(map_offset(&edits, f.span.start), map_offset(&edits, f.span.end));
            if span.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "FE span {:?} collapses after replacing the target",
                    f.span
                )));
            }
            fes.push(LabeledSpan {
                fe: f.fe,
                name: self.lexicon.fe(f.fe)?.name.clone(),
                span,
                phrase_type: f.phrase_type.clone(),
                grammatical_function: f.grammatical_function.clone(),
                candidate: candidates.contains(&i),
            });
        }
        fes.sort_by_key(|f| f.span);

        Ok(ReplacementInstance {
            donor_id: donor.id,
            donor_sentence: donor.sentence_id,
            donor_lu: donor_lu.id,
            donor_lu_name: donor_lu.name(),
            target_lu: target,
            lu_name: target_lu.name(),
            frame: frame.id,
            frame_name: frame.name.clone(),
            text,
            targets: new_targets,
            fes,
            inflection_fallback: fallback,
        })
    }

    /// Donor records of one LU in preference order: most candidate spans
    /// first, then lowest record id.
    pub fn rank_donors<'r>(&self, records: &[&'r AnnotatedSentence]) -> Result<Vec<&'r AnnotatedSentence>> {
        let mut scored = Vec::with_capacity(records.len());
        for r in records {
            scored.push((self.count_candidates(r)?, *r));
        }
        scored.retain(|(n, _)| *n > 0);
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
        Ok(scored.into_iter().map(|(_, r)| r).collect())
    }

    /// Build one masked instance for `target` from the best donor of its
    /// first usable sister LU. `Ok(None)` when no sister yields one.
    pub fn expand_target(
        &self,
        target: LuId,
        donors: &DonorIndex<'_>,
        mode: ConditioningMode,
    ) -> Result<Option<MaskedInstance>> {
        for sister in self.lexicon.sister_lus(target)? {
            for donor in self.rank_donors(donors.records(sister))? {
                let instance = match self.replace_lu(donor, target) {
                    Ok(i) => i,
                    Err(Error::Unaligned { .. }) | Err(Error::InvalidArgument(_)) => continue,
                    Err(e) => return Err(e),
                };
                match build_masked(&instance, mode) {
                    Ok(m) => return Ok(Some(m)),
                    Err(Error::NothingToGenerate) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(None)
    }

    /// LUs without annotations, optionally restricted to one POS.
    pub fn unannotated_lus(&self, pos: Option<Pos>) -> Vec<LuId> {
        self.lexicon
            .lus()
            .filter(|l| !l.has_annotations && pos.map_or(true, |p| l.pos == p))
            .map(|l| l.id)
            .collect()
    }
}

/// Map a donor offset through the target edits `(old span, new length)`.
fn map_offset(edits: &[(Span, usize)], p: usize) -> usize {
    let mut delta: isize = 0;
    for &(old, new_len) in edits {
        if p >= old.end {
            delta += new_len as isize - old.len() as isize;
        } else if p > old.start {
            let inside = (p - old.start).min(new_len);
            return (old.start as isize + delta) as usize + inside;
        } else {
            break;
        }
    }
    (p as isize + delta) as usize
}

fn previous_word(text_before: &str) -> Option<&str> {
    text_before
        .split_whitespace()
        .next_back()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation() && c != '\''))
        .filter(|w| !w.is_empty())
}

/// Index of the inflected word: first for verbs, last for nouns.
fn head_index(pos: Pos, n: usize) -> usize {
    if pos == Pos::N {
        n.saturating_sub(1)
    } else {
        0
    }
}

fn replacement_surfaces(
    text: &str,
    idx: &CharIndex<'_>,
    targets: &[Span],
    donor: &LexicalUnit,
    target: &LexicalUnit,
) -> Result<(Vec<String>, bool)> {
    let donor_words: Vec<&str> = donor.lemma.split_whitespace().collect();
    let target_words: Vec<&str> = target.lemma.split_whitespace().collect();
    let pos = donor.pos;
    let unaligned = || Error::Unaligned { lemma: target.lemma.clone() };
    let surface = |t: Span| idx.slice(t).ok_or(Error::InvalidSpan { start: t.start, end: t.end, len: idx.len() });
    let before = |t: Span| idx.slice(Span::new(0, t.start)).unwrap_or("");

    let mut fallback = false;
    let mut inflect_word = |donor_token: &str, donor_lemma: &str, word: &str, prev: Option<&str>| -> String {
        let form = inflect::detect(donor_lemma, pos, donor_token, prev).unwrap_or_else(|| {
            fallback = true;
            Form::Base
        });
        inflect::match_case(donor_token, &inflect::inflect(word, pos, form))
    };

    if target_words.is_empty() || donor_words.is_empty() {
        return Err(unaligned());
    }
    let _ = text;
    let out = if targets.len() == 1 {
        let t = targets[0];
        let s = surface(t)?;
        let tokens: Vec<&str> = s.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(unaligned());
        }
        let dh = head_index(pos, tokens.len());
        let prev = if dh == 0 { previous_word(before(t)) } else { Some(tokens[dh - 1]) };
        let lemma_head = donor_words[head_index(pos, donor_words.len())];
        let th = head_index(pos, target_words.len());
        let mut words: Vec<String> = target_words.iter().map(|w| w.to_string()).collect();
        words[th] = inflect_word(tokens[dh], lemma_head, target_words[th], prev);
        if th != 0 {
            words[0] = inflect::match_case(tokens[0], &words[0]);
        }
        alloc::vec![words.join(" ")]
    } else if target_words.len() == targets.len() {
        let th = head_index(pos, target_words.len());
        let mut out = Vec::with_capacity(targets.len());
        for (i, t) in targets.iter().enumerate() {
            let s = surface(*t)?;
            if i == th {
                let lemma = donor_words.get(i).copied().unwrap_or(donor_words[0]);
                out.push(inflect_word(s, lemma, target_words[i], previous_word(before(*t))));
            } else {
                out.push(inflect::match_case(s, target_words[i]));
            }
        }
        out
    } else {
        return Err(unaligned());
    };
    Ok((out, fallback))
}
