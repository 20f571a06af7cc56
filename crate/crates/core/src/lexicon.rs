//! The lexical database: frames, frame elements, lexical units, relation
//! edges, and the annotated sentences that go with them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relations::{FeRelationEdge, FrameRelationEdge, RelationIndex};
use crate::text::CharIndex;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident($inner:ty)) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub $inner);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_type!(FrameId(u32));
id_type!(FeId(u32));
id_type!(LuId(u32));
id_type!(DocId(u32));
id_type!(
    /// Release sentence id; shared by every LU annotation of a sentence.
    SentenceId(u64)
);
id_type!(
    /// One LU annotation of one sentence (the release's annotation-set id).
    RecordId(u64)
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coreness {
    Core,
    CoreUnexpressed,
    Peripheral,
    ExtraThematic,
}

impl FromStr for Coreness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Core" => Ok(Coreness::Core),
            "Core-Unexpressed" => Ok(Coreness::CoreUnexpressed),
            "Peripheral" => Ok(Coreness::Peripheral),
            "Extra-Thematic" => Ok(Coreness::ExtraThematic),
            other => Err(Error::InvalidArgument(format!("unknown coreType {other:?}"))),
        }
    }
}

/// LU part-of-speech tags as they appear in the release (`abandon.v`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    V,
    N,
    A,
    Prep,
    Adv,
    Scon,
    Num,
    Art,
    Idio,
    C,
    Intj,
    Pron,
    Avp,
}

impl Pos {
    pub const ALL: [Pos; 13] = [
        Pos::V,
        Pos::N,
        Pos::A,
        Pos::Prep,
        Pos::Adv,
        Pos::Scon,
        Pos::Num,
        Pos::Art,
        Pos::Idio,
        Pos::C,
        Pos::Intj,
        Pos::Pron,
        Pos::Avp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::V => "v",
            Pos::N => "n",
            Pos::A => "a",
            Pos::Prep => "prep",
            Pos::Adv => "adv",
            Pos::Scon => "scon",
            Pos::Num => "num",
            Pos::Art => "art",
            Pos::Idio => "idio",
            Pos::C => "c",
            Pos::Intj => "intj",
            Pos::Pron => "pron",
            Pos::Avp => "avp",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    /// Accepts both the LU-name suffix (`v`) and the upper-case attribute form (`V`).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Pos::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown POS tag {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub id: FrameId,
    pub name: String,
    pub definition: String,
    /// Filled in by [`LexiconBuilder::build`], in insertion order.
    #[serde(default)]
    pub fes: Vec<FeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameElement {
    pub id: FeId,
    pub frame: FrameId,
    pub name: String,
    pub coreness: Coreness,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalUnit {
    pub id: LuId,
    pub frame: FrameId,
    pub lemma: String,
    pub pos: Pos,
    pub has_annotations: bool,
    /// Annotated sentence count reported by the release.
    pub annotation_count: u32,
}

impl LexicalUnit {
    /// `lemma.pos`, the release's LU name.
    pub fn name(&self) -> String {
        format!("{}.{}", self.lemma, self.pos)
    }
}

/// Split `abandon.v` into lemma and POS at the last dot.
pub fn split_lu_name(name: &str) -> Result<(&str, Pos)> {
    let (lemma, pos) = name
        .rsplit_once('.')
        .ok_or_else(|| Error::InvalidArgument(format!("LU name {name:?} has no POS suffix")))?;
    Ok((lemma, pos.parse()?))
}

/// Half-open character span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Valid iff `0 <= start < end <= len`.
    pub fn check(&self, len: usize) -> Result<()> {
        if self.start < self.end && self.end <= len {
            Ok(())
        } else {
            Err(Error::InvalidSpan { start: self.start, end: self.end, len })
        }
    }

    /// Smallest span covering all of `spans`.
    pub fn hull(spans: &[Span]) -> Option<Span> {
        let start = spans.iter().map(|s| s.start).min()?;
        let end = spans.iter().map(|s| s.end).max()?;
        Some(Span { start, end })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeSpan {
    pub fe: FeId,
    pub span: Span,
    pub phrase_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammatical_function: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Fulltext(DocId),
    Lexicographic,
}

impl Source {
    pub fn is_fulltext(&self) -> bool {
        matches!(self, Source::Fulltext(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
    Unassigned,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            "unassigned" => Ok(Split::Unassigned),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

/// One LU annotation of a sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuAnnotation {
    pub id: RecordId,
    pub lu: LuId,
    pub targets: Vec<Span>,
    pub fes: Vec<FeSpan>,
}

/// A sentence as stored in the corpus: lexicographic sentences carry one
/// annotation, fulltext sentences one per annotated LU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSentence {
    pub id: SentenceId,
    pub text: String,
    pub source: Source,
    pub split: Split,
    pub annotations: Vec<LuAnnotation>,
}

/// A single-LU annotated sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub id: RecordId,
    pub sentence_id: SentenceId,
    pub text: String,
    pub lu: LuId,
    pub targets: Vec<Span>,
    pub fes: Vec<FeSpan>,
    pub source: Source,
    pub split: Split,
}

impl AnnotatedSentence {
    pub fn span_text(&self, span: Span) -> Option<&str> {
        crate::text::slice(&self.text, span)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<CorpusSentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<CorpusSentence>) -> Self {
        Corpus { sentences }
    }

    /// Number of single-LU records the corpus explodes into.
    pub fn record_count(&self) -> usize {
        self.sentences.iter().map(|s| s.annotations.len()).sum()
    }

    pub fn records(&self) -> impl Iterator<Item = AnnotatedSentence> + '_ {
        self.sentences.iter().flat_map(|s| {
            s.annotations.iter().map(move |a| AnnotatedSentence {
                id: a.id,
                sentence_id: s.id,
                text: s.text.clone(),
                lu: a.lu,
                targets: a.targets.clone(),
                fes: a.fes.clone(),
                source: s.source,
                split: s.split,
            })
        })
    }
}

/// Break every sentence into one record per annotated LU. Lexicographic
/// sentences pass through as their single record.
pub fn explode_fulltext(corpus: &Corpus) -> Vec<AnnotatedSentence> {
    corpus.records().collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconCounts {
    pub frames: usize,
    pub fes: usize,
    pub lus: usize,
    pub annotated_lus: usize,
    pub frame_relations: usize,
    pub fe_relations: usize,
}

/// Immutable lexical database. Build one with [`LexiconBuilder`].
#[derive(Debug, Clone)]
pub struct Lexicon {
    frames: BTreeMap<FrameId, Frame>,
    fes: BTreeMap<FeId, FrameElement>,
    lus: BTreeMap<LuId, LexicalUnit>,
    frame_by_name: BTreeMap<String, FrameId>,
    fe_by_name: BTreeMap<(FrameId, String), FeId>,
    lus_by_name: BTreeMap<String, Vec<LuId>>,
    lus_by_frame: BTreeMap<FrameId, Vec<LuId>>,
    frame_relations: Vec<FrameRelationEdge>,
    fe_relations: Vec<FeRelationEdge>,
    pub(crate) relation_index: RelationIndex,
    counts: LexiconCounts,
}

impl Lexicon {
    pub fn counts(&self) -> LexiconCounts {
        self.counts
    }

    pub fn frame(&self, id: FrameId) -> Result<&Frame> {
        self.frames.get(&id).ok_or(Error::UnknownFrame(id))
    }

    pub fn fe(&self, id: FeId) -> Result<&FrameElement> {
        self.fes.get(&id).ok_or(Error::UnknownFe(id))
    }

    pub fn lu(&self, id: LuId) -> Result<&LexicalUnit> {
        self.lus.get(&id).ok_or(Error::UnknownLu(id))
    }

    pub fn frame_by_name(&self, name: &str) -> Option<&Frame> {
        self.frame_by_name.get(name).and_then(|id| self.frames.get(id))
    }

    pub fn fe_by_name(&self, frame: FrameId, name: &str) -> Option<&FrameElement> {
        self.fe_by_name
            .get(&(frame, name.to_string()))
            .and_then(|id| self.fes.get(id))
    }

    /// All LUs carrying this `lemma.pos` name, across frames.
    pub fn lus_by_name(&self, name: &str) -> &[LuId] {
        self.lus_by_name.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Resolve `lemma.pos` or `Frame:lemma.pos`. Ambiguous bare names are an error.
    pub fn resolve_lu(&self, name: &str) -> Result<LuId> {
        if let Some((frame, lu)) = name.split_once(':') {
            let frame = self
                .frame_by_name(frame)
                .ok_or_else(|| Error::UnknownLuName(name.to_string()))?;
            return self
                .lus_by_name(lu)
                .iter()
                .copied()
                .find(|id| self.lus[id].frame == frame.id)
                .ok_or_else(|| Error::UnknownLuName(name.to_string()));
        }
        match self.lus_by_name(name) {
            [one] => Ok(*one),
            [] => Err(Error::UnknownLuName(name.to_string())),
            _ => Err(Error::InvalidArgument(format!(
                "LU name {name:?} is ambiguous; qualify it as Frame:{name}"
            ))),
        }
    }

    pub fn frame_lus(&self, frame: FrameId) -> &[LuId] {
        self.lus_by_frame.get(&frame).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.frames.values()
    }

    pub fn fes(&self) -> impl Iterator<Item = &FrameElement> {
        self.fes.values()
    }

    pub fn lus(&self) -> impl Iterator<Item = &LexicalUnit> {
        self.lus.values()
    }

    pub fn frame_relations(&self) -> &[FrameRelationEdge] {
        &self.frame_relations
    }

    pub fn fe_relations(&self) -> &[FeRelationEdge] {
        &self.fe_relations
    }

    pub fn lu_name(&self, id: LuId) -> Result<String> {
        self.lu(id).map(LexicalUnit::name)
    }

    /// Frame that the LU evokes.
    pub fn lu_frame(&self, id: LuId) -> Result<&Frame> {
        self.frame(self.lu(id)?.frame)
    }

    /// Check one sentence annotation against the lexicon and its text:
    /// spans in bounds and non-empty, FE spans pairwise disjoint, target
    /// spans pairwise disjoint, every FE in the LU's frame.
    pub fn validate_annotation(&self, text: &str, annotation: &LuAnnotation) -> Result<()> {
        let lu = self.lu(annotation.lu)?;
        let len = CharIndex::new(text).len();
        if annotation.targets.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "annotation {} has no target span",
                annotation.id
            )));
        }
        for t in &annotation.targets {
            t.check(len)?;
        }
        for f in &annotation.fes {
            f.span.check(len)?;
            let fe = self.fe(f.fe)?;
            if fe.frame != lu.frame {
                return Err(Error::Dangling(format!(
                    "FE {} ({}) does not belong to frame {} of LU {}",
                    fe.id, fe.name, lu.frame, lu.id
                )));
            }
        }
        if has_overlap(annotation.fes.iter().map(|f| f.span)) {
            return Err(Error::InvalidArgument(format!(
                "annotation {} has overlapping FE spans",
                annotation.id
            )));
        }
        if has_overlap(annotation.targets.iter().copied()) {
            return Err(Error::InvalidArgument(format!(
                "annotation {} has overlapping target spans",
                annotation.id
            )));
        }
        Ok(())
    }
}

fn has_overlap(spans: impl Iterator<Item = Span>) -> bool {
    let mut spans: Vec<Span> = spans.collect();
    spans.sort();
    spans.windows(2).any(|w| w[0].overlaps(&w[1]))
}

/// Accumulates lexicon entries and checks every cross-reference on
/// [`build`](LexiconBuilder::build).
#[derive(Debug, Default)]
pub struct LexiconBuilder {
    frames: Vec<Frame>,
    fes: Vec<FrameElement>,
    lus: Vec<LexicalUnit>,
    frame_relations: Vec<FrameRelationEdge>,
    fe_relations: Vec<FeRelationEdge>,
}

impl LexiconBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frame(&mut self, frame: Frame) -> &mut Self {
        self.frames.push(frame);
        self
    }

    pub fn fe(&mut self, fe: FrameElement) -> &mut Self {
        self.fes.push(fe);
        self
    }

    pub fn lu(&mut self, lu: LexicalUnit) -> &mut Self {
        self.lus.push(lu);
        self
    }

    pub fn frame_relation(&mut self, edge: FrameRelationEdge) -> &mut Self {
        self.frame_relations.push(edge);
        self
    }

    pub fn fe_relation(&mut self, edge: FeRelationEdge) -> &mut Self {
        self.fe_relations.push(edge);
        self
    }

    pub fn build(self) -> Result<Lexicon> {
        let mut frames: BTreeMap<FrameId, Frame> = BTreeMap::new();
        let mut frame_by_name = BTreeMap::new();
        for mut frame in self.frames {
            frame.fes.clear();
            if frame_by_name.insert(frame.name.clone(), frame.id).is_some() {
                return Err(Error::Duplicate { kind: "frame name", name: frame.name });
            }
            let id = frame.id;
            if frames.insert(id, frame).is_some() {
                return Err(Error::Duplicate { kind: "frame id", name: id.to_string() });
            }
        }

        let mut fes = BTreeMap::new();
        let mut fe_by_name = BTreeMap::new();
        for fe in self.fes {
            let frame = frames.get_mut(&fe.frame).ok_or_else(|| {
                Error::Dangling(format!("FE {} ({}) references frame {}", fe.id, fe.name, fe.frame))
            })?;
            if fe_by_name.insert((fe.frame, fe.name.clone()), fe.id).is_some() {
                return Err(Error::Duplicate {
                    kind: "FE name",
                    name: format!("{}.{}", frame.name, fe.name),
                });
            }
            frame.fes.push(fe.id);
            let id = fe.id;
            if fes.insert(id, fe).is_some() {
                return Err(Error::Duplicate { kind: "FE id", name: id.to_string() });
            }
        }

        let mut lus = BTreeMap::new();
        let mut lus_by_name: BTreeMap<String, Vec<LuId>> = BTreeMap::new();
        let mut lus_by_frame: BTreeMap<FrameId, Vec<LuId>> = BTreeMap::new();
        let mut triples = BTreeSet::new();
        for lu in self.lus {
            if !frames.contains_key(&lu.frame) {
                return Err(Error::Dangling(format!(
                    "LU {} ({}) references frame {}",
                    lu.id,
                    lu.name(),
                    lu.frame
                )));
            }
            if !triples.insert((lu.lemma.clone(), lu.pos, lu.frame)) {
                return Err(Error::Duplicate {
                    kind: "LU",
                    name: format!("{} in frame {}", lu.name(), lu.frame),
                });
            }
            lus_by_name.entry(lu.name()).or_default().push(lu.id);
            lus_by_frame.entry(lu.frame).or_default().push(lu.id);
            let id = lu.id;
            if lus.insert(id, lu).is_some() {
                return Err(Error::Duplicate { kind: "LU id", name: id.to_string() });
            }
        }

        for edge in &self.frame_relations {
            for f in [edge.parent_frame, edge.child_frame] {
                if !frames.contains_key(&f) {
                    return Err(Error::Dangling(format!(
                        "{:?} frame relation {} -> {} references unknown frame {}",
                        edge.relation_type, edge.child_frame, edge.parent_frame, f
                    )));
                }
            }
        }
        for edge in &self.fe_relations {
            for f in [edge.parent_fe, edge.child_fe] {
                if !fes.contains_key(&f) {
                    return Err(Error::Dangling(format!(
                        "{:?} FE relation {} -> {} references unknown FE {}",
                        edge.relation_type, edge.child_fe, edge.parent_fe, f
                    )));
                }
            }
        }

        let relation_index = RelationIndex::new(&self.fe_relations);
        let counts = LexiconCounts {
            frames: frames.len(),
            fes: fes.len(),
            lus: lus.len(),
            annotated_lus: lus.values().filter(|l: &&LexicalUnit| l.has_annotations).count(),
            frame_relations: self.frame_relations.len(),
            fe_relations: self.fe_relations.len(),
        };
        Ok(Lexicon {
            frames,
            fes,
            lus,
            frame_by_name,
            fe_by_name,
            lus_by_name,
            lus_by_frame,
            frame_relations: self.frame_relations,
            fe_relations: self.fe_relations,
            relation_index,
            counts,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub total_lus: usize,
    pub annotated_lus: usize,
    pub fraction: f64,
}

/// Share of LUs with at least one annotation. Errors on an empty lexicon.
pub fn coverage_report(lexicon: &Lexicon) -> Result<CoverageReport> {
    let c = lexicon.counts();
    if c.lus == 0 {
        return Err(Error::EmptyLexicon);
    }
    Ok(CoverageReport {
        total_lus: c.lus,
        annotated_lus: c.annotated_lus,
        fraction: c.annotated_lus as f64 / c.lus as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosRow {
    pub pos: Pos,
    pub instances: usize,
    pub avg_fes: f64,
    pub avg_core_fes: f64,
    pub avg_candidate_fes: f64,
}

/// Per-POS instance counts and per-sentence means of all, core and
/// candidate FE spans. `candidates` returns the candidate count of a
/// record; `is_core` decides which coreness values count as core.
///
/// Rows come back in descending instance order; POS tags without
/// instances are omitted.
pub fn pos_stats<'a, I, F>(
    lexicon: &Lexicon,
    records: I,
    is_core: impl Fn(Coreness) -> bool,
    mut candidates: F,
) -> Result<Vec<PosRow>>
where
    I: IntoIterator<Item = &'a AnnotatedSentence>,
    F: FnMut(&AnnotatedSentence) -> Result<usize>,
{
    #[derive(Default)]
    struct Acc {
        n: usize,
        fes: usize,
        core: usize,
        cand: usize,
    }
    let mut acc: BTreeMap<Pos, Acc> = BTreeMap::new();
    for rec in records {
        let lu = lexicon.lu(rec.lu)?;
        let mut core = 0;
        for f in &rec.fes {
            if is_core(lexicon.fe(f.fe)?.coreness) {
                core += 1;
            }
        }
        let cand = candidates(rec)?;
        let a = acc.entry(lu.pos).or_default();
        a.n += 1;
        a.fes += rec.fes.len();
        a.core += core;
        a.cand += cand;
    }
    let mut rows: Vec<PosRow> = acc
        .into_iter()
        .map(|(pos, a)| {
            let n = a.n as f64;
            PosRow {
                pos,
                instances: a.n,
                avg_fes: a.fes as f64 / n,
                avg_core_fes: a.core as f64 / n,
                avg_candidate_fes: a.cand as f64 / n,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.instances.cmp(&a.instances).then(a.pos.cmp(&b.pos)));
    Ok(rows)
}
