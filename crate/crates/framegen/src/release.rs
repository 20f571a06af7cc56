//! Loader for a FrameNet-style XML release directory: `frame/`,
//! `frRelation.xml`, optional `luIndex.xml`, and when the corpus is
//! requested, `lu/` and `fulltext/`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use framegen_core::lexicon::split_lu_name;
use framegen_core::relations::{FeRelationEdge, FrameRelationEdge, RelationType};
use framegen_core::{
    Corpus, CorpusSentence, Coreness, DocId, FeId, FeSpan, Frame, FrameElement, FrameId, LexicalUnit, Lexicon,
    LexiconBuilder, LuAnnotation, LuId, Pos, RecordId, SentenceId, Source, Span, Split,
};
use log::{debug, warn};
use rayon::prelude::*;
use roxmltree::{Document, Node};
use serde::Serialize;

use crate::splits::SplitConfig;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{} not found", .0.display())]
    Missing(PathBuf),
    #[error("lexicon: {0}")]
    Lexicon(#[from] framegen_core::Error),
}

impl LoadError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LoadError::Io { path: path.into(), source }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        LoadError::Format { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Also read `lu/` and `fulltext/` annotations.
    pub corpus: bool,
    pub splits: SplitConfig,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { corpus: true, splits: SplitConfig::standard() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub frame_files: usize,
    pub lu_files: usize,
    pub fulltext_files: usize,
    /// Annotations dropped for dangling ids or invalid spans.
    pub dropped_annotations: usize,
    /// Lexicographic annotations already present in fulltext.
    pub duplicate_lexicographic: usize,
    /// Lexicographic sentences whose id is taken by a fulltext sentence or
    /// by a lexicographic sentence with different text.
    pub colliding_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FulltextDocument {
    pub id: DocId,
    pub name: String,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct Release {
    pub lexicon: Lexicon,
    pub corpus: Corpus,
    pub documents: Vec<FulltextDocument>,
    pub report: LoadReport,
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))
}

fn parse<'a>(path: &Path, text: &'a str) -> Result<Document<'a>, LoadError> {
    Document::parse(text).map_err(|e| LoadError::format(path, e.to_string()))
}

fn elements<'a, 'i>(n: Node<'a, 'i>, name: &'static str) -> impl Iterator<Item = Node<'a, 'i>> {
    n.children().filter(move |c| c.is_element() && c.tag_name().name() == name)
}

fn child<'a, 'i>(n: Node<'a, 'i>, name: &'static str) -> Option<Node<'a, 'i>> {
    elements(n, name).next()
}

fn attr<'a>(path: &Path, n: Node<'a, '_>, name: &str) -> Result<&'a str, LoadError> {
    n.attribute(name).ok_or_else(|| {
        LoadError::format(path, format!("<{}> at byte {} lacks {name}", n.tag_name().name(), n.range().start))
    })
}

fn num<T: std::str::FromStr>(path: &Path, n: Node<'_, '_>, name: &str) -> Result<T, LoadError> {
    let v = attr(path, n, name)?;
    v.trim().parse().map_err(|_| LoadError::format(path, format!("{name}={v:?} is not a number")))
}

fn text_of(n: Option<Node<'_, '_>>) -> String {
    n.and_then(|d| d.text()).unwrap_or("").to_string()
}

fn xml_files(dir: &Path) -> Result<Vec<PathBuf>, LoadError> {
    if !dir.is_dir() {
        return Err(LoadError::Missing(dir.into()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| LoadError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "xml"))
        .collect();
    files.sort();
    Ok(files)
}

struct FrameFile {
    frame: Frame,
    fes: Vec<FrameElement>,
    lus: Vec<LexicalUnit>,
}

fn parse_frame(path: &Path) -> Result<FrameFile, LoadError> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "frame" {
        return Err(LoadError::format(path, "root element is not <frame>"));
    }
    let id = FrameId(num(path, root, "ID")?);
    let frame = Frame {
        id,
        name: attr(path, root, "name")?.to_string(),
        definition: text_of(child(root, "definition")),
        fes: Vec::new(),
    };
    let mut fes = Vec::new();
    for fe in elements(root, "FE") {
        let coreness: Coreness =
            attr(path, fe, "coreType")?.parse().map_err(|e: framegen_core::Error| LoadError::format(path, e.to_string()))?;
        fes.push(FrameElement {
            id: FeId(num(path, fe, "ID")?),
            frame: id,
            name: attr(path, fe, "name")?.to_string(),
            coreness,
            definition: text_of(child(fe, "definition")),
        });
    }
    let mut lus = Vec::new();
    for lu in elements(root, "lexUnit") {
        let name = attr(path, lu, "name")?;
        let (lemma, suffix_pos) = split_lu_name(name).map_err(|e| LoadError::format(path, e.to_string()))?;
        let pos = match lu.attribute("POS") {
            Some(p) => p.parse::<Pos>().map_err(|e| LoadError::format(path, e.to_string()))?,
            None => suffix_pos,
        };
        let annotated: u32 = match child(lu, "sentenceCount").and_then(|c| c.attribute("annotated")) {
            Some(v) => v.parse().unwrap_or(0),
            None => 0,
        };
        lus.push(LexicalUnit {
            id: LuId(num(path, lu, "ID")?),
            frame: id,
            lemma: lemma.to_string(),
            pos,
            has_annotations: annotated > 0,
            annotation_count: annotated,
        });
    }
    Ok(FrameFile { frame, fes, lus })
}

type Relations = (Vec<FrameRelationEdge>, Vec<FeRelationEdge>);

fn parse_relations(path: &Path) -> Result<Relations, LoadError> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    let mut frames = Vec::new();
    let mut fes = Vec::new();
    for ty in elements(doc.root_element(), "frameRelationType") {
        let name = attr(path, ty, "name")?;
        let relation_type: RelationType = match name.parse() {
            Ok(t) => t,
            Err(_) => {
                warn!("{}: skipping unknown relation type {name:?}", path.display());
                continue;
            }
        };
        for rel in elements(ty, "frameRelation") {
            frames.push(FrameRelationEdge {
                relation_type,
                parent_frame: FrameId(num(path, rel, "supID")?),
                child_frame: FrameId(num(path, rel, "subID")?),
            });
            for fr in elements(rel, "FERelation") {
                fes.push(FeRelationEdge {
                    relation_type,
                    parent_fe: FeId(num(path, fr, "supID")?),
                    child_fe: FeId(num(path, fr, "subID")?),
                });
            }
        }
    }
    Ok((frames, fes))
}

fn parse_lu_index(path: &Path) -> Result<BTreeMap<LuId, bool>, LoadError> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    let mut out = BTreeMap::new();
    for lu in elements(doc.root_element(), "lu") {
        let has = lu.attribute("hasAnnotation").is_some_and(|v| v.eq_ignore_ascii_case("true"));
        out.insert(LuId(num(path, lu, "ID")?), has);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct RawFe {
    fe_id: Option<u32>,
    name: String,
    span: Span,
    phrase_type: String,
    gf: Option<String>,
}

#[derive(Debug, Clone)]
struct RawAnnotation {
    id: u64,
    lu: u32,
    targets: Vec<Span>,
    fes: Vec<RawFe>,
}

#[derive(Debug, Clone)]
struct RawSentence {
    id: u64,
    text: String,
    annotations: Vec<RawAnnotation>,
}

fn is_rank_one(layer: Node<'_, '_>) -> bool {
    layer.attribute("rank").map_or(true, |r| r.trim() == "1")
}

/// Labels of a layer as `(span, name, feID)`; inclusive `end` becomes
/// exclusive and labels without offsets (null instantiations) are skipped.
fn labels(path: &Path, layer: Node<'_, '_>) -> Result<Vec<(Span, String, Option<u32>)>, LoadError> {
    let mut out = Vec::new();
    for l in elements(layer, "label") {
        let (Some(s), Some(e)) = (l.attribute("start"), l.attribute("end")) else { continue };
        let bad = || LoadError::format(path, format!("label offsets {s:?}..{e:?}"));
        let start: usize = s.parse().map_err(|_| bad())?;
        let end: usize = e.parse().map_err(|_| bad())?;
        let fe_id = l.attribute("feID").and_then(|v| v.parse().ok());
        out.push((Span::new(start, end + 1), attr(path, l, "name")?.to_string(), fe_id));
    }
    Ok(out)
}

fn parse_annotation_set(path: &Path, set: Node<'_, '_>, lu: u32) -> Result<Option<RawAnnotation>, LoadError> {
    if set.attribute("status").is_some_and(|s| s.eq_ignore_ascii_case("UNANN")) {
        return Ok(None);
    }
    let mut targets = Vec::new();
    let mut fe_labels = Vec::new();
    let mut pt = BTreeMap::new();
    let mut gf = BTreeMap::new();
    for layer in elements(set, "layer") {
        let name = layer.attribute("name").unwrap_or("");
        match name {
            "Target" => targets.extend(labels(path, layer)?.into_iter().map(|l| l.0)),
            "FE" if is_rank_one(layer) => fe_labels = labels(path, layer)?,
            "PT" if is_rank_one(layer) => pt.extend(labels(path, layer)?.into_iter().map(|l| (l.0, l.1))),
            "GF" if is_rank_one(layer) => gf.extend(labels(path, layer)?.into_iter().map(|l| (l.0, l.1))),
            _ => {}
        }
    }
    if targets.is_empty() {
        return Ok(None);
    }
    targets.sort();
    let mut fes: Vec<RawFe> = fe_labels
        .into_iter()
        .map(|(span, name, fe_id)| RawFe {
            fe_id,
            phrase_type: pt.get(&span).cloned().unwrap_or_default(),
            gf: gf.get(&span).cloned(),
            name,
            span,
        })
        .collect();
    fes.sort_by_key(|f| (f.span, f.fe_id));
    Ok(Some(RawAnnotation { id: num(path, set, "ID")?, lu, targets, fes }))
}

fn parse_sentence_text(s: Node<'_, '_>) -> String {
    text_of(child(s, "text"))
}

fn parse_lu_file(path: &Path) -> Result<Vec<RawSentence>, LoadError> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    let root = doc.root_element();
    let lu: u32 = num(path, root, "ID")?;
    let mut out = Vec::new();
    for sub in elements(root, "subCorpus") {
        for s in elements(sub, "sentence") {
            let mut anns = Vec::new();
            for set in elements(s, "annotationSet") {
                if let Some(a) = parse_annotation_set(path, set, lu)? {
                    anns.push(a);
                }
            }
            if !anns.is_empty() {
                out.push(RawSentence { id: num(path, s, "ID")?, text: parse_sentence_text(s), annotations: anns });
            }
        }
    }
    Ok(out)
}

struct FulltextFile {
    doc_id: Option<u32>,
    sentences: Vec<RawSentence>,
}

fn parse_fulltext(path: &Path) -> Result<FulltextFile, LoadError> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    let root = doc.root_element();
    let doc_id = child(root, "header")
        .and_then(|h| child(h, "corpus"))
        .and_then(|c| child(c, "document"))
        .and_then(|d| d.attribute("ID"))
        .and_then(|v| v.parse().ok());
    let mut sentences = Vec::new();
    for s in elements(root, "sentence") {
        let mut anns = Vec::new();
        for set in elements(s, "annotationSet") {
            let Some(lu) = set.attribute("luID") else { continue };
            let lu: u32 = lu.parse().map_err(|_| LoadError::format(path, format!("luID {lu:?}")))?;
            if let Some(a) = parse_annotation_set(path, set, lu)? {
                anns.push(a);
            }
        }
        sentences.push(RawSentence { id: num(path, s, "ID")?, text: parse_sentence_text(s), annotations: anns });
    }
    Ok(FulltextFile { doc_id, sentences })
}

/// Resolve raw ids against the lexicon and validate offsets.
fn convert(lexicon: &Lexicon, text: &str, raw: &RawAnnotation) -> Result<LuAnnotation, String> {
    let lu = lexicon.lu(LuId(raw.lu)).map_err(|e| e.to_string())?;
    let mut fes = Vec::with_capacity(raw.fes.len());
    for f in &raw.fes {
        let fe = match f.fe_id {
            Some(id) => lexicon.fe(FeId(id)).map_err(|e| e.to_string())?.id,
            None => lexicon
                .fe_by_name(lu.frame, &f.name)
                .ok_or_else(|| format!("FE {:?} not in frame {}", f.name, lu.frame))?
                .id,
        };
        fes.push(FeSpan { fe, span: f.span, phrase_type: f.phrase_type.clone(), grammatical_function: f.gf.clone() });
    }
    let ann = LuAnnotation { id: RecordId(raw.id), lu: lu.id, targets: raw.targets.clone(), fes };
    lexicon.validate_annotation(text, &ann).map_err(|e| e.to_string())?;
    Ok(ann)
}

const WARN_LIMIT: usize = 20;

struct Dropper<'a> {
    report: &'a mut LoadReport,
}

impl Dropper<'_> {
    fn drop(&mut self, where_: &str, reason: &str) {
        self.report.dropped_annotations += 1;
        if self.report.dropped_annotations <= WARN_LIMIT {
            warn!("dropping annotation {where_}: {reason}");
        } else {
            debug!("dropping annotation {where_}: {reason}");
        }
    }
}

fn builder(frames: &[FrameFile], relations: &Relations, lus: &[LexicalUnit]) -> LexiconBuilder {
    let mut b = LexiconBuilder::new();
    for f in frames {
        b.frame(f.frame.clone());
        for fe in &f.fes {
            b.fe(fe.clone());
        }
    }
    for lu in lus {
        b.lu(lu.clone());
    }
    for e in &relations.0 {
        b.frame_relation(*e);
    }
    for e in &relations.1 {
        b.fe_relation(*e);
    }
    b
}

pub fn load_release(dir: &Path, options: &LoadOptions) -> Result<Release, LoadError> {
    if !dir.is_dir() {
        return Err(LoadError::Missing(dir.into()));
    }
    let frame_paths = xml_files(&dir.join("frame"))?;
    let frames: Vec<FrameFile> = frame_paths.par_iter().map(|p| parse_frame(p)).collect::<Result<_, _>>()?;
    let rel_path = dir.join("frRelation.xml");
    if !rel_path.is_file() {
        return Err(LoadError::Missing(rel_path));
    }
    let relations = parse_relations(&rel_path)?;
    let lu_index_path = dir.join("luIndex.xml");
    let lu_index = if lu_index_path.is_file() { parse_lu_index(&lu_index_path)? } else { BTreeMap::new() };

    let mut lus: Vec<LexicalUnit> = frames.iter().flat_map(|f| f.lus.iter().cloned()).collect();
    for lu in &mut lus {
        if lu_index.get(&lu.id) == Some(&true) {
            lu.has_annotations = true;
        }
    }
    let mut report = LoadReport { frame_files: frame_paths.len(), ..LoadReport::default() };
    let lexicon = builder(&frames, &relations, &lus).build()?;
    if !options.corpus {
        return Ok(Release { lexicon, corpus: Corpus::default(), documents: Vec::new(), report });
    }

    let ft_paths = xml_files(&dir.join("fulltext"))?;
    let lu_paths = {
        let mut v = xml_files(&dir.join("lu"))?;
        // lu123.xml in numeric order
        v.sort_by_key(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("");
            (stem.trim_start_matches("lu").parse::<u64>().unwrap_or(u64::MAX), p.clone())
        });
        v
    };
    report.fulltext_files = ft_paths.len();
    report.lu_files = lu_paths.len();
    let fulltext: Vec<FulltextFile> = ft_paths.par_iter().map(|p| parse_fulltext(p)).collect::<Result<_, _>>()?;
    let lexicographic: Vec<Vec<RawSentence>> =
        lu_paths.par_iter().map(|p| parse_lu_file(p)).collect::<Result<_, _>>()?;

    let mut sentences: Vec<CorpusSentence> = Vec::new();
    let mut documents = Vec::new();
    let mut seen_ft_sentences: BTreeSet<u64> = BTreeSet::new();
    let mut seen_pairs: BTreeSet<(u64, u32)> = BTreeSet::new();
    let mut seen_sets: BTreeSet<u64> = BTreeSet::new();
    let mut used_doc_ids = BTreeSet::new();
    let mut dropper = Dropper { report: &mut report };
    for (i, (path, file)) in ft_paths.iter().zip(&fulltext).enumerate() {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("").to_string();
        let mut doc_id = DocId(file.doc_id.unwrap_or(i as u32 + 1));
        if !used_doc_ids.insert(doc_id) {
            doc_id = DocId(1_000_000 + i as u32);
            used_doc_ids.insert(doc_id);
        }
        let split = options.splits.split_of(&name);
        documents.push(FulltextDocument { id: doc_id, name: name.clone(), split });
        for s in &file.sentences {
            seen_ft_sentences.insert(s.id);
            let mut anns = Vec::new();
            for a in &s.annotations {
                match convert(&lexicon, &s.text, a) {
                    Ok(ann) => {
                        seen_pairs.insert((s.id, a.lu));
                        seen_sets.insert(a.id);
                        anns.push(ann);
                    }
                    Err(reason) => dropper.drop(&format!("{name} sentence {} set {}", s.id, a.id), &reason),
                }
            }
            sentences.push(CorpusSentence {
                id: SentenceId(s.id),
                text: s.text.clone(),
                source: Source::Fulltext(doc_id),
                split,
                annotations: anns,
            });
        }
    }

    let mut lex_index: BTreeMap<u64, usize> = BTreeMap::new();
    for (path, file) in lu_paths.iter().zip(&lexicographic) {
        for s in file {
            if seen_ft_sentences.contains(&s.id) {
                let mut all_dup = true;
                for a in &s.annotations {
                    if seen_sets.contains(&a.id) || seen_pairs.contains(&(s.id, a.lu)) {
                        dropper.report.duplicate_lexicographic += 1;
                    } else {
                        all_dup = false;
                    }
                }
                if !all_dup {
                    dropper.report.colliding_sentences += 1;
                }
                continue;
            }
            let mut anns = Vec::new();
            for a in &s.annotations {
                if !seen_sets.insert(a.id) {
                    dropper.report.duplicate_lexicographic += 1;
                    continue;
                }
                match convert(&lexicon, &s.text, a) {
                    Ok(ann) => anns.push(ann),
                    Err(reason) => dropper.drop(&format!("{} sentence {} set {}", path.display(), s.id, a.id), &reason),
                }
            }
            if anns.is_empty() {
                continue;
            }
            match lex_index.get(&s.id) {
                Some(&idx) if sentences[idx].text == s.text => sentences[idx].annotations.extend(anns),
                Some(_) => dropper.report.colliding_sentences += 1,
                None => {
                    lex_index.insert(s.id, sentences.len());
                    sentences.push(CorpusSentence {
                        id: SentenceId(s.id),
                        text: s.text.clone(),
                        source: Source::Lexicographic,
                        split: options.splits.lexicographic,
                        annotations: anns,
                    });
                }
            }
        }
    }
    let corpus = Corpus::new(sentences);

    // annotation flags and counts from the corpus actually loaded
    let mut per_lu: BTreeMap<LuId, u32> = BTreeMap::new();
    for s in &corpus.sentences {
        for a in &s.annotations {
            *per_lu.entry(a.lu).or_default() += 1;
        }
    }
    for lu in &mut lus {
        if let Some(&n) = per_lu.get(&lu.id) {
            lu.has_annotations = true;
            lu.annotation_count = n;
        }
    }
    let lexicon = builder(&frames, &relations, &lus).build()?;
    Ok(Release { lexicon, corpus, documents, report })
}

impl Release {
    pub fn document(&self, id: DocId) -> Option<&FulltextDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Record counts per split, with fulltext train reported separately.
    pub fn split_sizes(&self) -> SplitSizes {
        let mut s = SplitSizes::default();
        for sent in &self.corpus.sentences {
            let n = sent.annotations.len();
            match sent.split {
                Split::Train => {
                    s.train += n;
                    if sent.source.is_fulltext() {
                        s.train_fulltext += n;
                    }
                }
                Split::Dev => s.dev += n,
                Split::Test => s.test += n,
                Split::Unassigned => s.unassigned += n,
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SplitSizes {
    pub train: usize,
    pub train_fulltext: usize,
    pub dev: usize,
    pub test: usize,
    pub unassigned: usize,
}
