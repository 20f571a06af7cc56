//! JSONL helpers and the sentence record schema shared by corpus dumps,
//! filtered generations and training files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use framegen_core::expand::ConditioningMode;
use framegen_core::genfilter::GenerationCandidate;
use framegen_core::{AnnotatedSentence, Lexicon, LuId, RecordId, SentenceId, Source, Span, Split};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::release::Release;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] framegen_core::Error),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io { path: path.into(), source }
}

/// First line of training files.
pub const TRAIN_HEADER: &str = r#"{"format":"framegen-sentences","version":1}"#;

fn is_header(line: &str) -> bool {
    line.trim_start().starts_with(r#"{"format":"#)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    let f = File::open(path).map_err(io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io(path))?;
        if line.trim().is_empty() || (i == 0 && is_header(&line)) {
            continue;
        }
        let v = serde_json::from_str(&line)
            .map_err(|e| FormatError::Parse { path: path.into(), line: i + 1, message: e.to_string() })?;
        out.push(v);
    }
    Ok(out)
}

/// Writes to `<path>.partial` and renames to `path` on [`commit`](Self::commit).
pub struct JsonlWriter {
    path: PathBuf,
    partial: PathBuf,
    out: BufWriter<File>,
    pub count: usize,
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".partial");
    PathBuf::from(p)
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self, FormatError> {
        let partial = partial_path(path);
        let f = File::create(&partial).map_err(io(&partial))?;
        Ok(JsonlWriter { path: path.into(), partial, out: BufWriter::new(f), count: 0 })
    }

    pub fn header(&mut self, line: &str) -> Result<(), FormatError> {
        writeln!(self.out, "{line}").map_err(io(&self.partial))
    }

    pub fn write<T: Serialize>(&mut self, item: &T) -> Result<(), FormatError> {
        let s = serde_json::to_string(item).expect("records serialize");
        writeln!(self.out, "{s}").map_err(io(&self.partial))?;
        self.count += 1;
        Ok(())
    }

    pub fn commit(mut self) -> Result<usize, FormatError> {
        self.out.flush().map_err(io(&self.partial))?;
        std::fs::rename(&self.partial, &self.path).map_err(io(&self.path))?;
        Ok(self.count)
    }
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<usize, FormatError> {
    let mut w = JsonlWriter::create(path)?;
    for it in items {
        w.write(it)?;
    }
    w.commit()
}

/// Pretty JSON through a `.partial` file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    write_text(path, &(serde_json::to_string_pretty(value).expect("value serializes") + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    let partial = partial_path(path);
    std::fs::write(&partial, text).map_err(io(&partial))?;
    std::fs::rename(&partial, path).map_err(io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| FormatError::Parse { path: path.into(), line: e.line(), message: e.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordFe {
    pub name: String,
    pub start: usize,
    pub end: usize,
    #[serde(default)]
    pub phrase_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gf: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub donor_id: RecordId,
    pub mode: ConditioningMode,
    pub generator_id: String,
    pub fidelity: f64,
    #[serde(default)]
    pub donor_lu: String,
}

/// One single-LU annotated sentence, human or generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_id: Option<SentenceId>,
    pub text: String,
    pub frame: String,
    pub lu: String,
    pub lu_id: LuId,
    pub targets: Vec<Span>,
    pub fes: Vec<RecordFe>,
    /// `fulltext`, `lexicographic` or `generated`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl SentenceRecord {
    pub fn from_annotated(release: &Release, r: &AnnotatedSentence) -> Result<Self, FormatError> {
        Self::from_annotated_with(&release.lexicon, r, |s| match s {
            Source::Fulltext(d) => release.document(d).map(|d| d.name.clone()),
            Source::Lexicographic => None,
        })
    }

    pub fn from_annotated_with(
        lexicon: &Lexicon,
        r: &AnnotatedSentence,
        document: impl Fn(Source) -> Option<String>,
    ) -> Result<Self, FormatError> {
        let lu = lexicon.lu(r.lu)?;
        let frame = lexicon.frame(lu.frame)?;
        let mut fes = Vec::with_capacity(r.fes.len());
        for f in &r.fes {
            fes.push(RecordFe {
                name: lexicon.fe(f.fe)?.name.clone(),
                start: f.span.start,
                end: f.span.end,
                phrase_type: f.phrase_type.clone(),
                gf: f.grammatical_function.clone(),
            });
        }
        Ok(SentenceRecord {
            id: format!("r{}", r.id),
            sentence_id: Some(r.sentence_id),
            text: r.text.clone(),
            frame: frame.name.clone(),
            lu: lu.name(),
            lu_id: lu.id,
            targets: r.targets.clone(),
            fes,
            source: if r.source.is_fulltext() { "fulltext" } else { "lexicographic" }.into(),
            document: document(r.source),
            split: Some(r.split),
            provenance: None,
        })
    }

    pub fn from_candidate(c: &GenerationCandidate, fidelity: f64) -> Self {
        SentenceRecord {
            id: c.id(),
            sentence_id: None,
            text: c.text.clone(),
            frame: c.frame_name.clone(),
            lu: c.lu_name.clone(),
            lu_id: c.target_lu,
            targets: c.targets.clone(),
            fes: c
                .fes
                .iter()
                .map(|f| RecordFe {
                    name: f.name.clone(),
                    start: f.span.start,
                    end: f.span.end,
                    phrase_type: f.phrase_type.clone(),
                    gf: f.grammatical_function.clone(),
                })
                .collect(),
            source: "generated".into(),
            document: None,
            split: None,
            provenance: Some(Provenance {
                donor_id: c.donor_id,
                mode: c.mode,
                generator_id: c.generator_id.clone(),
                fidelity,
                donor_lu: c.donor_lu_name.clone(),
            }),
        }
    }
}
