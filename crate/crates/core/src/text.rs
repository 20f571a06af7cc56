//! Character-offset helpers. All spans in this crate count Unicode scalar
//! values, not bytes.

use alloc::string::String;
use alloc::vec::Vec;

use crate::lexicon::Span;

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte offset of the `char_idx`-th scalar value (or `s.len()` at the end).
pub fn byte_offset(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Slice `s` by a character span. Returns `None` when out of bounds.
pub fn slice(s: &str, span: Span) -> Option<&str> {
    if span.start > span.end {
        return None;
    }
    let start = byte_offset(s, span.start)?;
    let end = byte_offset(s, span.end)?;
    Some(&s[start..end])
}

/// Precomputed char→byte table for repeated slicing of one string.
pub struct CharIndex<'a> {
    text: &'a str,
    offsets: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        offsets.push(text.len());
        CharIndex { text, offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice(&self, span: Span) -> Option<&'a str> {
        if span.start > span.end || span.end >= self.offsets.len() {
            return None;
        }
        Some(&self.text[self.offsets[span.start]..self.offsets[span.end]])
    }
}

/// Metric tokenizer: lowercase, split on Unicode whitespace, strip trailing
/// punctuation from each token and drop tokens left empty.
pub fn metric_tokens(s: &str) -> Vec<String> {
    s.split_whitespace()
        .filter_map(|tok| {
            let t = tok.trim_end_matches(|c: char| c.is_ascii_punctuation() || is_unicode_punct(c));
            (!t.is_empty()).then(|| t.to_lowercase())
        })
        .collect()
}

fn is_unicode_punct(c: char) -> bool {
    matches!(c, '…' | '“' | '”' | '‘' | '’' | '«' | '»' | '–' | '—')
}

/// Normalize whitespace runs to single spaces and trim.
pub fn normalize_ws(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for (i, part) in s.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}
