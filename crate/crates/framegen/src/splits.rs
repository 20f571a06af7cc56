//! Fulltext document split lists.

use std::collections::BTreeSet;
use std::path::Path;

use framegen_core::Split;
use serde::{Deserialize, Serialize};

use crate::release::LoadError;

const STANDARD: &str = include_str!("../data/standard_splits.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    #[serde(default)]
    pub dev: Vec<String>,
    #[serde(default)]
    pub test: Vec<String>,
    /// Explicit train list; ignored when `train_rest` is set.
    #[serde(default)]
    pub train: Vec<String>,
    #[serde(default = "yes")]
    pub train_rest: bool,
    #[serde(default = "train")]
    pub lexicographic: Split,
}

fn yes() -> bool {
    true
}

fn train() -> Split {
    Split::Train
}

fn doc_key(name: &str) -> &str {
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    base.strip_suffix(".xml").unwrap_or(base)
}

impl SplitConfig {
    /// The standard dev/test document lists; everything else is train.
    pub fn standard() -> Self {
        toml::from_str(STANDARD).expect("bundled split config parses")
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        let cfg: SplitConfig =
            toml::from_str(&text).map_err(|e| LoadError::Format { path: path.into(), message: e.to_string() })?;
        cfg.check().map_err(|message| LoadError::Format { path: path.into(), message })?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), String> {
        let dev: BTreeSet<&str> = self.dev.iter().map(|d| doc_key(d)).collect();
        if let Some(d) = self.test.iter().find(|t| dev.contains(doc_key(t))) {
            return Err(format!("document {d} is listed as both dev and test"));
        }
        Ok(())
    }

    /// Split of a fulltext document, by file name with or without `.xml`.
    pub fn split_of(&self, document: &str) -> Split {
        let key = doc_key(document);
        let listed = |l: &[String]| l.iter().any(|d| doc_key(d) == key);
        if listed(&self.test) {
            Split::Test
        } else if listed(&self.dev) {
            Split::Dev
        } else if self.train_rest || listed(&self.train) {
            Split::Train
        } else {
            Split::Unassigned
        }
    }
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_lists() {
        let s = SplitConfig::standard();
        assert_eq!(s.dev.len(), 8);
        assert_eq!(s.test.len(), 23);
        assert_eq!(s.split_of("ANC__110CYL072.xml"), Split::Dev);
        assert_eq!(s.split_of("fulltext/KBEval__cycorp.xml"), Split::Test);
        assert_eq!(s.split_of("PropBank__TicketSplitting"), Split::Dev);
        assert_eq!(s.split_of("ANC__EntrepreneurAsMadonna.xml"), Split::Train);
        assert_eq!(s.lexicographic, Split::Train);
    }

    #[test]
    fn explicit_train_list() {
        let s: SplitConfig = toml::from_str("train_rest = false\ntrain = [\"a.xml\"]\ntest = [\"b\"]").unwrap();
        assert_eq!(s.split_of("a"), Split::Train);
        assert_eq!(s.split_of("b.xml"), Split::Test);
        assert_eq!(s.split_of("c.xml"), Split::Unassigned);
    }
}
