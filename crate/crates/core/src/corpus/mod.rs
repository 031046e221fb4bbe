//! Collection parsing and text normalization.
//!
//! Text goes through `tokenize` → `remove_stopwords` → `porter_stem`; stems
//! that land on a stopword are dropped as well, so every token a [`Document`]
//! carries is lowercase, whitespace-free and outside the active stoplist.

mod smart;
mod stem;

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

pub use smart::{
    parse_smart_docs, parse_smart_docs_str, parse_smart_queries, parse_smart_queries_str,
};
pub use stem::porter_stem;

/// Collection-assigned document identifier.
pub type DocId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: DocId,
    pub title: String,
    pub body: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryDoc {
    pub id: u32,
    pub text: String,
    pub tokens: Vec<String>,
}

const STANDARD_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// A set of lowercase words excluded from indexing.
#[derive(Debug, Clone)]
pub struct StopList {
    words: HashSet<String>,
    source: String,
}

impl StopList {
    /// The shipped 318-word English list.
    pub fn standard() -> Self {
        Self::parse(STANDARD_STOPWORDS, "builtin:english-318")
    }

    pub fn empty() -> Self {
        StopList {
            words: HashSet::new(),
            source: "empty".into(),
        }
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, source: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopList {
            words,
            source: source.to_string(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text, &path.display().to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        if word.bytes().any(|b| b.is_ascii_uppercase()) {
            self.words.contains(&word.to_lowercase())
        } else {
            self.words.contains(word)
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Entries in sorted order, one per line.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&str> = self.words.iter().map(String::as_str).collect();
        words.sort_unstable();
        let mut out = String::new();
        for w in words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

impl Default for StopList {
    fn default() -> Self {
        Self::standard()
    }
}

/// Token filtering rules applied by the tokenizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenRules {
    pub min_len: usize,
    pub drop_numeric: bool,
}

impl Default for TokenRules {
    fn default() -> Self {
        TokenRules {
            min_len: 2,
            drop_numeric: true,
        }
    }
}

/// Lowercased maximal alphanumeric runs with the default rules: tokens
/// shorter than two characters and pure-digit tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, TokenRules::default())
}

pub fn tokenize_with(text: &str, rules: TokenRules) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| t.len() >= rules.min_len.max(1))
        .filter(|t| !(rules.drop_numeric && t.bytes().all(|b| b.is_ascii_digit())))
        .map(str::to_ascii_lowercase)
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stoplist: &StopList) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stoplist.contains(t))
        .collect()
}

/// The full normalization pipeline shared by documents and queries.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    pub stoplist: StopList,
    pub rules: TokenRules,
}

impl Analyzer {
    pub fn new(stoplist: StopList) -> Self {
        Analyzer {
            stoplist,
            rules: TokenRules::default(),
        }
    }

    pub fn analyze(&self, text: &str) -> Vec<String> {
        remove_stopwords(tokenize_with(text, self.rules), &self.stoplist)
            .into_iter()
            .map(|t| porter_stem(&t))
            .filter(|s| !self.stoplist.contains(s))
            .collect()
    }
}
