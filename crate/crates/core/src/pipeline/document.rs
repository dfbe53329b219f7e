//! Corpus documents and JSONL ingestion.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Papers,
    News,
    #[default]
    Other,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Papers => "papers",
            Source::News => "news",
            Source::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDocument")]
pub struct Document {
    pub doc_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    pub categories: Vec<String>,
    pub source: Source,
    /// Precomputed language tag; identification itself happens upstream.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

#[derive(Deserialize)]
struct RawDocument {
    doc_id: String,
    #[serde(default)]
    title: Option<String>,
    text: String,
    #[serde(default)]
    date: Option<String>,
    #[serde(default)]
    categories: Vec<String>,
    #[serde(default)]
    source: Source,
    #[serde(default)]
    lang: Option<String>,
}

impl TryFrom<RawDocument> for Document {
    type Error = Error;

    fn try_from(raw: RawDocument) -> Result<Self> {
        if raw.doc_id.is_empty() {
            return Err(Error::InvalidDocument("empty doc_id".into()));
        }
        let date = raw
            .date
            .filter(|d| !d.is_empty())
            .map(|d| {
                NaiveDate::parse_from_str(&d, "%Y-%m-%d").map_err(|_| {
                    Error::InvalidDocument(format!("{}: {d:?} is not a YYYY-MM-DD date", raw.doc_id))
                })
            })
            .transpose()?;
        Ok(Document {
            doc_id: raw.doc_id,
            title: raw.title,
            text: raw.text,
            date,
            categories: raw.categories,
            source: raw.source,
            lang: raw.lang,
        })
    }
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            title: None,
            text: text.into(),
            date: None,
            categories: Vec::new(),
            source: Source::Other,
            lang: None,
        }
    }

    pub fn year(&self) -> Option<i32> {
        self.date.map(|d| d.year())
    }

    /// True unless a language tag is present and is not English.
    pub fn is_english(&self) -> bool {
        self.lang.as_deref().is_none_or(|l| {
            let l = l.to_ascii_lowercase();
            l == "en" || l.starts_with("en-") || l.starts_with("en_") || l == "english"
        })
    }
}

/// Parses a JSONL corpus. Blank lines are skipped; doc_ids must be unique.
pub fn read_documents<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidDocument(format!("line {}: {e}", n + 1)))?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::InvalidDocument(format!(
                "line {}: duplicate doc_id {:?}",
                n + 1,
                doc.doc_id
            )));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn read_documents_file(path: &Path) -> Result<Vec<Document>> {
    let file = std::fs::File::open(path)?;
    read_documents(std::io::BufReader::new(file))
}
