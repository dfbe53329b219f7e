//! Record formats and atomic file output.

use std::io::{BufRead, Write};
use std::path::Path;

use anthroscore::pipeline::Source;
use anthroscore::scoring::{MaskedSentence, ScoredSentence};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One scored mention with the document metadata analyses group by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    #[serde(flatten)]
    pub sentence: MaskedSentence,
    pub lexicon: String,
    pub model_id: String,
    pub p_human: f64,
    pub p_non_human: f64,
    pub score_a: f64,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default)]
    pub categories: Vec<String>,
    pub lm_paper: bool,
}

impl ScoredRecord {
    pub fn scored(&self) -> ScoredSentence {
        ScoredSentence {
            sentence: self.sentence.clone(),
            p_human: self.p_human,
            p_non_human: self.p_non_human,
            score_a: self.score_a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub doc_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_index: Option<usize>,
    pub stage: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masked_sentence: Option<String>,
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn jsonl_bytes<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    write_atomic(path, &jsonl_bytes(items))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("value serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Header row plus one row per record.
pub fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: &[R]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| CliError::config(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(item);
    }
    Ok(out)
}
