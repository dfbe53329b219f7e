//! Text pipeline: documents in, masked entity-mention sentences out.

pub mod conllu;
pub mod document;
pub mod filter;
pub mod lexicon;
pub mod mention;
pub mod segment;
pub mod tokens;
pub mod triples;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use conllu::{extract_triples_conllu, parse_conllu, ConlluSentence, ParseStore};
pub use document::{read_documents, read_documents_file, Document, Source};
pub use filter::{contains_keyword, deduplicate, filter_lm_documents};
pub use lexicon::EntityLexicon;
pub use mention::{find_entity_mentions, find_entity_mentions_multi, mask_mention, Mention};
pub use segment::split_sentences;
pub use triples::{extract_triples_rules, NounChunk, SemanticTriple};

use crate::error::{Error, Result};
use crate::scoring::MaskedSentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisSource {
    #[default]
    BuiltinRules,
    Conllu,
}

impl std::str::FromStr for AnalysisSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "builtin_rules" | "builtin" | "rules" => Ok(AnalysisSource::BuiltinRules),
            "conllu" => Ok(AnalysisSource::Conllu),
            other => Err(Error::InvalidDescriptor(format!("unknown analysis source {other:?}"))),
        }
    }
}

/// Triples for one sentence from the chosen analysis source.
pub fn extract_triples(
    sentence: &str,
    sentence_index: usize,
    source: AnalysisSource,
    parse: Option<&ConlluSentence>,
) -> Result<Vec<SemanticTriple>> {
    match source {
        AnalysisSource::BuiltinRules => Ok(extract_triples_rules(sentence, sentence_index)),
        AnalysisSource::Conllu => {
            let parse = parse.ok_or_else(|| Error::ConlluParse {
                line: 0,
                message: format!("no parse supplied for sentence {sentence_index}"),
            })?;
            extract_triples_conllu(sentence, parse, sentence_index)
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub lexicons: Vec<EntityLexicon>,
    pub analysis: AnalysisSource,
    pub deduplicate: bool,
    /// Skip documents whose language tag is present and not English.
    pub english_only: bool,
    pub lm_keywords: Vec<String>,
}

impl PipelineConfig {
    pub fn new(lexicons: Vec<EntityLexicon>) -> Self {
        PipelineConfig {
            lexicons,
            analysis: AnalysisSource::BuiltinRules,
            deduplicate: true,
            english_only: true,
            lm_keywords: lexicon::bundled_lm_keywords(),
        }
    }
}

/// A masked sentence plus the lexicon that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedMention {
    #[serde(flatten)]
    pub sentence: MaskedSentence,
    pub lexicon: String,
}

/// A per-sentence problem that did not stop the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineIssue {
    pub doc_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_index: Option<usize>,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub mentions: Vec<ExtractedMention>,
    pub issues: Vec<PipelineIssue>,
    /// Records dropped as exact duplicates of an earlier masked sentence.
    pub duplicates_removed: usize,
    pub documents_seen: usize,
    pub documents_skipped: usize,
}

/// All mentions in one document, ordered by (sentence_index, span start).
pub fn process_document(
    doc: &Document,
    config: &PipelineConfig,
    parses: Option<&ParseStore>,
) -> (Vec<ExtractedMention>, Vec<PipelineIssue>) {
    let issue = |idx: Option<usize>, stage: &str, e: &Error| PipelineIssue {
        doc_id: doc.doc_id.clone(),
        sentence_index: idx,
        stage: stage.to_string(),
        message: e.to_string(),
    };
    let mut out = Vec::new();
    let mut issues = Vec::new();
    if doc.text.trim().is_empty() {
        issues.push(issue(None, "segment", &Error::InvalidDocument("empty text".into())));
        return (out, issues);
    }
    for (idx, span) in split_sentences(&doc.text).into_iter().enumerate() {
        let sentence = &doc.text[span.start..span.end];
        let parse = parses.and_then(|p| p.get(&doc.doc_id, idx));
        let triples = match extract_triples(sentence, idx, config.analysis, parse) {
            Ok(t) => t,
            Err(e) => {
                issues.push(issue(Some(idx), "parse", &e));
                continue;
            }
        };
        let mut mentions = find_entity_mentions_multi(&triples, &config.lexicons);
        mentions.sort_by_key(|m| m.span().start);
        for m in mentions {
            match mask_mention(&doc.doc_id, idx, sentence, &m) {
                Ok(sentence) => out.push(ExtractedMention { sentence, lexicon: m.lexicon }),
                Err(e) => issues.push(issue(Some(idx), "mask", &e)),
            }
        }
    }
    (out, issues)
}

/// Runs the pipeline over a corpus on `threads` workers (0 = all cores).
/// Output order is (doc_id, sentence_index, span start) whatever the
/// scheduling, and deduplication keeps the first record in that order.
pub fn run_pipeline(
    docs: &[Document],
    config: &PipelineConfig,
    parses: Option<&ParseStore>,
    threads: usize,
) -> Result<PipelineOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidDescriptor(format!("thread pool: {e}")))?;
    let keep: Vec<&Document> = docs.iter().filter(|d| !config.english_only || d.is_english()).collect();
    let results: Vec<_> = pool.install(|| {
        keep.par_iter().map(|d| process_document(d, config, parses)).collect()
    });
    let mut mentions = Vec::new();
    let mut issues = Vec::new();
    for (m, i) in results {
        mentions.extend(m);
        issues.extend(i);
    }
    mentions.sort_by(|a, b| {
        let (a, b) = (&a.sentence, &b.sentence);
        (&a.doc_id, a.sentence_index, a.span.start).cmp(&(&b.doc_id, b.sentence_index, b.span.start))
    });
    issues.sort_by(|a, b| (&a.doc_id, a.sentence_index).cmp(&(&b.doc_id, b.sentence_index)));
    let before = mentions.len();
    if config.deduplicate {
        mentions = filter::deduplicate_by(mentions, |m| m.sentence.masked_sentence.as_str());
    }
    Ok(PipelineOutput {
        duplicates_removed: before - mentions.len(),
        mentions,
        issues,
        documents_seen: docs.len(),
        documents_skipped: docs.len() - keep.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> PipelineConfig {
        PipelineConfig::new(vec![EntityLexicon::bundled("artifact").unwrap()])
    }

    #[test]
    fn order_is_independent_of_threads() {
        let docs: Vec<Document> = (0..40)
            .map(|i| {
                Document::new(
                    format!("d{:02}", 39 - i),
                    format!("The system rejects job {i}. Our model wins {i} times. The approach fails."),
                )
            })
            .collect();
        let one = run_pipeline(&docs, &config(), None, 1).unwrap();
        let many = run_pipeline(&docs, &config(), None, 8).unwrap();
        assert_eq!(one.mentions, many.mentions);
        assert_eq!(one.mentions[0].sentence.doc_id, "d00");
        // "[MASK] fails." repeats in every document
        assert_eq!(one.duplicates_removed, 39);
    }

    #[test]
    fn conllu_without_parse_is_reported() {
        let mut cfg = config();
        cfg.analysis = AnalysisSource::Conllu;
        let docs = [Document::new("a", "The system works.")];
        let out = run_pipeline(&docs, &cfg, None, 1).unwrap();
        assert!(out.mentions.is_empty());
        assert_eq!(out.issues.len(), 1);
        assert_eq!(out.issues[0].stage, "parse");
    }

    #[test]
    fn non_english_documents_skipped() {
        let mut d = Document::new("a", "The system works.");
        d.lang = Some("fr".into());
        let out = run_pipeline(&[d], &config(), None, 1).unwrap();
        assert_eq!(out.documents_skipped, 1);
        assert!(out.mentions.is_empty());
    }

    #[test]
    fn existing_placeholder_is_an_issue() {
        let docs = [Document::new("a", "The system beats [MASK] today.")];
        let out = run_pipeline(&docs, &config(), None, 1).unwrap();
        assert!(out.mentions.is_empty());
        assert_eq!(out.issues[0].stage, "mask");
    }
}
