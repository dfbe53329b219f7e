//! `score`: corpus → masked mentions → pronoun probabilities → scores.

use std::collections::{BTreeMap, HashMap};

use anthroscore::backend::score_sentences;
use anthroscore::pipeline::{
    filter_lm_documents, read_documents_file, run_pipeline, AnalysisSource, Document, ParseStore, PipelineConfig,
};
use anthroscore::scoring::{band_of, mean, Band, MaskedSentence};
use anthroscore::Error;
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::{build_backend, thread_pool};
use crate::config::RunConfig;
use crate::output::{write_json, write_jsonl, ErrorRecord, ScoredRecord};
use crate::CliError;

const SCORE_CHUNK: usize = 32;

#[derive(Debug, Serialize)]
struct Summary {
    documents: usize,
    documents_skipped_language: usize,
    lm_documents: usize,
    mentions: usize,
    duplicates_removed: usize,
    scored: usize,
    failed: usize,
    pipeline_issues: usize,
    issues_by_stage: BTreeMap<String, usize>,
    mean_a: Option<f64>,
    n_high: usize,
    n_low: usize,
    hi: f64,
    lo: f64,
    model_id: String,
    backend: String,
    inventory_fingerprint: String,
    lexicons: Vec<String>,
}

fn stage_of(e: &Error) -> &'static str {
    match e {
        Error::ZeroProbabilityMass { .. } | Error::InvalidProbability { .. } | Error::MissingPronoun(_) => "score",
        Error::CacheMiss(_) => "cache",
        _ => "backend",
    }
}

pub fn run(cfg: &RunConfig) -> Result<u8, CliError> {
    let corpus = cfg.corpus()?;
    let docs = read_documents_file(corpus).map_err(|e| CliError::config(format!("corpus: {}: {e}", corpus.display())))?;
    if docs.is_empty() {
        return Err(CliError::config(format!("corpus: no documents in {}", corpus.display())));
    }
    let parses = match (&cfg.parses, cfg.analysis) {
        (Some(p), AnalysisSource::Conllu) => {
            Some(ParseStore::from_manifest(p).map_err(|e| CliError::config(format!("parses: {}: {e}", p.display())))?)
        }
        _ => None,
    };
    let pipeline = PipelineConfig {
        lexicons: cfg.lexicons.clone(),
        analysis: cfg.analysis,
        deduplicate: cfg.dedup,
        english_only: true,
        lm_keywords: cfg.lm_keywords.clone(),
    };
    let extracted = run_pipeline(&docs, &pipeline, parses.as_ref(), cfg.workers)?;
    info!("{} mentions from {} documents", extracted.mentions.len(), docs.len());

    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let lm_docs: HashMap<&str, bool> =
        docs.iter().map(|d| (d.doc_id.as_str(), filter_lm_documents(d, &cfg.lm_keywords))).collect();

    let backend = build_backend(cfg)?;
    let sentences: Vec<MaskedSentence> = extracted.mentions.iter().map(|m| m.sentence.clone()).collect();
    let pool = thread_pool(cfg.workers)?;
    let results: Vec<_> = pool.install(|| {
        sentences
            .par_chunks(SCORE_CHUNK)
            .map(|chunk| score_sentences(chunk.to_vec(), &cfg.inventory, backend.as_ref(), cfg.epsilon))
            .collect::<Vec<_>>()
    });

    let mut scored = Vec::new();
    let mut errors: Vec<ErrorRecord> = extracted
        .issues
        .iter()
        .map(|i| ErrorRecord {
            doc_id: i.doc_id.clone(),
            sentence_index: i.sentence_index,
            stage: i.stage.clone(),
            message: i.message.clone(),
            masked_sentence: None,
        })
        .collect();
    let mut failed = 0;
    for (mention, result) in extracted.mentions.iter().zip(results.into_iter().flatten()) {
        let s = &mention.sentence;
        match result {
            Ok(sc) => {
                let doc = by_id[s.doc_id.as_str()];
                scored.push(ScoredRecord {
                    sentence: sc.sentence,
                    lexicon: mention.lexicon.clone(),
                    model_id: cfg.backend.descriptor.model_id.clone(),
                    p_human: sc.p_human,
                    p_non_human: sc.p_non_human,
                    score_a: sc.score_a,
                    source: doc.source,
                    year: doc.year(),
                    categories: doc.categories.clone(),
                    lm_paper: lm_docs[s.doc_id.as_str()],
                });
            }
            Err(e) => {
                failed += 1;
                errors.push(ErrorRecord {
                    doc_id: s.doc_id.clone(),
                    sentence_index: Some(s.sentence_index),
                    stage: stage_of(&e).to_string(),
                    message: e.to_string(),
                    masked_sentence: Some(s.masked_sentence.clone()),
                });
            }
        }
    }

    let values: Vec<f64> = scored.iter().map(|r| r.score_a).collect();
    let t = &cfg.thresholds;
    let count_band = |b: Band| values.iter().filter(|&&v| band_of(v, t.hi, t.lo) == b).count();
    let mut issues_by_stage = BTreeMap::new();
    for e in &errors {
        *issues_by_stage.entry(e.stage.clone()).or_insert(0) += 1;
    }
    let summary = Summary {
        documents: docs.len(),
        documents_skipped_language: extracted.documents_skipped,
        lm_documents: lm_docs.values().filter(|&&v| v).count(),
        mentions: extracted.mentions.len(),
        duplicates_removed: extracted.duplicates_removed,
        scored: scored.len(),
        failed,
        pipeline_issues: extracted.issues.len(),
        issues_by_stage,
        mean_a: mean(&values).ok(),
        n_high: count_band(Band::High),
        n_low: count_band(Band::Low),
        hi: t.hi,
        lo: t.lo,
        model_id: cfg.backend.descriptor.model_id.clone(),
        backend: format!("{:?}", cfg.backend.descriptor.kind).to_lowercase(),
        inventory_fingerprint: cfg.inventory.fingerprint(),
        lexicons: cfg.lexicons.iter().map(|l| l.name.clone()).collect(),
    };

    let out = &cfg.output_dir;
    write_jsonl(&out.join("masked.jsonl"), &sentences)?;
    write_jsonl(&out.join("scored.jsonl"), &scored)?;
    write_jsonl(&out.join("errors.jsonl"), &errors)?;
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "{} documents, {} mentions ({} duplicates removed), {} scored, {} failed, mean A = {}",
        summary.documents,
        summary.mentions,
        summary.duplicates_removed,
        summary.scored,
        summary.failed,
        summary.mean_a.map_or("n/a".to_string(), |m| format!("{m:.4}"))
    );

    if failed > 0 {
        warn!("{failed} of {} mentions could not be scored; see errors.jsonl", sentences.len());
        return Ok(2);
    }
    Ok(0)
}
