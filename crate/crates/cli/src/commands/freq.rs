//! `freq-report` and `serve-stub`.

use std::path::Path;

use anthroscore::analytics::entity_frequency_report;
use anthroscore::backend::{StubBackend, StubServer};
use anthroscore::pipeline::{extract_triples, read_documents_file, split_sentences, AnalysisSource, ParseStore};
use log::warn;
use rayon::prelude::*;

use super::thread_pool;
use crate::config::RunConfig;
use crate::output::write_csv;
use crate::CliError;

pub fn run(cfg: &RunConfig, top_k: usize) -> Result<u8, CliError> {
    let corpus = cfg.corpus()?;
    let docs = read_documents_file(corpus).map_err(|e| CliError::config(format!("corpus: {}: {e}", corpus.display())))?;
    if docs.is_empty() {
        return Err(CliError::config(format!("corpus: no documents in {}", corpus.display())));
    }
    let parses = match (&cfg.parses, cfg.analysis) {
        (Some(p), AnalysisSource::Conllu) => {
            Some(ParseStore::from_manifest(p).map_err(|e| CliError::config(format!("parses: {}: {e}", p.display())))?)
        }
        (None, AnalysisSource::Conllu) => return Err(CliError::config("parses: conllu analysis needs a parse manifest")),
        _ => None,
    };
    let pool = thread_pool(cfg.workers)?;
    let triples: Vec<_> = pool.install(|| {
        docs.par_iter()
            .filter(|d| d.is_english())
            .flat_map_iter(|d| {
                let mut out = Vec::new();
                for (idx, span) in split_sentences(&d.text).into_iter().enumerate() {
                    let parse = parses.as_ref().and_then(|p| p.get(&d.doc_id, idx));
                    match extract_triples(&d.text[span.start..span.end], idx, cfg.analysis, parse) {
                        Ok(t) => out.extend(t),
                        Err(e) => warn!("{}#{idx}: {e}", d.doc_id),
                    }
                }
                out
            })
            .collect()
    });
    let report = entity_frequency_report(&triples, top_k);
    write_csv(&cfg.output_dir.join("entity_frequency.csv"), &["entity", "count"], &report)?;
    for (entity, count) in report.iter().take(20) {
        println!("{count}\t{entity}");
    }
    Ok(0)
}

pub fn serve_stub(addr: &str, model: &str, mask_token: &str, stub_file: Option<&Path>) -> Result<u8, CliError> {
    let stub = match stub_file {
        Some(p) => StubBackend::from_file(model, p).map_err(|e| CliError::io(p, e))?,
        None => StubBackend::uniform(model),
    }
    .with_mask_token(mask_token);
    let server = StubServer::start(addr, stub)?;
    println!("{}", server.endpoint());
    server.join();
    Ok(0)
}
