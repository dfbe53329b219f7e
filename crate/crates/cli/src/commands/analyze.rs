//! `analyze` and `verbs`.

use std::path::Path;

use anthroscore::analytics::logodds::{significant, verb_log_odds};
use anthroscore::analytics::{group_mean_ci, trend, GroupedScore, LogOddsResult, PValueMethod};
use anthroscore::scoring::ScoredSentence;
use log::warn;

use crate::config::RunConfig;
use crate::output::{read_jsonl, write_csv, write_json, ScoredRecord};
use crate::{CliError, GroupBy};

pub const GROUP_HEADER: &[&str] = &["group_key", "n", "mean_a", "ci_low", "ci_high"];
pub const VERB_HEADER: &[&str] = &["word", "count_a", "count_b", "delta", "variance", "z"];

pub fn load_scored(cfg: &RunConfig, explicit: Option<&Path>) -> Result<Vec<ScoredRecord>, CliError> {
    let path = cfg.input_or_default(explicit, "scored.jsonl");
    if !path.is_file() {
        return Err(CliError::config(format!(
            "scored: {} not found; run `anthroscore score` first",
            path.display()
        )));
    }
    read_jsonl(&path)
}

pub fn group_name(g: GroupBy) -> &'static str {
    match g {
        GroupBy::Category => "category",
        GroupBy::Year => "year",
        GroupBy::Entity => "entity",
        GroupBy::Source => "source",
        GroupBy::Lexicon => "lexicon",
        GroupBy::LmPaper => "lm_paper",
    }
}

/// Group keys of one record; empty when the metadata is missing.
pub fn keys_of(r: &ScoredRecord, g: GroupBy) -> Vec<String> {
    match g {
        GroupBy::Category => r.categories.clone(),
        GroupBy::Year => r.year.map(|y| y.to_string()).into_iter().collect(),
        GroupBy::Entity => vec![r.sentence.entity_keyword.to_lowercase()],
        GroupBy::Source => vec![r.source.to_string()],
        GroupBy::Lexicon => vec![r.lexicon.clone()],
        GroupBy::LmPaper => vec![if r.lm_paper { "lm" } else { "non_lm" }.to_string()],
    }
}

/// (key, score) pairs, warning about records lacking the grouping field.
pub fn keyed_scores<'a, I>(records: I, g: GroupBy) -> Vec<(String, f64)>
where
    I: IntoIterator<Item = &'a ScoredRecord>,
{
    let mut pairs = Vec::new();
    let mut missing: Vec<String> = Vec::new();
    for r in records {
        let keys = keys_of(r, g);
        if keys.is_empty() {
            missing.push(format!("{}#{}", r.sentence.doc_id, r.sentence.sentence_index));
        }
        pairs.extend(keys.into_iter().map(|k| (k, r.score_a)));
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(10).map(String::as_str).collect();
        warn!(
            "{} records lack {} metadata and were skipped: {}{}",
            missing.len(),
            group_name(g),
            shown.join(", "),
            if missing.len() > shown.len() { ", ..." } else { "" }
        );
    }
    pairs
}

type GroupRow = (String, usize, f64, f64, f64);

pub fn group_rows(groups: &[GroupedScore]) -> Vec<GroupRow> {
    groups.iter().map(|g| (g.group_key.clone(), g.n, g.mean_a, g.ci_low, g.ci_high)).collect()
}

pub fn analyze(cfg: &RunConfig, g: GroupBy, scored: Option<&Path>, permutation_p: bool) -> Result<u8, CliError> {
    let records = load_scored(cfg, scored)?;
    let pairs = keyed_scores(&records, g);
    if pairs.is_empty() {
        return Err(CliError::config(format!("group_by: no records carry {} metadata", group_name(g))));
    }
    let groups = group_mean_ci(pairs, cfg.n_boot, cfg.seed)?;
    let name = group_name(g);
    write_csv(&cfg.output_dir.join(format!("grouped_{name}.csv")), GROUP_HEADER, &group_rows(&groups))?;
    if g == GroupBy::Year {
        let points: Vec<(i64, f64)> =
            groups.iter().map(|gr| (gr.group_key.parse::<i64>().expect("year keys are integers"), gr.mean_a)).collect();
        let method = if permutation_p { PValueMethod::Permutation } else { PValueMethod::TApproximation };
        match trend(&points, method) {
            Ok(t) => {
                if let Some(w) = &t.warning {
                    eprintln!("warning: {w}");
                }
                println!("trend over {} years: spearman r = {:.4}, p = {:.4}", t.keys.len(), t.spearman_r, t.p_value);
                write_json(&cfg.output_dir.join("trend_year.json"), &t)?;
            }
            Err(e) => eprintln!("warning: no year trend: {e}"),
        }
    }
    for gr in &groups {
        println!("{}\t{}\t{:.4}\t[{:.4}, {:.4}]", gr.group_key, gr.n, gr.mean_a, gr.ci_low, gr.ci_high);
    }
    Ok(0)
}

type VerbRow = (String, u64, u64, f64, f64, f64);

fn verb_rows<'a>(rows: impl IntoIterator<Item = &'a LogOddsResult>) -> Vec<VerbRow> {
    rows.into_iter().map(|r| (r.word.clone(), r.count_a, r.count_b, r.delta, r.variance, r.z)).collect()
}

pub fn scored_sentences(records: &[ScoredRecord]) -> Vec<ScoredSentence> {
    records.iter().map(ScoredRecord::scored).collect()
}

pub fn verbs(cfg: &RunConfig, scored: Option<&Path>, prior_scale: f64) -> Result<u8, CliError> {
    let records = load_scored(cfg, scored)?;
    let results = verb_log_odds(&scored_sentences(&records), &cfg.thresholds, prior_scale)?;
    write_csv(&cfg.output_dir.join("verbs.csv"), VERB_HEADER, &verb_rows(&results))?;
    let sig = significant(&results);
    write_csv(&cfg.output_dir.join("verbs_significant.csv"), VERB_HEADER, &verb_rows(sig.iter().copied()))?;
    println!("{} verbs, {} with |z| > 1.96", results.len(), sig.len());
    Ok(0)
}
