//! `ablate`: recompute group means with a pronoun or verbs removed.

use std::collections::BTreeMap;
use std::path::Path;

use anthroscore::analytics::logodds::{top_k_verbs, verb_log_odds};
use anthroscore::analytics::{ablate_pronoun, filter_by_verbs, spearman, spearman_r, VerbFilterMode};
use anthroscore::backend::{CacheKey, PersistentCache};
use anthroscore::pipeline::lexicon::{bundled_reporting_verbs, parse_word_list};
use anthroscore::scoring::mean;
use anthroscore::Error;
use serde::Serialize;

use super::analyze::{group_name, keyed_scores, load_scored, scored_sentences};
use crate::config::RunConfig;
use crate::output::{write_csv, write_json, ScoredRecord};
use crate::{CliError, GroupBy};

const HEADER: &[&str] = &["group_key", "n_original", "mean_original", "n_modified", "mean_modified"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ablation {
    Pronoun(String),
    AllPronouns,
    ReportingVerbs,
    TopVerbs(usize),
}

fn parse_ablation(s: &str) -> Result<Ablation, CliError> {
    let bad = || CliError::config(format!("ablation: {s:?} is not pronoun:<word>, pronouns, reporting_verbs or top_verbs:<k>"));
    match s.split_once(':') {
        Some(("pronoun", w)) if !w.is_empty() => Ok(Ablation::Pronoun(w.to_string())),
        Some(("top_verbs", k)) => k.parse().map(Ablation::TopVerbs).map_err(|_| bad()),
        None if s == "pronouns" => Ok(Ablation::AllPronouns),
        None if s == "reporting_verbs" => Ok(Ablation::ReportingVerbs),
        None if s == "top_verbs" => Ok(Ablation::TopVerbs(3)),
        _ => Err(bad()),
    }
}

#[derive(Debug, Serialize)]
struct GroupComparison {
    group_key: String,
    n_original: usize,
    mean_original: f64,
    n_modified: usize,
    mean_modified: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Report {
    ablation: String,
    group_by: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    removed_verbs: Vec<String>,
    records_original: usize,
    records_modified: usize,
    mean_original: Option<f64>,
    mean_modified: Option<f64>,
    /// Per-sentence rank correlation (pronoun ablations) or across group means (verb ablations).
    spearman_r: Option<f64>,
    p_value: Option<f64>,
    groups: Vec<GroupComparison>,
}

fn group_means(pairs: Vec<(String, f64)>) -> BTreeMap<String, Vec<f64>> {
    let mut m: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (k, v) in pairs {
        m.entry(k).or_default().push(v);
    }
    m
}

fn compare(original: &[ScoredRecord], modified: &[ScoredRecord], g: GroupBy) -> Vec<GroupComparison> {
    let a = group_means(keyed_scores(original, g));
    let b = group_means(keyed_scores(modified, g));
    a.into_iter()
        .map(|(k, v)| {
            let m = b.get(&k);
            GroupComparison {
                n_original: v.len(),
                mean_original: mean(&v).expect("groups are non-empty"),
                n_modified: m.map_or(0, Vec::len),
                mean_modified: m.and_then(|m| mean(m).ok()),
                group_key: k,
            }
        })
        .collect()
}

fn rows(groups: &[GroupComparison]) -> Vec<(String, usize, f64, usize, String)> {
    groups
        .iter()
        .map(|g| {
            let m = g.mean_modified.map(|v| v.to_string()).unwrap_or_default();
            (g.group_key.clone(), g.n_original, g.mean_original, g.n_modified, m)
        })
        .collect()
}

fn group_correlation(groups: &[GroupComparison]) -> (Option<f64>, Option<f64>) {
    let (x, y): (Vec<f64>, Vec<f64>) =
        groups.iter().filter_map(|g| g.mean_modified.map(|m| (g.mean_original, m))).unzip();
    // Two groups still give a rank correlation, just no p-value.
    match spearman(&x, &y) {
        Ok(c) => (Some(c.r), Some(c.p)),
        Err(_) => (spearman_r(&x, &y).ok(), None),
    }
}

fn pronoun_ablation(cfg: &RunConfig, records: &[ScoredRecord], pronoun: &str, g: GroupBy) -> Result<Report, CliError> {
    let Some(cache_path) = &cfg.backend.cache else {
        return Err(CliError::config(
            "backend.cache: pronoun ablation reads stored distributions; rerun `anthroscore score` with --cache <file> (or backend.cache in the config) and pass the same cache here",
        ));
    };
    let cache = PersistentCache::open(cache_path).map_err(|e| CliError::io(cache_path, e))?;
    let mut dists = Vec::with_capacity(records.len());
    let mut missing = 0;
    for r in records {
        match cache.get(&CacheKey::new(&r.model_id, &r.sentence.masked_sentence, &cfg.inventory)) {
            Some(d) => dists.push(d.probabilities),
            None => missing += 1,
        }
    }
    if missing > 0 {
        return Err(CliError::config(format!(
            "backend.cache: {missing} of {} scored sentences have no cached distribution in {}; rerun `anthroscore score` with this cache and the same inventory",
            records.len(),
            cache_path.display()
        )));
    }
    let refs: Vec<_> = dists.iter().collect();
    let ab = ablate_pronoun(&refs, &cfg.inventory, Some(pronoun), cfg.epsilon).map_err(|e| match e {
        Error::UnknownPronoun(_) | Error::LastPronoun(_) => CliError::config(format!("ablation: {e}")),
        other => other.into(),
    })?;
    let modified: Vec<ScoredRecord> = records
        .iter()
        .zip(&ab.modified)
        .map(|(r, &a)| ScoredRecord { score_a: a, ..r.clone() })
        .collect();
    let groups = compare(records, &modified, g);
    Ok(Report {
        ablation: format!("pronoun:{pronoun}"),
        group_by: group_name(g).into(),
        removed_verbs: Vec::new(),
        records_original: records.len(),
        records_modified: modified.len(),
        mean_original: mean(&ab.original).ok(),
        mean_modified: mean(&ab.modified).ok(),
        spearman_r: ab.spearman_r,
        p_value: ab.p_value,
        groups,
    })
}

fn verb_ablation(
    records: &[ScoredRecord],
    verbs: Vec<String>,
    mode: VerbFilterMode,
    label: String,
    g: GroupBy,
) -> Report {
    let kept = filter_by_verbs(scored_sentences(records), &verbs, mode);
    let kept_keys: std::collections::HashSet<(String, usize, usize)> = kept
        .iter()
        .map(|s| (s.sentence.doc_id.clone(), s.sentence.sentence_index, s.sentence.span.start))
        .collect();
    let modified: Vec<ScoredRecord> = records
        .iter()
        .filter(|r| kept_keys.contains(&(r.sentence.doc_id.clone(), r.sentence.sentence_index, r.sentence.span.start)))
        .cloned()
        .collect();
    let groups = compare(records, &modified, g);
    let (spearman_r, p_value) = group_correlation(&groups);
    let scores = |rs: &[ScoredRecord]| mean(&rs.iter().map(|r| r.score_a).collect::<Vec<_>>()).ok();
    Report {
        ablation: label,
        group_by: group_name(g).into(),
        removed_verbs: verbs,
        records_original: records.len(),
        records_modified: modified.len(),
        mean_original: scores(records),
        mean_modified: scores(&modified),
        spearman_r,
        p_value,
        groups,
    }
}

pub fn run(cfg: &RunConfig, arg: &str, g: GroupBy, scored: Option<&Path>, verbs: Option<&Path>) -> Result<u8, CliError> {
    let ablation = parse_ablation(arg)?;
    let records = load_scored(cfg, scored)?;
    let reports = match ablation {
        Ablation::Pronoun(p) => vec![pronoun_ablation(cfg, &records, &p, g)?],
        Ablation::AllPronouns => {
            let mut out = Vec::new();
            for p in cfg.inventory.all() {
                match pronoun_ablation(cfg, &records, p, g) {
                    Ok(r) => out.push(r),
                    Err(e) if e.message.contains("would leave") || e.message.contains("last") => {
                        eprintln!("warning: skipping {p}: {}", e.message)
                    }
                    Err(e) => return Err(e),
                }
            }
            out
        }
        Ablation::ReportingVerbs => {
            let list = match verbs {
                Some(p) => parse_word_list(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
                None => bundled_reporting_verbs(),
            };
            if list.is_empty() {
                return Err(CliError::config("verbs: the verb list is empty"));
            }
            vec![verb_ablation(&records, list, VerbFilterMode::DropSentences, "reporting_verbs".into(), g)]
        }
        Ablation::TopVerbs(k) => {
            let results = verb_log_odds(&scored_sentences(&records), &cfg.thresholds, 1.0)?;
            let top = top_k_verbs(&results, k);
            vec![verb_ablation(&records, top, VerbFilterMode::DropVerbs, format!("top_verbs:{k}"), g)]
        }
    };
    for r in &reports {
        let tag = r.ablation.replace(':', "_");
        let stem = format!("ablation_{tag}_{}", group_name(g));
        write_csv(&cfg.output_dir.join(format!("{stem}.csv")), HEADER, &rows(&r.groups))?;
        write_json(&cfg.output_dir.join(format!("{stem}.json")), r)?;
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "{}: mean A {} -> {} over {} -> {} records, spearman r = {}",
            r.ablation,
            fmt(r.mean_original),
            fmt(r.mean_modified),
            r.records_original,
            r.records_modified,
            fmt(r.spearman_r)
        );
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablation_specs() {
        assert_eq!(parse_ablation("pronoun:him").unwrap(), Ablation::Pronoun("him".into()));
        assert_eq!(parse_ablation("top_verbs:5").unwrap(), Ablation::TopVerbs(5));
        assert_eq!(parse_ablation("reporting_verbs").unwrap(), Ablation::ReportingVerbs);
        assert_eq!(parse_ablation("pronouns").unwrap(), Ablation::AllPronouns);
        assert!(parse_ablation("top_verbs:x").is_err());
        assert!(parse_ablation("pronoun:").is_err());
    }
}
