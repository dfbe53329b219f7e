//! Robustness checks: pronoun ablation, verb filtering, and the entity
//! frequency report used to build lexicons.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::stats::{spearman, Correlation};
use crate::error::{Error, Result};
use crate::pipeline::SemanticTriple;
use crate::scoring::{log_ratio, smoothed_sums, MaskedSentence, PronounInventory, ScoredSentence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub removed: Option<String>,
    pub original: Vec<f64>,
    pub modified: Vec<f64>,
    /// `None` when a score series is constant and r is undefined.
    pub spearman_r: Option<f64>,
    pub p_value: Option<f64>,
}

fn scores_with(dists: &[&BTreeMap<String, f64>], inventory: &PronounInventory, epsilon: f64) -> Result<Vec<f64>> {
    dists
        .iter()
        .map(|d| {
            let (h, n) = smoothed_sums(d, inventory, epsilon)?;
            log_ratio(h, n)
        })
        .collect()
}

/// Recomputes per-sentence scores from stored distributions with one
/// pronoun removed (`None` = no removal) and correlates them with the
/// originals.
pub fn ablate_pronoun(
    distributions: &[&BTreeMap<String, f64>],
    inventory: &PronounInventory,
    remove: Option<&str>,
    epsilon: f64,
) -> Result<Ablation> {
    let reduced = match remove {
        Some(p) => inventory.without(p)?,
        None => inventory.clone(),
    };
    let original = scores_with(distributions, inventory, epsilon)?;
    let modified = scores_with(distributions, &reduced, epsilon)?;
    let same = original.iter().zip(&modified).all(|(a, b)| a.to_bits() == b.to_bits());
    let corr = if same && !original.is_empty() {
        Some(Correlation { r: 1.0, p: 0.0 })
    } else {
        match spearman(&original, &modified) {
            Ok(c) => Some(c),
            Err(Error::DegenerateInput(_)) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(Ablation {
        removed: remove.map(str::to_string),
        original,
        modified,
        spearman_r: corr.map(|c| c.r),
        p_value: corr.map(|c| c.p),
    })
}

pub trait HasVerb {
    fn verb(&self) -> Option<&str>;
}

impl HasVerb for MaskedSentence {
    fn verb(&self) -> Option<&str> {
        self.verb_lemma.as_deref()
    }
}

impl HasVerb for ScoredSentence {
    fn verb(&self) -> Option<&str> {
        self.sentence.verb_lemma.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbFilterMode {
    /// Drop records whose verb is in a verb lexicon (e.g. reporting verbs).
    DropSentences,
    /// Drop records whose verb is among the supplied top-z verbs.
    DropVerbs,
}

/// Removes records whose verb lemma is in `verbs`. Both modes are the same
/// membership test; they differ in where the verb set comes from.
pub fn filter_by_verbs<T: HasVerb, S: AsRef<str>>(records: Vec<T>, verbs: &[S], _mode: VerbFilterMode) -> Vec<T> {
    let set: HashSet<String> = verbs.iter().map(|v| v.as_ref().to_lowercase()).collect();
    records
        .into_iter()
        .filter(|r| !r.verb().is_some_and(|v| set.contains(&v.to_lowercase())))
        .collect()
}

/// Subject and object chunk heads ranked by frequency, ties alphabetical.
/// `top_k = 0` returns every head.
pub fn entity_frequency_report<'a, I>(triples: I, top_k: usize) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = &'a SemanticTriple>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in triples {
        for chunk in [&t.subject_chunk, &t.object_chunk].into_iter().flatten() {
            let head = chunk.head().to_lowercase();
            if !head.is_empty() {
                *counts.entry(head).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if top_k > 0 {
        ranked.truncate(top_k);
    }
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::extract_triples_rules;
    use crate::scoring::{GrammaticalRole, Span, DEFAULT_EPSILON};

    fn dist(vals: &[(&str, f64)]) -> BTreeMap<String, f64> {
        let inv = PronounInventory::reference();
        let mut d: BTreeMap<String, f64> = inv.all().map(|p| (p.to_string(), 0.01)).collect();
        for (k, v) in vals {
            d.insert(k.to_string(), *v);
        }
        d
    }

    #[test]
    fn identity_ablation_is_bitwise_equal() {
        let ds = [dist(&[("he", 0.2)]), dist(&[("it", 0.4)]), dist(&[("She", 0.05)])];
        let refs: Vec<_> = ds.iter().collect();
        let a = ablate_pronoun(&refs, &PronounInventory::reference(), None, DEFAULT_EPSILON).unwrap();
        assert_eq!(a.spearman_r, Some(1.0));
        assert!(a.original.iter().zip(&a.modified).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn zero_pronoun_removal_keeps_ranking() {
        let ds = [dist(&[("him", 0.0), ("he", 0.3)]), dist(&[("him", 0.0), ("it", 0.3)]), dist(&[("him", 0.0)])];
        let refs: Vec<_> = ds.iter().collect();
        let a = ablate_pronoun(&refs, &PronounInventory::reference(), Some("him"), DEFAULT_EPSILON).unwrap();
        assert_eq!(a.spearman_r, Some(1.0));
        for (x, y) in a.original.iter().zip(&a.modified) {
            // only the epsilon term for "him" disappears
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_and_last_pronoun() {
        let ds = [dist(&[])];
        let refs: Vec<_> = ds.iter().collect();
        let inv = PronounInventory::reference();
        assert!(matches!(ablate_pronoun(&refs, &inv, Some("they"), 1e-12), Err(Error::UnknownPronoun(_))));
        let tiny = PronounInventory::new(["he"], ["it"]).unwrap();
        assert!(matches!(ablate_pronoun(&refs, &tiny, Some("it"), 1e-12), Err(Error::LastPronoun(_))));
    }

    fn rec(verb: Option<&str>) -> MaskedSentence {
        MaskedSentence::new("d", 0, "The model works.", Span::new(0, 9), "model", GrammaticalRole::Subject, verb.map(Into::into)).unwrap()
    }

    #[test]
    fn verb_filter() {
        let recs = vec![rec(Some("show")), rec(Some("learn")), rec(None)];
        let kept = filter_by_verbs(recs.clone(), &["indicate"], VerbFilterMode::DropSentences);
        assert_eq!(kept, recs);
        let kept = filter_by_verbs(recs.clone(), &["show", "learn"], VerbFilterMode::DropSentences);
        assert_eq!(kept.len(), 1);
        let all = vec![rec(Some("show")), rec(Some("show"))];
        assert!(filter_by_verbs(all, &["show"], VerbFilterMode::DropVerbs).is_empty());
    }

    #[test]
    fn frequency_report() {
        assert!(entity_frequency_report(&[], 10).is_empty());
        let triples: Vec<SemanticTriple> =
            (0..3).flat_map(|i| extract_triples_rules("The model works.", i)).collect();
        assert_eq!(entity_frequency_report(&triples, 10), [("model".to_string(), 3)]);
        let mixed: Vec<SemanticTriple> = ["The system beats the model.", "A model wins."]
            .iter()
            .flat_map(|s| extract_triples_rules(s, 0))
            .collect();
        assert_eq!(
            entity_frequency_report(&mixed, 0),
            [("model".to_string(), 2), ("system".to_string(), 1)]
        );
    }
}
