//! Per-sentence anthropomorphism scores and their aggregates.
//!
//! A masked language model's probabilities for human pronouns (he, she, ...)
//! and non-human pronouns (it, its, ...) at the masked entity position are
//! summed separately; the score `A` of a sentence is the natural log of the
//! ratio of the two sums. `A = 0` means both framings are equally likely and
//! `e^A` is how many times more likely the human framing is.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Placeholder written into masked sentences. Backends substitute their own
/// model-specific mask token for it.
pub const PLACEHOLDER: &str = "[MASK]";

/// Added to every pronoun probability before summing so that a backend
/// returning exact zeros still yields a finite score.
pub const DEFAULT_EPSILON: f64 = 1e-12;

pub const DEFAULT_HI: f64 = 1.0;
pub const DEFAULT_LO: f64 = -1.0;

/// Human and non-human third-person pronoun surface forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInventory")]
pub struct PronounInventory {
    human: Vec<String>,
    non_human: Vec<String>,
}

#[derive(Deserialize)]
struct RawInventory {
    human: Vec<String>,
    non_human: Vec<String>,
}

impl TryFrom<RawInventory> for PronounInventory {
    type Error = Error;

    fn try_from(raw: RawInventory) -> Result<Self> {
        PronounInventory::new(raw.human, raw.non_human)
    }
}

impl PronounInventory {
    pub fn new<S: Into<String>>(
        human: impl IntoIterator<Item = S>,
        non_human: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let human: Vec<String> = human.into_iter().map(Into::into).collect();
        let non_human: Vec<String> = non_human.into_iter().map(Into::into).collect();
        for (name, list) in [("human", &human), ("non_human", &non_human)] {
            if list.is_empty() {
                return Err(Error::InvalidInventory(format!("{name} list is empty")));
            }
            let mut seen = BTreeSet::new();
            for w in list.iter() {
                if w.is_empty() {
                    return Err(Error::InvalidInventory(format!("{name} list has an empty entry")));
                }
                if !seen.insert(w.as_str()) {
                    return Err(Error::InvalidInventory(format!("{name} list repeats {w:?}")));
                }
            }
        }
        if let Some(shared) = human.iter().find(|w| non_human.contains(w)) {
            return Err(Error::InvalidInventory(format!("{shared:?} is in both lists")));
        }
        Ok(PronounInventory { human, non_human })
    }

    /// The default lists: seven human and four non-human forms.
    pub fn reference() -> Self {
        PronounInventory::new(
            ["he", "she", "her", "him", "He", "She", "Her"],
            ["it", "its", "It", "Its"],
        )
        .expect("reference inventory is valid")
    }

    pub fn human(&self) -> &[String] {
        &self.human
    }

    pub fn non_human(&self) -> &[String] {
        &self.non_human
    }

    /// Human forms followed by non-human forms, in list order.
    pub fn all(&self) -> impl Iterator<Item = &str> {
        self.human.iter().chain(self.non_human.iter()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.human.len() + self.non_human.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pronoun: &str) -> bool {
        self.all().any(|w| w == pronoun)
    }

    /// The inventory with the human and non-human lists exchanged.
    pub fn swapped(&self) -> Self {
        PronounInventory {
            human: self.non_human.clone(),
            non_human: self.human.clone(),
        }
    }

    /// The inventory with one pronoun removed from whichever list holds it.
    pub fn without(&self, pronoun: &str) -> Result<Self> {
        let strip = |list: &[String]| -> Option<Vec<String>> {
            list.iter().any(|w| w == pronoun).then(|| {
                list.iter().filter(|w| *w != pronoun).cloned().collect()
            })
        };
        if let Some(human) = strip(&self.human) {
            if human.is_empty() {
                return Err(Error::LastPronoun(pronoun.to_string()));
            }
            return Ok(PronounInventory { human, non_human: self.non_human.clone() });
        }
        if let Some(non_human) = strip(&self.non_human) {
            if non_human.is_empty() {
                return Err(Error::LastPronoun(pronoun.to_string()));
            }
            return Ok(PronounInventory { human: self.human.clone(), non_human });
        }
        Err(Error::UnknownPronoun(pronoun.to_string()))
    }

    /// Order-insensitive digest of both lists, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut human = self.human.clone();
        let mut non_human = self.non_human.clone();
        human.sort();
        non_human.sort();
        let mut hasher = Sha256::new();
        for (tag, list) in [("human", &human), ("non_human", &non_human)] {
            hasher.update(tag.as_bytes());
            hasher.update([0u8]);
            for w in list.iter() {
                hasher.update((w.len() as u64).to_le_bytes());
                hasher.update(w.as_bytes());
            }
            hasher.update([0xffu8]);
        }
        hex::encode(hasher.finalize())
    }
}

/// Byte offsets into a UTF-8 sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        text.get(self.start..self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrammaticalRole {
    Subject,
    Object,
    Unknown,
}

/// One entity mention replaced by a single placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMaskedSentence")]
pub struct MaskedSentence {
    pub doc_id: String,
    pub original_sentence: String,
    pub masked_sentence: String,
    pub entity_surface: String,
    pub entity_keyword: String,
    pub span: Span,
    pub grammatical_role: GrammaticalRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verb_lemma: Option<String>,
    #[serde(default)]
    pub sentence_index: usize,
}

#[derive(Deserialize)]
struct RawMaskedSentence {
    doc_id: String,
    original_sentence: String,
    masked_sentence: String,
    entity_surface: String,
    entity_keyword: String,
    span: Span,
    grammatical_role: GrammaticalRole,
    #[serde(default)]
    verb_lemma: Option<String>,
    #[serde(default)]
    sentence_index: usize,
}

impl TryFrom<RawMaskedSentence> for MaskedSentence {
    type Error = Error;

    fn try_from(raw: RawMaskedSentence) -> Result<Self> {
        let m = MaskedSentence {
            doc_id: raw.doc_id,
            original_sentence: raw.original_sentence,
            masked_sentence: raw.masked_sentence,
            entity_surface: raw.entity_surface,
            entity_keyword: raw.entity_keyword,
            span: raw.span,
            grammatical_role: raw.grammatical_role,
            verb_lemma: raw.verb_lemma,
            sentence_index: raw.sentence_index,
        };
        m.validate()?;
        Ok(m)
    }
}

impl MaskedSentence {
    /// Masks `span` of `original`. The span must be a non-empty, in-bounds,
    /// char-aligned range and the sentence must not already contain the
    /// placeholder.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        doc_id: impl Into<String>,
        sentence_index: usize,
        original: impl Into<String>,
        span: Span,
        entity_keyword: impl Into<String>,
        grammatical_role: GrammaticalRole,
        verb_lemma: Option<String>,
    ) -> Result<Self> {
        let original = original.into();
        let surface = span
            .slice(&original)
            .filter(|_| !span.is_empty())
            .ok_or_else(|| {
                Error::InvalidMaskedSentence(format!(
                    "span {}..{} is not a valid range of {:?}",
                    span.start, span.end, original
                ))
            })?
            .to_string();
        if original.contains(PLACEHOLDER) {
            return Err(Error::InvalidMaskedSentence(format!(
                "sentence already contains {PLACEHOLDER}"
            )));
        }
        let masked =
            format!("{}{}{}", &original[..span.start], PLACEHOLDER, &original[span.end..]);
        let m = MaskedSentence {
            doc_id: doc_id.into(),
            original_sentence: original,
            masked_sentence: masked,
            entity_surface: surface,
            entity_keyword: entity_keyword.into(),
            span,
            grammatical_role,
            verb_lemma,
            sentence_index,
        };
        m.validate()?;
        Ok(m)
    }

    /// Substitutes the entity surface back at the placeholder.
    pub fn reconstruct(&self) -> String {
        self.masked_sentence.replacen(PLACEHOLDER, &self.entity_surface, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMaskedSentence(msg));
        let occurrences = self.masked_sentence.matches(PLACEHOLDER).count();
        if occurrences != 1 {
            return bad(format!("placeholder occurs {occurrences} times"));
        }
        match self.span.slice(&self.original_sentence) {
            Some(s) if s == self.entity_surface => {}
            _ => return bad("span does not select the entity surface".into()),
        }
        if self.reconstruct() != self.original_sentence {
            return bad("reconstruction does not reproduce the original sentence".into());
        }
        if self.masked_sentence.find(PLACEHOLDER) != Some(self.span.start) {
            return bad("placeholder is not at the span start".into());
        }
        Ok(())
    }
}

/// A masked sentence with its pronoun probability sums and score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub sentence: MaskedSentence,
    pub p_human: f64,
    pub p_non_human: f64,
    pub score_a: f64,
}

/// Sums the distribution over each list of the inventory, without smoothing.
pub fn aggregate_pronoun_probabilities(
    dist: &BTreeMap<String, f64>,
    inventory: &PronounInventory,
) -> Result<(f64, f64)> {
    let sum = |list: &[String]| -> Result<f64> {
        list.iter().try_fold(0.0, |acc, w| {
            let p = *dist.get(w).ok_or_else(|| Error::MissingPronoun(w.clone()))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { pronoun: w.clone(), value: p });
            }
            Ok(acc + p)
        })
    };
    Ok((sum(inventory.human())?, sum(inventory.non_human())?))
}

/// Like [`aggregate_pronoun_probabilities`] with `epsilon` added to every term.
pub fn smoothed_sums(
    dist: &BTreeMap<String, f64>,
    inventory: &PronounInventory,
    epsilon: f64,
) -> Result<(f64, f64)> {
    // validates presence and range of every entry
    aggregate_pronoun_probabilities(dist, inventory)?;
    let sum = |list: &[String]| list.iter().map(|w| dist[w] + epsilon).sum::<f64>();
    Ok((sum(inventory.human()), sum(inventory.non_human())))
}

/// `ln(p_human) - ln(p_non_human)`, rejecting zero mass on either side.
pub fn log_ratio(p_human: f64, p_non_human: f64) -> Result<f64> {
    if !(p_human > 0.0 && p_non_human > 0.0) || !p_human.is_finite() || !p_non_human.is_finite()
    {
        return Err(Error::ZeroProbabilityMass { p_human, p_non_human });
    }
    Ok(p_human.ln() - p_non_human.ln())
}

pub fn anthroscore_sentence(
    sentence: MaskedSentence,
    dist: &BTreeMap<String, f64>,
    inventory: &PronounInventory,
) -> Result<ScoredSentence> {
    anthroscore_sentence_with(sentence, dist, inventory, DEFAULT_EPSILON)
}

pub fn anthroscore_sentence_with(
    sentence: MaskedSentence,
    dist: &BTreeMap<String, f64>,
    inventory: &PronounInventory,
    epsilon: f64,
) -> Result<ScoredSentence> {
    let (p_human, p_non_human) = smoothed_sums(dist, inventory, epsilon)?;
    let score_a = log_ratio(p_human, p_non_human)?;
    Ok(ScoredSentence { sentence, p_human, p_non_human, score_a })
}

/// Arithmetic mean of raw values; errors on empty input.
pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyCollection);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn mean_anthroscore(scores: &[ScoredSentence]) -> Result<f64> {
    let values: Vec<f64> = scores.iter().map(|s| s.score_a).collect();
    mean(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    High,
    Low,
    Mid,
}

/// Strict-inequality band membership; ties at a threshold fall in the middle.
pub fn band_of(score: f64, hi: f64, lo: f64) -> Band {
    if score > hi {
        Band::High
    } else if score < lo {
        Band::Low
    } else {
        Band::Mid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremesPartition {
    pub high: Vec<ScoredSentence>,
    pub low: Vec<ScoredSentence>,
    pub hi_threshold: f64,
    pub lo_threshold: f64,
}

pub fn partition_extremes(
    scores: &[ScoredSentence],
    hi: f64,
    lo: f64,
) -> Result<ExtremesPartition> {
    if !(hi > lo) {
        return Err(Error::InvalidThresholds { hi, lo });
    }
    let mut part = ExtremesPartition {
        high: Vec::new(),
        low: Vec::new(),
        hi_threshold: hi,
        lo_threshold: lo,
    };
    for s in scores {
        match band_of(s.score_a, hi, lo) {
            Band::High => part.high.push(s.clone()),
            Band::Low => part.low.push(s.clone()),
            Band::Mid => {}
        }
    }
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sentence() -> MaskedSentence {
        MaskedSentence::new(
            "d1",
            0,
            "The system works.",
            Span::new(0, 10),
            "system",
            GrammaticalRole::Subject,
            Some("work".into()),
        )
        .unwrap()
    }

    fn uniform(inv: &PronounInventory, p: f64) -> BTreeMap<String, f64> {
        inv.all().map(|w| (w.to_string(), p)).collect()
    }

    fn scored(score: f64) -> ScoredSentence {
        ScoredSentence { sentence: sentence(), p_human: 0.5, p_non_human: 0.5, score_a: score }
    }

    #[test]
    fn inventory_rejects_bad_lists() {
        assert!(PronounInventory::new(Vec::<String>::new(), vec!["it".into()]).is_err());
        assert!(PronounInventory::new(["he", "he"], ["it"]).is_err());
        assert!(PronounInventory::new(["he", "it"], ["it"]).is_err());
        // exact comparison: case variants are distinct
        assert!(PronounInventory::new(["It"], ["it"]).is_ok());
    }

    #[test]
    fn reference_inventory_sizes() {
        let inv = PronounInventory::reference();
        assert_eq!(inv.human().len(), 7);
        assert_eq!(inv.non_human().len(), 4);
    }

    #[test]
    fn fingerprint_is_order_insensitive() {
        let a = PronounInventory::new(["he", "she"], ["it", "its"]).unwrap();
        let b = PronounInventory::new(["she", "he"], ["its", "it"]).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), a.swapped().fingerprint());
    }

    #[test]
    fn without_errors() {
        let inv = PronounInventory::new(["he", "she"], ["it"]).unwrap();
        assert!(matches!(inv.without("it"), Err(Error::LastPronoun(_))));
        assert!(matches!(inv.without("they"), Err(Error::UnknownPronoun(_))));
        assert_eq!(inv.without("she").unwrap().human(), ["he".to_string()]);
    }

    #[test]
    fn aggregate_uniform() {
        let inv = PronounInventory::reference();
        let (h, n) = aggregate_pronoun_probabilities(&uniform(&inv, 0.01), &inv).unwrap();
        assert!((h - 0.07).abs() < 1e-15);
        assert!((n - 0.04).abs() < 1e-15);
    }

    #[test]
    fn aggregate_single_term() {
        let inv = PronounInventory::reference();
        let mut d = uniform(&inv, 0.0);
        d.insert("he".into(), 0.2);
        assert_eq!(aggregate_pronoun_probabilities(&d, &inv).unwrap(), (0.2, 0.0));
    }

    #[test]
    fn aggregate_missing_pronoun() {
        let inv = PronounInventory::reference();
        let mut d = uniform(&inv, 0.01);
        d.remove("Its");
        assert!(matches!(
            aggregate_pronoun_probabilities(&d, &inv),
            Err(Error::MissingPronoun(w)) if w == "Its"
        ));
    }

    #[test]
    fn uniform_scores_ln_seven_fourths() {
        let inv = PronounInventory::reference();
        let s = anthroscore_sentence(sentence(), &uniform(&inv, 0.05), &inv).unwrap();
        assert!((s.score_a - (7.0f64 / 4.0).ln()).abs() < 1e-12);
        assert!((s.score_a - 0.559616).abs() < 1e-6);
    }

    #[test]
    fn equal_mass_scores_zero() {
        let inv = PronounInventory::new(["he"], ["it"]).unwrap();
        let d = uniform(&inv, 0.3);
        assert_eq!(anthroscore_sentence(sentence(), &d, &inv).unwrap().score_a, 0.0);
    }

    #[test]
    fn zero_mass_without_smoothing_is_reported() {
        let inv = PronounInventory::reference();
        let mut d = uniform(&inv, 0.0);
        d.insert("he".into(), 0.3);
        assert!(matches!(
            anthroscore_sentence_with(sentence(), &d, &inv, 0.0),
            Err(Error::ZeroProbabilityMass { .. })
        ));
        // default smoothing keeps the score finite
        let s = anthroscore_sentence(sentence(), &d, &inv).unwrap();
        assert!(s.score_a.is_finite() && s.score_a > 20.0);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_anthroscore(&[scored(1.0)]).unwrap(), 1.0);
        assert_eq!(mean_anthroscore(&[scored(1.0), scored(-1.0)]).unwrap(), 0.0);
        assert!(matches!(mean_anthroscore(&[]), Err(Error::EmptyCollection)));
    }

    #[test]
    fn partition_examples() {
        let s = [scored(1.5), scored(0.0), scored(-1.5), scored(1.0), scored(-1.0)];
        let p = partition_extremes(&s, DEFAULT_HI, DEFAULT_LO).unwrap();
        assert_eq!(p.high.iter().map(|s| s.score_a).collect::<Vec<_>>(), [1.5]);
        assert_eq!(p.low.iter().map(|s| s.score_a).collect::<Vec<_>>(), [-1.5]);
        assert!(matches!(partition_extremes(&s, 1.0, 1.0), Err(Error::InvalidThresholds { .. })));
    }

    #[test]
    fn masking_round_trip_and_errors() {
        let m = sentence();
        assert_eq!(m.masked_sentence, "[MASK] works.");
        assert_eq!(m.reconstruct(), m.original_sentence);
        assert!(MaskedSentence::new("d", 0, "abc", Span::new(2, 9), "x", GrammaticalRole::Unknown, None).is_err());
        assert!(MaskedSentence::new("d", 0, "abc", Span::new(1, 1), "x", GrammaticalRole::Unknown, None).is_err());
        assert!(MaskedSentence::new("d", 0, "[MASK] x", Span::new(7, 8), "x", GrammaticalRole::Unknown, None).is_err());
    }

    #[test]
    fn masked_sentence_json_is_validated() {
        let m = sentence();
        let json = serde_json::to_string(&m).unwrap();
        let back: MaskedSentence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let tampered = json.replace("[MASK] works.", "[MASK] fails.");
        assert!(serde_json::from_str::<MaskedSentence>(&tampered).is_err());
    }

    fn dist_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-6f64..0.2, 11)
    }

    fn to_dist(inv: &PronounInventory, values: &[f64]) -> BTreeMap<String, f64> {
        inv.all().zip(values.iter()).map(|(w, p)| (w.to_string(), *p)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn score_matches_log_of_ratio(values in dist_strategy()) {
            let inv = PronounInventory::reference();
            let s = anthroscore_sentence(sentence(), &to_dist(&inv, &values), &inv).unwrap();
            prop_assert!((s.score_a - (s.p_human / s.p_non_human).ln()).abs() < 1e-12);
            prop_assert!((s.score_a.exp() - s.p_human / s.p_non_human).abs() < 1e-9 * (s.p_human / s.p_non_human));
        }

        #[test]
        fn concatenated_mean_is_weighted(a in prop::collection::vec(-5.0f64..5.0, 1..20),
                                         b in prop::collection::vec(-5.0f64..5.0, 1..20)) {
            let all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
            let weighted = (mean(&a).unwrap() * a.len() as f64 + mean(&b).unwrap() * b.len() as f64)
                / all.len() as f64;
            prop_assert!((mean(&all).unwrap() - weighted).abs() < 1e-12);
        }

        #[test]
        fn partition_recovers_bands(scores in prop::collection::vec(-4.0f64..4.0, 0..40)) {
            let items: Vec<ScoredSentence> = scores.iter().map(|&s| scored(s)).collect();
            let p = partition_extremes(&items, 1.0, -1.0).unwrap();
            let high: Vec<f64> = scores.iter().copied().filter(|&s| s > 1.0).collect();
            let low: Vec<f64> = scores.iter().copied().filter(|&s| s < -1.0).collect();
            prop_assert_eq!(p.high.iter().map(|s| s.score_a).collect::<Vec<_>>(), high);
            prop_assert_eq!(p.low.iter().map(|s| s.score_a).collect::<Vec<_>>(), low);
        }
    }
}
