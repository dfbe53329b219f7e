//! Fill-mask backends: anything that can report vocabulary probabilities for
//! a set of pronouns at the single masked position of a sentence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{
    anthroscore_sentence_with, MaskedSentence, PronounInventory, ScoredSentence, PLACEHOLDER,
};

pub mod cache;
pub mod protocol;
pub mod remote;
pub mod server;
pub mod stub;

pub use cache::{CacheKey, CachedBackend, PersistentCache};
pub use remote::RemoteBackend;
pub use server::StubServer;
pub use stub::{StubBackend, StubMode};

/// Model identifier of the reference masked language model.
pub const REFERENCE_MODEL: &str = "roberta-base";
/// Mask token of the reference model's tokenizer.
pub const REFERENCE_MASK_TOKEN: &str = "<mask>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    Stub,
    Cached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    pub mask_token: String,
}

impl BackendDescriptor {
    pub fn stub(model_id: impl Into<String>) -> Self {
        BackendDescriptor {
            kind: BackendKind::Stub,
            model_id: model_id.into(),
            endpoint: None,
            mask_token: REFERENCE_MASK_TOKEN.to_string(),
        }
    }

    pub fn remote(model_id: impl Into<String>, endpoint: impl Into<String>) -> Self {
        BackendDescriptor {
            kind: BackendKind::Remote,
            model_id: model_id.into(),
            endpoint: Some(endpoint.into()),
            mask_token: REFERENCE_MASK_TOKEN.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mask_token.is_empty() {
            return Err(Error::InvalidDescriptor("mask_token is empty".into()));
        }
        if self.model_id.is_empty() {
            return Err(Error::InvalidDescriptor("model_id is empty".into()));
        }
        if self.kind == BackendKind::Remote
            && self.endpoint.as_deref().is_none_or(str::is_empty)
        {
            return Err(Error::InvalidDescriptor("remote backend requires an endpoint".into()));
        }
        Ok(())
    }

    /// Replaces the pipeline placeholder with this backend's mask token.
    pub fn render(&self, masked_sentence: &str) -> String {
        masked_sentence.replacen(PLACEHOLDER, &self.mask_token, 1)
    }
}

/// Pronoun probabilities at the mask position as reported by a backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronounDistribution {
    pub probabilities: BTreeMap<String, f64>,
    pub model_id: String,
    #[serde(default)]
    pub resolved_variants: BTreeMap<String, Vec<String>>,
}

impl PronounDistribution {
    /// Checks the distribution against the inventory it was requested for.
    pub fn validate(&self, inventory: &PronounInventory) -> Result<()> {
        let expected: BTreeSet<&str> = inventory.all().collect();
        let got: BTreeSet<&str> = self.probabilities.keys().map(String::as_str).collect();
        if let Some(missing) = expected.difference(&got).next() {
            return Err(Error::MissingPronoun(missing.to_string()));
        }
        if let Some(extra) = got.difference(&expected).next() {
            return Err(Error::BackendProtocol(format!("unrequested pronoun {extra:?}")));
        }
        for (w, &p) in &self.probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { pronoun: w.clone(), value: p });
            }
        }
        for w in expected {
            if self.resolved_variants.get(w).is_none_or(Vec::is_empty) {
                return Err(Error::VocabularyMiss(w.to_string()));
            }
        }
        Ok(())
    }

    /// The same distribution restricted to a (smaller) inventory.
    pub fn restrict(&self, inventory: &PronounInventory) -> Result<Self> {
        let mut probabilities = BTreeMap::new();
        let mut resolved_variants = BTreeMap::new();
        for w in inventory.all() {
            let p = self.probabilities.get(w).ok_or_else(|| Error::MissingPronoun(w.into()))?;
            probabilities.insert(w.to_string(), *p);
            if let Some(v) = self.resolved_variants.get(w) {
                resolved_variants.insert(w.to_string(), v.clone());
            }
        }
        Ok(PronounDistribution { probabilities, model_id: self.model_id.clone(), resolved_variants })
    }
}

/// A source of pronoun probabilities at a masked position.
///
/// Implementations receive sentences containing [`PLACEHOLDER`] exactly once
/// and must be safe to call concurrently.
pub trait FillMaskBackend: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;

    fn fill_mask(
        &self,
        masked_sentence: &str,
        inventory: &PronounInventory,
    ) -> Result<PronounDistribution>;

    fn fill_mask_batch(
        &self,
        masked_sentences: &[&str],
        inventory: &PronounInventory,
    ) -> Vec<Result<PronounDistribution>> {
        masked_sentences.iter().map(|s| self.fill_mask(s, inventory)).collect()
    }
}

impl<B: FillMaskBackend + ?Sized> FillMaskBackend for Box<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        (**self).descriptor()
    }

    fn fill_mask(&self, s: &str, inventory: &PronounInventory) -> Result<PronounDistribution> {
        (**self).fill_mask(s, inventory)
    }

    fn fill_mask_batch(
        &self,
        s: &[&str],
        inventory: &PronounInventory,
    ) -> Vec<Result<PronounDistribution>> {
        (**self).fill_mask_batch(s, inventory)
    }
}

pub(crate) fn check_placeholder(masked_sentence: &str) -> Result<()> {
    match masked_sentence.matches(PLACEHOLDER).count() {
        1 => Ok(()),
        n => Err(Error::MaskTokenization(format!(
            "expected exactly one {PLACEHOLDER}, found {n}"
        ))),
    }
}

/// Queries `backend` and validates the reply against `inventory`.
pub fn fill_mask_pronouns(
    masked_sentence: &str,
    inventory: &PronounInventory,
    backend: &dyn FillMaskBackend,
) -> Result<PronounDistribution> {
    check_placeholder(masked_sentence)?;
    let dist = backend.fill_mask(masked_sentence, inventory)?;
    dist.validate(inventory)?;
    Ok(dist)
}

/// Batched form of [`fill_mask_pronouns`]; results are in input order.
pub fn fill_mask_pronouns_batch(
    masked_sentences: &[&str],
    inventory: &PronounInventory,
    backend: &dyn FillMaskBackend,
) -> Vec<Result<PronounDistribution>> {
    let mut results: Vec<Option<Result<PronounDistribution>>> =
        masked_sentences.iter().map(|s| check_placeholder(s).err().map(Err)).collect();
    let pending: Vec<(usize, &str)> = masked_sentences
        .iter()
        .enumerate()
        .filter(|(i, _)| results[*i].is_none())
        .map(|(i, s)| (i, *s))
        .collect();
    let texts: Vec<&str> = pending.iter().map(|(_, s)| *s).collect();
    let replies = backend.fill_mask_batch(&texts, inventory);
    debug_assert_eq!(replies.len(), texts.len());
    for ((i, _), reply) in pending.into_iter().zip(replies) {
        results[i] = Some(reply.and_then(|d| d.validate(inventory).map(|_| d)));
    }
    results.into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Scores masked sentences through `backend`, keeping input order. Failures
/// stay per-sentence.
pub fn score_sentences(
    sentences: Vec<MaskedSentence>,
    inventory: &PronounInventory,
    backend: &dyn FillMaskBackend,
    epsilon: f64,
) -> Vec<Result<ScoredSentence>> {
    let texts: Vec<&str> = sentences.iter().map(|s| s.masked_sentence.as_str()).collect();
    let dists = fill_mask_pronouns_batch(&texts, inventory, backend);
    sentences
        .into_iter()
        .zip(dists)
        .map(|(s, d)| anthroscore_sentence_with(s, &d?.probabilities, inventory, epsilon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_validation() {
        assert!(BackendDescriptor::stub("m").validate().is_ok());
        let mut d = BackendDescriptor::remote("m", "http://x");
        assert!(d.validate().is_ok());
        d.endpoint = None;
        assert!(d.validate().is_err());
        let mut s = BackendDescriptor::stub("m");
        s.mask_token.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn render_substitutes_mask_token() {
        let d = BackendDescriptor::stub("m");
        assert_eq!(d.render("[MASK] is a good dog."), "<mask> is a good dog.");
    }

    #[test]
    fn placeholder_count_is_checked() {
        let stub = StubBackend::uniform("m");
        let inv = PronounInventory::reference();
        assert!(matches!(
            fill_mask_pronouns("no mask here", &inv, &stub),
            Err(Error::MaskTokenization(_))
        ));
        assert!(matches!(
            fill_mask_pronouns("[MASK] and [MASK]", &inv, &stub),
            Err(Error::MaskTokenization(_))
        ));
        let batch = fill_mask_pronouns_batch(&["[MASK] runs.", "none", "[MASK] stops."], &inv, &stub);
        assert!(batch[0].is_ok() && batch[1].is_err() && batch[2].is_ok());
    }

    #[test]
    fn distribution_validation() {
        let inv = PronounInventory::new(["he"], ["it"]).unwrap();
        let mut d = PronounDistribution {
            probabilities: [("he".to_string(), 0.2), ("it".to_string(), 0.3)].into(),
            model_id: "m".into(),
            resolved_variants: [
                ("he".to_string(), vec!["he".to_string()]),
                ("it".to_string(), vec!["it".to_string()]),
            ]
            .into(),
        };
        assert!(d.validate(&inv).is_ok());
        d.resolved_variants.insert("it".into(), vec![]);
        assert!(matches!(d.validate(&inv), Err(Error::VocabularyMiss(w)) if w == "it"));
        d.resolved_variants.insert("it".into(), vec!["it".into()]);
        d.probabilities.insert("it".into(), 1.5);
        assert!(matches!(d.validate(&inv), Err(Error::InvalidProbability { .. })));
        d.probabilities.remove("it");
        assert!(matches!(d.validate(&inv), Err(Error::MissingPronoun(_))));
    }
}
