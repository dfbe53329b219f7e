//! Deterministic lookup-table backend for hermetic runs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendDescriptor, FillMaskBackend, PronounDistribution};
use crate::error::{Error, Result};
use crate::scoring::PronounInventory;

pub const DEFAULT_UNIFORM_PROBABILITY: f64 = 0.05;

/// How the stub picks probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum StubMode {
    /// Every pronoun gets the same probability.
    Uniform {
        #[serde(default = "default_uniform")]
        probability: f64,
    },
    /// Fixed table; pronouns not listed get zero.
    Fixed { probabilities: BTreeMap<String, f64> },
    /// Per-sentence tables keyed on the placeholder form of the sentence.
    Table {
        entries: BTreeMap<String, BTreeMap<String, f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fallback: Option<Box<StubMode>>,
    },
    /// Pseudo-random probabilities in `[0, 0.09)` derived from a digest of
    /// the seed, the sentence and the pronoun.
    Hashed { seed: u64 },
}

fn default_uniform() -> f64 {
    DEFAULT_UNIFORM_PROBABILITY
}

impl StubMode {
    fn probability(&self, masked_sentence: &str, pronoun: &str) -> Result<f64> {
        match self {
            StubMode::Uniform { probability } => Ok(*probability),
            StubMode::Fixed { probabilities } => {
                Ok(probabilities.get(pronoun).copied().unwrap_or(0.0))
            }
            StubMode::Table { entries, fallback } => match entries.get(masked_sentence) {
                Some(row) => Ok(row.get(pronoun).copied().unwrap_or(0.0)),
                None => match fallback {
                    Some(f) => f.probability(masked_sentence, pronoun),
                    None => Err(Error::StubMiss(masked_sentence.to_string())),
                },
            },
            StubMode::Hashed { seed } => {
                let mut h = Sha256::new();
                h.update(seed.to_le_bytes());
                h.update((masked_sentence.len() as u64).to_le_bytes());
                h.update(masked_sentence.as_bytes());
                h.update(pronoun.as_bytes());
                let digest = h.finalize();
                let mut word = [0u8; 8];
                word.copy_from_slice(&digest[..8]);
                let unit = (u64::from_le_bytes(word) >> 11) as f64 / (1u64 << 53) as f64;
                Ok(unit * 0.09)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StubBackend {
    descriptor: BackendDescriptor,
    mode: StubMode,
}

impl StubBackend {
    pub fn new(model_id: impl Into<String>, mode: StubMode) -> Self {
        StubBackend { descriptor: BackendDescriptor::stub(model_id), mode }
    }

    pub fn uniform(model_id: impl Into<String>) -> Self {
        Self::new(model_id, StubMode::Uniform { probability: DEFAULT_UNIFORM_PROBABILITY })
    }

    /// Reads a JSON [`StubMode`] file.
    pub fn from_file(model_id: impl Into<String>, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(model_id, serde_json::from_str(&text)?))
    }

    pub fn with_mask_token(mut self, mask_token: impl Into<String>) -> Self {
        self.descriptor.mask_token = mask_token.into();
        self
    }

    pub fn mode(&self) -> &StubMode {
        &self.mode
    }

    /// Probabilities for an arbitrary target list.
    pub fn probabilities_for(
        &self,
        masked_sentence: &str,
        targets: &[String],
    ) -> Result<BTreeMap<String, f64>> {
        targets
            .iter()
            .map(|w| Ok((w.clone(), self.mode.probability(masked_sentence, w)?)))
            .collect()
    }
}

impl FillMaskBackend for StubBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn fill_mask(
        &self,
        masked_sentence: &str,
        inventory: &PronounInventory,
    ) -> Result<PronounDistribution> {
        let targets: Vec<String> = inventory.all().map(str::to_string).collect();
        let probabilities = self.probabilities_for(masked_sentence, &targets)?;
        let resolved_variants = targets.iter().map(|w| (w.clone(), vec![w.clone()])).collect();
        Ok(PronounDistribution {
            probabilities,
            model_id: self.descriptor.model_id.clone(),
            resolved_variants,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_gives_equal_probabilities() {
        let inv = PronounInventory::reference();
        let d = StubBackend::uniform("stub").fill_mask("[MASK] runs.", &inv).unwrap();
        assert_eq!(d.probabilities.len(), 11);
        assert!(d.probabilities.values().all(|&p| p == DEFAULT_UNIFORM_PROBABILITY));
    }

    #[test]
    fn fixed_echoes_table() {
        let inv = PronounInventory::reference();
        let stub = StubBackend::new(
            "stub",
            StubMode::Fixed { probabilities: [("he".into(), 0.3), ("it".into(), 0.1)].into() },
        );
        let d = stub.fill_mask("[MASK] runs.", &inv).unwrap();
        assert_eq!(d.probabilities["he"], 0.3);
        assert_eq!(d.probabilities["it"], 0.1);
        assert_eq!(d.probabilities.values().filter(|&&p| p == 0.0).count(), 9);
    }

    #[test]
    fn table_misses_are_errors_without_fallback() {
        let inv = PronounInventory::reference();
        let stub = StubBackend::new(
            "stub",
            StubMode::Table {
                entries: [("[MASK] runs.".to_string(), [("he".to_string(), 0.4)].into())].into(),
                fallback: None,
            },
        );
        assert_eq!(stub.fill_mask("[MASK] runs.", &inv).unwrap().probabilities["he"], 0.4);
        assert!(matches!(stub.fill_mask("[MASK] walks.", &inv), Err(Error::StubMiss(_))));
    }

    #[test]
    fn hashed_is_deterministic_and_varied() {
        let inv = PronounInventory::reference();
        let stub = StubBackend::new("stub", StubMode::Hashed { seed: 9 });
        let a = stub.fill_mask("[MASK] runs.", &inv).unwrap();
        let b = stub.fill_mask("[MASK] runs.", &inv).unwrap();
        let c = stub.fill_mask("[MASK] walks.", &inv).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.probabilities, c.probabilities);
        assert!(a.probabilities.values().all(|&p| (0.0..0.09).contains(&p)));
    }

    #[test]
    fn mode_json_round_trip() {
        let m: StubMode = serde_json::from_str(r#"{"mode":"uniform"}"#).unwrap();
        assert_eq!(m, StubMode::Uniform { probability: DEFAULT_UNIFORM_PROBABILITY });
        let m: StubMode =
            serde_json::from_str(r#"{"mode":"table","entries":{},"fallback":{"mode":"hashed","seed":1}}"#)
                .unwrap();
        assert!(matches!(m, StubMode::Table { fallback: Some(_), .. }));
    }
}
