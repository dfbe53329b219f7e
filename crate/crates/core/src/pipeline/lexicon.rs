//! Entity lexicons and other bundled word lists.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::PronounInventory;

pub const X_ARTIFACT: &str = include_str!("../../data/x_artifact.txt");
pub const X_LM: &str = include_str!("../../data/x_lm.txt");
pub const X_HUMAN: &str = include_str!("../../data/x_human.txt");
pub const LM_KEYWORDS: &str = include_str!("../../data/lm_keywords.txt");
pub const REPORTING_VERBS: &str = include_str!("../../data/reporting_verbs.txt");
pub const COGNITIVE_VERBS: &str = include_str!("../../data/cognitive_verbs.txt");
pub const PRONOUNS_JSON: &str = include_str!("../../data/pronouns.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    #[default]
    CaseInsensitive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLexicon")]
pub struct EntityLexicon {
    pub name: String,
    keywords: Vec<String>,
    pub match_mode: MatchMode,
    pub allow_plural: bool,
    // lowercased keyword words, parallel to `keywords`
    #[serde(skip)]
    folded: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct RawLexicon {
    name: String,
    keywords: Vec<String>,
    #[serde(default)]
    #[allow(dead_code)]
    match_mode: MatchMode,
    allow_plural: bool,
}

impl TryFrom<RawLexicon> for EntityLexicon {
    type Error = Error;

    fn try_from(raw: RawLexicon) -> Result<Self> {
        EntityLexicon::new(raw.name, raw.keywords, raw.allow_plural)
    }
}

/// A lexicon keyword matched against a noun chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordMatch<'a> {
    pub keyword: &'a str,
    pub words: usize,
}

impl EntityLexicon {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        keywords: impl IntoIterator<Item = S>,
        allow_plural: bool,
    ) -> Result<Self> {
        let name = name.into();
        let keywords: Vec<String> = keywords
            .into_iter()
            .map(|k| k.into().split_whitespace().collect::<Vec<_>>().join(" "))
            .collect();
        if keywords.is_empty() {
            return Err(Error::InvalidLexicon(format!("lexicon {name:?} has no keywords")));
        }
        let mut seen = HashSet::new();
        for k in &keywords {
            if k.is_empty() {
                return Err(Error::InvalidLexicon(format!("lexicon {name:?} has an empty keyword")));
            }
            if !seen.insert(k.to_lowercase()) {
                return Err(Error::InvalidLexicon(format!(
                    "lexicon {name:?} lists {k:?} twice (case-insensitively)"
                )));
            }
        }
        let folded = keywords
            .iter()
            .map(|k| k.to_lowercase().split(' ').map(str::to_string).collect())
            .collect();
        Ok(EntityLexicon { name, keywords, match_mode: MatchMode::CaseInsensitive, allow_plural, folded })
    }

    /// Parses one keyword per line; `#` starts a comment.
    pub fn parse(name: impl Into<String>, text: &str, allow_plural: bool) -> Result<Self> {
        Self::new(name, parse_word_list(text), allow_plural)
    }

    pub fn from_file(name: impl Into<String>, path: &Path, allow_plural: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(name, &text, allow_plural)
    }

    /// `artifact`, `lm` or `human`.
    pub fn bundled(name: &str) -> Result<Self> {
        let text = match name {
            "artifact" | "x_artifact" => X_ARTIFACT,
            "lm" | "x_lm" => X_LM,
            "human" | "x_human" => X_HUMAN,
            other => return Err(Error::InvalidLexicon(format!("no bundled lexicon named {other:?}"))),
        };
        Self::parse(name.trim_start_matches("x_"), text, true)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    /// Longest keyword matching the trailing words of a chunk, if any.
    pub fn match_chunk<S: AsRef<str>>(&self, words: &[S]) -> Option<KeywordMatch<'_>> {
        let lower: Vec<String> = words.iter().map(|w| w.as_ref().to_lowercase()).collect();
        let folded = &self.folded;
        let mut best: Option<(usize, usize)> = None; // (keyword index, word count)
        for (idx, kw) in folded.iter().enumerate() {
            let k = kw.len();
            if k == 0 || k > lower.len() {
                continue;
            }
            let tail = &lower[lower.len() - k..];
            let prefix_ok = tail[..k - 1] == kw[..k - 1];
            if prefix_ok && self.head_matches(&tail[k - 1], &kw[k - 1]) {
                let longer = match best {
                    None => true,
                    Some((b, bw)) => k > bw || (k == bw && kw.join(" ").len() > folded[b].join(" ").len()),
                };
                if longer {
                    best = Some((idx, k));
                }
            }
        }
        best.map(|(idx, words)| KeywordMatch { keyword: &self.keywords[idx], words })
    }

    fn head_matches(&self, word: &str, keyword: &str) -> bool {
        if word == keyword {
            return true;
        }
        self.allow_plural
            && (word.strip_suffix('s') == Some(keyword)
                || word.strip_suffix("es") == Some(keyword))
    }
}

/// One entry per non-empty line, with `#` comments removed.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn bundled_lm_keywords() -> Vec<String> {
    parse_word_list(LM_KEYWORDS)
}

pub fn bundled_reporting_verbs() -> Vec<String> {
    parse_word_list(REPORTING_VERBS)
}

pub fn bundled_cognitive_verbs() -> Vec<String> {
    parse_word_list(COGNITIVE_VERBS)
}

/// Reads `{"human": [...], "non_human": [...]}`.
pub fn load_inventory(path: &Path) -> Result<PronounInventory> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn bundled_inventory() -> PronounInventory {
    serde_json::from_str(PRONOUNS_JSON).expect("bundled pronoun file is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicons_load() {
        let a = EntityLexicon::bundled("artifact").unwrap();
        assert_eq!(a.keywords().len(), 8);
        assert_eq!(EntityLexicon::bundled("lm").unwrap().keywords().len(), 19);
        assert!(EntityLexicon::bundled("human").is_ok());
        assert!(EntityLexicon::bundled("nope").is_err());
        assert_eq!(bundled_inventory(), PronounInventory::reference());
        assert!(bundled_reporting_verbs().contains(&"suggest".to_string()));
        assert!(bundled_lm_keywords().contains(&"BERT".to_string()));
    }

    #[test]
    fn duplicates_rejected_after_folding() {
        assert!(EntityLexicon::new("x", ["Model", "model"], true).is_err());
        assert!(EntityLexicon::new("x", Vec::<String>::new(), true).is_err());
        assert!(EntityLexicon::parse("x", "# only a comment\n\n", true).is_err());
    }

    #[test]
    fn plural_and_phrases() {
        let lex = EntityLexicon::new("x", ["model", "approach", "language model"], true).unwrap();
        assert_eq!(lex.match_chunk(&["The", "models"]).unwrap().keyword, "model");
        assert_eq!(lex.match_chunk(&["these", "approaches"]).unwrap().keyword, "approach");
        let m = lex.match_chunk(&["large", "Language", "Models"]).unwrap();
        assert_eq!((m.keyword, m.words), ("language model", 2));
        assert!(lex.match_chunk(&["the", "modeling"]).is_none());
        let strict = EntityLexicon::new("x", ["model"], false).unwrap();
        assert!(strict.match_chunk(&["models"]).is_none());
    }

    #[test]
    fn serde_round_trip_keeps_matching() {
        let lex = EntityLexicon::new("x", ["system"], true).unwrap();
        let back: EntityLexicon = serde_json::from_str(&serde_json::to_string(&lex).unwrap()).unwrap();
        assert!(back.match_chunk(&["systems"]).is_some());
    }
}
