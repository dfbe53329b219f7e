//! Deduplication and language-model keyword filtering.

use std::collections::HashSet;

use super::document::Document;
use crate::scoring::MaskedSentence;

/// Drops records whose masked text was already seen; order is preserved.
pub fn deduplicate(records: Vec<MaskedSentence>) -> Vec<MaskedSentence> {
    deduplicate_by(records, |r| r.masked_sentence.as_str())
}

pub fn deduplicate_by<T, F>(records: Vec<T>, key: F) -> Vec<T>
where
    F: Fn(&T) -> &str,
{
    let mut seen: HashSet<String> = HashSet::new();
    records.into_iter().filter(|r| seen.insert(key(r).to_string())).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Case-insensitive, word-bounded search for `keyword` in `text`. Hyphens
/// count as boundaries and a trailing `s`/`es` on the match is tolerated.
pub fn contains_keyword(text: &str, keyword: &str) -> bool {
    let hay = text.to_lowercase();
    let needle = keyword.trim().to_lowercase();
    if needle.is_empty() {
        return false;
    }
    hay.match_indices(&needle).any(|(i, m)| {
        let before_ok = hay[..i].chars().next_back().is_none_or(|c| !is_word_char(c));
        let rest = &hay[i + m.len()..];
        let rest = rest
            .strip_prefix("es")
            .filter(|r| r.chars().next().is_none_or(|c| !is_word_char(c)))
            .or_else(|| rest.strip_prefix('s'))
            .unwrap_or(rest);
        before_ok && rest.chars().next().is_none_or(|c| !is_word_char(c))
    })
}

/// Whether the title or body mentions any of `lm_keywords`.
pub fn filter_lm_documents<S: AsRef<str>>(doc: &Document, lm_keywords: &[S]) -> bool {
    lm_keywords.iter().any(|k| {
        let k = k.as_ref();
        contains_keyword(&doc.text, k) || doc.title.as_deref().is_some_and(|t| contains_keyword(t, k))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::lexicon::bundled_lm_keywords;
    use crate::scoring::{GrammaticalRole, Span};
    use proptest::prelude::*;

    fn rec(doc: &str, s: &str) -> MaskedSentence {
        MaskedSentence::new(doc, 0, s, Span::new(0, 3), "x", GrammaticalRole::Subject, None).unwrap()
    }

    #[test]
    fn exact_duplicates_across_documents() {
        let out = deduplicate(vec![rec("a", "The cat."), rec("b", "The cat."), rec("c", "The dog.")]);
        assert_eq!(out.iter().map(|r| r.doc_id.as_str()).collect::<Vec<_>>(), ["a", "c"]);
    }

    #[test]
    fn different_masks_of_one_sentence_kept() {
        let s = "The system rejects the model.";
        let a = MaskedSentence::new("a", 0, s, Span::new(0, 10), "system", GrammaticalRole::Subject, None).unwrap();
        let b = MaskedSentence::new("a", 0, s, Span::new(19, 28), "model", GrammaticalRole::Object, None).unwrap();
        assert_eq!(deduplicate(vec![a, b]).len(), 2);
    }

    #[test]
    fn keyword_boundaries() {
        let kw = bundled_lm_keywords();
        let doc = |t: &str| Document::new("d", t);
        assert!(filter_lm_documents(&doc("In this work we fine-tune BERT on news."), &kw));
        assert!(!filter_lm_documents(&doc("We review camembert cheese."), &kw));
        assert!(filter_lm_documents(&doc("Large language models are popular."), &kw));
        assert!(!contains_keyword("We use Roberta.", "BERT"));
        assert!(contains_keyword("We test GPT-4 today.", "GPT"));
        assert!(contains_keyword("We test GPT-4 today.", "GPT-4"));
        assert!(contains_keyword("Two approaches.", "approach"));
        assert!(!contains_keyword("gpt-4o", "gpt-4"));
        let mut titled = doc("nothing relevant");
        titled.title = Some("Probing ChatGPT".into());
        assert!(filter_lm_documents(&titled, &kw));
    }

    proptest! {
        #[test]
        fn dedup_idempotent(texts in proptest::collection::vec("[ab]{3,4}", 0..20)) {
            let recs: Vec<_> = texts.iter().enumerate().map(|(i, t)| rec(&i.to_string(), t)).collect();
            let once = deduplicate(recs);
            let twice = deduplicate(once.clone());
            prop_assert_eq!(once, twice);
        }
    }
}
