//! Entity mentions in triples, and masking them.

use std::collections::HashSet;

use super::lexicon::EntityLexicon;
use super::triples::{NounChunk, SemanticTriple};
use crate::error::{Error, Result};
use crate::scoring::{GrammaticalRole, MaskedSentence, Span, PLACEHOLDER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub chunk: NounChunk,
    pub keyword: String,
    pub role: GrammaticalRole,
    pub verb_lemma: Option<String>,
    /// Name of the lexicon the keyword came from.
    pub lexicon: String,
}

impl Mention {
    pub fn span(&self) -> Span {
        self.chunk.span
    }
}

/// Subject and object chunks of `triples` whose head matches a keyword.
/// A chunk appearing in several triples yields one mention, from its first
/// appearance (subjects before objects within a triple).
pub fn find_entity_mentions(triples: &[SemanticTriple], lexicon: &EntityLexicon) -> Vec<Mention> {
    find_entity_mentions_multi(triples, std::slice::from_ref(lexicon))
}

/// Like [`find_entity_mentions`] over several lexicons. When more than one
/// matches a chunk, the longest keyword wins and ties go to the earlier
/// lexicon.
pub fn find_entity_mentions_multi(
    triples: &[SemanticTriple],
    lexicons: &[EntityLexicon],
) -> Vec<Mention> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in triples {
        let args = [
            (t.subject_chunk.as_ref(), GrammaticalRole::Subject),
            (t.object_chunk.as_ref(), GrammaticalRole::Object),
        ];
        for (chunk, role) in args {
            let Some(chunk) = chunk else { continue };
            if seen.contains(&chunk.span) {
                continue;
            }
            let best = lexicons
                .iter()
                .filter_map(|lex| lex.match_chunk(&chunk.words).map(|m| (lex, m)))
                .fold(None, |best: Option<(&EntityLexicon, super::lexicon::KeywordMatch)>, (lex, m)| {
                    match &best {
                        Some((_, b)) if (b.words, b.keyword.len()) >= (m.words, m.keyword.len()) => best,
                        _ => Some((lex, m)),
                    }
                });
            if let Some((lex, m)) = best {
                seen.insert(chunk.span);
                out.push(Mention {
                    chunk: chunk.clone(),
                    keyword: m.keyword.to_string(),
                    role,
                    verb_lemma: Some(t.verb_lemma.clone()),
                    lexicon: lex.name.clone(),
                });
            }
        }
    }
    out
}

/// Replaces the whole mention chunk with the placeholder.
pub fn mask_mention(
    doc_id: &str,
    sentence_index: usize,
    sentence: &str,
    mention: &Mention,
) -> Result<MaskedSentence> {
    let span = mention.span();
    if let Some(existing) = sentence
        .match_indices(PLACEHOLDER)
        .map(|(i, p)| Span::new(i, i + p.len()))
        .find(|m| m.overlaps(&span))
    {
        return Err(Error::OverlappingMask { start: existing.start, end: existing.end });
    }
    MaskedSentence::new(
        doc_id,
        sentence_index,
        sentence,
        span,
        mention.keyword.clone(),
        mention.role,
        mention.verb_lemma.clone(),
    )
}
