//! Subject–verb–object triples.
//!
//! Two analysis sources are supported: a part-of-speech-free rule parser
//! (noun chunks are built from determiners, modifiers and nouns; verbs are
//! recognised by position, a verb lexicon and inflection) and ingested
//! CoNLL-U dependency parses (see [`super::conllu`]).

use serde::{Deserialize, Serialize};

use super::tokens::{
    inflection, is_known_verb, lemmatize, looks_adjectival, looks_plural, tokenize,
    verb_lemma_if_known, Inflection, Token, WordClass,
};
use crate::scoring::Span;

/// A noun chunk: a span of the sentence whose last word is the head noun.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounChunk {
    pub span: Span,
    pub text: String,
    pub words: Vec<String>,
}

impl NounChunk {
    pub(crate) fn from_tokens(sentence: &str, start: Span, end: Span, words: Vec<String>) -> Self {
        let span = Span::new(start.start, end.end);
        NounChunk { span, text: sentence[span.start..span.end].to_string(), words }
    }

    pub fn head(&self) -> &str {
        self.words.last().map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticTriple {
    pub sentence_index: usize,
    #[serde(default)]
    pub subject_chunk: Option<NounChunk>,
    pub verb_lemma: String,
    #[serde(default)]
    pub object_chunk: Option<NounChunk>,
}

impl SemanticTriple {
    /// Spans are disjoint when both chunks are present.
    pub fn is_consistent(&self) -> bool {
        match (&self.subject_chunk, &self.object_chunk) {
            (Some(s), Some(o)) => !s.span.overlaps(&o.span),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    Chunk { start: usize, end: usize },
    Verb { main: usize, finite: bool, coordinated: bool },
    Prep,
    Conj(usize),
    Punct,
    Adverb,
}

const NOMINAL_ING: &[&str] = &[
    "training", "learning", "processing", "computing", "understanding", "reasoning",
    "planning", "programming", "engineering", "modeling", "modelling", "clustering",
    "sampling", "tracking", "matching", "mining", "testing", "filtering", "pooling",
    "labeling", "labelling", "pruning", "tuning", "forecasting", "ranking", "encoding",
];
const RELATIVE: &[&str] = &["who", "which", "that"];

struct RuleParser<'a> {
    sentence: &'a str,
    toks: Vec<Token<'a>>,
}

impl<'a> RuleParser<'a> {
    fn new(sentence: &'a str) -> Self {
        RuleParser { sentence, toks: tokenize(sentence) }
    }

    fn is_possessive_det(&self, i: usize) -> bool {
        let t = &self.toks[i];
        t.lower == "her" && self.toks.get(i + 1).is_some_and(|n| n.is_word_like())
    }

    /// Does the token after `i` open a noun phrase?
    fn opens_np(&self, i: usize) -> bool {
        match self.toks.get(i) {
            Some(t) => matches!(
                t.class,
                WordClass::Determiner | WordClass::ObjectPronoun | WordClass::Number
            ) || t.is_possessive(),
            None => false,
        }
    }

    /// Is token `j` a verb given that the chunk `start..=last` precedes it?
    fn verb_after_chunk(&self, start: usize, last: usize, j: usize) -> Option<bool> {
        let w = &self.toks[j];
        if w.class != WordClass::Word {
            return None;
        }
        let head = &self.toks[last];
        let lemma = verb_lemma_if_known(&w.lower);
        let infl = inflection(&w.lower);
        match head.class {
            WordClass::SubjectPronoun | WordClass::ObjectPronoun => {
                return (lemma.is_some() || infl == Inflection::Past)
                    .then_some(infl != Inflection::Progressive);
            }
            WordClass::Determiner if start == last => {
                return lemma.is_some().then_some(true);
            }
            WordClass::Determiner => return None,
            _ => {}
        }
        if head.is_possessive() || (looks_adjectival(&head.lower) && head.class == WordClass::Word) {
            return None;
        }
        let next_opens = self.opens_np(j + 1)
            || self.toks.get(j + 1).is_some_and(|t| t.lower == "that");
        match infl {
            Inflection::ThirdPerson => {
                (lemma.is_some() && !looks_plural(&head.lower)).then_some(true)
            }
            Inflection::Past => {
                let unknown_but_verbal = lemma.is_none()
                    && !self.toks.get(j + 1).is_some_and(|t| t.is_word_like());
                (lemma.is_some() || unknown_but_verbal).then_some(true)
            }
            Inflection::Progressive => (lemma.is_some() && next_opens).then_some(false),
            Inflection::Bare => {
                (lemma.is_some() && (looks_plural(&head.lower) || next_opens)).then_some(true)
            }
        }
    }

    /// Gerund at `i` heading a clause after a preposition or at clause start.
    fn is_gerund(&self, i: usize) -> bool {
        let t = &self.toks[i];
        if inflection(&t.lower) != Inflection::Progressive || verb_lemma_if_known(&t.lower).is_none() {
            return false;
        }
        if self.opens_np(i + 1) {
            return true;
        }
        !NOMINAL_ING.contains(&t.lower.as_str())
            && self.toks.get(i + 1).is_some_and(|n| n.class == WordClass::Word)
    }

    fn chunk_from(&self, i: usize) -> usize {
        let n = self.toks.len();
        let mut j = i;
        while j < n
            && (matches!(self.toks[j].class, WordClass::Determiner | WordClass::Number)
                || (j == i && self.is_possessive_det(j)))
        {
            j += 1;
        }
        let mut modifier_before = true;
        while j < n && self.toks[j].is_word_like() {
            if !modifier_before && self.verb_after_chunk(i, j - 1, j).is_some() {
                break;
            }
            let t = &self.toks[j];
            modifier_before = t.is_possessive()
                || t.class == WordClass::Number
                || (looks_adjectival(&t.lower) && self.toks.get(j + 1).is_some_and(|n| n.is_word_like()));
            j += 1;
        }
        j - 1
    }

    fn valid_chunk(&self, start: usize, end: usize) -> bool {
        let last = &self.toks[end];
        match last.class {
            WordClass::Word | WordClass::Number => !last.is_possessive() || end == start,
            WordClass::Determiner => {
                start == end && matches!(last.lower.as_str(), "this" | "these" | "those")
            }
            _ => false,
        }
    }

    fn previous_significant(items: &[Item]) -> Option<Item> {
        items.iter().rev().copied().find(|it| *it != Item::Adverb)
    }

    fn items(&self) -> Vec<Item> {
        let toks = &self.toks;
        let n = toks.len();
        let mut items = Vec::new();
        let mut i = 0;
        while i < n {
            let t = &toks[i];
            match t.class {
                WordClass::Punct => {
                    items.push(Item::Punct);
                    i += 1;
                }
                WordClass::Preposition => {
                    items.push(Item::Prep);
                    i += 1;
                }
                WordClass::Conjunction => {
                    items.push(Item::Conj(i));
                    i += 1;
                }
                WordClass::Adverb => {
                    items.push(Item::Adverb);
                    i += 1;
                }
                WordClass::To => {
                    let next_is_verb = toks.get(i + 1).is_some_and(|n| {
                        n.class == WordClass::Word
                            && inflection(&n.lower) == Inflection::Bare
                            && verb_lemma_if_known(&n.lower).is_some()
                    });
                    if next_is_verb {
                        items.push(Item::Verb { main: i + 1, finite: false, coordinated: false });
                        i += 2;
                    } else {
                        items.push(Item::Prep);
                        i += 1;
                    }
                }
                WordClass::Auxiliary => {
                    let mut j = i;
                    while j < n && matches!(toks[j].class, WordClass::Auxiliary | WordClass::Adverb) {
                        j += 1;
                    }
                    let main_is_word = toks.get(j).is_some_and(|w| {
                        w.class == WordClass::Word
                            && (verb_lemma_if_known(&w.lower).is_some()
                                || matches!(inflection(&w.lower), Inflection::Past | Inflection::Progressive)
                                    && !looks_adjectival(&w.lower))
                    });
                    if main_is_word {
                        items.push(Item::Verb { main: j, finite: true, coordinated: false });
                        i = j + 1;
                    } else {
                        // the last auxiliary is itself the main verb ("is", "has")
                        let last_aux = (i..j).rev().find(|&k| toks[k].class == WordClass::Auxiliary).unwrap_or(i);
                        items.push(Item::Verb { main: last_aux, finite: true, coordinated: false });
                        i = j;
                    }
                }
                WordClass::SubjectPronoun | WordClass::ObjectPronoun if !self.is_possessive_det(i) => {
                    items.push(Item::Chunk { start: i, end: i });
                    i += 1;
                }
                _ => {
                    if t.class == WordClass::Word {
                        if let Some(verb) = self.verb_here(i, &items) {
                            items.push(verb);
                            i += 1;
                            continue;
                        }
                    }
                    let end = self.chunk_from(i);
                    if self.valid_chunk(i, end) {
                        items.push(Item::Chunk { start: i, end });
                    } else {
                        items.push(Item::Punct);
                    }
                    i = end + 1;
                }
            }
        }
        items
    }

    /// Decides whether the open-class word at `i` starts a verb group.
    fn verb_here(&self, i: usize, items: &[Item]) -> Option<Item> {
        let t = &self.toks[i];
        let prev = Self::previous_significant(items);
        match prev {
            Some(Item::Chunk { start, end }) => self
                .verb_after_chunk(start, end, i)
                .map(|finite| Item::Verb { main: i, finite, coordinated: false }),
            Some(Item::Verb { .. }) => None,
            Some(Item::Conj(c)) => {
                let conj = self.toks[c].lower.as_str();
                let lemma = verb_lemma_if_known(&t.lower)?;
                let infl = inflection(&t.lower);
                if RELATIVE.contains(&conj) && infl != Inflection::Progressive {
                    return Some(Item::Verb { main: i, finite: false, coordinated: false });
                }
                if matches!(conj, "and" | "or") {
                    let last_verb = items.iter().rev().find_map(|it| match it {
                        Item::Verb { main, .. } => Some(*main),
                        _ => None,
                    })?;
                    let last_infl = inflection(&self.toks[last_verb].lower);
                    let agrees = match infl {
                        Inflection::Bare => last_infl == Inflection::Bare,
                        Inflection::ThirdPerson | Inflection::Past => {
                            matches!(last_infl, Inflection::ThirdPerson | Inflection::Past)
                        }
                        Inflection::Progressive => false,
                    };
                    let _ = lemma;
                    if agrees {
                        return Some(Item::Verb { main: i, finite: true, coordinated: true });
                    }
                }
                self.is_gerund(i).then_some(Item::Verb { main: i, finite: false, coordinated: false })
            }
            Some(Item::Prep) | Some(Item::Punct) | None => self
                .is_gerund(i)
                .then_some(Item::Verb { main: i, finite: false, coordinated: false }),
            Some(Item::Adverb) => None,
        }
    }

    fn chunk(&self, start: usize, end: usize) -> NounChunk {
        let words = self.toks[start..=end].iter().map(|t| t.text.to_string()).collect();
        NounChunk::from_tokens(self.sentence, self.toks[start].span, self.toks[end].span, words)
    }

    fn triples(&self, sentence_index: usize) -> Vec<SemanticTriple> {
        let items = self.items();
        let mut out = Vec::new();
        let mut last_subject: Option<(usize, usize)> = None;
        for (k, item) in items.iter().enumerate() {
            let Item::Verb { main, finite, coordinated } = *item else { continue };
            let subject = if coordinated {
                last_subject
            } else if finite {
                find_subject(&items[..k])
            } else {
                None
            };
            if finite && !coordinated {
                last_subject = subject;
            }
            let object = items[k + 1..]
                .iter()
                .find(|it| **it != Item::Adverb)
                .and_then(|it| match *it {
                    Item::Chunk { start, end }
                        if self.toks[start].class != WordClass::SubjectPronoun
                            || self.toks[start].lower == "it" =>
                    {
                        Some((start, end))
                    }
                    _ => None,
                });
            // copular "be" takes no direct object
            let verb_tok = &self.toks[main];
            let lemma = lemmatize(verb_tok.text);
            let object = if verb_tok.class == WordClass::Auxiliary { None } else { object };
            if subject.is_none() && object.is_none() {
                continue;
            }
            out.push(SemanticTriple {
                sentence_index,
                subject_chunk: subject.map(|(s, e)| self.chunk(s, e)),
                verb_lemma: lemma,
                object_chunk: object.map(|(s, e)| self.chunk(s, e)),
            });
        }
        out
    }
}

fn find_subject(before: &[Item]) -> Option<(usize, usize)> {
    let mut rest = before;
    loop {
        let pos = rest.iter().rposition(|it| *it != Item::Adverb)?;
        let Item::Chunk { start, end } = rest[pos] else { return None };
        let prior = rest[..pos].iter().rposition(|it| *it != Item::Adverb);
        match prior.map(|p| rest[p]) {
            // prepositional object: keep looking left for the real subject
            Some(Item::Prep) => rest = &rest[..prior.unwrap()],
            _ => return Some((start, end)),
        }
    }
}

/// Rule-based triples for one sentence.
pub fn extract_triples_rules(sentence: &str, sentence_index: usize) -> Vec<SemanticTriple> {
    RuleParser::new(sentence).triples(sentence_index)
}

/// Every noun chunk the rule parser finds, whether or not it is an argument.
pub fn noun_chunks_rules(sentence: &str) -> Vec<NounChunk> {
    let p = RuleParser::new(sentence);
    p.items()
        .into_iter()
        .filter_map(|it| match it {
            Item::Chunk { start, end } => Some(p.chunk(start, end)),
            _ => None,
        })
        .collect()
}

/// Whether a lemma is in the bundled verb list.
pub fn known_verb(lemma: &str) -> bool {
    is_known_verb(lemma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(s: &str) -> Vec<(Option<String>, String, Option<String>)> {
        extract_triples_rules(s, 0)
            .into_iter()
            .map(|t| {
                (t.subject_chunk.map(|c| c.text), t.verb_lemma, t.object_chunk.map(|c| c.text))
            })
            .collect()
    }

    fn has(s: &str, subj: Option<&str>, verb: &str, obj: Option<&str>) -> bool {
        summary(s).iter().any(|(a, v, b)| a.as_deref() == subj && v == verb && b.as_deref() == obj)
    }

    #[test]
    fn canonical_svo() {
        assert_eq!(
            summary("The system rejects the job."),
            [(Some("The system".into()), "reject".into(), Some("the job".into()))]
        );
    }

    #[test]
    fn modal_subject() {
        let s = "When a job arrives, the system must decide whether to admit it or reject it, \
                 and if admitted, in which server to schedule the job.";
        assert!(has(s, Some("the system"), "decide", None), "{:?}", summary(s));
        assert!(has(s, Some("a job"), "arrive", None));
        assert!(has(s, None, "schedule", Some("the job")));
    }

    #[test]
    fn modifier_chunk_as_object() {
        let s = "Meanwhile, anti-forensic attacks have been developed to fool these CNN-based forensic algorithms.";
        assert!(has(s, None, "fool", Some("these CNN-based forensic algorithms")), "{:?}", summary(s));
        assert!(has(s, Some("anti-forensic attacks"), "develop", None));
    }

    #[test]
    fn plural_subject_past_tense() {
        let s = "The models demonstrated qualifications in various computer-related fields, such as \
                 cloud and virtualization, business analytics, cybersecurity, network setup...";
        assert!(has(s, Some("The models"), "demonstrate", Some("qualifications")), "{:?}", summary(s));
    }

    #[test]
    fn progressive_object() {
        let s = "More and more users and developers are using Issue Tracking Systems to report issues, \
                 including bugs, feature requests, enhancement suggestions, etc.";
        assert!(has(s, Some("developers"), "use", Some("Issue Tracking Systems")), "{:?}", summary(s));
    }

    #[test]
    fn possessive_subject_and_pronoun_clause() {
        let s = "Our approach delivers forecast improvements over a competitive benchmark and we \
                 discover evidence for strong spatial interactions.";
        assert!(has(s, Some("Our approach"), "deliver", Some("forecast improvements")), "{:?}", summary(s));
        assert!(has(s, Some("we"), "discover", Some("evidence")));
    }

    #[test]
    fn gerund_after_preposition() {
        let s = "To this end, for training the model, we convert the knowledge graph triples into \
                 reasonable and unreasonable texts.";
        assert!(has(s, None, "train", Some("the model")), "{:?}", summary(s));
        assert!(has(s, Some("we"), "convert", Some("the knowledge graph triples")));
    }

    #[test]
    fn headline_shapes() {
        let s = "Large language models don’t actually think and tend to make elementary mistakes, even make things up.";
        assert!(has(s, Some("Large language models"), "think", None), "{:?}", summary(s));
        let s = "The algorithms also picked up on racial biases linking Black people to weapons.";
        assert!(has(s, Some("The algorithms"), "pick", None), "{:?}", summary(s));
        let s = "Microsoft is betting heavily on integrating OpenAI’s GPT language models into its products to compete with Google.";
        assert!(has(s, None, "integrate", Some("OpenAI’s GPT language models")), "{:?}", summary(s));
        let s = "For workers who use machine-learning models to help them make decisions, knowing when to trust them matters.";
        assert!(has(s, None, "use", Some("machine-learning models")), "{:?}", summary(s));
    }

    #[test]
    fn pronoun_subject() {
        assert!(has("We love cats.", Some("We"), "love", Some("cats")));
    }

    #[test]
    fn spans_are_disjoint() {
        for s in ["The system rejects the job.", "Our approach delivers forecast improvements."] {
            assert!(extract_triples_rules(s, 0).iter().all(SemanticTriple::is_consistent));
        }
    }
}
