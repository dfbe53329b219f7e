//! Tokenization, closed-class word lists and suffix-rule verb lemmatization
//! shared by the rule-based parser.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::scoring::Span;

static VERBS_TXT: &str = include_str!("../../data/verbs.txt");

fn verb_lexicon() -> &'static HashSet<&'static str> {
    static VERBS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    VERBS.get_or_init(|| {
        VERBS_TXT
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
            .collect()
    })
}

/// Whether `lemma` is a known verb base form.
pub fn is_known_verb(lemma: &str) -> bool {
    verb_lexicon().contains(lemma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordClass {
    Determiner,
    SubjectPronoun,
    ObjectPronoun,
    Preposition,
    /// Infinitive marker or preposition; resolved by what follows.
    To,
    Conjunction,
    Auxiliary,
    Adverb,
    Number,
    Punct,
    /// Open-class word: noun, verb or adjective.
    Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub lower: String,
    pub span: Span,
    pub class: WordClass,
}

impl Token<'_> {
    pub fn is_word_like(&self) -> bool {
        matches!(self.class, WordClass::Word | WordClass::Number)
    }

    /// `Possessor's` or `possessors'`.
    pub fn is_possessive(&self) -> bool {
        let l = &self.lower;
        l.ends_with("'s") || l.ends_with("’s") || (l.len() > 2 && (l.ends_with("s'") || l.ends_with("s’")))
    }
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "these", "those", "each", "every", "some", "any", "all", "no",
    "several", "many", "such", "our", "their", "its", "his", "my", "your", "another", "both",
    "few", "more", "most", "less", "fewer", "much", "certain", "other", "either", "neither",
];
const SUBJECT_PRONOUNS: &[&str] = &["i", "we", "you", "they", "he", "she", "it"];
const OBJECT_PRONOUNS: &[&str] = &["me", "us", "them", "him", "her", "themselves", "itself", "ourselves"];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "of", "for", "with", "by", "from", "into", "onto", "over", "under",
    "about", "through", "across", "between", "among", "via", "without", "within", "against",
    "toward", "towards", "upon", "after", "before", "during", "than", "as", "per", "beyond",
    "despite", "throughout", "along", "around", "behind", "below", "above", "including",
    "regarding", "like", "unlike", "amid", "near", "beside", "besides", "except", "versus", "vs",
];
const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "nor", "whether", "if", "when", "while", "because", "although",
    "though", "since", "where", "which", "who", "whom", "whose", "that", "how", "what",
    "once", "until", "unless", "whereas", "so", "yet", "why", "whenever", "wherever",
];
const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "having",
    "do", "does", "did", "can", "could", "may", "might", "must", "shall", "should", "will",
    "would", "cannot", "don't", "doesn't", "didn't", "can't", "won't", "isn't", "aren't",
    "wasn't", "weren't", "couldn't", "shouldn't", "wouldn't", "hasn't", "haven't", "hadn't",
    "don’t", "doesn’t", "didn’t", "can’t", "won’t", "isn’t", "aren’t", "wasn’t", "weren’t",
    "couldn’t", "shouldn’t", "wouldn’t", "hasn’t", "haven’t", "hadn’t",
];
const ADVERBS: &[&str] = &[
    "not", "also", "often", "very", "only", "just", "still", "even", "further", "thus",
    "hence", "however", "now", "then", "always", "never", "already", "here", "there",
    "well", "too", "again", "meanwhile", "moreover", "furthermore", "first", "instead",
    "therefore", "indeed", "almost", "etc", "soon", "later", "rather", "sometimes", "ever",
    "far", "quite", "nevertheless", "nonetheless", "otherwise", "overall", "together",
    "up", "out", "down", "off", "away", "back", "forward",
];
// words ending in -ly that are not adverbs
const LY_NON_ADVERBS: &[&str] = &[
    "family", "assembly", "anomaly", "monopoly", "italy", "july", "ally", "fly", "supply",
    "apply", "reply", "rely", "multiply", "comply", "imply", "early", "only", "holy", "belly",
];

fn classify(lower: &str, raw: &str) -> WordClass {
    let first = raw.chars().next().unwrap_or(' ');
    if !first.is_alphanumeric() {
        return WordClass::Punct;
    }
    if first.is_ascii_digit() {
        return WordClass::Number;
    }
    if lower == "to" {
        return WordClass::To;
    }
    if DETERMINERS.contains(&lower) {
        return WordClass::Determiner;
    }
    if SUBJECT_PRONOUNS.contains(&lower) {
        return WordClass::SubjectPronoun;
    }
    if OBJECT_PRONOUNS.contains(&lower) {
        return WordClass::ObjectPronoun;
    }
    if PREPOSITIONS.contains(&lower) {
        return WordClass::Preposition;
    }
    if CONJUNCTIONS.contains(&lower) {
        return WordClass::Conjunction;
    }
    if AUXILIARIES.contains(&lower) {
        return WordClass::Auxiliary;
    }
    if ADVERBS.contains(&lower)
        || (lower.len() > 4 && lower.ends_with("ly") && !LY_NON_ADVERBS.contains(&lower)
            && !is_known_verb(lower))
    {
        return WordClass::Adverb;
    }
    WordClass::Word
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Splits a sentence into word and punctuation tokens with byte spans.
///
/// Hyphens, apostrophes and periods stay inside a word when followed by an
/// alphanumeric character ("CNN-based", "OpenAI’s", "3.5", "e.g").
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let end_of = |k: usize| chars.get(k).map_or(text.len(), |(b, _)| *b);
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            while j < chars.len() {
                let cj = chars[j].1;
                let next_alnum = chars.get(j + 1).is_some_and(|(_, n)| n.is_alphanumeric());
                if cj.is_alphanumeric()
                    || ((cj == '-' || cj == '.' || is_apostrophe(cj)) && next_alnum)
                {
                    j += 1;
                } else if is_apostrophe(cj)
                    && chars[j - 1].1 == 's'
                    && !chars.get(j + 1).is_some_and(|(_, n)| n.is_alphanumeric())
                {
                    // plural possessive: "models'"
                    j += 1;
                    break;
                } else {
                    break;
                }
            }
        }
        let span = Span::new(start, end_of(j));
        let raw = &text[span.start..span.end];
        let lower = raw.to_lowercase();
        let class = classify(&lower, raw);
        tokens.push(Token { text: raw, lower, span, class });
        i = j;
    }
    tokens
}

const IRREGULAR: &[(&str, &str)] = &[
    ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"), ("am", "be"),
    ("being", "be"), ("isn't", "be"), ("aren't", "be"), ("wasn't", "be"), ("weren't", "be"),
    ("has", "have"), ("had", "have"), ("having", "have"), ("does", "do"), ("did", "do"),
    ("done", "do"), ("doing", "do"), ("made", "make"), ("found", "find"), ("took", "take"),
    ("taken", "take"), ("gave", "give"), ("given", "give"), ("built", "build"), ("ran", "run"),
    ("saw", "see"), ("seen", "see"), ("won", "win"), ("led", "lead"), ("began", "begin"),
    ("begun", "begin"), ("brought", "bring"), ("thought", "think"), ("taught", "teach"),
    ("sought", "seek"), ("held", "hold"), ("kept", "keep"), ("left", "leave"), ("met", "meet"),
    ("paid", "pay"), ("said", "say"), ("sent", "send"), ("spent", "spend"), ("stood", "stand"),
    ("told", "tell"), ("understood", "understand"), ("wrote", "write"), ("written", "write"),
    ("chose", "choose"), ("chosen", "choose"), ("drove", "drive"), ("driven", "drive"),
    ("knew", "know"), ("known", "know"), ("shown", "show"), ("grew", "grow"), ("grown", "grow"),
    ("fell", "fall"), ("fallen", "fall"), ("got", "get"), ("gotten", "get"),
    ("became", "become"), ("came", "come"), ("hid", "hide"), ("hidden", "hide"),
    ("fed", "feed"), ("felt", "feel"), ("meant", "mean"), ("dealt", "deal"), ("drew", "draw"),
    ("drawn", "draw"), ("lost", "lose"), ("sold", "sell"), ("bought", "buy"),
    ("caught", "catch"), ("fought", "fight"), ("forgot", "forget"), ("forgotten", "forget"),
    ("rose", "rise"), ("risen", "rise"), ("broke", "break"), ("broken", "break"),
    ("spoke", "speak"), ("spoken", "speak"), ("went", "go"), ("gone", "go"),
    ("overcame", "overcome"), ("underwent", "undergo"), ("undergone", "undergo"),
    ("undertook", "undertake"), ("undertaken", "undertake"), ("misled", "mislead"),
    ("beaten", "beat"), ("outran", "outrun"), ("withstood", "withstand"), ("lay", "lie"),
    ("laid", "lay"), ("read", "read"), ("set", "set"), ("put", "put"), ("cut", "cut"),
    ("hit", "hit"), ("let", "let"), ("spread", "spread"), ("hurt", "hurt"), ("cast", "cast"),
    ("cost", "cost"), ("split", "split"), ("drunk", "drink"), ("drank", "drink"),
    ("swallowed", "swallow"), ("bound", "bind"), ("fit", "fit"),
];

fn irregular(lower: &str) -> Option<&'static str> {
    let key = lower.replace('’', "'");
    IRREGULAR.iter().find(|(form, _)| *form == key).map(|(_, lemma)| *lemma)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn undouble(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    let n = b.len();
    (n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z' | b'f'))
        .then(|| stem[..n - 1].to_string())
}

/// Candidate base forms for an inflected form, most specific first.
fn candidates(w: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut push = |s: String| {
        if !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    };
    if let Some(stem) = w.strip_suffix("ies") {
        push(format!("{stem}y"));
    }
    if let Some(stem) = w.strip_suffix("ied") {
        push(format!("{stem}y"));
    }
    if let Some(stem) = w.strip_suffix("es") {
        push(stem.to_string());
    }
    if let Some(stem) = w.strip_suffix('s') {
        if !w.ends_with("ss") {
            push(stem.to_string());
        }
    }
    if let Some(stem) = w.strip_suffix("ed") {
        push(stem.to_string());
        push(format!("{stem}e"));
        if let Some(u) = undouble(stem) {
            push(u);
        }
    }
    if let Some(stem) = w.strip_suffix("ing") {
        push(stem.to_string());
        push(format!("{stem}e"));
        if let Some(u) = undouble(stem) {
            push(u);
        }
        if let Some(s) = stem.strip_suffix('y') {
            push(format!("{s}ie"));
        }
    }
    out
}

/// Verb lemma by irregular table, known base forms, then suffix rules
/// (-s, -es, -ies, -ed, -ing with consonant undoubling and e-restoration).
pub fn lemmatize(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some(l) = irregular(&w) {
        return l.to_string();
    }
    if is_known_verb(&w) {
        return w;
    }
    let cands = candidates(&w);
    if let Some(c) = cands.iter().find(|c| is_known_verb(c)) {
        return c.clone();
    }
    // unknown verb: conservative suffix stripping
    if let Some(stem) = w.strip_suffix("ies").or_else(|| w.strip_suffix("ied")) {
        return format!("{stem}y");
    }
    for suffix in ["ing", "ed"] {
        if let Some(stem) = w.strip_suffix(suffix) {
            if stem.len() >= 2 {
                if let Some(u) = undouble(stem) {
                    return u;
                }
                let b = stem.as_bytes();
                let n = b.len();
                // e-restoration after consonant + v/z/c/g/s ("solv", "realiz", "reduc")
                if n >= 2 && !is_vowel(b[n - 2]) && matches!(b[n - 1], b'v' | b'z' | b'c' | b'g' | b's' | b'u') {
                    return format!("{stem}e");
                }
                return stem.to_string();
            }
        }
    }
    for suffix in ["sses", "shes", "ches", "xes", "zes"] {
        if w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && w.len() > 2 {
        return w[..w.len() - 1].to_string();
    }
    w
}

/// Whether a surface form carries verbal inflection.
pub fn inflection(lower: &str) -> Inflection {
    if irregular(lower).is_some() {
        let l = lower.replace('’', "'");
        return if l.ends_with('s') { Inflection::ThirdPerson } else { Inflection::Past };
    }
    if lower.ends_with("ing") && lower.len() > 4 {
        Inflection::Progressive
    } else if lower.ends_with("ed") && lower.len() > 3 {
        Inflection::Past
    } else if lower.ends_with('s') && !lower.ends_with("ss") && lower.len() > 2 {
        Inflection::ThirdPerson
    } else {
        Inflection::Bare
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inflection {
    Bare,
    ThirdPerson,
    Past,
    Progressive,
}

/// Could `lower` be a verb form at all?
pub fn verb_lemma_if_known(lower: &str) -> Option<String> {
    if lower.contains('-') || lower.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    let lemma = lemmatize(lower);
    is_known_verb(&lemma).then_some(lemma)
}

const ADJ_SUFFIXES: &[&str] = &[
    "ic", "al", "ous", "ive", "ful", "less", "able", "ible", "ary", "ian", "ish",
];

/// Heuristic adjective test: hyphenated modifiers and common adjective
/// suffixes. Such a word needs a noun after it inside a chunk.
pub fn looks_adjectival(lower: &str) -> bool {
    if let Some((_, last)) = lower.rsplit_once('-') {
        if last.chars().all(|c| c.is_ascii_alphabetic()) && !last.is_empty() {
            return last.ends_with("ed")
                || last.ends_with("ing")
                || ADJ_SUFFIXES.iter().any(|s| last.ends_with(s))
                || matches!(last, "art" | "like" | "aware" | "free" | "scale" | "level" | "specific" | "end" | "time" | "world");
        }
        return false;
    }
    lower.len() > 4 && ADJ_SUFFIXES.iter().any(|s| lower.ends_with(s)) && !is_known_verb(lower)
}

/// Plural-looking noun ("models", "GPUs"), excluding -ss/-us/-is endings.
pub fn looks_plural(lower: &str) -> bool {
    lower.len() > 2
        && lower.ends_with('s')
        && !(lower.ends_with("ss") || lower.ends_with("us") || lower.ends_with("is"))
}
