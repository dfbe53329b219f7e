//! CoNLL-U ingestion: dependency parses produced by any external tool,
//! keyed to (doc_id, sentence_index) by a JSONL manifest.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokens::lemmatize;
use super::triples::{NounChunk, SemanticTriple};
use crate::error::{Error, Result};
use crate::scoring::Span;

const SUBJECT_RELS: &[&str] = &["nsubj", "nsubj:pass", "nsubjpass"];
const OBJECT_RELS: &[&str] = &["obj", "dobj"];
// left dependents that end a noun chunk rather than belong to it
const CHUNK_BREAKERS: &[&str] = &["punct", "case", "cc", "mark", "advmod", "advcl", "acl", "acl:relcl", "conj", "appos", "parataxis"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluWord {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub head: usize,
    pub deprel: String,
    /// 1-based line number in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct MultiWord {
    first: usize,
    last: usize,
    form: String,
    line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConlluSentence {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub words: Vec<ConlluWord>,
    multiwords: Vec<MultiWord>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::ConlluParse { line, message: message.into() }
}

/// Parses every sentence in a CoNLL-U document.
pub fn parse_conllu(text: &str) -> Result<Vec<ConlluSentence>> {
    let mut out = Vec::new();
    let mut cur = ConlluSentence::default();
    let mut first_line = 0;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            if !cur.words.is_empty() {
                finish(&cur, first_line)?;
                out.push(std::mem::take(&mut cur));
            } else if cur.sent_id.is_some() || cur.text.is_some() {
                return Err(perr(line, "sentence has no word rows"));
            }
            continue;
        }
        if let Some(comment) = raw.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => cur.sent_id = Some(value.trim().to_string()),
                    "text" => cur.text = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if cur.words.is_empty() && cur.multiwords.is_empty() {
            first_line = line;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 10 {
            return Err(perr(line, format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        let id = cols[0];
        if id.contains('.') {
            continue; // empty node
        }
        if let Some((a, b)) = id.split_once('-') {
            let first = a.parse().map_err(|_| perr(line, format!("bad range id {id:?}")))?;
            let last = b.parse().map_err(|_| perr(line, format!("bad range id {id:?}")))?;
            if last < first {
                return Err(perr(line, format!("bad range id {id:?}")));
            }
            cur.multiwords.push(MultiWord { first, last, form: cols[1].to_string(), line });
            continue;
        }
        let id: usize = id.parse().map_err(|_| perr(line, format!("bad word id {id:?}")))?;
        if id != cur.words.len() + 1 {
            return Err(perr(line, format!("word id {id} out of sequence")));
        }
        let head: usize = cols[6].parse().map_err(|_| perr(line, format!("bad head {:?}", cols[6])))?;
        cur.words.push(ConlluWord {
            id,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
            line,
        });
    }
    if !cur.words.is_empty() {
        finish(&cur, first_line)?;
        out.push(cur);
    } else if cur.sent_id.is_some() || !cur.multiwords.is_empty() {
        return Err(perr(text.lines().count(), "sentence has no word rows"));
    }
    Ok(out)
}

fn finish(s: &ConlluSentence, line: usize) -> Result<()> {
    let n = s.words.len();
    for w in &s.words {
        if w.head > n {
            return Err(perr(w.line, format!("head {} beyond sentence length {n}", w.head)));
        }
        if w.head == w.id {
            return Err(perr(w.line, "word is its own head"));
        }
    }
    if !s.words.iter().any(|w| w.head == 0) {
        return Err(perr(line, "sentence has no root"));
    }
    for m in &s.multiwords {
        if m.last > n {
            return Err(perr(m.line, "multiword range beyond sentence"));
        }
    }
    Ok(())
}

/// A parse aligned to the exact sentence string it describes.
#[derive(Debug, Clone)]
pub struct AlignedParse<'a> {
    pub sentence: &'a str,
    pub parse: &'a ConlluSentence,
    spans: Vec<Span>, // per word, index id-1
}

impl<'a> AlignedParse<'a> {
    /// Locates every surface token of `parse` in `sentence`, in order.
    pub fn new(sentence: &'a str, parse: &'a ConlluSentence) -> Result<Self> {
        let mut spans = vec![Span::new(0, 0); parse.words.len()];
        let mut cursor = 0;
        let mut i = 0;
        while i < parse.words.len() {
            let id = i + 1;
            let (form, line, last) = match parse.multiwords.iter().find(|m| m.first == id) {
                Some(m) => (m.form.as_str(), m.line, m.last),
                None => (parse.words[i].form.as_str(), parse.words[i].line, id),
            };
            let rest = &sentence[cursor..];
            let skipped = rest.len() - rest.trim_start().len();
            let at = cursor + skipped;
            if !sentence[at..].starts_with(form) {
                let found = sentence[at..].split_whitespace().next().unwrap_or("");
                return Err(perr(line, format!("token {form:?} does not match sentence text at {found:?}")));
            }
            let span = Span::new(at, at + form.len());
            for slot in &mut spans[i..last] {
                *slot = span;
            }
            cursor = span.end;
            i = last;
        }
        if !sentence[cursor..].trim().is_empty() {
            return Err(perr(
                parse.words.last().map_or(0, |w| w.line),
                format!("parse does not cover sentence tail {:?}", sentence[cursor..].trim()),
            ));
        }
        Ok(AlignedParse { sentence, parse, spans })
    }

    fn word(&self, id: usize) -> &ConlluWord {
        &self.parse.words[id - 1]
    }

    fn dependents(&self, id: usize) -> impl Iterator<Item = &ConlluWord> {
        self.parse.words.iter().filter(move |w| w.head == id)
    }

    fn subtree_min(&self, id: usize) -> usize {
        self.dependents(id).map(|d| self.subtree_min(d.id)).fold(id, usize::min)
    }

    /// The noun chunk headed by `head`: its contiguous left modifiers and
    /// their subtrees, through the head word.
    pub fn chunk(&self, head: usize) -> NounChunk {
        let mut start = head;
        let mut left: Vec<&ConlluWord> = self.dependents(head).filter(|d| d.id < head).collect();
        left.sort_by(|a, b| b.id.cmp(&a.id)); // nearest first
        for d in left {
            if CHUNK_BREAKERS.contains(&d.deprel.as_str()) {
                break;
            }
            start = start.min(self.subtree_min(d.id));
        }
        let first = self.spans[start - 1];
        let last = self.spans[head - 1];
        let span = Span::new(first.start, last.end);
        let words = units_in(self.sentence, span);
        NounChunk::from_tokens(self.sentence, first, last, words)
    }

    pub fn triples(&self, sentence_index: usize) -> Vec<SemanticTriple> {
        let mut verbs: Vec<usize> = self
            .parse
            .words
            .iter()
            .filter(|w| SUBJECT_RELS.contains(&w.deprel.as_str()) || OBJECT_RELS.contains(&w.deprel.as_str()))
            .map(|w| w.head)
            .filter(|&h| h > 0)
            .collect();
        verbs.sort_unstable();
        verbs.dedup();
        verbs
            .into_iter()
            .map(|v| {
                let find = |rels: &[&str]| {
                    self.dependents(v).find(|d| rels.contains(&d.deprel.as_str())).map(|d| self.chunk(d.id))
                };
                let verb = self.word(v);
                let lemma = if verb.lemma.is_empty() || verb.lemma == "_" {
                    lemmatize(&verb.form)
                } else {
                    verb.lemma.to_lowercase()
                };
                SemanticTriple {
                    sentence_index,
                    subject_chunk: find(SUBJECT_RELS),
                    verb_lemma: lemma,
                    object_chunk: find(OBJECT_RELS),
                }
            })
            .collect()
    }
}

// whitespace-separated surface pieces inside `span`
fn units_in(sentence: &str, span: Span) -> Vec<String> {
    sentence[span.start..span.end].split_whitespace().map(str::to_string).collect()
}

/// Triples for `sentence` from its parse.
pub fn extract_triples_conllu(
    sentence: &str,
    parse: &ConlluSentence,
    sentence_index: usize,
) -> Result<Vec<SemanticTriple>> {
    Ok(AlignedParse::new(sentence, parse)?.triples(sentence_index))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub sentence_index: usize,
    /// CoNLL-U file, relative to the manifest's directory.
    pub file: String,
    /// `# sent_id` of the sentence; when absent, the file must hold one sentence.
    #[serde(default)]
    pub sent_id: Option<String>,
}

/// Parses for a corpus, looked up by (doc_id, sentence_index).
#[derive(Debug, Default, Clone)]
pub struct ParseStore {
    parses: HashMap<(String, usize), ConlluSentence>,
}

impl ParseStore {
    pub fn from_manifest(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        let text = std::fs::read_to_string(path)?;
        let mut files: HashMap<String, Vec<ConlluSentence>> = HashMap::new();
        let mut parses = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(line)
                .map_err(|e| perr(n + 1, format!("manifest: {e}")))?;
            if !files.contains_key(&entry.file) {
                let body = std::fs::read_to_string(base.join(&entry.file))?;
                files.insert(entry.file.clone(), parse_conllu(&body)?);
            }
            let sentences = &files[&entry.file];
            let parse = match &entry.sent_id {
                Some(id) => sentences.iter().find(|s| s.sent_id.as_deref() == Some(id)),
                None if sentences.len() == 1 => sentences.first(),
                None => None,
            }
            .ok_or_else(|| {
                perr(n + 1, format!("manifest: no sentence {:?} in {}", entry.sent_id, entry.file))
            })?;
            parses.insert((entry.doc_id, entry.sentence_index), parse.clone());
        }
        Ok(ParseStore { parses })
    }

    pub fn insert(&mut self, doc_id: &str, sentence_index: usize, parse: ConlluSentence) {
        self.parses.insert((doc_id.to_string(), sentence_index), parse);
    }

    pub fn get(&self, doc_id: &str, sentence_index: usize) -> Option<&ConlluSentence> {
        self.parses.get(&(doc_id.to_string(), sentence_index))
    }

    pub fn len(&self) -> usize {
        self.parses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parses.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SVO: &str = "# sent_id = s1
# text = The system rejects the job.
1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tsystem\tsystem\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\trejects\treject\tVERB\t_\t_\t0\troot\t_\t_
4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\t_
5\tjob\tjob\tNOUN\t_\t_\t3\tobj\t_\tSpaceAfter=No
6\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_
";

    #[test]
    fn svo_from_dependencies() {
        let parsed = parse_conllu(SVO).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].sent_id.as_deref(), Some("s1"));
        let t = extract_triples_conllu("The system rejects the job.", &parsed[0], 3).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].sentence_index, 3);
        assert_eq!(t[0].subject_chunk.as_ref().unwrap().text, "The system");
        assert_eq!(t[0].verb_lemma, "reject");
        assert_eq!(t[0].object_chunk.as_ref().unwrap().text, "the job");
    }

    #[test]
    fn multiword_tokens_and_empty_nodes() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tdo\tdo\tAUX\t_\t_\t4\taux\t_\t_
2\tn't\tnot\tPART\t_\t_\t4\tadvmod\t_\t_
3\tModels\tmodel\tNOUN\t_\t_\t4\tnsubj\t_\t_
3.1\tx\tx\tX\t_\t_\t_\t_\t_\t_
4\tthink\tthink\tVERB\t_\t_\t0\troot\t_\t_
";
        let parsed = parse_conllu(text).unwrap();
        assert_eq!(parsed[0].words.len(), 4);
        let t = extract_triples_conllu("don't Models think", &parsed[0], 0).unwrap();
        assert_eq!(t[0].subject_chunk.as_ref().unwrap().text, "Models");
    }

    #[test]
    fn malformed_rows() {
        let short = "1\tThe\tthe\n";
        assert!(matches!(parse_conllu(short), Err(Error::ConlluParse { line: 1, .. })));
        let bad_head = "1\tA\ta\tDET\t_\t_\t9\tdet\t_\t_\n";
        assert!(matches!(parse_conllu(bad_head), Err(Error::ConlluParse { .. })));
        let no_root = "1\tA\ta\tDET\t_\t_\t2\tdet\t_\t_\n2\tb\tb\tNOUN\t_\t_\t1\tdep\t_\t_\n";
        assert!(parse_conllu(no_root).is_err());
        let gap = "1\tA\ta\tDET\t_\t_\t0\troot\t_\t_\n3\tb\tb\tNOUN\t_\t_\t1\tdep\t_\t_\n";
        assert!(parse_conllu(gap).is_err());
    }

    #[test]
    fn misaligned_text_is_an_error() {
        let parsed = parse_conllu(SVO).unwrap();
        let err = extract_triples_conllu("The model rejects the job.", &parsed[0], 0).unwrap_err();
        assert!(matches!(err, Error::ConlluParse { line: 4, .. }), "{err}");
    }

    #[test]
    fn passive_subject_and_modifier_chunk() {
        let text = "1\tThese\tthese\tDET\t_\t_\t3\tdet\t_\t_
2\tnew\tnew\tADJ\t_\t_\t3\tamod\t_\t_
3\tmodels\tmodel\tNOUN\t_\t_\t5\tnsubj:pass\t_\t_
4\twere\tbe\tAUX\t_\t_\t5\taux:pass\t_\t_
5\ttrained\ttrain\tVERB\t_\t_\t0\troot\t_\t_
";
        let parsed = parse_conllu(text).unwrap();
        let t = extract_triples_conllu("These new models were trained", &parsed[0], 0).unwrap();
        assert_eq!(t[0].subject_chunk.as_ref().unwrap().text, "These new models");
        assert_eq!(t[0].verb_lemma, "train");
        assert!(t[0].object_chunk.is_none());
    }

    #[test]
    fn manifest_lookup() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("p.conllu"), SVO).unwrap();
        let manifest = dir.path().join("m.jsonl");
        std::fs::write(&manifest, r#"{"doc_id":"d","sentence_index":0,"file":"p.conllu","sent_id":"s1"}"#).unwrap();
        let store = ParseStore::from_manifest(&manifest).unwrap();
        assert!(store.get("d", 0).is_some());
        assert!(store.get("d", 1).is_none());
        std::fs::write(&manifest, r#"{"doc_id":"d","sentence_index":0,"file":"p.conllu","sent_id":"nope"}"#).unwrap();
        assert!(ParseStore::from_manifest(&manifest).is_err());
    }
}
