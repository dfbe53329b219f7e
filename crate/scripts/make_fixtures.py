#!/usr/bin/env python3
"""Regenerates the bundled test fixtures under crates/core/fixtures.

Everything is seeded, so rerunning produces identical files. pysbd is needed
for the reference sentence boundaries (pip install pysbd).

    python3 scripts/make_fixtures.py [--check BIN]

With --check, the freshly built `anthroscore` binary is run over the
synthetic corpus and every masked sentence it emits must have a stub entry.
"""

import argparse
import json
import math
import random
import subprocess
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "crates" / "core" / "fixtures"

HUMAN = ["he", "she", "her", "him", "He", "She", "Her"]
NON_HUMAN = ["it", "its", "It", "Its"]
MASK = "[MASK]"

# (lemma, third person singular, past)
HIGH_VERBS = [
    ("learn", "learns", "learned", 4),
    ("guide", "guides", "guided", 2),
    ("fool", "fools", "fooled", 2),
    ("decide", "decides", "decided", 2),
]
LOW_VERBS = [
    ("propose", "proposes", "proposed", 4),
    ("present", "presents", "presented", 2),
    ("develop", "develops", "developed", 2),
    ("introduce", "introduces", "introduced", 2),
]
MID_VERBS = [
    ("achieve", "achieves", "achieved", 2),
    ("produce", "produces", "produced", 2),
    ("generate", "generates", "generated", 2),
    ("handle", "handles", "handled", 2),
    ("predict", "predicts", "predicted", 2),
    ("capture", "captures", "captured", 2),
    ("reach", "reaches", "reached", 1),
    ("encode", "encodes", "encoded", 1),
]
REPORTING_VERBS = [
    ("show", "shows", "showed", 3),
    ("demonstrate", "demonstrates", "demonstrated", 2),
    ("suggest", "suggests", "suggested", 1),
    ("indicate", "indicates", "indicated", 1),
]

ADJECTIVES = ["new", "simple", "neural", "deep", "large", "robust", "lightweight",
              "hierarchical", "probabilistic", "modular", "compact", "efficient"]
ARTIFACTS = [("model", "models"), ("algorithm", "algorithms"), ("system", "systems"),
             ("approach", "approaches"), ("network", "networks"), ("software", None),
             ("architecture", "architectures"), ("framework", "frameworks")]
# (surface, takes a determiner, plural)
LM_ENTITIES = [("language model", True, False), ("language models", True, True),
               ("large language models", True, True), ("pre-trained language models", True, True),
               ("ChatGPT", False, False), ("GPT-3", False, False), ("LLaMA", False, False),
               ("PaLM", False, False), ("LLMs", False, True)]
OBJECTS = ["sparse features", "the user intent", "noisy labels", "long documents", "rare words",
           "a compact code", "hidden structure", "the target domain", "new tasks", "spatial cues",
           "edge cases", "the answer", "visual concepts", "the reward signal", "causal links",
           "temporal patterns", "the query", "fine details", "sound units", "the next token",
           "graph motifs", "unseen classes", "stable policies", "the correct label", "word senses"]
TAILS = ["", " from raw text", " on the benchmark", " during training", " across domains",
         " with few examples", " at test time", " in real time", " without supervision",
         " under noise", " for every query", " over long horizons"]
PURPOSES = ["for image retrieval", "for entity linking", "for speech recognition",
            "for code search", "for protein folding", "for traffic forecasting",
            "for question answering", "for text summarization", "for fault detection",
            "for music tagging", "for dialogue tracking", "for crop mapping",
            "for malware triage", "for legal search", "for map matching"]
FILLERS = [
    "Experiments on three benchmarks confirm these findings.",
    "Code and data are released publicly.",
    "Results improve by 3.5 points over prior work.",
    "See Fig. 2 for details.",
    "We follow the protocol of Smith et al. closely.",
    "Prior work (e.g. graph methods) is discussed at length.",
    "Training takes 4.2 hours on one GPU.",
    "Our analysis covers 12 datasets, i.e. all public ones.",
    "Ablations isolate each component.",
    "The U.S. census data is used for evaluation.",
    "Limitations are discussed at the end.",
    "Dr. Lee collected the annotations.",
    "Scores range from 0.1 to 0.9 in all settings.",
]
NEWS_FILLERS = [
    "The company declined to comment.",
    "Critics remain skeptical.",
    "The announcement came on Tuesday.",
    "Shares rose 2.5 percent after the news.",
    "Regulators in the U.K. are watching closely.",
]
PAPER_CATEGORIES = ["cs.CL", "cs.LG", "cs.CV", "cs.AI", "stat.ML"]


def choose(rng, table):
    weights = [row[-1] for row in table]
    return rng.choices(table, weights=weights, k=1)[0]


def cap(s):
    return s[0].upper() + s[1:]


def artifact_chunk(rng, subject):
    singular, plural = rng.choice(ARTIFACTS)
    is_plural = plural is not None and rng.random() < 0.35
    noun = plural if is_plural else singular
    if is_plural:
        det = rng.choice(["the", "these", "our"])
    else:
        det = rng.choice(["the", "this", "our"] + ([] if subject else ["a"]))
    if det == "a":
        adj = rng.choice([a for a in ADJECTIVES if a[0] not in "aeiou"])
        words = [det, adj, noun]
    else:
        words = [det] + ([rng.choice(ADJECTIVES)] if rng.random() < 0.7 else []) + [noun]
    text = " ".join(words)
    return (cap(text) if subject else text), is_plural, singular


def lm_chunk(rng, subject):
    surface, takes_det, is_plural = rng.choice(LM_ENTITIES)
    if takes_det:
        det = rng.choice(["the", "these"] if is_plural else ["the", "this", "our"])
        text = f"{det} {surface}"
    else:
        text = surface
    return (cap(text) if subject else text), is_plural, surface.lower()


def target_to_probs(rng, a):
    """Pronoun probabilities whose log ratio is `a` (before epsilon)."""
    p_nh = rng.uniform(0.05, 0.3)
    p_h = p_nh * math.exp(a)
    total = p_h + p_nh
    if total > 0.95:
        p_h *= 0.95 / total
        p_nh *= 0.95 / total
    def split(mass, words):
        w = [rng.uniform(0.2, 1.0) for _ in words]
        s = sum(w)
        return {word: mass * x / s for word, x in zip(words, w)}
    out = split(p_h, HUMAN)
    out.update(split(p_nh, NON_HUMAN))
    return out


class Corpus:
    """Synthetic abstracts and headlines with a planned score per mention."""

    def __init__(self, seed=20240117):
        self.rng = random.Random(seed)
        self.masked_seen = set()
        self.stub = {}
        self.plan = []

    def entity_sentence(self, source, lexicon):
        """One sentence with a single mention. Verbs lean towards a score
        band without being exclusive to it, so every verb also shows up in
        the prior pool."""
        rng = self.rng
        leaning, table = rng.choices(
            [("high", HIGH_VERBS), ("low", LOW_VERBS), ("reporting", REPORTING_VERBS), ("mid", MID_VERBS)],
            weights=[0.32, 0.23, 0.15, 0.30] if source == "news" else [0.22, 0.33, 0.15, 0.30],
        )[0]
        bands = {"high": [0.75, 0.17, 0.08], "low": [0.06, 0.17, 0.77],
                 "reporting": [0.30, 0.40, 0.30], "mid": [0.30, 0.40, 0.30]}[leaning]
        cls = rng.choices(["high", "mid", "low"], weights=bands)[0]
        for _ in range(200):
            lemma, third, past, _w = choose(rng, table)
            chunk_fn = lm_chunk if lexicon == "lm" else artifact_chunk
            if leaning == "low":
                chunk, _plural, _kw = chunk_fn(rng, subject=False)
                verb = rng.choice([lemma, past])
                purpose = rng.choice(PURPOSES)
                lead = rng.choice(["We", "In this work, we", "Here, we", "To this end, we", "Finally, we"])
                sentence = f"{lead} {verb} {chunk} {purpose}."
                masked = f"{lead} {verb} {MASK} {purpose}."
                role = "object"
            else:
                chunk, plural, _kw = chunk_fn(rng, subject=True)
                verb = lemma if plural else third
                obj = rng.choice(OBJECTS)
                tail = rng.choice(TAILS)
                sentence = f"{chunk} {verb} {obj}{tail}."
                masked = f"{MASK} {verb} {obj}{tail}."
                role = "subject"
            if masked not in self.masked_seen:
                break
        else:
            raise RuntimeError("could not find a fresh sentence")
        self.masked_seen.add(masked)
        if cls == "high":
            a = rng.uniform(1.3, 2.6)
        elif cls == "low":
            a = rng.uniform(-2.6, -1.45)
        else:
            a = rng.uniform(-0.4, 0.4)
        if source == "news":
            a += 0.25
        if lexicon == "lm":
            a += 0.3
        self.stub[masked] = target_to_probs(rng, a)
        return sentence, {"masked_sentence": masked, "entity_surface": chunk, "verb_lemma": lemma,
                          "role": role, "leaning": leaning, "class": cls, "target_a": a, "lexicon": lexicon}

    def document(self, i):
        rng = self.rng
        news = i >= 140
        source = "news" if news else "papers"
        lm_doc = rng.random() < 0.35
        n_entity = rng.choice([1, 2, 2, 3])
        n_filler = rng.choice([1, 2]) if not news else rng.choice([0, 1])
        sentences, mentions = [], []
        for _ in range(n_entity):
            lexicon = "lm" if lm_doc and rng.random() < 0.7 else "artifact"
            s, m = self.entity_sentence(source, lexicon)
            sentences.append(s)
            mentions.append(m)
        fillers = NEWS_FILLERS if news else FILLERS
        for _ in range(n_filler):
            pos = rng.randrange(len(sentences) + 1)
            sentences.insert(pos, rng.choice(fillers))
        # Sentence indices after filler insertion.
        taken = set()
        for m in mentions:
            for idx, s in enumerate(sentences):
                if idx not in taken and s == m_sentence(m):
                    m["sentence_index"] = idx
                    taken.add(idx)
                    break
        year = rng.randint(2019, 2023) if news else rng.randint(2015, 2022)
        date = f"{year}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
        doc_id = f"{'news' if news else 'arxiv'}-{i:03d}"
        title = None
        if not news:
            topic = rng.choice(["Representation Learning", "Efficient Inference", "Robust Evaluation",
                                "Structured Prediction"])
            title = f"{topic} with Large Language Models" if lm_doc else f"{topic} for Vision and Text"
        doc = {"doc_id": doc_id}
        if title:
            doc["title"] = title
        doc["text"] = " ".join(sentences)
        doc["date"] = date
        doc["categories"] = rng.sample(PAPER_CATEGORIES, rng.choice([1, 2])) if not news else []
        doc["source"] = source
        doc["lang"] = "en"
        for m in mentions:
            m["doc_id"] = doc_id
        return doc, mentions


def m_sentence(m):
    masked = m["masked_sentence"]
    return masked.replace(MASK, m["entity_surface"], 1)


def build_corpus():
    c = Corpus()
    docs, mentions = [], []
    for i in range(200):
        d, ms = c.document(i)
        docs.append(d)
        mentions.extend(ms)
    # Plant five exact duplicates: a later paper repeats a sentence from an
    # earlier one, which masks to an already-seen sentence.
    rng = random.Random(7)
    sources = rng.sample(range(0, 60), 5)
    targets = rng.sample(range(80, 140), 5)
    planted = []
    for s, t in zip(sources, targets):
        src = next(m for m in mentions if m["doc_id"] == docs[s]["doc_id"])
        sentence = m_sentence(src)
        doc = docs[t]
        before = len(split_reference(doc["text"]))
        doc["text"] = doc["text"] + " " + sentence
        dup = dict(src)
        dup["doc_id"] = doc["doc_id"]
        dup["sentence_index"] = before
        dup["duplicate_of"] = src["doc_id"]
        mentions.append(dup)
        planted.append({"doc_id": doc["doc_id"], "sentence_index": before, "copied_from": src["doc_id"],
                        "masked_sentence": src["masked_sentence"]})
    stub = {"mode": "table", "entries": dict(sorted(c.stub.items()))}
    return docs, mentions, stub, planted


_SEG = None


def split_reference(text):
    """pysbd sentence start offsets (bytes) after stripping leading spaces."""
    global _SEG
    import pysbd

    if _SEG is None:
        _SEG = pysbd.Segmenter(language="en", clean=False, char_span=True)
    starts = []
    for span in _SEG.segment(text):
        start = span.start
        while start < len(text) and text[start].isspace():
            start += 1
        if start < len(text):
            starts.append(len(text[:start].encode("utf-8")))
    return starts


SHOWCASE = [
    ("t1-high-1", "When a job arrives, the system must decide whether to admit it or reject it, and if admitted, in which server to schedule the job.",
     "the system", "high"),
    ("t1-high-2", "Meanwhile, anti-forensic attacks have been developed to fool these CNN-based forensic algorithms.",
     "these CNN-based forensic algorithms", "high"),
    ("t1-high-3", "The models demonstrated qualifications in various computer-related fields, such as cloud and virtualization, business analytics, cybersecurity, network setup...",
     "The models", "high"),
    ("t1-low-1", "More and more users and developers are using Issue Tracking Systems to report issues, including bugs, feature requests, enhancement suggestions, etc.",
     "Issue Tracking Systems", "low"),
    ("t1-low-2", "Our approach delivers forecast improvements over a competitive benchmark and we discover evidence for strong spatial interactions.",
     "Our approach", "low"),
    ("t1-low-3", "To this end, for training the model, we convert the knowledge graph triples into reasonable and unreasonable texts.",
     "the model", "low"),
]


def write_showcase():
    docs, expected = [], []
    for doc_id, text, entity, band in SHOWCASE:
        docs.append({"doc_id": doc_id, "text": text, "categories": ["cs.LG"], "source": "papers", "lang": "en"})
        expected.append({"doc_id": doc_id, "entity_surface": entity, "band": band,
                         "masked_sentence": text.replace(entity, MASK, 1)})
    write_jsonl(OUT / "showcase.jsonl", docs)
    write_json(OUT / "showcase_expected.json", expected)


# CoNLL-U fixture: one sentence per document, parsed by construction.
# Each template lists (form, upos, head, deprel); heads are 1-based, 0 = root.

def conllu_sentences(rng):
    out = []
    adjs = ["neural", "simple", "robust", "deep", "modular", "compact"]
    nouns = ["model", "system", "algorithm", "network", "framework", "approach"]
    objs = [("labels", "label"), ("features", "feature"), ("images", "image"), ("queries", "query"),
            ("errors", "error"), ("patterns", "pattern")]
    verbs = [("learns", "learn"), ("predicts", "predict"), ("captures", "capture"), ("handles", "handle"),
             ("detects", "detect"), ("ranks", "rank")]
    for i in range(50):
        kind = i % 6
        adj = rng.choice(adjs)
        noun = rng.choice(nouns)
        obj, obj_lemma = rng.choice(objs)
        verb, lemma = rng.choice(verbs)
        if kind == 0:
            toks = [("The", "DET", 3, "det", "the"), (adj, "ADJ", 3, "amod", adj), (noun, "NOUN", 4, "nsubj", noun),
                    (verb, "VERB", 0, "root", lemma), (obj, "NOUN", 4, "obj", obj_lemma), (".", "PUNCT", 4, "punct", ".")]
            gold = [{"subject": f"The {adj} {noun}", "verb": lemma, "object": obj}]
        elif kind == 1:
            past = {"learn": "learned", "predict": "predicted", "capture": "captured", "handle": "handled",
                    "detect": "detected", "rank": "ranked"}[lemma]
            toks = [("The", "DET", 2, "det", "the"), (noun, "NOUN", 4, "nsubj:pass", noun), ("was", "AUX", 4, "aux:pass", "be"),
                    ("trained", "VERB", 0, "root", "train"), ("on", "ADP", 6, "case", "on"), (obj, "NOUN", 4, "obl", obj_lemma),
                    (".", "PUNCT", 4, "punct", ".")]
            gold = [{"subject": f"The {noun}", "verb": "train", "object": None}]
        elif kind == 2:
            toks = [("Our", "PRON", 4, "nmod:poss", "we"), ("graph", "NOUN", 4, "compound", "graph"), (adj, "ADJ", 4, "amod", adj),
                    (noun, "NOUN", 5, "nsubj", noun), (verb, "VERB", 0, "root", lemma), ("local", "ADJ", 7, "amod", "local"),
                    (obj, "NOUN", 5, "obj", obj_lemma), (".", "PUNCT", 5, "punct", ".")]
            gold = [{"subject": f"Our graph {adj} {noun}", "verb": lemma, "object": f"local {obj}"}]
        elif kind == 3:
            toks = [("The", "DET", 2, "det", "the"), (noun, "NOUN", 6, "nsubj", noun), ("of", "ADP", 5, "case", "of"),
                    ("the", "DET", 5, "det", "the"), ("authors", "NOUN", 2, "nmod", "author"), (verb, "VERB", 0, "root", lemma),
                    (obj, "NOUN", 6, "obj", obj_lemma), ("quickly", "ADV", 6, "advmod", "quickly"), (".", "PUNCT", 6, "punct", ".")]
            gold = [{"subject": f"The {noun}", "verb": lemma, "object": obj}]
        elif kind == 4:
            toks = [("We", "PRON", 2, "nsubj", "we"), ("train", "VERB", 0, "root", "train"), ("a", "DET", 5, "det", "a"),
                    (adj, "ADJ", 5, "amod", adj), (noun, "NOUN", 2, "obj", noun), ("on", "ADP", 7, "case", "on"),
                    (obj, "NOUN", 2, "obl", obj_lemma), (".", "PUNCT", 2, "punct", ".")]
            gold = [{"subject": "We", "verb": "train", "object": f"a {adj} {noun}"}]
        else:
            toks = [("This", "DET", 2, "det", "this"), (noun, "NOUN", 3, "nsubj", noun), (verb, "VERB", 0, "root", lemma),
                    (obj, "NOUN", 3, "obj", obj_lemma), ("and", "CCONJ", 6, "cc", "and"), ("improves", "VERB", 3, "conj", "improve"),
                    ("recall", "NOUN", 6, "obj", "recall"), (".", "PUNCT", 3, "punct", ".")]
            # the conjoined verb shares the subject only implicitly
            gold = [{"subject": f"This {noun}", "verb": lemma, "object": obj},
                    {"subject": None, "verb": "improve", "object": "recall"}]
        out.append((toks, gold))
    return out


def render_sentence(toks):
    text = ""
    for j, (form, *_rest) in enumerate(toks):
        if j and form not in {".", ","}:
            text += " "
        text += form
    return text


def write_conllu():
    rng = random.Random(99)
    docs, manifest, gold_rows, blocks = [], [], [], []
    for i, (toks, gold) in enumerate(conllu_sentences(rng)):
        doc_id = f"dep-{i:03d}"
        text = render_sentence(toks)
        sent_id = f"s{i:03d}"
        lines = [f"# sent_id = {sent_id}", f"# text = {text}"]
        for j, (form, upos, head, rel, lemma) in enumerate(toks, start=1):
            nxt = toks[j][0] if j < len(toks) else None
            misc = "SpaceAfter=No" if nxt in {".", ","} else "_"
            lines.append("\t".join([str(j), form, lemma, upos, "_", "_", str(head), rel, "_", misc]))
        blocks.append("\n".join(lines) + "\n")
        docs.append({"doc_id": doc_id, "text": text, "categories": ["cs.CL"], "source": "papers", "lang": "en"})
        manifest.append({"doc_id": doc_id, "sentence_index": 0, "file": "parses.conllu", "sent_id": sent_id})
        for g in gold:
            gold_rows.append({"doc_id": doc_id, "sentence_index": 0, **g})
    d = OUT / "conllu"
    d.mkdir(parents=True, exist_ok=True)
    (d / "parses.conllu").write_text("\n".join(blocks), encoding="utf-8")
    write_jsonl(d / "corpus.jsonl", docs)
    write_jsonl(d / "manifest.jsonl", manifest)
    write_jsonl(d / "gold_triples.jsonl", gold_rows)


def write_ablation():
    rng = random.Random(4242)
    docs, entries = [], {}
    verbs = [v for v in HIGH_VERBS + MID_VERBS]
    used = set()
    while len(docs) < 50:
        _lemma, third, _past, _w = rng.choice(verbs)
        obj = rng.choice(OBJECTS)
        tail = rng.choice(TAILS)
        masked = f"{MASK} {third} {obj}{tail}."
        if masked in used:
            continue
        used.add(masked)
        noun = rng.choice(["model", "system", "algorithm", "network"])
        text = masked.replace(MASK, f"The {noun}")
        docs.append({"doc_id": f"abl-{len(docs):03d}", "text": text, "categories": ["cs.LG"],
                     "source": "papers", "lang": "en"})
        row = {}
        for p in HUMAN + NON_HUMAN:
            row[p] = 0.0 if rng.random() < 0.15 else rng.uniform(0.0, 0.1)
        # Keep each pronoun class non-empty so scores stay informative.
        if all(row[p] == 0.0 for p in NON_HUMAN):
            row["it"] = 0.05
        entries[masked] = row
    d = OUT / "ablation"
    d.mkdir(parents=True, exist_ok=True)
    write_jsonl(d / "corpus.jsonl", docs)
    write_json(d / "stub.json", {"mode": "table", "entries": dict(sorted(entries.items()))})


def write_jsonl(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_json(path, value):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(value, f, indent=1, ensure_ascii=False)
        f.write("\n")


def check(binary, docs_path, stub_path):
    with tempfile.TemporaryDirectory() as tmp:
        cmd = [binary, "score", "--corpus", str(docs_path), "--lexicon", "artifact", "--lexicon", "lm",
               "--backend", "stub", "--stub-file", str(stub_path), "--output-dir", tmp]
        res = subprocess.run(cmd, capture_output=True, text=True)
        print(res.stdout, res.stderr)
        errors = (Path(tmp) / "errors.jsonl").read_text().splitlines()
        if errors:
            for e in errors[:20]:
                print(e)
            raise SystemExit(f"{len(errors)} errors")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", help="anthroscore binary to validate the corpus with")
    args = ap.parse_args()
    OUT.mkdir(parents=True, exist_ok=True)
    write_showcase()
    docs, mentions, stub, planted = build_corpus()
    write_jsonl(OUT / "corpus" / "corpus.jsonl", docs)
    write_json(OUT / "corpus" / "stub.json", stub)
    write_jsonl(OUT / "corpus" / "mentions.jsonl", mentions)
    write_json(OUT / "corpus" / "planted_duplicates.json", planted)
    write_json(OUT / "corpus" / "reference_boundaries.json",
               {d["doc_id"]: split_reference(d["text"]) for d in docs})
    write_conllu()
    write_ablation()
    if args.check:
        check(args.check, OUT / "corpus" / "corpus.jsonl", OUT / "corpus" / "stub.json")


if __name__ == "__main__":
    main()
