//! Python bindings: scoring, the masking pipeline, the stub backend and the
//! statistics helpers.

use std::collections::BTreeMap;

use anthroscore::analytics;
use anthroscore::backend::{fill_mask_pronouns, score_sentences, FillMaskBackend, StubBackend, StubMode, REFERENCE_MODEL};
use anthroscore::pipeline::{self, Document, EntityLexicon, PipelineConfig};
use anthroscore::scoring::{self, GrammaticalRole, DEFAULT_EPSILON};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn err(e: anthroscore::Error) -> PyErr {
    match e {
        anthroscore::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "PronounInventory", module = "pyanthroscore", frozen, from_py_object)]
#[derive(Clone)]
struct PyInventory {
    inner: scoring::PronounInventory,
}

#[pymethods]
impl PyInventory {
    #[new]
    fn new(human: Vec<String>, non_human: Vec<String>) -> PyResult<Self> {
        scoring::PronounInventory::new(human, non_human).map(|inner| PyInventory { inner }).map_err(err)
    }

    /// Seven human and four non-human forms.
    #[staticmethod]
    fn reference() -> Self {
        PyInventory { inner: scoring::PronounInventory::reference() }
    }

    #[getter]
    fn human(&self) -> Vec<String> {
        self.inner.human().to_vec()
    }

    #[getter]
    fn non_human(&self) -> Vec<String> {
        self.inner.non_human().to_vec()
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn without(&self, pronoun: &str) -> PyResult<Self> {
        self.inner.without(pronoun).map(|inner| PyInventory { inner }).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PronounInventory(human={:?}, non_human={:?})", self.inner.human(), self.inner.non_human())
    }
}

fn inventory_or_reference(inv: Option<&PyInventory>) -> scoring::PronounInventory {
    inv.map_or_else(scoring::PronounInventory::reference, |i| i.inner.clone())
}

#[pyclass(name = "MaskedSentence", module = "pyanthroscore", frozen, get_all, from_py_object)]
#[derive(Clone)]
struct PyMasked {
    doc_id: String,
    sentence_index: usize,
    original_sentence: String,
    masked_sentence: String,
    entity_surface: String,
    entity_keyword: String,
    span: (usize, usize),
    role: String,
    verb_lemma: Option<String>,
    lexicon: String,
}

impl PyMasked {
    fn from_core(s: &scoring::MaskedSentence, lexicon: &str) -> Self {
        PyMasked {
            doc_id: s.doc_id.clone(),
            sentence_index: s.sentence_index,
            original_sentence: s.original_sentence.clone(),
            masked_sentence: s.masked_sentence.clone(),
            entity_surface: s.entity_surface.clone(),
            entity_keyword: s.entity_keyword.clone(),
            span: (s.span.start, s.span.end),
            role: match s.grammatical_role {
                GrammaticalRole::Subject => "subject",
                GrammaticalRole::Object => "object",
                GrammaticalRole::Unknown => "unknown",
            }
            .to_string(),
            verb_lemma: s.verb_lemma.clone(),
            lexicon: lexicon.to_string(),
        }
    }

    fn to_core(&self) -> PyResult<scoring::MaskedSentence> {
        let role = match self.role.as_str() {
            "subject" => GrammaticalRole::Subject,
            "object" => GrammaticalRole::Object,
            "unknown" => GrammaticalRole::Unknown,
            other => return Err(PyValueError::new_err(format!("unknown role {other:?}"))),
        };
        scoring::MaskedSentence::new(
            self.doc_id.clone(),
            self.sentence_index,
            self.original_sentence.clone(),
            scoring::Span::new(self.span.0, self.span.1),
            self.entity_keyword.clone(),
            role,
            self.verb_lemma.clone(),
        )
        .map_err(err)
    }
}

#[pymethods]
impl PyMasked {
    /// The original sentence rebuilt from the masked text.
    fn reconstruct(&self) -> String {
        self.masked_sentence.replacen(scoring::PLACEHOLDER, &self.entity_surface, 1)
    }

    fn __repr__(&self) -> String {
        format!("MaskedSentence({:?}, entity={:?})", self.masked_sentence, self.entity_surface)
    }
}

#[pyclass(name = "StubBackend", module = "pyanthroscore", frozen)]
struct PyStub {
    inner: StubBackend,
}

#[pymethods]
impl PyStub {
    /// `mode` is a stub description in JSON, e.g. `{"mode": "uniform"}`.
    #[new]
    #[pyo3(signature = (mode = None, model_id = REFERENCE_MODEL.to_string()))]
    fn new(mode: Option<&str>, model_id: String) -> PyResult<Self> {
        let inner = match mode {
            None => StubBackend::uniform(model_id),
            Some(json) => {
                let mode: StubMode =
                    serde_json::from_str(json).map_err(|e| PyValueError::new_err(format!("stub mode: {e}")))?;
                StubBackend::new(model_id, mode)
            }
        };
        Ok(PyStub { inner })
    }

    #[getter]
    fn model_id(&self) -> String {
        self.inner.descriptor().model_id.clone()
    }

    #[pyo3(signature = (masked_sentence, inventory = None))]
    fn fill_mask(&self, masked_sentence: &str, inventory: Option<&PyInventory>) -> PyResult<BTreeMap<String, f64>> {
        let inv = inventory_or_reference(inventory);
        fill_mask_pronouns(masked_sentence, &inv, &self.inner).map(|d| d.probabilities).map_err(err)
    }

    /// Scores masked sentences; failures come back as `None`.
    #[pyo3(signature = (sentences, inventory = None, epsilon = DEFAULT_EPSILON))]
    fn score(&self, sentences: Vec<PyMasked>, inventory: Option<&PyInventory>, epsilon: f64) -> PyResult<Vec<Option<f64>>> {
        let inv = inventory_or_reference(inventory);
        let core = sentences.iter().map(PyMasked::to_core).collect::<PyResult<Vec<_>>>()?;
        Ok(score_sentences(core, &inv, &self.inner, epsilon).into_iter().map(|r| r.ok().map(|s| s.score_a)).collect())
    }
}

/// ln(P_human / P_non_human) for one distribution over pronouns.
#[pyfunction(name = "anthroscore")]
#[pyo3(signature = (probabilities, inventory = None, epsilon = DEFAULT_EPSILON))]
fn score_distribution(probabilities: BTreeMap<String, f64>, inventory: Option<&PyInventory>, epsilon: f64) -> PyResult<f64> {
    let inv = inventory_or_reference(inventory);
    let (h, n) = scoring::smoothed_sums(&probabilities, &inv, epsilon).map_err(err)?;
    scoring::log_ratio(h, n).map_err(err)
}

#[pyfunction]
fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    pipeline::split_sentences(text).into_iter().map(|s| (s.start, s.end)).collect()
}

fn lexicon(arg: &str) -> PyResult<EntityLexicon> {
    EntityLexicon::bundled(arg).map_err(err)
}

/// Masked mentions of one text, one record per matched noun chunk.
#[pyfunction]
#[pyo3(signature = (text, doc_id = "doc".to_string(), lexicons = vec!["artifact".to_string()], keywords = None))]
fn mask_mentions(text: String, doc_id: String, lexicons: Vec<String>, keywords: Option<Vec<String>>) -> PyResult<Vec<PyMasked>> {
    let mut lexes = lexicons.iter().map(|s| lexicon(s)).collect::<PyResult<Vec<_>>>()?;
    if let Some(k) = keywords {
        lexes.push(EntityLexicon::new("custom", k, true).map_err(err)?);
    }
    let doc = Document::new(doc_id, text);
    let cfg = PipelineConfig::new(lexes);
    let (mentions, _issues) = pipeline::process_document(&doc, &cfg, None);
    Ok(mentions.iter().map(|m| PyMasked::from_core(&m.sentence, &m.lexicon)).collect())
}

/// Weighted log-odds with an informative prior: (word, delta, variance, z), by z descending.
#[pyfunction]
#[pyo3(signature = (counts_a, counts_b, prior, smoothing = analytics::logodds::DEFAULT_SMOOTHING))]
fn fightin_words(
    counts_a: BTreeMap<String, u64>,
    counts_b: BTreeMap<String, u64>,
    prior: BTreeMap<String, u64>,
    smoothing: f64,
) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let out = analytics::fightin_words(&counts_a, &counts_b, &prior, smoothing).map_err(err)?;
    Ok(out.into_iter().map(|r| (r.word, r.delta, r.variance, r.z)).collect())
}

/// Spearman (r, p); `permutation=True` gives the exact p for n <= 10.
#[pyfunction]
#[pyo3(signature = (x, y, permutation = false))]
fn spearman(x: Vec<f64>, y: Vec<f64>, permutation: bool) -> PyResult<(f64, f64)> {
    let c = if permutation { analytics::spearman_permutation(&x, &y) } else { analytics::spearman(&x, &y) };
    c.map(|c| (c.r, c.p)).map_err(err)
}

#[pyfunction]
fn chi_square_2x2(table: [[u64; 2]; 2]) -> PyResult<(f64, f64)> {
    analytics::chi_square_2x2(table).map(|c| (c.chi2, c.p)).map_err(err)
}

/// Percentile bootstrap interval of the mean.
#[pyfunction]
#[pyo3(signature = (values, n_boot = 1000, seed = 0))]
fn bootstrap_ci(values: Vec<f64>, n_boot: usize, seed: u64) -> PyResult<(f64, f64)> {
    analytics::bootstrap_ci(&values, n_boot, seed).map_err(err)
}

#[pymodule]
fn pyanthroscore(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInventory>()?;
    m.add_class::<PyMasked>()?;
    m.add_class::<PyStub>()?;
    m.add_function(wrap_pyfunction!(score_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(split_sentences, m)?)?;
    m.add_function(wrap_pyfunction!(mask_mentions, m)?)?;
    m.add_function(wrap_pyfunction!(fightin_words, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_2x2, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_ci, m)?)?;
    m.add("PLACEHOLDER", scoring::PLACEHOLDER)?;
    Ok(())
}
