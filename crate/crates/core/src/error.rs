use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pronoun inventory is invalid: {0}")]
    InvalidInventory(String),

    #[error("distribution has no entry for pronoun {0:?}")]
    MissingPronoun(String),

    #[error("zero probability mass (p_human = {p_human}, p_non_human = {p_non_human})")]
    ZeroProbabilityMass { p_human: f64, p_non_human: f64 },

    #[error("probability for {pronoun:?} is not a valid probability: {value}")]
    InvalidProbability { pronoun: String, value: f64 },

    #[error("cannot average an empty collection")]
    EmptyCollection,

    #[error("invalid thresholds: hi ({hi}) must be greater than lo ({lo})")]
    InvalidThresholds { hi: f64, lo: f64 },

    #[error("masked sentence is invalid: {0}")]
    InvalidMaskedSentence(String),

    #[error("mask overlaps an existing mask at {start}..{end}")]
    OverlappingMask { start: usize, end: usize },

    #[error("backend descriptor is invalid: {0}")]
    InvalidDescriptor(String),

    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),

    #[error("mask does not occupy exactly one token position: {0}")]
    MaskTokenization(String),

    #[error("pronoun {0:?} has no vocabulary variant")]
    VocabularyMiss(String),

    #[error("backend protocol violation: {0}")]
    BackendProtocol(String),

    #[error("stub table has no entry for {0:?}")]
    StubMiss(String),

    #[error("no cached distribution for {0:?}")]
    CacheMiss(String),

    #[error("CoNLL-U parse error at line {line}: {message}")]
    ConlluParse { line: usize, message: String },

    #[error("lexicon is invalid: {0}")]
    InvalidLexicon(String),

    #[error("document is invalid: {0}")]
    InvalidDocument(String),

    #[error("group {0:?} is empty")]
    EmptyGroup(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("contingency table has a zero marginal")]
    ZeroMarginal,

    #[error("corpus has zero total count")]
    EmptyCorpus,

    #[error("pronoun {0:?} is not in the inventory")]
    UnknownPronoun(String),

    #[error("removing {0:?} would leave its pronoun list empty")]
    LastPronoun(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
