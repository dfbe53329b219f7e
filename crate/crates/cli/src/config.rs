//! Run configuration: an optional TOML file overridden by command-line flags.

use std::path::{Path, PathBuf};

use anthroscore::analytics::Thresholds;
use anthroscore::backend::{BackendDescriptor, BackendKind, StubMode, REFERENCE_MASK_TOKEN, REFERENCE_MODEL};
use anthroscore::pipeline::lexicon::{self, bundled_inventory, load_inventory};
use anthroscore::pipeline::{AnalysisSource, EntityLexicon};
use anthroscore::scoring::{PronounInventory, DEFAULT_EPSILON};
use clap::Args;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    lexicon: Option<OneOrMany>,
    inventory: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    analysis: Option<String>,
    parses: Option<PathBuf>,
    n_boot: Option<usize>,
    epsilon: Option<f64>,
    lm_keywords: Option<PathBuf>,
    dedup: Option<bool>,
    #[serde(default)]
    backend: BackendSection,
    #[serde(default)]
    thresholds: ThresholdSection,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackendSection {
    kind: Option<String>,
    model_id: Option<String>,
    endpoint: Option<String>,
    mask_token: Option<String>,
    stub_file: Option<PathBuf>,
    cache: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdSection {
    hi: Option<f64>,
    lo: Option<f64>,
    prior_band: Option<f64>,
}

/// Flags shared by the corpus subcommands; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Corpus JSONL, one document per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Bundled lexicon name (artifact, lm, human) or a keyword file; repeatable.
    #[arg(long = "lexicon")]
    pub lexicons: Vec<String>,
    /// Pronoun inventory JSON ({"human": [...], "non_human": [...]}).
    #[arg(long)]
    pub inventory: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// builtin_rules or conllu.
    #[arg(long)]
    pub analysis: Option<String>,
    /// Manifest JSONL mapping (doc_id, sentence_index) to CoNLL-U sentences.
    #[arg(long)]
    pub parses: Option<PathBuf>,
    /// Backend kind: stub, remote or cached (cache only).
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub mask_token: Option<String>,
    /// Stub behaviour as JSON (see `StubMode`); uniform when absent.
    #[arg(long)]
    pub stub_file: Option<PathBuf>,
    /// Persistent distribution cache file.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub prior_band: Option<f64>,
    /// Bootstrap resamples for confidence intervals.
    #[arg(long)]
    pub n_boot: Option<usize>,
    /// Keep exact duplicate masked sentences.
    #[arg(long)]
    pub no_dedup: bool,
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub descriptor: BackendDescriptor,
    pub stub_mode: StubMode,
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub lexicons: Vec<EntityLexicon>,
    pub inventory: PronounInventory,
    pub backend: BackendConfig,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub analysis: AnalysisSource,
    pub parses: Option<PathBuf>,
    pub n_boot: usize,
    pub epsilon: f64,
    pub lm_keywords: Vec<String>,
    pub dedup: bool,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{field}: {msg}"))
}

fn rebase(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn resolve_lexicon(arg: &str) -> Result<EntityLexicon, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg).to_string();
        EntityLexicon::from_file(name, path, true).map_err(|e| field_err("lexicon", e))
    } else {
        EntityLexicon::bundled(arg).map_err(|e| field_err("lexicon", format!("{e} (and no file {arg:?})")))
    }
}

impl RunConfig {
    pub fn load(args: &CommonArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| field_err("config", format!("cannot read {}: {e}", path.display())))?;
                let parsed: FileConfig = toml::from_str(&text)
                    .map_err(|e| field_err("config", format!("{}: {e}", path.display())))?;
                (parsed, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let fpath = |p: Option<PathBuf>| p.map(|p| rebase(&base, p));

        let corpus = args.corpus.clone().or(fpath(file.corpus));
        let lexicon_specs: Vec<String> = if !args.lexicons.is_empty() {
            args.lexicons.clone()
        } else {
            match file.lexicon {
                Some(OneOrMany::One(s)) => vec![s],
                Some(OneOrMany::Many(v)) => v,
                None => vec!["artifact".into()],
            }
            .into_iter()
            .map(|s| {
                let p = rebase(&base, PathBuf::from(&s));
                if p.is_file() { p.to_string_lossy().into_owned() } else { s }
            })
            .collect()
        };
        if lexicon_specs.is_empty() {
            return Err(field_err("lexicon", "at least one lexicon is required"));
        }
        let lexicons = lexicon_specs.iter().map(|s| resolve_lexicon(s)).collect::<Result<Vec<_>, _>>()?;

        let inventory = match args.inventory.clone().or(fpath(file.inventory)) {
            Some(p) => load_inventory(&p).map_err(|e| field_err("inventory", format!("{}: {e}", p.display())))?,
            None => bundled_inventory(),
        };

        let kind = match args.backend.clone().or(file.backend.kind).as_deref() {
            None | Some("stub") => BackendKind::Stub,
            Some("remote") => BackendKind::Remote,
            Some("cached") => BackendKind::Cached,
            Some(other) => return Err(field_err("backend.kind", format!("unknown kind {other:?} (stub, remote, cached)"))),
        };
        let model_id = args.model.clone().or(file.backend.model_id).unwrap_or_else(|| REFERENCE_MODEL.into());
        let endpoint = args.endpoint.clone().or(file.backend.endpoint);
        let mask_token = args.mask_token.clone().or(file.backend.mask_token).unwrap_or_else(|| REFERENCE_MASK_TOKEN.into());
        let descriptor = BackendDescriptor { kind, model_id, endpoint, mask_token };
        if kind == BackendKind::Remote && descriptor.endpoint.is_none() {
            return Err(field_err("backend.endpoint", "required for the remote backend"));
        }
        descriptor.validate().map_err(|e| field_err("backend", e))?;
        let stub_mode = match args.stub_file.clone().or(fpath(file.backend.stub_file)) {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| field_err("backend.stub_file", format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| field_err("backend.stub_file", format!("{}: {e}", p.display())))?
            }
            None => StubMode::Uniform { probability: anthroscore::backend::stub::DEFAULT_UNIFORM_PROBABILITY },
        };
        let cache = args.cache.clone().or(fpath(file.backend.cache));
        if kind == BackendKind::Cached && cache.is_none() {
            return Err(field_err("backend.cache", "required for the cached backend"));
        }

        let hi = args.hi.or(file.thresholds.hi).unwrap_or(anthroscore::scoring::DEFAULT_HI);
        let lo = args.lo.or(file.thresholds.lo);
        let prior_band = args
            .prior_band
            .or(file.thresholds.prior_band)
            .unwrap_or(anthroscore::analytics::DEFAULT_PRIOR_BAND);
        let thresholds = Thresholds::new(hi, lo, prior_band).map_err(|e| field_err("thresholds", e))?;

        let analysis = match args.analysis.clone().or(file.analysis) {
            Some(s) => s.parse().map_err(|e| field_err("analysis", e))?,
            None => AnalysisSource::BuiltinRules,
        };
        let parses = args.parses.clone().or(fpath(file.parses));
        if analysis == AnalysisSource::Conllu && parses.is_none() {
            return Err(field_err("parses", "a CoNLL-U manifest is required when analysis = conllu"));
        }
        let epsilon = file.epsilon.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon >= 0.0) {
            return Err(field_err("epsilon", "must be non-negative"));
        }
        let lm_keywords = match fpath(file.lm_keywords) {
            Some(p) => lexicon::parse_word_list(
                &std::fs::read_to_string(&p).map_err(|e| field_err("lm_keywords", format!("{}: {e}", p.display())))?,
            ),
            None => lexicon::bundled_lm_keywords(),
        };

        Ok(RunConfig {
            corpus,
            lexicons,
            inventory,
            backend: BackendConfig { descriptor, stub_mode, cache },
            thresholds,
            seed: args.seed.or(file.seed).unwrap_or(0),
            output_dir: args.output_dir.clone().or(fpath(file.output_dir)).unwrap_or_else(|| PathBuf::from("anthroscore-out")),
            workers: args.workers.or(file.workers).unwrap_or(0),
            analysis,
            parses,
            n_boot: args.n_boot.or(file.n_boot).unwrap_or(anthroscore::analytics::grouped::DEFAULT_BOOTSTRAP),
            epsilon,
            lm_keywords,
            dedup: !args.no_dedup && file.dedup.unwrap_or(true),
        })
    }

    pub fn corpus(&self) -> Result<&Path, CliError> {
        self.corpus.as_deref().ok_or_else(|| field_err("corpus", "no corpus given (--corpus or `corpus` in the config)"))
    }

    /// `output_dir/name`, or `explicit` when given.
    pub fn input_or_default(&self, explicit: Option<&Path>, name: &str) -> PathBuf {
        explicit.map(Path::to_path_buf).unwrap_or_else(|| self.output_dir.join(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file() {
        let cfg = RunConfig::load(&CommonArgs::default()).unwrap();
        assert_eq!(cfg.lexicons[0].name, "artifact");
        assert_eq!(cfg.backend.descriptor.kind, BackendKind::Stub);
        assert_eq!(cfg.thresholds.lo, -1.0);
        assert_eq!(cfg.n_boot, 1000);
        assert!(cfg.dedup);
    }

    #[test]
    fn file_values_and_flag_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "corpus = \"c.jsonl\"\nseed = 7\nlexicon = [\"artifact\", \"lm\"]\n[thresholds]\nhi = 2.0\nprior_band = 0.7\n",
        )
        .unwrap();
        let mut args = CommonArgs { config: Some(path), ..Default::default() };
        let cfg = RunConfig::load(&args).unwrap();
        assert_eq!(cfg.corpus.unwrap(), dir.path().join("c.jsonl"));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.lexicons.len(), 2);
        assert_eq!((cfg.thresholds.hi, cfg.thresholds.lo), (2.0, -2.0));
        args.seed = Some(9);
        args.hi = Some(3.0);
        let cfg = RunConfig::load(&args).unwrap();
        assert_eq!((cfg.seed, cfg.thresholds.hi), (9, 3.0));
    }

    #[test]
    fn errors_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "[thresholds]\nhi = 0.2\nprior_band = 0.5\n").unwrap();
        let err = RunConfig::load(&CommonArgs { config: Some(path.clone()), ..Default::default() }).unwrap_err();
        assert!(err.message.starts_with("thresholds"), "{}", err.message);
        std::fs::write(&path, "colour = 1\n").unwrap();
        let err = RunConfig::load(&CommonArgs { config: Some(path), ..Default::default() }).unwrap_err();
        assert!(err.message.contains("colour"), "{}", err.message);
        let err = RunConfig::load(&CommonArgs { backend: Some("remote".into()), ..Default::default() }).unwrap_err();
        assert!(err.message.starts_with("backend.endpoint"), "{}", err.message);
    }
}
