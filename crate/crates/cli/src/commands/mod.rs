pub mod ablate;
pub mod analyze;
pub mod freq;
pub mod score;

use anthroscore::backend::{
    BackendKind, CachedBackend, FillMaskBackend, PersistentCache, RemoteBackend, StubBackend,
};

use crate::config::RunConfig;
use crate::CliError;

/// Builds the configured backend, wrapped in the persistent cache when one is set.
pub fn build_backend(cfg: &RunConfig) -> Result<Box<dyn FillMaskBackend>, CliError> {
    let d = &cfg.backend.descriptor;
    let open_cache = |path: &std::path::Path| {
        let cache = PersistentCache::open(path).map_err(|e| CliError::io(path, e))?;
        let report = cache.load_report();
        if report.corrupt > 0 || report.truncated_bytes > 0 {
            log::warn!(
                "cache {}: skipped {} corrupt records, truncated {} bytes",
                path.display(),
                report.corrupt,
                report.truncated_bytes
            );
        }
        Ok::<_, CliError>(cache)
    };
    let inner: Box<dyn FillMaskBackend> = match d.kind {
        BackendKind::Stub => Box::new(
            StubBackend::new(d.model_id.clone(), cfg.backend.stub_mode.clone()).with_mask_token(d.mask_token.clone()),
        ),
        BackendKind::Remote => Box::new(RemoteBackend::new(d.clone())?),
        BackendKind::Cached => {
            let path = cfg.backend.cache.as_deref().expect("validated in config");
            return Ok(Box::new(CachedBackend::offline(&d.model_id, &d.mask_token, open_cache(path)?)));
        }
    };
    match &cfg.backend.cache {
        Some(path) => Ok(Box::new(CachedBackend::new(inner, open_cache(path)?))),
        None => Ok(inner),
    }
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("workers: {e}")))
}
