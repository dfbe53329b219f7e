//! Persistent read-through cache of pronoun distributions.
//!
//! The store is an append-only log. Each record is a little-endian `u32`
//! byte length followed by that many bytes of JSON
//! `{"key": .., "value": .., "checksum": ..}`, where `checksum` is the hex
//! SHA-256 of the JSON encoding of `[key, value]`. Records failing the
//! checksum are skipped with a warning; a truncated tail left by an
//! interrupted write is cut off when the log is opened.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendDescriptor, BackendKind, FillMaskBackend, PronounDistribution};
use crate::error::{Error, Result};
use crate::scoring::PronounInventory;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub model_id: String,
    pub masked_sentence: String,
    pub inventory_fingerprint: String,
}

impl CacheKey {
    pub fn new(model_id: &str, masked_sentence: &str, inventory: &PronounInventory) -> Self {
        CacheKey {
            model_id: model_id.to_string(),
            masked_sentence: masked_sentence.to_string(),
            inventory_fingerprint: inventory.fingerprint(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.model_id.is_empty()
            || self.masked_sentence.is_empty()
            || self.inventory_fingerprint.is_empty()
        {
            return Err(Error::InvalidDescriptor("cache key has an empty component".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: CacheKey,
    value: PronounDistribution,
    checksum: String,
}

fn checksum(key: &CacheKey, value: &PronounDistribution) -> Result<String> {
    let bytes = serde_json::to_vec(&(key, value))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub corrupt: usize,
    pub truncated_bytes: u64,
}

pub struct PersistentCache {
    path: PathBuf,
    index: RwLock<HashMap<CacheKey, PronounDistribution>>,
    log: Mutex<File>,
    report: LoadReport,
}

impl PersistentCache {
    /// Opens (creating if needed) the log at `path` and loads its index.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(&path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;

        let mut index = HashMap::new();
        let mut report = LoadReport::default();
        let mut offset = 0usize;
        while offset < bytes.len() {
            if bytes.len() - offset < 4 {
                break;
            }
            let len = u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap()) as usize;
            if bytes.len() - offset - 4 < len {
                break;
            }
            let payload = &bytes[offset + 4..offset + 4 + len];
            offset += 4 + len;
            match serde_json::from_slice::<Record>(payload) {
                Ok(rec) if checksum(&rec.key, &rec.value).ok().as_deref() == Some(&rec.checksum) => {
                    index.insert(rec.key, rec.value);
                    report.records += 1;
                }
                _ => {
                    report.corrupt += 1;
                    warn!("{}: skipping corrupt cache record", path.display());
                }
            }
        }
        if offset < bytes.len() {
            report.truncated_bytes = (bytes.len() - offset) as u64;
            warn!(
                "{}: dropping {} bytes of truncated cache record",
                path.display(),
                report.truncated_bytes
            );
            file.set_len(offset as u64)?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok(PersistentCache { path, index: RwLock::new(index), log: Mutex::new(file), report })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load_report(&self) -> LoadReport {
        self.report
    }

    pub fn len(&self) -> usize {
        self.index.read().expect("cache index lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<PronounDistribution> {
        self.index.read().expect("cache index lock").get(key).cloned()
    }

    /// Appends the record and makes it visible to readers once written.
    pub fn put(&self, key: CacheKey, value: PronounDistribution) -> Result<()> {
        key.validate()?;
        let sum = checksum(&key, &value)?;
        let record = Record { key, value, checksum: sum };
        let payload = serde_json::to_vec(&record)?;
        let len = u32::try_from(payload.len())
            .map_err(|_| Error::InvalidDescriptor("cache record exceeds 4 GiB".into()))?;
        let mut buf = Vec::with_capacity(payload.len() + 4);
        buf.extend_from_slice(&len.to_le_bytes());
        buf.extend_from_slice(&payload);
        let mut log = self.log.lock().expect("cache log lock");
        log.write_all(&buf)?;
        log.flush()?;
        let Record { key, value, .. } = record;
        self.index.write().expect("cache index lock").insert(key, value);
        Ok(())
    }
}

/// Wraps a backend with a [`PersistentCache`]. Without an inner backend it
/// answers only from the cache.
pub struct CachedBackend<B> {
    inner: Option<B>,
    cache: PersistentCache,
    descriptor: BackendDescriptor,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: FillMaskBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: PersistentCache) -> Self {
        let descriptor = BackendDescriptor { kind: BackendKind::Cached, ..inner.descriptor().clone() };
        CachedBackend {
            inner: Some(inner),
            cache,
            descriptor,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn cache(&self) -> &PersistentCache {
        &self.cache
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

impl CachedBackend<super::StubBackend> {
    /// Cache-only lookup for `model_id`; any miss is an error.
    pub fn offline(model_id: &str, mask_token: &str, cache: PersistentCache) -> Self {
        CachedBackend {
            inner: None,
            cache,
            descriptor: BackendDescriptor {
                kind: BackendKind::Cached,
                model_id: model_id.to_string(),
                endpoint: None,
                mask_token: mask_token.to_string(),
            },
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }
}

impl<B: FillMaskBackend> FillMaskBackend for CachedBackend<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn fill_mask(
        &self,
        masked_sentence: &str,
        inventory: &PronounInventory,
    ) -> Result<PronounDistribution> {
        let key = CacheKey::new(&self.descriptor.model_id, masked_sentence, inventory);
        if let Some(hit) = self.cache.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let inner = self
            .inner
            .as_ref()
            .ok_or_else(|| Error::CacheMiss(masked_sentence.to_string()))?;
        let dist = inner.fill_mask(masked_sentence, inventory)?;
        dist.validate(inventory)?;
        self.cache.put(key, dist.clone())?;
        Ok(dist)
    }

    fn fill_mask_batch(
        &self,
        masked_sentences: &[&str],
        inventory: &PronounInventory,
    ) -> Vec<Result<PronounDistribution>> {
        let mut out: Vec<Option<Result<PronounDistribution>>> = Vec::new();
        let mut pending = Vec::new();
        for (i, s) in masked_sentences.iter().enumerate() {
            let key = CacheKey::new(&self.descriptor.model_id, s, inventory);
            match self.cache.get(&key) {
                Some(hit) => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    out.push(Some(Ok(hit)));
                }
                None => {
                    self.misses.fetch_add(1, Ordering::Relaxed);
                    out.push(None);
                    pending.push((i, key));
                }
            }
        }
        let texts: Vec<&str> = pending.iter().map(|(i, _)| masked_sentences[*i]).collect();
        let replies = match &self.inner {
            Some(inner) => inner.fill_mask_batch(&texts, inventory),
            None => texts.iter().map(|s| Err(Error::CacheMiss(s.to_string()))).collect(),
        };
        for ((i, key), reply) in pending.into_iter().zip(replies) {
            let stored = reply.and_then(|d| {
                d.validate(inventory)?;
                self.cache.put(key, d.clone())?;
                Ok(d)
            });
            out[i] = Some(stored);
        }
        out.into_iter().map(|r| r.expect("every slot filled")).collect()
    }
}
