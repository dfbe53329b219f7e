//! HTTP client for the fill-mask protocol.

use std::time::Duration;

use log::warn;

use super::protocol::{
    ErrorResponse, FillMaskRequest, FillMaskResponse, FILL_MASK_PATH, MASK_TOKENIZATION_ERROR,
};
use super::{BackendDescriptor, BackendKind, FillMaskBackend, PronounDistribution};
use crate::error::{Error, Result};
use crate::scoring::PronounInventory;

/// Environment variable holding a bearer token sent to the endpoint.
pub const TOKEN_ENV: &str = "ANTHROSCORE_ENDPOINT_TOKEN";

pub const BATCH_SIZE: usize = 32;
pub const MAX_ATTEMPTS: u32 = 3;

pub struct RemoteBackend {
    descriptor: BackendDescriptor,
    agent: ureq::Agent,
    url: String,
    token: Option<String>,
    initial_backoff: Duration,
}

enum Failure {
    Retryable(Error),
    Fatal(Error),
}

impl RemoteBackend {
    pub fn new(descriptor: BackendDescriptor) -> Result<Self> {
        descriptor.validate()?;
        if descriptor.kind != BackendKind::Remote {
            return Err(Error::InvalidDescriptor("descriptor kind must be remote".into()));
        }
        let endpoint = descriptor.endpoint.as_deref().unwrap_or_default().trim_end_matches('/');
        let url = format!("{endpoint}{FILL_MASK_PATH}");
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Ok(RemoteBackend {
            descriptor,
            agent,
            url,
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            initial_backoff: Duration::from_millis(200),
        })
    }

    pub fn with_initial_backoff(mut self, backoff: Duration) -> Self {
        self.initial_backoff = backoff;
        self
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token;
        self
    }

    fn attempt(&self, request: &FillMaskRequest) -> std::result::Result<FillMaskResponse, Failure> {
        let mut builder = self.agent.post(&self.url);
        if let Some(token) = &self.token {
            builder = builder.header("Authorization", format!("Bearer {token}"));
        }
        let mut response = builder
            .send_json(request)
            .map_err(|e| Failure::Retryable(Error::BackendUnreachable(e.to_string())))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Retryable(Error::BackendUnreachable(e.to_string())))?;
        match status {
            200 => serde_json::from_str(&body)
                .map_err(|e| Failure::Fatal(Error::BackendProtocol(format!("bad reply: {e}")))),
            422 => {
                let err: Option<ErrorResponse> = serde_json::from_str(&body).ok();
                match err {
                    Some(e) if e.error == MASK_TOKENIZATION_ERROR => Err(Failure::Fatal(
                        Error::MaskTokenization(e.detail.unwrap_or_else(|| request.text.clone())),
                    )),
                    _ => Err(Failure::Fatal(Error::BackendProtocol(format!("422: {body}")))),
                }
            }
            500..=599 => Err(Failure::Retryable(Error::BackendUnreachable(format!(
                "HTTP {status}: {body}"
            )))),
            _ => Err(Failure::Fatal(Error::BackendProtocol(format!("HTTP {status}: {body}")))),
        }
    }
}

impl FillMaskBackend for RemoteBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn fill_mask(
        &self,
        masked_sentence: &str,
        inventory: &PronounInventory,
    ) -> Result<PronounDistribution> {
        let request = FillMaskRequest {
            model: self.descriptor.model_id.clone(),
            text: self.descriptor.render(masked_sentence),
            targets: inventory.all().map(str::to_string).collect(),
        };
        let mut backoff = self.initial_backoff;
        let mut attempt = 1;
        let response = loop {
            match self.attempt(&request) {
                Ok(r) => break r,
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e)) if attempt >= MAX_ATTEMPTS => return Err(e),
                Err(Failure::Retryable(e)) => {
                    warn!("fill-mask attempt {attempt} failed ({e}); retrying in {backoff:?}");
                    std::thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
            }
        };
        if response.model != self.descriptor.model_id {
            return Err(Error::BackendProtocol(format!(
                "asked for model {:?}, reply is from {:?}",
                self.descriptor.model_id, response.model
            )));
        }
        Ok(PronounDistribution {
            probabilities: response.probabilities,
            model_id: response.model,
            resolved_variants: response.resolved_variants,
        })
    }

    /// Sends up to [`BATCH_SIZE`] requests concurrently per batch.
    fn fill_mask_batch(
        &self,
        masked_sentences: &[&str],
        inventory: &PronounInventory,
    ) -> Vec<Result<PronounDistribution>> {
        let mut out = Vec::with_capacity(masked_sentences.len());
        for chunk in masked_sentences.chunks(BATCH_SIZE) {
            let replies: Vec<Result<PronounDistribution>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|s| scope.spawn(move || self.fill_mask(s, inventory)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join().unwrap_or_else(|_| {
                            Err(Error::BackendUnreachable("request thread panicked".into()))
                        })
                    })
                    .collect()
            });
            out.extend(replies);
        }
        out
    }
}
