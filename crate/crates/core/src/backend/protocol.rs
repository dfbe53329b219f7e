//! JSON bodies of the `POST {endpoint}/fill-mask` protocol.
//!
//! Request: `{"model": ..., "text": ..., "targets": [...]}` where `text`
//! carries the model's mask token inline. A 200 reply carries
//! `{"model", "probabilities", "resolved_variants"}`; a 422 reply carries
//! `{"error": "mask_tokenization"}` when the mask is not exactly one token.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const FILL_MASK_PATH: &str = "/fill-mask";
pub const MASK_TOKENIZATION_ERROR: &str = "mask_tokenization";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillMaskRequest {
    pub model: String,
    pub text: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillMaskResponse {
    pub model: String,
    pub probabilities: BTreeMap<String, f64>,
    #[serde(default)]
    pub resolved_variants: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}
