//! Measuring implicit anthropomorphism of entities in text with a masked
//! language model, plus the corpus statistics built on top of the scores.

pub mod analytics;
pub mod backend;
pub mod error;
pub mod pipeline;
pub mod scoring;

pub use error::{Error, Result};
