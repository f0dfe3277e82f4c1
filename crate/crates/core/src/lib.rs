//! Context-aware ontology alignment.
//!
//! The pipeline parses two ontologies, extracts a four-facet context for each
//! concept (lineage paths, children, object-property and datatype-property
//! neighbours), embeds labels, and scores candidate pairs with a Siamese
//! dual-attention model trained from a reference alignment.
//!
//! Modules, bottom up:
//! - [`onto_io`]: RDF/XML ontology and OAEI alignment parsing.
//! - [`context`]: per-concept context extraction.
//! - [`embed`]: label tokenization and the embedding store.
//! - [`model`]: forward pass, loss and analytic gradients.
//! - [`train`]: dataset construction, oversampling, Adam training, thresholds.
//! - [`eval`]: fold planning, metrics and experiment driver.
//! - [`cli`]: configuration and command implementations.

pub mod cli;
pub mod context;
pub mod embed;
mod error;
pub mod eval;
pub mod model;
pub mod onto_io;
pub mod train;

pub use error::{Error, Result};
