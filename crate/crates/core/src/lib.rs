//! Provenance engine for AI-generated image detection.
//!
//! Images are embedded into fixed-dimension vectors and classified by their
//! nearest cosine neighbor in a labeled AI collection versus a labeled human
//! collection. Embedding digests are registered in append-only chained
//! ledgers so a classification can be checked for an exact prior record.

pub mod classifier;
pub mod interchange;
pub mod perturb;
pub mod pipeline;
pub mod ledger;
pub mod vecstore;
