//! Stance detection and polarization analysis for social-media corpora.
//!
//! The pipeline runs bottom-up through these modules:
//!
//! - [`corpus`]: JSONL ingestion into an immutable [`corpus::Corpus`].
//! - [`hashtag_graph`]: hashtag co-occurrence graph and seeded label propagation.
//! - [`stance`]: per-user polarity and Believer / Disbeliever / Unclassified stance.
//! - [`commnet`]: retweet, mention, reply, all-communication and reciprocal networks.
//! - [`netmetrics`]: reciprocity, density, echo-chamberness, super spreaders and friends.
//! - [`textlab`]: tokenization, unigram frequencies and collapsed-Gibbs LDA.
//! - [`annotations`]: external bot scores and account types.

pub mod annotations;
pub mod commnet;
pub mod corpus;
mod error;
pub mod hashtag_graph;
pub mod netmetrics;
pub mod stance;
pub mod textlab;

pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
