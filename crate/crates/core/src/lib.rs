//! Batch analytics for detecting topical convergence between communities of a
//! follow network.
//!
//! The pipeline maps follow-graph communities ([`netmap`]), fits a topic model
//! over account-week documents ([`topicmodel`]), scores topical bridges with
//! bridging centrality ([`bridge`]) and tracks the Jensen-Shannon divergence
//! between community topic mixtures over time ([`converge`]). [`synth`] holds
//! generators with planted ground truth and brute-force oracles, and
//! [`pipeline`] wires the stages together behind a single config file.

pub mod bridge;
pub mod converge;
pub mod error;
pub mod ingest;
pub mod netmap;
pub mod pipeline;
pub mod synth;
pub mod topicmodel;

pub use error::{Error, Result};
