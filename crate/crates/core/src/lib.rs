//! Cluster-based document retrieval.
//!
//! Collections are parsed and normalized ([`corpus`]), weighted as TF-IDF
//! vectors ([`vsm`]), partitioned with cosine k-means ([`kmeans`]) and
//! searched with a multi-deme genetic algorithm over the clusters closest to
//! the query ([`hpga`]). [`evalkit`] holds the baselines and the
//! precision/recall harness, [`cli`] the staged command-line driver.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod hpga;
pub mod kmeans;
pub mod vsm;

pub use error::{Error, Result};
