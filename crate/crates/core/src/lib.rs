//! Robust sparse logistic regression and cellwise outlier diagnostics.
//!
//! The crate fits binary-response elastic-net models two ways: the classical
//! penalized maximum-likelihood estimator ([`enet::fit_enet_logistic`]) and a
//! trimmed, reweighted robust variant ([`lts::fit_enet_lts`]) that survives
//! label and leverage contamination. Around the estimators sit repeated
//! stratified cross-validation for picking the penalty ([`cv`]), a cellwise
//! outlier detector with cell-map rendering ([`ddc`]), and a small data
//! pipeline (CSV/TSV ingestion, clinical label derivation, correlation
//! networks, and a seeded synthetic-data generator) under [`pipeline`].
//!
//! Everything seeded is reproducible: the same inputs and seeds give
//! byte-identical outputs, also under internal parallelism.

pub mod cli;
pub mod cv;
pub mod dataset;
pub mod ddc;
pub mod enet;
pub mod error;
pub mod lts;
pub mod model;
pub mod pipeline;
pub mod stats;

pub use dataset::Dataset;
pub use error::{Error, Result};
