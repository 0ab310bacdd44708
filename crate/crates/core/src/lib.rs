//! Building blocks for detecting COVID-19 misinformation in Indonesian tweets.
//!
//! * [`corpus`]: loading, keyword filtering, n-grams, sampling, stratified splits
//! * [`annotation`]: guideline records, adjudication, Cohen's kappa, label tables
//! * [`features`]: tokenization, BoW / TF-IDF, embeddings, SMOTE balancing
//! * [`models`]: a uniform interface over traditional and neural classifiers
//! * [`eval`]: metrics, single and two-stage experiments, k-fold and t-tests

pub mod annotation;
pub mod corpus;
mod error;
pub mod eval;
pub mod features;
pub mod models;

pub use error::{Error, Result};
