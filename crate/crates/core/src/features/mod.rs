//! Feature extraction: tokenization, sparse count features, static and
//! contextual embeddings, and training-set rebalancing.

pub mod balance;
pub mod cache;
pub mod embed;
pub mod encoder;
pub mod matrix;
pub mod text;
pub mod vocab;

pub use balance::{balance, interpolate, BalanceConfig, Balanced, SyntheticSample};
pub use cache::{corpus_hash, FeatureCache};
pub use embed::{embed_mean, EmbeddingTable};
pub use encoder::{
    contextual_encode, load_encoder, Encoder, EncoderHandle, EncoderMode, HashEncoder, PrecomputedEncoder,
};
pub use matrix::{FeatureMatrix, Row, SequenceBatch};
pub use text::{preprocess, TokenizedDoc};
pub use vocab::{bow_binary, fit_vocabulary, tfidf, Vocabulary};
