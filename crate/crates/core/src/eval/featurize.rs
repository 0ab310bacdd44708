use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledTweet;
use crate::features::{
    bow_binary, contextual_encode, embed_mean, fit_vocabulary, load_encoder, tfidf, EmbeddingTable, EncoderHandle,
    FeatureMatrix, SequenceBatch, TokenizedDoc, Vocabulary,
};
use crate::models::{ClassifierSpec, FeatureKind, ModelInput};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    pub min_df: usize,
    /// Static embedding table, required by `static-embed`.
    pub embeddings: Option<PathBuf>,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            min_df: 1,
            embeddings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Matrix(FeatureMatrix),
    Sequences(SequenceBatch),
}

impl Features {
    pub fn input(&self) -> ModelInput<'_> {
        match self {
            Features::Matrix(m) => ModelInput::Matrix(m),
            Features::Sequences(s) => ModelInput::Sequences(s),
        }
    }

    pub fn len(&self) -> usize {
        self.input().n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Features {
        match self {
            Features::Matrix(m) => Features::Matrix(m.select_rows(rows)),
            Features::Sequences(s) => Features::Sequences(s.select(rows)),
        }
    }
}

/// A fitted text-to-features transform. Vocabulary-based kinds are fitted on
/// the training documents only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Featurizer {
    Bow { vocabulary: Vocabulary },
    Tfidf { vocabulary: Vocabulary },
    StaticEmbed { path: PathBuf },
    Contextual { encoder: EncoderHandle, sequence: bool },
}

pub fn documents(data: &[LabeledTweet]) -> Vec<TokenizedDoc> {
    data.iter()
        .map(|t| TokenizedDoc::from_text(t.tweet.id.clone(), &t.tweet.text))
        .collect()
}

pub fn label_strings(data: &[LabeledTweet]) -> Vec<String> {
    data.iter().map(|t| t.label.as_str().to_string()).collect()
}

impl Featurizer {
    pub fn fit(spec: &ClassifierSpec, docs: &[TokenizedDoc], settings: &FeatureSettings) -> Result<Self> {
        Ok(match spec.feature {
            FeatureKind::Bow => Featurizer::Bow {
                vocabulary: fit_vocabulary(docs, settings.min_df)?,
            },
            FeatureKind::Tfidf => Featurizer::Tfidf {
                vocabulary: fit_vocabulary(docs, settings.min_df)?,
            },
            FeatureKind::StaticEmbed => Featurizer::StaticEmbed {
                path: settings
                    .embeddings
                    .clone()
                    .ok_or_else(|| Error::InvalidSpec("static-embed needs an embeddings table path".into()))?,
            },
            FeatureKind::ContextualPooled | FeatureKind::ContextualSequence => Featurizer::Contextual {
                encoder: spec
                    .encoder
                    .clone()
                    .ok_or_else(|| Error::InvalidSpec(format!("{} needs an encoder", spec.feature.as_str())))?,
                sequence: spec.feature == FeatureKind::ContextualSequence,
            },
        })
    }

    pub fn transform(&self, docs: &[TokenizedDoc]) -> Result<Features> {
        match self {
            Featurizer::Bow { vocabulary } => Ok(Features::Matrix(bow_binary(docs, vocabulary)?)),
            Featurizer::Tfidf { vocabulary } => Ok(Features::Matrix(tfidf(docs, vocabulary)?)),
            Featurizer::StaticEmbed { path } => Ok(Features::Matrix(embed_mean(docs, &EmbeddingTable::load(path)?)?)),
            Featurizer::Contextual { encoder, sequence } => {
                let enc = load_encoder(encoder)?;
                let (pooled, seqs) = contextual_encode(docs, enc.as_ref())?;
                Ok(if *sequence {
                    Features::Sequences(seqs)
                } else {
                    Features::Matrix(pooled)
                })
            }
        }
    }
}
