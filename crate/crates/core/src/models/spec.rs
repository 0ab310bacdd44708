use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::{EncoderHandle, EncoderMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "NB")]
    NaiveBayes,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "LR")]
    LogisticRegression,
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "GBT")]
    GradientBoosting,
    #[serde(rename = "DNN")]
    Dnn,
    #[serde(rename = "CNN")]
    Cnn,
    #[serde(rename = "BiLSTM")]
    BiLstm,
    #[serde(rename = "TransformerFT")]
    TransformerFt,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::NaiveBayes,
        Family::Svm,
        Family::LogisticRegression,
        Family::DecisionTree,
        Family::RandomForest,
        Family::GradientBoosting,
        Family::Dnn,
        Family::Cnn,
        Family::BiLstm,
        Family::TransformerFt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::NaiveBayes => "NB",
            Family::Svm => "SVM",
            Family::LogisticRegression => "LR",
            Family::DecisionTree => "DT",
            Family::RandomForest => "RF",
            Family::GradientBoosting => "GBT",
            Family::Dnn => "DNN",
            Family::Cnn => "CNN",
            Family::BiLstm => "BiLSTM",
            Family::TransformerFt => "TransformerFT",
        }
    }

    /// Neural families train with class weights and early stopping rather
    /// than the resampling chain.
    pub fn is_deep(self) -> bool {
        matches!(self, Family::Dnn | Family::Cnn | Family::BiLstm | Family::TransformerFt)
    }

    /// Probabilistic families emit score rows summing to one.
    pub fn is_probabilistic(self) -> bool {
        !matches!(self, Family::Svm)
    }

    fn defaults(self) -> Vec<(&'static str, ParamValue)> {
        use ParamValue::{Float as F, Int as I, Str as S};
        match self {
            Family::NaiveBayes => vec![("alpha", F(1.0))],
            Family::Svm => vec![("c", F(1.0)), ("max_iter", I(1000)), ("tol", F(1e-4))],
            Family::LogisticRegression => vec![("c", F(1.0)), ("max_iter", I(200)), ("tol", F(1e-6))],
            Family::DecisionTree => vec![
                ("max_depth", I(0)),
                ("min_samples_split", I(2)),
                ("min_samples_leaf", I(1)),
            ],
            Family::RandomForest => vec![
                ("n_trees", I(100)),
                ("max_depth", I(0)),
                ("min_samples_split", I(2)),
                ("min_samples_leaf", I(1)),
                ("max_features", S("sqrt".into())),
            ],
            Family::GradientBoosting => vec![
                ("n_rounds", I(100)),
                ("learning_rate", F(0.3)),
                ("max_depth", I(6)),
                ("lambda", F(1.0)),
                ("min_child_weight", F(1.0)),
            ],
            Family::Dnn => vec![
                ("hidden", I(256)),
                ("layers", I(2)),
                ("epochs", I(30)),
                ("learning_rate", F(1e-3)),
                ("batch_size", I(32)),
                ("patience", I(3)),
                ("weight_decay", F(0.0)),
            ],
            Family::Cnn => vec![
                ("filters", I(100)),
                ("widths", S("3,4,5".into())),
                ("epochs", I(30)),
                ("learning_rate", F(1e-3)),
                ("batch_size", I(32)),
                ("patience", I(3)),
                ("weight_decay", F(0.0)),
            ],
            Family::BiLstm => vec![
                ("hidden", I(128)),
                ("epochs", I(30)),
                ("learning_rate", F(1e-3)),
                ("batch_size", I(32)),
                ("patience", I(3)),
                ("weight_decay", F(0.0)),
            ],
            Family::TransformerFt => vec![
                ("epochs", I(3)),
                ("learning_rate", F(2e-5)),
                ("batch_size", I(16)),
                ("patience", I(3)),
                ("weight_decay", F(0.01)),
            ],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Bow,
    Tfidf,
    StaticEmbed,
    ContextualPooled,
    ContextualSequence,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::Bow,
        FeatureKind::Tfidf,
        FeatureKind::StaticEmbed,
        FeatureKind::ContextualPooled,
        FeatureKind::ContextualSequence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Bow => "bow",
            FeatureKind::Tfidf => "tfidf",
            FeatureKind::StaticEmbed => "static-embed",
            FeatureKind::ContextualPooled => "contextual-pooled",
            FeatureKind::ContextualSequence => "contextual-sequence",
        }
    }

    pub fn needs_encoder(self) -> bool {
        matches!(self, FeatureKind::ContextualPooled | FeatureKind::ContextualSequence)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidSpec(format!("unknown feature {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x}"),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Str(v.to_string())
    }
}

/// What to train: a model family, the feature it consumes, overrides of the
/// family's default hyperparameters, and the seed for every random choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub family: Family,
    pub feature: FeatureKind,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<EncoderHandle>,
}

impl ClassifierSpec {
    pub fn new(family: Family, feature: FeatureKind) -> Self {
        ClassifierSpec {
            family,
            feature,
            hyperparams: BTreeMap::new(),
            seed: 0,
            encoder: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.hyperparams.insert(key.to_string(), value.into());
        self
    }

    pub fn with_encoder(mut self, encoder: EncoderHandle) -> Self {
        self.encoder = Some(encoder);
        self
    }

    /// Short display name such as `LR+tfidf`.
    pub fn name(&self) -> String {
        format!("{}+{}", self.family, self.feature)
    }

    pub fn validate(&self) -> Result<()> {
        let fam = self.family;
        let feat = self.feature;
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match fam {
            Family::NaiveBayes if feat != FeatureKind::Bow => {
                return bad(format!("NB pairs only with bow, not {feat}"));
            }
            Family::Cnn | Family::BiLstm if feat != FeatureKind::ContextualSequence => {
                return bad(format!("{fam} requires contextual-sequence features, not {feat}"));
            }
            Family::TransformerFt => {
                if feat != FeatureKind::ContextualSequence {
                    return bad(format!(
                        "TransformerFT requires contextual-sequence features, not {feat}"
                    ));
                }
                match &self.encoder {
                    Some(h) if h.mode == EncoderMode::Finetunable => {}
                    _ => return bad("TransformerFT requires a finetunable encoder".into()),
                }
            }
            _ if feat == FeatureKind::ContextualSequence && !matches!(fam, Family::Cnn | Family::BiLstm) => {
                return bad(format!("{fam} needs a feature matrix, not token sequences"));
            }
            _ => {}
        }
        if feat.needs_encoder() && self.encoder.is_none() {
            return bad(format!("{feat} features need an encoder handle"));
        }
        let defaults = fam.defaults();
        for (key, value) in &self.hyperparams {
            let Some((_, default)) = defaults.iter().find(|(k, _)| k == key) else {
                let known: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
                return bad(format!(
                    "unknown hyperparameter {key:?} for {fam} (known: {})",
                    known.join(", ")
                ));
            };
            let compatible = matches!(
                (default, value),
                (ParamValue::Int(_), ParamValue::Int(_))
                    | (ParamValue::Float(_), ParamValue::Float(_) | ParamValue::Int(_))
                    | (ParamValue::Bool(_), ParamValue::Bool(_))
                    | (ParamValue::Str(_), ParamValue::Str(_) | ParamValue::Int(_))
            );
            if !compatible {
                return bad(format!("hyperparameter {key:?} has the wrong type: {value}"));
            }
        }
        Ok(())
    }

    /// Hyperparameters after applying overrides to the family defaults.
    pub fn resolved(&self) -> Params {
        let mut values: BTreeMap<String, ParamValue> = self
            .family
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        for (k, v) in &self.hyperparams {
            values.insert(k.clone(), v.clone());
        }
        Params { values }
    }
}

/// Resolved hyperparameter values with typed accessors.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, ParamValue>,
}

impl Params {
    fn get(&self, key: &str) -> &ParamValue {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("hyperparameter {key:?} has no default"))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            ParamValue::Float(x) => *x,
            ParamValue::Int(i) => *i as f64,
            other => panic!("hyperparameter {key:?} is not numeric: {other}"),
        }
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            ParamValue::Int(i) => *i,
            other => panic!("hyperparameter {key:?} is not an integer: {other}"),
        }
    }

    pub fn positive_float(&self, key: &str) -> Result<f64> {
        let v = self.float(key);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidSpec(format!("{key} must be positive, got {v}")))
        }
    }

    pub fn non_negative_float(&self, key: &str) -> Result<f64> {
        let v = self.float(key);
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidSpec(format!("{key} must be non-negative, got {v}")))
        }
    }

    pub fn positive_int(&self, key: &str) -> Result<usize> {
        let v = self.int(key);
        if v > 0 {
            Ok(v as usize)
        } else {
            Err(Error::InvalidSpec(format!("{key} must be positive, got {v}")))
        }
    }

    /// Zero or negative means "no limit".
    pub fn optional_limit(&self, key: &str) -> Option<usize> {
        let v = self.int(key);
        (v > 0).then_some(v as usize)
    }

    pub fn text(&self, key: &str) -> String {
        self.get(key).to_string()
    }

    pub fn int_list(&self, key: &str) -> Result<Vec<usize>> {
        let text = self.text(key);
        let parsed: std::result::Result<Vec<usize>, _> = text.split(',').map(|p| p.trim().parse::<usize>()).collect();
        match parsed {
            Ok(v) if !v.is_empty() && v.iter().all(|&x| x > 0) => Ok(v),
            _ => Err(Error::InvalidSpec(format!(
                "{key} must be a comma-separated list of positive integers, got {text:?}"
            ))),
        }
    }
}
