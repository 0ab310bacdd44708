//! A uniform classifier interface over traditional and neural model families.
//!
//! Every family trains deterministically from `(spec, X, y)`: all randomness
//! comes from a generator seeded with `spec.seed`. Labels are strings; the
//! label set of a trained model is the sorted set of distinct training labels.

mod linear;
pub(crate) mod math;
mod nn;
mod spec;
mod tree;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, SequenceBatch};
use crate::{Error, Result};

pub use linear::{LinearScorer, NaiveBayes};
pub use nn::{Architecture, Network};
pub use spec::{ClassifierSpec, Family, FeatureKind, ParamValue, Params};
pub use tree::{Boosted, Forest, Node, Tree};

use math::argmax;
use nn::{NetInput, TrainConfig};
use tree::{BoostConfig, Criterion, TreeConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Features handed to a model: a matrix for most families, token-vector
/// sequences for CNN, BiLSTM and TransformerFT.
#[derive(Debug, Clone, Copy)]
pub enum ModelInput<'a> {
    Matrix(&'a FeatureMatrix),
    Sequences(&'a SequenceBatch),
}

impl<'a> ModelInput<'a> {
    pub fn n_rows(&self) -> usize {
        match self {
            ModelInput::Matrix(x) => x.n_rows(),
            ModelInput::Sequences(s) => s.len(),
        }
    }

    /// Row width for matrices, token-vector width for sequences.
    pub fn dim(&self) -> usize {
        match self {
            ModelInput::Matrix(x) => x.n_dims(),
            ModelInput::Sequences(s) => s.dim(),
        }
    }

    fn matrix(&self) -> Result<&'a FeatureMatrix> {
        match *self {
            ModelInput::Matrix(x) => Ok(x),
            ModelInput::Sequences(_) => Err(Error::InvalidSpec(
                "this family needs a feature matrix, got token sequences".into(),
            )),
        }
    }

    fn sequences(&self) -> Result<&'a SequenceBatch> {
        match *self {
            ModelInput::Sequences(s) => Ok(s),
            ModelInput::Matrix(_) => Err(Error::InvalidSpec(
                "this family needs token sequences, got a feature matrix".into(),
            )),
        }
    }

    fn net(&self) -> NetInput<'a> {
        match *self {
            ModelInput::Matrix(x) => NetInput::Matrix(x),
            ModelInput::Sequences(s) => NetInput::Sequences(s),
        }
    }
}

impl<'a> From<&'a FeatureMatrix> for ModelInput<'a> {
    fn from(x: &'a FeatureMatrix) -> Self {
        ModelInput::Matrix(x)
    }
}

impl<'a> From<&'a SequenceBatch> for ModelInput<'a> {
    fn from(s: &'a SequenceBatch) -> Self {
        ModelInput::Sequences(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Parameters {
    /// Single-class training data: always predicts the one label.
    Constant,
    NaiveBayes(NaiveBayes),
    /// SVM decision margins or logistic-regression logits.
    Linear(LinearScorer),
    Tree(Tree),
    Forest(Forest),
    Boosted(Boosted),
    Neural(Network),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n_samples: usize,
    /// Not persisted; zero after loading.
    #[serde(skip)]
    pub wall_time_secs: f64,
    /// Set when the training labels held a single class.
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs_run: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub label_set: Vec<String>,
    pub input_dim: usize,
    pub parameters: Parameters,
    pub meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    spec: ClassifierSpec,
    label_set: Vec<String>,
    input_dim: usize,
    meta: TrainingMeta,
}

fn tree_config(params: &Params, max_features: Option<usize>, criterion: Criterion) -> Result<TreeConfig> {
    Ok(TreeConfig {
        max_depth: params.optional_limit("max_depth"),
        min_samples_split: params.positive_int("min_samples_split")?,
        min_samples_leaf: params.positive_int("min_samples_leaf")?,
        max_features,
        criterion,
    })
}

fn forest_max_features(params: &Params, n_dims: usize) -> Result<Option<usize>> {
    let text = params.text("max_features");
    let m = match text.as_str() {
        "sqrt" => (n_dims as f64).sqrt().floor() as usize,
        "log2" => (n_dims as f64).log2().floor() as usize,
        "all" => n_dims,
        other => other.parse::<usize>().map_err(|_| {
            Error::InvalidSpec(format!(
                "max_features must be sqrt, log2, all or an integer, got {other:?}"
            ))
        })?,
    };
    Ok(Some(m.clamp(1, n_dims.max(1))))
}

fn train_config(params: &Params) -> Result<TrainConfig> {
    Ok(TrainConfig {
        epochs: params.positive_int("epochs")?,
        learning_rate: params.positive_float("learning_rate")?,
        batch_size: params.positive_int("batch_size")?,
        patience: params.positive_int("patience")?,
        weight_decay: params.non_negative_float("weight_decay")?,
    })
}

fn encode_labels(label_set: &[String], y: &[String]) -> Vec<usize> {
    y.iter()
        .map(|l| label_set.binary_search(l).expect("label drawn from label set"))
        .collect()
}

/// Trains a classifier. `validation` is used only by neural families, for
/// early stopping; other families ignore it.
pub fn train(
    spec: &ClassifierSpec,
    x: ModelInput<'_>,
    y: &[String],
    validation: Option<(ModelInput<'_>, &[String])>,
) -> Result<TrainedModel> {
    spec.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::invalid("training needs at least 2 samples"));
    }
    if spec.feature == FeatureKind::ContextualSequence {
        x.sequences()?;
    } else {
        x.matrix()?;
    }
    if let (Some(enc), FeatureKind::ContextualSequence | FeatureKind::ContextualPooled) = (&spec.encoder, spec.feature)
    {
        if enc.dimension != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: enc.dimension,
                got: x.dim(),
            });
        }
    }
    let started = Instant::now();
    let label_set: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut meta = TrainingMeta {
        n_samples: y.len(),
        wall_time_secs: 0.0,
        degenerate: label_set.len() == 1,
        epochs_run: None,
    };
    let k = label_set.len();
    let yi = encode_labels(&label_set, y);
    let p = spec.resolved();
    let seed = spec.seed;
    let parameters = if meta.degenerate {
        Parameters::Constant
    } else {
        match spec.family {
            Family::NaiveBayes => {
                Parameters::NaiveBayes(NaiveBayes::fit(x.matrix()?, &yi, k, p.positive_float("alpha")?)?)
            }
            Family::Svm => Parameters::Linear(linear::fit_svm(
                x.matrix()?,
                &yi,
                k,
                p.positive_float("c")?,
                p.positive_int("max_iter")?,
                p.positive_float("tol")?,
                seed,
            )),
            Family::LogisticRegression => Parameters::Linear(linear::fit_logistic(
                x.matrix()?,
                &yi,
                k,
                p.positive_float("c")?,
                p.positive_int("max_iter")?,
                p.positive_float("tol")?,
            )),
            Family::DecisionTree => Parameters::Tree(tree::fit_decision_tree(
                x.matrix()?,
                &yi,
                k,
                tree_config(&p, None, Criterion::Gini)?,
                seed,
            )),
            Family::RandomForest => {
                let m = x.matrix()?;
                let config = tree_config(&p, forest_max_features(&p, m.n_dims())?, Criterion::Gini)?;
                Parameters::Forest(tree::fit_random_forest(
                    m,
                    &yi,
                    k,
                    p.positive_int("n_trees")?,
                    config,
                    seed,
                ))
            }
            Family::GradientBoosting => {
                let criterion = Criterion::Newton {
                    lambda: p.non_negative_float("lambda")?,
                    min_child_weight: p.non_negative_float("min_child_weight")?,
                };
                let config = BoostConfig {
                    rounds: p.positive_int("n_rounds")?,
                    learning_rate: p.positive_float("learning_rate")?,
                    tree: TreeConfig {
                        max_depth: p.optional_limit("max_depth"),
                        min_samples_split: 2,
                        min_samples_leaf: 1,
                        max_features: None,
                        criterion,
                    },
                };
                Parameters::Boosted(tree::fit_boosted(x.matrix()?, &yi, k, &config, seed))
            }
            Family::Dnn | Family::Cnn | Family::BiLstm | Family::TransformerFt => {
                let arch = match spec.family {
                    Family::Dnn => Architecture::Mlp {
                        input: x.matrix()?.n_dims(),
                        hidden: vec![p.positive_int("hidden")?; p.int("layers").max(0) as usize],
                        classes: k,
                    },
                    Family::Cnn => Architecture::Cnn {
                        dim: x.sequences()?.dim(),
                        widths: p.int_list("widths")?,
                        filters: p.positive_int("filters")?,
                        classes: k,
                    },
                    Family::BiLstm => Architecture::BiLstm {
                        dim: x.sequences()?.dim(),
                        hidden: p.positive_int("hidden")?,
                        classes: k,
                    },
                    _ => Architecture::Adapter {
                        dim: x.sequences()?.dim(),
                        classes: k,
                    },
                };
                let val = match validation {
                    Some((vx, vy)) => {
                        if vx.n_rows() != vy.len() {
                            return Err(Error::LengthMismatch {
                                left: vx.n_rows(),
                                right: vy.len(),
                            });
                        }
                        if vx.dim() != x.dim() {
                            return Err(Error::DimensionMismatch {
                                expected: x.dim(),
                                got: vx.dim(),
                            });
                        }
                        // Validation rows with labels unseen in training cannot
                        // contribute to the loss.
                        let keep: Vec<usize> = (0..vy.len())
                            .filter(|&i| label_set.binary_search(&vy[i]).is_ok())
                            .collect();
                        Some((vx, keep, vy))
                    }
                    None => None,
                };
                let selected = val.as_ref().map(|(vx, keep, vy)| {
                    let labels: Vec<usize> = keep.iter().map(|&i| label_set.binary_search(&vy[i]).unwrap()).collect();
                    let rows = match vx {
                        ModelInput::Matrix(m) => SelectedInput::Matrix(m.select_rows(keep)),
                        ModelInput::Sequences(s) => SelectedInput::Sequences(s.select(keep)),
                    };
                    (rows, labels)
                });
                let trained = nn::train_network(
                    arch,
                    x.net(),
                    &yi,
                    train_config(&p)?,
                    selected.as_ref().map(|(rows, labels)| (rows.net(), labels.as_slice())),
                    seed,
                );
                meta.epochs_run = Some(trained.epochs_run);
                Parameters::Neural(trained.network)
            }
        }
    };
    meta.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(TrainedModel {
        spec: spec.clone(),
        label_set,
        input_dim: x.dim(),
        parameters,
        meta,
    })
}

enum SelectedInput {
    Matrix(FeatureMatrix),
    Sequences(SequenceBatch),
}

impl SelectedInput {
    fn net(&self) -> NetInput<'_> {
        match self {
            SelectedInput::Matrix(m) => NetInput::Matrix(m),
            SelectedInput::Sequences(s) => NetInput::Sequences(s),
        }
    }
}

impl TrainedModel {
    fn check_input(&self, x: &ModelInput<'_>) -> Result<()> {
        match (&self.parameters, x) {
            (Parameters::Constant, _) => {}
            (Parameters::Neural(net), _) => {
                if matches!(net.arch, Architecture::Mlp { .. }) {
                    x.matrix()?;
                } else {
                    x.sequences()?;
                }
            }
            _ => {
                x.matrix()?;
            }
        }
        if x.n_rows() > 0 && x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// One score per label in `label_set` for every row. Probabilistic
    /// families return probabilities; SVM returns decision margins.
    pub fn predict_scores(&self, x: ModelInput<'_>) -> Result<Vec<Vec<f64>>> {
        self.check_input(&x)?;
        let n = x.n_rows();
        let k = self.label_set.len();
        let rows = match &self.parameters {
            Parameters::Constant => vec![vec![1.0; k]; n],
            Parameters::NaiveBayes(nb) => {
                let m = x.matrix()?;
                (0..n).map(|i| nb.scores(m, i)).collect()
            }
            Parameters::Linear(scorer) => {
                let m = x.matrix()?;
                if self.spec.family == Family::Svm {
                    (0..n).map(|i| scorer.margins(m, i)).collect()
                } else {
                    (0..n).map(|i| linear::logistic_scores(scorer, m, i)).collect()
                }
            }
            Parameters::Tree(t) => {
                let m = x.matrix()?;
                (0..n).map(|i| t.leaf_value(m.row(i)).to_vec()).collect()
            }
            Parameters::Forest(f) => {
                let m = x.matrix()?;
                (0..n).map(|i| f.scores(m.row(i))).collect()
            }
            Parameters::Boosted(b) => {
                let m = x.matrix()?;
                (0..n).map(|i| b.scores(m.row(i))).collect()
            }
            Parameters::Neural(net) => {
                let input = x.net();
                (0..n).map(|i| net.scores(input, i)).collect()
            }
        };
        Ok(rows)
    }

    /// The label with the highest score; ties go to the earlier label.
    pub fn predict(&self, x: ModelInput<'_>) -> Result<Vec<String>> {
        Ok(self
            .predict_scores(x)?
            .iter()
            .map(|s| self.label_set[argmax(s)].clone())
            .collect())
    }

    /// Writes `manifest.json` and `parameters.json` into `dir`, creating it.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            spec: self.spec.clone(),
            label_set: self.label_set.clone(),
            input_dim: self.input_dim,
            meta: self.meta.clone(),
        };
        let m = dir.join("manifest.json");
        fs::write(&m, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&m, e))?;
        let p = dir.join("parameters.json");
        fs::write(&p, serde_json::to_vec(&self.parameters)?).map_err(|e| Error::io(&p, e))?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let m = dir.join("manifest.json");
        let bytes = fs::read(&m).map_err(|e| Error::io(&m, e))?;
        let manifest: Manifest = serde_json::from_slice(&bytes)?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        let p = dir.join("parameters.json");
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        let parameters: Parameters = serde_json::from_slice(&bytes)?;
        Ok(TrainedModel {
            spec: manifest.spec,
            label_set: manifest.label_set,
            input_dim: manifest.input_dim,
            parameters,
            meta: manifest.meta,
        })
    }
}
