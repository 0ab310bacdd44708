use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::featurize::{documents, label_strings, FeatureSettings, Features, Featurizer};
use super::folds::{fold_rows, stratified_folds};
use super::metrics::{compute_metrics_with_classes, MetricsReport};
use super::stats::{ttest, TTest, TestMode};
use crate::corpus::{load_labeled, DatasetSplits, Label, LabeledTweet};
use crate::features::{balance, BalanceConfig, EncoderHandle, TokenizedDoc};
use crate::models::{train, ClassifierSpec, Family, FeatureKind, ParamValue, TrainedModel};
use crate::{Error, Result};

pub const TARGET: &str = "misinformation";
pub const RELEVANT: &str = "relevant";
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_SEED: u64 = 42;

pub fn final_classes() -> Vec<String> {
    Label::ALL.iter().map(|l| l.as_str().to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Single,
    TwoStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierEntry {
    pub family: Family,
    pub feature: FeatureKind,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub encoder: Option<EncoderHandle>,
}

impl ClassifierEntry {
    pub fn spec(&self, seed: u64) -> ClassifierSpec {
        ClassifierSpec {
            family: self.family,
            feature: self.feature,
            hyperparams: self.hyperparams.clone(),
            seed,
            encoder: self.encoder.clone(),
        }
    }
}

impl From<&ClassifierSpec> for ClassifierEntry {
    fn from(s: &ClassifierSpec) -> Self {
        ClassifierEntry {
            family: s.family,
            feature: s.feature,
            hyperparams: s.hyperparams.clone(),
            encoder: s.encoder.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Full labeled set for cross-validation.
    pub full: Option<PathBuf>,
}

/// Featurization and balancing applied whenever a classifier is fitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingSetup {
    pub features: FeatureSettings,
    /// Applied to traditional families only; `None` disables balancing.
    pub balance: Option<BalanceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub data: DataPaths,
    #[serde(default)]
    pub features: FeatureSettings,
    #[serde(default)]
    pub balance: Option<BalanceConfig>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub test_mode: TestMode,
    #[serde(rename = "classifier")]
    pub classifiers: Vec<ClassifierEntry>,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config; relative data paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Invalid(m) => Error::invalid(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let d = &mut cfg.data;
        for p in [&mut d.train, &mut d.val, &mut d.test, &mut d.full]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.features.embeddings.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::TwoStage && self.classifiers.len() != 2 {
            return Err(Error::invalid(format!(
                "two-stage mode needs exactly 2 classifiers (relevance, misinformation), got {}",
                self.classifiers.len()
            )));
        }
        if self.classifiers.is_empty() {
            return Err(Error::invalid("at least one [[classifier]] is required"));
        }
        if self.k < 2 {
            return Err(Error::invalid("k must be at least 2"));
        }
        for c in &self.classifiers {
            c.spec(self.seed).validate()?;
        }
        Ok(())
    }

    pub fn specs(&self) -> Vec<ClassifierSpec> {
        self.classifiers.iter().map(|c| c.spec(self.seed)).collect()
    }

    pub fn setup(&self) -> TrainingSetup {
        TrainingSetup {
            features: self.features.clone(),
            balance: self.balance,
        }
    }

    pub fn load_splits(&self) -> Result<DatasetSplits> {
        let need = |p: &Option<PathBuf>, name: &str| {
            p.clone()
                .ok_or_else(|| Error::invalid(format!("config is missing data.{name}")))
        };
        Ok(DatasetSplits {
            train: load_labeled(need(&self.data.train, "train")?)?,
            val: load_labeled(need(&self.data.val, "val")?)?,
            test: load_labeled(need(&self.data.test, "test")?)?,
        })
    }
}

/// A featurizer and the model trained on its output.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedClassifier {
    pub featurizer: Featurizer,
    pub model: TrainedModel,
    /// Synthetic rows added by balancing.
    pub n_synthetic: usize,
}

impl FittedClassifier {
    pub fn fit(
        spec: &ClassifierSpec,
        docs: &[TokenizedDoc],
        labels: &[String],
        validation: Option<(&[TokenizedDoc], &[String])>,
        setup: &TrainingSetup,
    ) -> Result<Self> {
        spec.validate()?;
        if docs.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: docs.len(),
                right: labels.len(),
            });
        }
        if docs.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let featurizer = Featurizer::fit(spec, docs, &setup.features)?;
        let mut x = featurizer.transform(docs)?;
        let mut y = labels.to_vec();
        let mut n_synthetic = 0;
        if let (Some(cfg), false, Features::Matrix(m)) = (&setup.balance, spec.family.is_deep(), &x) {
            let b = balance(m, &y, cfg, spec.seed)?;
            n_synthetic = b.synthetic.len();
            y = b.labels;
            x = Features::Matrix(b.features);
        }
        let val = match validation.filter(|_| spec.family.is_deep()) {
            Some((vd, vl)) => Some((featurizer.transform(vd)?, vl)),
            None => None,
        };
        let model = train(spec, x.input(), &y, val.as_ref().map(|(f, l)| (f.input(), *l)))?;
        Ok(FittedClassifier {
            featurizer,
            model,
            n_synthetic,
        })
    }

    pub fn predict(&self, docs: &[TokenizedDoc]) -> Result<Vec<String>> {
        if docs.is_empty() {
            return Ok(Vec::new());
        }
        self.model.predict(self.featurizer.transform(docs)?.input())
    }

    /// Writes the model files plus `featurizer.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.model.save(dir)?;
        let path = dir.join("featurizer.json");
        fs::write(&path, serde_json::to_vec_pretty(&self.featurizer)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("featurizer.json");
        let text = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(FittedClassifier {
            featurizer: serde_json::from_slice(&text)?,
            model: TrainedModel::load(dir)?,
            n_synthetic: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleRun {
    pub name: String,
    pub report: MetricsReport,
    pub predictions: Vec<String>,
}

/// Trains one 3-class classifier on train (val drives early stopping for deep
/// families) and scores it on test with misinformation as the target.
pub fn run_single(spec: &ClassifierSpec, splits: &DatasetSplits, setup: &TrainingSetup) -> Result<SingleRun> {
    let (train_docs, train_y) = (documents(&splits.train), label_strings(&splits.train));
    let (val_docs, val_y) = (documents(&splits.val), label_strings(&splits.val));
    let fitted = FittedClassifier::fit(spec, &train_docs, &train_y, Some((&val_docs, &val_y)), setup)?;
    let test_docs = documents(&splits.test);
    let predictions = fitted.predict(&test_docs)?;
    let report = compute_metrics_with_classes(&label_strings(&splits.test), &predictions, &final_classes(), TARGET)?;
    Ok(SingleRun {
        name: spec.name(),
        report,
        predictions,
    })
}

fn relevance_label(l: Label) -> String {
    match l {
        Label::Irrelevant => Label::Irrelevant.as_str().to_string(),
        Label::True | Label::Misinformation => RELEVANT.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStageRun {
    pub name: String,
    /// Final 3-class metrics of the cascade.
    pub report: MetricsReport,
    /// Stage 1 on the whole test split, target `relevant`.
    pub relevance_report: MetricsReport,
    /// Stage 2 alone on the test tweets whose gold label is relevant.
    pub misinformation_report: MetricsReport,
    pub stage1_predictions: Vec<String>,
    pub predictions: Vec<String>,
}

impl TwoStageRun {
    /// Rows where the final label disagrees with the stage-1 relevance call.
    pub fn cascade_violations(&self) -> usize {
        let irr = Label::Irrelevant.as_str();
        self.stage1_predictions
            .iter()
            .zip(&self.predictions)
            .filter(|(s, f)| (s.as_str() == irr) != (f.as_str() == irr))
            .count()
    }
}

/// Stage 1 separates irrelevant from relevant tweets; stage 2, trained only on
/// true and misinformation tweets, labels whatever stage 1 passes through.
pub fn run_two_stage(
    relevance: &ClassifierSpec,
    misinformation: &ClassifierSpec,
    splits: &DatasetSplits,
    setup: &TrainingSetup,
) -> Result<TwoStageRun> {
    let relevant_only = |d: &[LabeledTweet]| -> Vec<LabeledTweet> {
        d.iter().filter(|t| t.label != Label::Irrelevant).cloned().collect()
    };
    let stage1_labels = |d: &[LabeledTweet]| -> Vec<String> { d.iter().map(|t| relevance_label(t.label)).collect() };

    let (train_docs, val_docs, test_docs) = (
        documents(&splits.train),
        documents(&splits.val),
        documents(&splits.test),
    );
    let stage1 = FittedClassifier::fit(
        relevance,
        &train_docs,
        &stage1_labels(&splits.train),
        Some((&val_docs, &stage1_labels(&splits.val))),
        setup,
    )?;

    let (train2, val2, test2) = (
        relevant_only(&splits.train),
        relevant_only(&splits.val),
        relevant_only(&splits.test),
    );
    let stage2 = FittedClassifier::fit(
        misinformation,
        &documents(&train2),
        &label_strings(&train2),
        Some((&documents(&val2), &label_strings(&val2))),
        setup,
    )?;

    let stage1_predictions = stage1.predict(&test_docs)?;
    let passed: Vec<usize> = (0..test_docs.len())
        .filter(|&i| stage1_predictions[i] == RELEVANT)
        .collect();
    let passed_docs: Vec<TokenizedDoc> = passed.iter().map(|&i| test_docs[i].clone()).collect();
    let stage2_predictions = stage2.predict(&passed_docs)?;
    let mut predictions = vec![Label::Irrelevant.as_str().to_string(); test_docs.len()];
    for (&i, p) in passed.iter().zip(stage2_predictions) {
        predictions[i] = p;
    }

    let gold = label_strings(&splits.test);
    let report = compute_metrics_with_classes(&gold, &predictions, &final_classes(), TARGET)?;
    let relevance_classes = vec![Label::Irrelevant.as_str().to_string(), RELEVANT.to_string()];
    let relevance_report = compute_metrics_with_classes(
        &stage1_labels(&splits.test),
        &stage1_predictions,
        &relevance_classes,
        RELEVANT,
    )?;
    let stage2_classes = vec![Label::True.as_str().to_string(), TARGET.to_string()];
    let misinformation_report = compute_metrics_with_classes(
        &label_strings(&test2),
        &stage2.predict(&documents(&test2))?,
        &stage2_classes,
        TARGET,
    )?;
    Ok(TwoStageRun {
        name: format!("{} -> {}", relevance.name(), misinformation.name()),
        report,
        relevance_report,
        misinformation_report,
        stage1_predictions,
        predictions,
    })
}

/// Stratified k-fold cross-validation returning the target-class F1 of each
/// fold. Featurization and balancing are fitted inside each training fold.
pub fn kfold_scores(
    spec: &ClassifierSpec,
    data: &[LabeledTweet],
    k: usize,
    seed: u64,
    setup: &TrainingSetup,
    target: &str,
) -> Result<Vec<f64>> {
    let labels = label_strings(data);
    let folds = stratified_folds(&labels, k, seed)?;
    let docs = documents(data);
    let classes = final_classes();
    (0..k)
        .map(|f| {
            let (train_rows, test_rows) = fold_rows(&folds, f);
            let pick = |rows: &[usize]| -> (Vec<TokenizedDoc>, Vec<String>) {
                rows.iter().map(|&i| (docs[i].clone(), labels[i].clone())).unzip()
            };
            let (tr_docs, tr_y) = pick(&train_rows);
            let (te_docs, te_y) = pick(&test_rows);
            let fitted = FittedClassifier::fit(spec, &tr_docs, &tr_y, None, setup)?;
            let pred = fitted.predict(&te_docs)?;
            Ok(compute_metrics_with_classes(&te_y, &pred, &classes, target)?.f1)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name_a: String,
    pub name_b: String,
    pub scores_a: Vec<f64>,
    pub scores_b: Vec<f64>,
    pub test: TTest,
}

/// Cross-validates two setups on the same folds and tests the F1 difference.
pub fn compare_kfold(
    a: (&ClassifierSpec, &TrainingSetup),
    b: (&ClassifierSpec, &TrainingSetup),
    data: &[LabeledTweet],
    k: usize,
    seed: u64,
    mode: TestMode,
) -> Result<Comparison> {
    let scores_a = kfold_scores(a.0, data, k, seed, a.1, TARGET)?;
    let scores_b = kfold_scores(b.0, data, k, seed, b.1, TARGET)?;
    Ok(Comparison {
        name_a: a.0.name(),
        name_b: b.0.name(),
        test: ttest(&scores_a, &scores_b, mode)?,
        scores_a,
        scores_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
mode = "two-stage"
seed = 7

[data]
train = "train.csv"
val = "val.csv"
test = "/abs/test.csv"

[balance]
k_neighbors = 3

[[classifier]]
family = "LR"
feature = "tfidf"

[[classifier]]
family = "SVM"
feature = "bow"
hyperparams = { c = 0.5 }
"#;

    #[test]
    fn parses_config() {
        let cfg = ExperimentConfig::parse(CONFIG).unwrap();
        assert_eq!(cfg.mode, Mode::TwoStage);
        assert_eq!(cfg.k, DEFAULT_K);
        assert_eq!(cfg.balance.as_ref().unwrap().k_neighbors, 3);
        assert_eq!(
            cfg.balance.as_ref().unwrap().oversample_ratio,
            BalanceConfig::default().oversample_ratio
        );
        let specs = cfg.specs();
        assert_eq!(specs[1].seed, 7);
        assert_eq!(specs[1].hyperparams["c"], ParamValue::Float(0.5));
    }

    #[test]
    fn resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(&path, CONFIG).unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.data.train.unwrap(), dir.path().join("train.csv"));
        assert_eq!(cfg.data.test.unwrap(), PathBuf::from("/abs/test.csv"));
    }

    #[test]
    fn two_stage_needs_two_specs() {
        let one = CONFIG
            .split("[[classifier]]")
            .take(2)
            .collect::<Vec<_>>()
            .join("[[classifier]]");
        assert!(ExperimentConfig::parse(&one).is_err());
        assert!(ExperimentConfig::parse(&CONFIG.replace("mode = \"two-stage\"", "mode = \"single\"")).is_ok());
        assert!(ExperimentConfig::parse(&CONFIG.replace("seed = 7", "sed = 7")).is_err());
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(ExperimentConfig::parse(&CONFIG.replace("\"bow\"", "\"tfidf\"").replace("SVM", "NB")).is_err());
    }
}
