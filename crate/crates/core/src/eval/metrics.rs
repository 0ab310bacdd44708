use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NOT_MISINFORMATION: &str = "not-misinformation";

/// Harmonic mean of precision and recall (both in percent); 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `counts[gold][pred]`
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn index_of(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }
}

/// Rows are gold labels, columns predictions.
impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .classes
            .iter()
            .map(String::len)
            .chain(self.counts.iter().flatten().map(|c| c.to_string().len()))
            .chain(std::iter::once("gold \\ pred".len()))
            .max()
            .unwrap_or(1);
        write!(f, "{:<width$}", "gold \\ pred")?;
        for c in &self.classes {
            write!(f, "  {c:>width$}")?;
        }
        writeln!(f)?;
        for (c, row) in self.classes.iter().zip(&self.counts) {
            write!(f, "{c:<width$}")?;
            for v in row {
                write!(f, "  {v:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn confusion_matrix<S: AsRef<str>>(gold: &[S], pred: &[S], classes: &[String]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: pred.len(),
        });
    }
    let index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    if index.len() != classes.len() {
        return Err(Error::invalid("duplicate class in confusion matrix classes"));
    }
    let lookup = |l: &str| index.get(l).copied().ok_or_else(|| Error::UnknownLabel(l.to_string()));
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (g, p) in gold.iter().zip(pred) {
        counts[lookup(g.as_ref())?][lookup(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

/// Merges irrelevant and true into not-misinformation. The input must cover
/// exactly the three final classes, in any order.
pub fn collapse_binary(cm: &ConfusionMatrix) -> Result<ConfusionMatrix> {
    let expected: BTreeSet<&str> = ["irrelevant", "true", "misinformation"].into_iter().collect();
    let got: BTreeSet<&str> = cm.classes.iter().map(String::as_str).collect();
    if got != expected || cm.classes.len() != 3 {
        return Err(Error::invalid(format!(
            "collapse_binary needs classes irrelevant, true, misinformation; got {:?}",
            cm.classes
        )));
    }
    let bucket = |c: &str| usize::from(c == "misinformation");
    let mut counts = vec![vec![0u64; 2]; 2];
    for (i, gi) in cm.classes.iter().enumerate() {
        for (j, pj) in cm.classes.iter().enumerate() {
            counts[bucket(gi)][bucket(pj)] += cm.counts[i][j];
        }
    }
    Ok(ConfusionMatrix {
        classes: vec![NOT_MISINFORMATION.to_string(), "misinformation".to_string()],
        counts,
    })
}

/// One-vs-rest scores for one class, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when nothing was predicted as this class (precision reported as 0).
    pub precision_undefined: bool,
    /// Set when the class never occurs in gold (recall reported as 0).
    pub recall_undefined: bool,
}

fn class_metrics(cm: &ConfusionMatrix, i: usize) -> ClassMetrics {
    let tp = cm.counts[i][i] as f64;
    let predicted = cm.col_sum(i) as f64;
    let actual = cm.row_sum(i) as f64;
    let precision = if predicted > 0.0 { 100.0 * tp / predicted } else { 0.0 };
    let recall = if actual > 0.0 { 100.0 * tp / actual } else { 0.0 };
    ClassMetrics {
        precision,
        recall,
        f1: f1(precision, recall),
        support: cm.row_sum(i),
        precision_undefined: predicted == 0.0,
        recall_undefined: actual == 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percent of rows whose prediction equals the gold label.
    pub accuracy: f64,
    pub target: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_confusion(confusion: ConfusionMatrix, target: &str) -> Result<Self> {
        let t = confusion
            .index_of(target)
            .ok_or_else(|| Error::UnknownLabel(target.to_string()))?;
        let total = confusion.total();
        if total == 0 {
            return Err(Error::Empty("evaluation set"));
        }
        let per_class: BTreeMap<String, ClassMetrics> = confusion
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), class_metrics(&confusion, i)))
            .collect();
        let tm = class_metrics(&confusion, t);
        Ok(MetricsReport {
            accuracy: 100.0 * confusion.trace() as f64 / total as f64,
            target: target.to_string(),
            precision: tm.precision,
            recall: tm.recall,
            f1: tm.f1,
            per_class,
            confusion,
        })
    }

    pub fn target_metrics(&self) -> &ClassMetrics {
        &self.per_class[&self.target]
    }
}

/// Metrics over the sorted union of observed labels and the target.
pub fn compute_metrics<S: AsRef<str>>(gold: &[S], pred: &[S], target: &str) -> Result<MetricsReport> {
    let classes: Vec<String> = gold
        .iter()
        .chain(pred)
        .map(|s| s.as_ref())
        .chain(std::iter::once(target))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    compute_metrics_with_classes(gold, pred, &classes, target)
}

/// Metrics with a fixed class order, so absent classes still get a row.
pub fn compute_metrics_with_classes<S: AsRef<str>>(
    gold: &[S],
    pred: &[S],
    classes: &[String],
    target: &str,
) -> Result<MetricsReport> {
    if gold.is_empty() {
        return Err(Error::Empty("gold labels"));
    }
    MetricsReport::from_confusion(confusion_matrix(gold, pred, classes)?, target)
}
