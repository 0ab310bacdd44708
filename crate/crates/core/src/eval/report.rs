use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub target: String,
    pub rows: Vec<LeaderboardRow>,
}

/// Ranks runs by target F1, highest first; equal F1 falls back to name order.
pub fn experiment_report(reports: &[(String, MetricsReport)]) -> Result<Leaderboard> {
    let first = reports.first().ok_or(Error::Empty("reports"))?;
    let mut rows: Vec<LeaderboardRow> = reports
        .iter()
        .map(|(name, r)| LeaderboardRow {
            name: name.clone(),
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        })
        .collect();
    rows.sort_by(|a, b| b.f1.total_cmp(&a.f1).then_with(|| a.name.cmp(&b.name)));
    Ok(Leaderboard {
        target: first.1.target.clone(),
        rows,
    })
}

impl Leaderboard {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "accuracy", "precision", "recall", "f1"])?;
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                format!("{:.2}", r.accuracy),
                format!("{:.2}", r.precision),
                format!("{:.2}", r.recall),
                format!("{:.2}", r.f1),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
