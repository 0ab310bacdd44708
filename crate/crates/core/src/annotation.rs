//! Annotation records from the two-phase guideline, label adjudication,
//! Cohen's kappa and label distribution tables.
//!
//! The relevance phase asks, in order: is the tweet Indonesian, is it on
//! topic, and (only for relevant tweets) is it personal, is it humorous and
//! does it carry a verifiable factual claim. Tweets that come out relevant go
//! on to the truth phase, which asks a single four-way question.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Tweet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Relevance,
    Truth,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Relevance => "relevance",
            Phase::Truth => "truth",
        }
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relevance" => Ok(Phase::Relevance),
            "truth" => Ok(Phase::Truth),
            other => Err(Error::invalid(format!("unknown phase {other:?}"))),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filter {
    Relevant,
    NonIndonesia,
    OutOfTopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactualClaim {
    True,
    #[serde(alias = "not sure")]
    NotSure,
    False,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truth {
    True,
    Misinformation,
    #[serde(alias = "not sure")]
    NotSure,
    #[serde(alias = "need expert")]
    NeedExpert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceAnnotation {
    pub tweet_id: String,
    pub annotator_id: String,
    pub filter: Filter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub personal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub humor: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factual_claim: Option<FactualClaim>,
}

impl RelevanceAnnotation {
    /// Step-3 answers exist exactly when the tweet passed the language and topic steps.
    pub fn validate(&self) -> Result<()> {
        let flags = [
            self.personal.is_some(),
            self.humor.is_some(),
            self.factual_claim.is_some(),
        ];
        match self.filter {
            Filter::Relevant if flags.iter().all(|f| *f) => Ok(()),
            Filter::Relevant => Err(Error::invalid(
                "filter=relevant requires personal, humor and factual_claim",
            )),
            _ if flags.iter().any(|f| *f) => Err(Error::invalid(
                "personal, humor and factual_claim are only answered when filter=relevant",
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthAnnotation {
    pub tweet_id: String,
    pub annotator_id: String,
    pub truth: Truth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "kebab-case")]
pub enum Annotation {
    Relevance(RelevanceAnnotation),
    Truth(TruthAnnotation),
}

impl Annotation {
    pub fn tweet_id(&self) -> &str {
        match self {
            Annotation::Relevance(a) => &a.tweet_id,
            Annotation::Truth(a) => &a.tweet_id,
        }
    }

    pub fn annotator_id(&self) -> &str {
        match self {
            Annotation::Relevance(a) => &a.annotator_id,
            Annotation::Truth(a) => &a.annotator_id,
        }
    }

    pub fn phase(&self) -> Phase {
        match self {
            Annotation::Relevance(_) => Phase::Relevance,
            Annotation::Truth(_) => Phase::Truth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Annotation::Relevance(a) => a.validate(),
            Annotation::Truth(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relevance {
    Relevant,
    Irrelevant,
}

/// Relevant only for on-topic Indonesian tweets with a verifiable claim that
/// is neither personal experience nor humor.
pub fn derive_relevance(a: &RelevanceAnnotation) -> Result<Relevance> {
    a.validate()?;
    let relevant = a.filter == Filter::Relevant
        && a.factual_claim == Some(FactualClaim::True)
        && a.personal == Some(false)
        && a.humor == Some(false);
    Ok(if relevant {
        Relevance::Relevant
    } else {
        Relevance::Irrelevant
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoldClass {
    Irrelevant,
    True,
    Misinformation,
    #[serde(alias = "not sure")]
    NotSure,
    NoConsensus,
    #[serde(alias = "need expert")]
    NeedExpert,
}

impl GoldClass {
    pub const ALL: [GoldClass; 6] = [
        GoldClass::Irrelevant,
        GoldClass::True,
        GoldClass::Misinformation,
        GoldClass::NotSure,
        GoldClass::NoConsensus,
        GoldClass::NeedExpert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GoldClass::Irrelevant => "irrelevant",
            GoldClass::True => "true",
            GoldClass::Misinformation => "misinformation",
            GoldClass::NotSure => "not-sure",
            GoldClass::NoConsensus => "no-consensus",
            GoldClass::NeedExpert => "need-expert",
        }
    }

    /// The final-dataset class, if this label is kept for experiments.
    pub fn final_label(self) -> Option<crate::corpus::Label> {
        use crate::corpus::Label;
        match self {
            GoldClass::Irrelevant => Some(Label::Irrelevant),
            GoldClass::True => Some(Label::True),
            GoldClass::Misinformation => Some(Label::Misinformation),
            _ => None,
        }
    }
}

impl fmt::Display for GoldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GoldClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_lowercase().replace([' ', '_'], "-");
        GoldClass::ALL
            .into_iter()
            .find(|g| g.as_str() == norm)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

impl From<Truth> for GoldClass {
    fn from(t: Truth) -> Self {
        match t {
            Truth::True => GoldClass::True,
            Truth::Misinformation => GoldClass::Misinformation,
            Truth::NotSure => GoldClass::NotSure,
            Truth::NeedExpert => GoldClass::NeedExpert,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub tweet_id: String,
    pub label: GoldClass,
}

/// Outcome of adjudicating one phase for one tweet. `Relevant` sends the
/// tweet on to the truth phase; every other outcome is final.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Relevant,
    Final(GoldClass),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Vote {
    Relevant,
    Gold(GoldClass),
}

fn relevance_vote(a: &RelevanceAnnotation) -> Result<Vote> {
    if derive_relevance(a)? == Relevance::Relevant {
        return Ok(Vote::Relevant);
    }
    // An unsure claim on an otherwise admissible tweet stays distinguishable.
    let unsure = a.filter == Filter::Relevant
        && a.factual_claim == Some(FactualClaim::NotSure)
        && a.personal == Some(false)
        && a.humor == Some(false);
    Ok(Vote::Gold(if unsure {
        GoldClass::NotSure
    } else {
        GoldClass::Irrelevant
    }))
}

/// Strict-majority vote over at least two same-tweet, same-phase annotations.
pub fn adjudicate(annotations: &[Annotation]) -> Result<Verdict> {
    if annotations.len() < 2 {
        return Err(Error::invalid(format!(
            "adjudication needs at least 2 annotations, got {}",
            annotations.len()
        )));
    }
    let first = &annotations[0];
    for a in &annotations[1..] {
        if a.tweet_id() != first.tweet_id() {
            return Err(Error::invalid(format!(
                "mixed tweet ids {:?} and {:?}",
                first.tweet_id(),
                a.tweet_id()
            )));
        }
        if a.phase() != first.phase() {
            return Err(Error::invalid("mixed annotation phases"));
        }
    }

    let mut tally: BTreeMap<Vote, usize> = BTreeMap::new();
    for a in annotations {
        let vote = match a {
            Annotation::Relevance(r) => relevance_vote(r)?,
            Annotation::Truth(t) => Vote::Gold(t.truth.into()),
        };
        *tally.entry(vote).or_default() += 1;
    }
    let winner = tally
        .into_iter()
        .find(|(_, count)| 2 * count > annotations.len())
        .map(|(vote, _)| vote);
    Ok(match winner {
        Some(Vote::Relevant) => Verdict::Relevant,
        Some(Vote::Gold(g)) => Verdict::Final(g),
        None => Verdict::Final(GoldClass::NoConsensus),
    })
}

/// Combines both phases into the tweet's gold label. Errors when the
/// relevance verdict is `Relevant` but truth votes are missing.
pub fn gold_label(relevance: &[Annotation], truth: &[Annotation]) -> Result<GoldLabel> {
    let tweet_id = relevance
        .first()
        .map(|a| a.tweet_id().to_string())
        .ok_or(Error::Empty("relevance annotations"))?;
    let label = match adjudicate(relevance)? {
        Verdict::Final(g) => g,
        Verdict::Relevant => match adjudicate(truth)? {
            Verdict::Final(g) => g,
            Verdict::Relevant => unreachable!("truth votes never yield Relevant"),
        },
    };
    if let Some(t) = truth.first() {
        if t.tweet_id() != tweet_id {
            return Err(Error::invalid("relevance and truth votes are for different tweets"));
        }
    }
    Ok(GoldLabel { tweet_id, label })
}

/// Contingency table between two annotators, rows = first annotator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contingency<T> {
    pub labels: Vec<T>,
    pub counts: Vec<Vec<usize>>,
}

pub fn contingency<T: Ord + Clone>(labels_a: &[T], labels_b: &[T]) -> Result<Contingency<T>> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    let mut labels: Vec<T> = labels_a.iter().chain(labels_b).cloned().collect();
    labels.sort();
    labels.dedup();
    let index = |x: &T| labels.binary_search(x).expect("label collected above");
    let mut counts = vec![vec![0; labels.len()]; labels.len()];
    for (a, b) in labels_a.iter().zip(labels_b) {
        counts[index(a)][index(b)] += 1;
    }
    Ok(Contingency { labels, counts })
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`, with chance agreement taken from
/// each annotator's marginal label frequencies.
pub fn cohen_kappa<T: Ord + Clone>(labels_a: &[T], labels_b: &[T]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    if labels_a.is_empty() {
        return Err(Error::Empty("kappa inputs"));
    }
    let n = labels_a.len() as f64;
    let mut marg_a: BTreeMap<&T, usize> = BTreeMap::new();
    let mut marg_b: BTreeMap<&T, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (a, b) in labels_a.iter().zip(labels_b) {
        *marg_a.entry(a).or_default() += 1;
        *marg_b.entry(b).or_default() += 1;
        if a == b {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marg_a
        .iter()
        .map(|(label, ca)| {
            let cb = marg_b.get(label).copied().unwrap_or(0);
            (*ca as f64 / n) * (cb as f64 / n)
        })
        .sum();
    if p_e >= 1.0 {
        // Both annotators used one and the same label throughout.
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub label: GoldClass,
    pub count: usize,
    /// Share of all labels in percent, rounded half-up to two decimals.
    pub percentage: f64,
}

fn percent_half_up(count: usize, total: usize) -> f64 {
    let hundredths = (count as u128 * 20_000 + total as u128) / (2 * total as u128);
    hundredths as f64 / 100.0
}

pub fn label_distribution(gold: &[GoldLabel]) -> Result<Vec<DistributionRow>> {
    if gold.is_empty() {
        return Err(Error::Empty("gold labels"));
    }
    let mut counts: BTreeMap<GoldClass, usize> = BTreeMap::new();
    for g in gold {
        *counts.entry(g.label).or_default() += 1;
    }
    let mut rows: Vec<DistributionRow> = counts
        .into_iter()
        .map(|(label, count)| DistributionRow {
            label,
            count,
            percentage: percent_half_up(count, gold.len()),
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count));
    Ok(rows)
}

#[derive(Debug, Serialize, Deserialize)]
struct GoldRow {
    tweet_id: String,
    label: String,
}

pub fn read_gold<R: Read>(reader: R) -> Result<Vec<GoldLabel>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (idx, row) in rdr.deserialize::<GoldRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: "gold labels".into(),
            line: idx + 2,
            message: e.to_string(),
        })?;
        out.push(GoldLabel {
            tweet_id: row.tweet_id,
            label: row.label.parse()?,
        });
    }
    Ok(out)
}

pub fn write_gold<W: Write>(writer: W, gold: &[GoldLabel]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["tweet_id", "label"])?;
    for g in gold {
        wtr.write_record([g.tweet_id.as_str(), g.label.as_str()])?;
    }
    wtr.flush().map_err(|e| Error::io("gold labels", e))
}

pub const RELEVANCE_COLUMNS: [&str; 8] = [
    "tweet_url",
    "text",
    "urls",
    "date",
    "filter",
    "personal",
    "humor",
    "factual_claim",
];
pub const TRUTH_COLUMNS: [&str; 5] = ["tweet_url", "text", "urls", "date", "truth"];

/// Link that identifies a tweet without exposing its author.
pub fn anonymized_url(tweet_id: &str) -> String {
    format!("https://twitter.com/i/web/status/{tweet_id}")
}

fn tweet_columns(tweet: &Tweet) -> [String; 4] {
    [
        anonymized_url(&tweet.id),
        tweet.text.clone(),
        tweet.urls.join(" "),
        tweet.posted_at.map(|d| d.to_string()).unwrap_or_default(),
    ]
}

fn enum_str<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

/// Writes one annotator's relevance sheet in the guideline's column layout.
pub fn write_relevance_sheet<W: Write>(writer: W, rows: &[(&Tweet, &RelevanceAnnotation)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(RELEVANCE_COLUMNS)?;
    for (tweet, a) in rows {
        let opt_bool = |b: Option<bool>| b.map(|v| v.to_string()).unwrap_or_default();
        let [url, text, urls, date] = tweet_columns(tweet);
        wtr.write_record([
            url,
            text,
            urls,
            date,
            enum_str(&a.filter),
            opt_bool(a.personal),
            opt_bool(a.humor),
            a.factual_claim.as_ref().map(enum_str).unwrap_or_default(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("relevance sheet", e))
}

pub fn write_truth_sheet<W: Write>(writer: W, rows: &[(&Tweet, &TruthAnnotation)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TRUTH_COLUMNS)?;
    for (tweet, a) in rows {
        let [url, text, urls, date] = tweet_columns(tweet);
        wtr.write_record([url, text, urls, date, enum_str(&a.truth)])?;
    }
    wtr.flush().map_err(|e| Error::io("truth sheet", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(annotator: &str, filter: Filter, flags: Option<(bool, bool, FactualClaim)>) -> RelevanceAnnotation {
        RelevanceAnnotation {
            tweet_id: "t1".into(),
            annotator_id: annotator.into(),
            filter,
            personal: flags.map(|f| f.0),
            humor: flags.map(|f| f.1),
            factual_claim: flags.map(|f| f.2),
        }
    }

    fn truth(annotator: &str, t: Truth) -> Annotation {
        Annotation::Truth(TruthAnnotation {
            tweet_id: "t1".into(),
            annotator_id: annotator.into(),
            truth: t,
        })
    }

    #[test]
    fn relevance_mapping() {
        assert_eq!(
            derive_relevance(&rel("a", Filter::NonIndonesia, None)).unwrap(),
            Relevance::Irrelevant
        );
        assert_eq!(
            derive_relevance(&rel("a", Filter::Relevant, Some((false, false, FactualClaim::True)))).unwrap(),
            Relevance::Relevant
        );
        assert_eq!(
            derive_relevance(&rel("a", Filter::Relevant, Some((true, false, FactualClaim::True)))).unwrap(),
            Relevance::Irrelevant
        );
        assert_eq!(
            derive_relevance(&rel("a", Filter::Relevant, Some((false, true, FactualClaim::True)))).unwrap(),
            Relevance::Irrelevant
        );
        assert_eq!(
            derive_relevance(&rel("a", Filter::Relevant, Some((false, false, FactualClaim::NotSure)))).unwrap(),
            Relevance::Irrelevant
        );
    }

    #[test]
    fn relevance_invariant_violations() {
        let mut a = rel("a", Filter::OutOfTopic, None);
        a.humor = Some(true);
        assert!(derive_relevance(&a).is_err());
        let mut b = rel("a", Filter::Relevant, Some((false, false, FactualClaim::True)));
        b.factual_claim = None;
        assert!(b.validate().is_err());
    }

    #[test]
    fn truth_adjudication() {
        let v = adjudicate(&[truth("a", Truth::Misinformation), truth("b", Truth::Misinformation)]);
        assert_eq!(v.unwrap(), Verdict::Final(GoldClass::Misinformation));
        let v = adjudicate(&[truth("a", Truth::True), truth("b", Truth::Misinformation)]);
        assert_eq!(v.unwrap(), Verdict::Final(GoldClass::NoConsensus));
        let v = adjudicate(&[
            truth("a", Truth::NotSure),
            truth("b", Truth::NotSure),
            truth("c", Truth::True),
        ]);
        assert_eq!(v.unwrap(), Verdict::Final(GoldClass::NotSure));
    }

    #[test]
    fn relevance_adjudication() {
        let relevant = Some((false, false, FactualClaim::True));
        let votes = [
            Annotation::Relevance(rel("a", Filter::Relevant, relevant)),
            Annotation::Relevance(rel("b", Filter::Relevant, relevant)),
        ];
        assert_eq!(adjudicate(&votes).unwrap(), Verdict::Relevant);

        let votes = [
            Annotation::Relevance(rel("a", Filter::OutOfTopic, None)),
            Annotation::Relevance(rel("b", Filter::NonIndonesia, None)),
        ];
        assert_eq!(adjudicate(&votes).unwrap(), Verdict::Final(GoldClass::Irrelevant));

        let unsure = Some((false, false, FactualClaim::NotSure));
        let votes = [
            Annotation::Relevance(rel("a", Filter::Relevant, unsure)),
            Annotation::Relevance(rel("b", Filter::Relevant, unsure)),
        ];
        assert_eq!(adjudicate(&votes).unwrap(), Verdict::Final(GoldClass::NotSure));
    }

    #[test]
    fn adjudication_errors() {
        assert!(adjudicate(&[truth("a", Truth::True)]).is_err());
        let mut other = truth("b", Truth::True);
        if let Annotation::Truth(t) = &mut other {
            t.tweet_id = "t2".into();
        }
        assert!(adjudicate(&[truth("a", Truth::True), other]).is_err());
        let mixed = [
            truth("a", Truth::True),
            Annotation::Relevance(rel("b", Filter::OutOfTopic, None)),
        ];
        assert!(adjudicate(&mixed).is_err());
    }

    #[test]
    fn gold_label_combines_phases() {
        let relevant = Some((false, false, FactualClaim::True));
        let relevance = [
            Annotation::Relevance(rel("a", Filter::Relevant, relevant)),
            Annotation::Relevance(rel("b", Filter::Relevant, relevant)),
        ];
        let truths = [truth("a", Truth::Misinformation), truth("b", Truth::Misinformation)];
        assert_eq!(
            gold_label(&relevance, &truths).unwrap().label,
            GoldClass::Misinformation
        );
        assert!(gold_label(&relevance, &[]).is_err());
    }

    #[test]
    fn kappa_perfect_agreement() {
        let a = ["x", "y", "x", "z"];
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["x", "x"], &["x", "x"]).unwrap(), 1.0);
    }

    #[test]
    fn kappa_hand_evaluated() {
        // 40 agree on A, 40 agree on B, 10 A/B and 10 B/A disagreements:
        // p_o = 0.8, p_e = 0.5*0.5 + 0.5*0.5 = 0.5, kappa = 0.3 / 0.5.
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (x, y, n) in [("A", "A", 40), ("B", "B", 40), ("A", "B", 10), ("B", "A", 10)] {
            for _ in 0..n {
                a.push(x);
                b.push(y);
            }
        }
        assert!((cohen_kappa(&a, &b).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn kappa_errors() {
        assert!(matches!(
            cohen_kappa(&["a"], &["a", "b"]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(cohen_kappa::<&str>(&[], &[]).is_err());
    }

    fn golds(counts: &[(GoldClass, usize)]) -> Vec<GoldLabel> {
        let mut out = Vec::new();
        for &(label, n) in counts {
            for i in 0..n {
                out.push(GoldLabel {
                    tweet_id: format!("{label}-{i}"),
                    label,
                });
            }
        }
        out
    }

    #[test]
    fn distribution_percentages() {
        let rows = label_distribution(&golds(&[
            (GoldClass::Irrelevant, 2059),
            (GoldClass::Misinformation, 404),
            (GoldClass::True, 2037),
        ]))
        .unwrap();
        assert_eq!(rows[0].label, GoldClass::Irrelevant);
        let irr = rows.iter().find(|r| r.label == GoldClass::Irrelevant).unwrap();
        assert_eq!(irr.percentage, 45.76);
        let mis = rows.iter().find(|r| r.label == GoldClass::Misinformation).unwrap();
        assert_eq!(mis.percentage, 8.98);

        let single = label_distribution(&golds(&[(GoldClass::NeedExpert, 1)])).unwrap();
        assert_eq!(single[0].percentage, 100.0);
        assert!(label_distribution(&[]).is_err());
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(percent_half_up(1, 8), 12.5);
        // 1/800 = 0.125% rounds up to 0.13.
        assert_eq!(percent_half_up(1, 800), 0.13);
        assert_eq!(percent_half_up(1, 3), 33.33);
        assert_eq!(percent_half_up(2, 3), 66.67);
    }

    #[test]
    fn gold_csv_round_trip() {
        let g = golds(&[(GoldClass::NoConsensus, 2), (GoldClass::True, 1)]);
        let mut buf = Vec::new();
        write_gold(&mut buf, &g).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("tweet_id,label\n"));
        assert_eq!(read_gold(buf.as_slice()).unwrap(), g);
        assert_eq!("Need Expert".parse::<GoldClass>().unwrap(), GoldClass::NeedExpert);
    }

    #[test]
    fn relevance_sheet_columns() {
        let tweet = Tweet::new("42", "Vaksin, aman?");
        let a = rel("a", Filter::Relevant, Some((false, false, FactualClaim::NotSure)));
        let mut buf = Vec::new();
        write_relevance_sheet(&mut buf, &[(&tweet, &a)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RELEVANCE_COLUMNS.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "https://twitter.com/i/web/status/42,\"Vaksin, aman?\",,,relevant,false,false,not-sure"
        );
    }

    fn brute_kappa(a: &[u8], b: &[u8]) -> f64 {
        let k = 6;
        let mut table = vec![vec![0f64; k]; k];
        for (&x, &y) in a.iter().zip(b) {
            table[x as usize][y as usize] += 1.0;
        }
        let n = a.len() as f64;
        let trace: f64 = (0..k).map(|i| table[i][i]).sum();
        let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..k).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        let p_o = trace / n;
        let p_e: f64 = (0..k).map(|i| rows[i] * cols[i]).sum::<f64>() / (n * n);
        if p_e == 1.0 {
            1.0
        } else {
            (p_o - p_e) / (1.0 - p_e)
        }
    }

    fn pairs() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        (1usize..200).prop_flat_map(|n| (prop::collection::vec(0u8..6, n), prop::collection::vec(0u8..6, n)))
    }

    proptest! {
        #[test]
        fn kappa_matches_contingency_oracle((a, b) in pairs()) {
            let k = cohen_kappa(&a, &b).unwrap();
            prop_assert!((k - brute_kappa(&a, &b)).abs() < 1e-9);
            prop_assert!((k - cohen_kappa(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&k));
        }

        #[test]
        fn adjudication_is_permutation_invariant(votes in prop::collection::vec(0usize..4, 2..7), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let values = [Truth::True, Truth::Misinformation, Truth::NotSure, Truth::NeedExpert];
            let ann: Vec<_> = votes.iter().enumerate().map(|(i, v)| truth(&i.to_string(), values[*v])).collect();
            let mut shuffled = ann.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(adjudicate(&ann).unwrap(), adjudicate(&shuffled).unwrap());
        }

        #[test]
        fn percentages_sum_to_hundred(counts in prop::collection::vec(1usize..5000, 1..7)) {
            let spec: Vec<_> = counts.iter().zip(GoldClass::ALL).map(|(n, g)| (g, *n)).collect();
            let rows = label_distribution(&golds(&spec)).unwrap();
            let sum: f64 = rows.iter().map(|r| r.percentage).sum();
            prop_assert!((sum - 100.0).abs() <= 0.05, "{}", sum);
        }

        #[test]
        fn non_relevant_filter_is_irrelevant(non_indonesia in any::<bool>()) {
            let filter = if non_indonesia { Filter::NonIndonesia } else { Filter::OutOfTopic };
            prop_assert_eq!(derive_relevance(&rel("a", filter, None)).unwrap(), Relevance::Irrelevant);
        }
    }
}
