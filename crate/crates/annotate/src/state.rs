use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use misinfo_core::annotation::{
    adjudicate, cohen_kappa, contingency, derive_relevance, Annotation, GoldLabel, Phase, RelevanceAnnotation,
    TruthAnnotation, Verdict,
};
use misinfo_core::corpus::Tweet;
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};
use crate::log::Record;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAssignment {
    pub tweet: Tweet,
    pub phase: Phase,
    pub assigned_to: String,
    pub assigned_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub phase: Phase,
    /// Size of the phase's pool. For the truth phase this grows as relevance
    /// verdicts come in.
    pub total: usize,
    /// Pool tweets annotated by every registered annotator.
    pub fully_annotated: usize,
    pub per_annotator: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub phase: Phase,
    pub annotators: [String; 2],
    /// Tweets annotated by both annotators.
    pub n_items: usize,
    /// `None` until at least one tweet has both annotations.
    pub kappa: Option<f64>,
    pub labels: Vec<String>,
    /// Rows are the first annotator's labels.
    pub counts: Vec<Vec<usize>>,
}

/// What `next_task` should do.
#[derive(Debug, Clone, PartialEq)]
pub enum Next {
    /// An assignment already handed out and not yet answered.
    Open(TaskAssignment),
    /// A fresh assignment that must be logged before it is returned.
    New(Record, TaskAssignment),
    Exhausted,
}

/// In-memory index over the log. Tweets are served in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    tweets: Vec<Tweet>,
    position: HashMap<String, usize>,
    annotators: Vec<String>,
    assignments: HashMap<(Phase, String), BTreeMap<usize, DateTime<Utc>>>,
    annotations: BTreeMap<(Phase, usize), BTreeMap<String, Annotation>>,
}

/// The label compared for agreement: the derived relevant/irrelevant call for
/// relevance votes, the answer itself for truth votes.
pub fn agreement_label(a: &Annotation) -> ServiceResult<String> {
    let value = match a {
        Annotation::Relevance(r) => serde_json::to_value(derive_relevance(r)?),
        Annotation::Truth(t) => serde_json::to_value(t.truth),
    };
    match value {
        Ok(serde_json::Value::String(s)) => Ok(s),
        _ => Err(ServiceError::Storage("label did not serialize to a string".into())),
    }
}

impl State {
    pub fn new(tweets: Vec<Tweet>, annotators: Vec<String>) -> ServiceResult<Self> {
        if annotators.is_empty() {
            return Err(ServiceError::Invalid("at least one annotator is required".into()));
        }
        let mut sorted = annotators.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != annotators.len() {
            return Err(ServiceError::Invalid("duplicate annotator id".into()));
        }
        let mut position = HashMap::with_capacity(tweets.len());
        for (i, t) in tweets.iter().enumerate() {
            if position.insert(t.id.clone(), i).is_some() {
                return Err(ServiceError::Invalid(format!("duplicate tweet id {:?}", t.id)));
            }
        }
        Ok(State {
            tweets,
            position,
            annotators,
            assignments: HashMap::new(),
            annotations: BTreeMap::new(),
        })
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    fn check_annotator(&self, id: &str) -> ServiceResult<()> {
        if self.annotators.iter().any(|a| a == id) {
            Ok(())
        } else {
            Err(ServiceError::UnknownAnnotator(id.to_string()))
        }
    }

    fn pos(&self, tweet_id: &str) -> ServiceResult<usize> {
        self.position
            .get(tweet_id)
            .copied()
            .ok_or_else(|| ServiceError::Invalid(format!("unknown tweet {tweet_id:?}")))
    }

    /// Applies a record from the log. Records that do not fit the corpus or
    /// the annotator list are reported rather than skipped.
    pub fn apply(&mut self, record: &Record) -> ServiceResult<()> {
        let mismatch = |e: ServiceError| ServiceError::Storage(format!("log does not match service setup: {e}"));
        match record {
            Record::Assignment {
                tweet_id,
                annotator_id,
                phase,
                assigned_at,
            } => {
                self.check_annotator(annotator_id).map_err(mismatch)?;
                let pos = self.pos(tweet_id).map_err(mismatch)?;
                self.assignments
                    .entry((*phase, annotator_id.clone()))
                    .or_default()
                    .insert(pos, *assigned_at);
            }
            Record::Annotation { annotation, .. } => {
                self.check_annotator(annotation.annotator_id()).map_err(mismatch)?;
                let pos = self.pos(annotation.tweet_id()).map_err(mismatch)?;
                self.annotations
                    .entry((annotation.phase(), pos))
                    .or_default()
                    .insert(annotation.annotator_id().to_string(), annotation.clone());
            }
        }
        Ok(())
    }

    /// All registered annotators' votes for a tweet, once every one of them
    /// has voted.
    fn complete_votes(&self, phase: Phase, pos: usize) -> Option<Vec<Annotation>> {
        let votes = self.annotations.get(&(phase, pos))?;
        self.annotators.iter().map(|a| votes.get(a).cloned()).collect()
    }

    fn verdict(&self, phase: Phase, pos: usize) -> Option<Verdict> {
        let votes = self.complete_votes(phase, pos)?;
        adjudicate(&votes).ok()
    }

    fn in_pool(&self, phase: Phase, pos: usize) -> bool {
        match phase {
            Phase::Relevance => true,
            Phase::Truth => self.verdict(Phase::Relevance, pos) == Some(Verdict::Relevant),
        }
    }

    fn annotated_by(&self, phase: Phase, pos: usize, annotator: &str) -> bool {
        self.annotations
            .get(&(phase, pos))
            .is_some_and(|v| v.contains_key(annotator))
    }

    fn assignment(&self, pos: usize, phase: Phase, annotator: &str, at: DateTime<Utc>) -> TaskAssignment {
        TaskAssignment {
            tweet: self.tweets[pos].clone(),
            phase,
            assigned_to: annotator.to_string(),
            assigned_at: at,
        }
    }

    pub fn plan_next(&self, annotator: &str, phase: Phase, now: DateTime<Utc>) -> ServiceResult<Next> {
        self.check_annotator(annotator)?;
        let assigned = self.assignments.get(&(phase, annotator.to_string()));
        if let Some((&pos, &at)) = assigned
            .into_iter()
            .flatten()
            .find(|(&pos, _)| !self.annotated_by(phase, pos, annotator))
        {
            return Ok(Next::Open(self.assignment(pos, phase, annotator, at)));
        }
        let taken =
            |pos: usize| assigned.is_some_and(|m| m.contains_key(&pos)) || self.annotated_by(phase, pos, annotator);
        match (0..self.tweets.len()).find(|&pos| !taken(pos) && self.in_pool(phase, pos)) {
            Some(pos) => Ok(Next::New(
                Record::Assignment {
                    tweet_id: self.tweets[pos].id.clone(),
                    annotator_id: annotator.to_string(),
                    phase,
                    assigned_at: now,
                },
                self.assignment(pos, phase, annotator, now),
            )),
            None => Ok(Next::Exhausted),
        }
    }

    /// Checks a submission and returns the record to log.
    pub fn check_submission(&self, annotation: &Annotation, now: DateTime<Utc>) -> ServiceResult<Record> {
        annotation.validate()?;
        let annotator = annotation.annotator_id();
        self.check_annotator(annotator)
            .map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let pos = self.pos(annotation.tweet_id())?;
        let phase = annotation.phase();
        if self.annotated_by(phase, pos, annotator) {
            return Err(ServiceError::Duplicate {
                tweet: annotation.tweet_id().to_string(),
                annotator: annotator.to_string(),
                phase,
            });
        }
        let assigned = self
            .assignments
            .get(&(phase, annotator.to_string()))
            .is_some_and(|m| m.contains_key(&pos));
        if !assigned {
            return Err(ServiceError::NotAssigned {
                tweet: annotation.tweet_id().to_string(),
                annotator: annotator.to_string(),
                phase,
            });
        }
        Ok(Record::Annotation {
            annotation: annotation.clone(),
            recorded_at: now,
        })
    }

    pub fn progress(&self, phase: Phase) -> Progress {
        let pool: Vec<usize> = (0..self.tweets.len()).filter(|&p| self.in_pool(phase, p)).collect();
        let per_annotator = self
            .annotators
            .iter()
            .map(|a| {
                let n = pool.iter().filter(|&&p| self.annotated_by(phase, p, a)).count();
                (a.clone(), n)
            })
            .collect();
        let fully_annotated = pool
            .iter()
            .filter(|&&p| self.complete_votes(phase, p).is_some())
            .count();
        Progress {
            phase,
            total: pool.len(),
            fully_annotated,
            per_annotator,
        }
    }

    /// Cohen's kappa between two annotators over the tweets both annotated.
    /// Relevance votes are compared as the derived relevant/irrelevant call.
    pub fn agreement(&self, phase: Phase, a: &str, b: &str) -> ServiceResult<Agreement> {
        self.check_annotator(a)?;
        self.check_annotator(b)?;
        let mut la = Vec::new();
        let mut lb = Vec::new();
        for ((p, _), votes) in self.annotations.range((phase, 0)..=(phase, usize::MAX)) {
            debug_assert_eq!(*p, phase);
            if let (Some(x), Some(y)) = (votes.get(a), votes.get(b)) {
                la.push(agreement_label(x)?);
                lb.push(agreement_label(y)?);
            }
        }
        let (kappa, labels, counts) = if la.is_empty() {
            (None, Vec::new(), Vec::new())
        } else {
            let table = contingency(&la, &lb)?;
            (Some(cohen_kappa(&la, &lb)?), table.labels, table.counts)
        };
        Ok(Agreement {
            phase,
            annotators: [a.to_string(), b.to_string()],
            n_items: la.len(),
            kappa,
            labels,
            counts,
        })
    }

    /// Stored annotations of a phase in corpus order, then annotator id.
    pub fn records(&self, phase: Phase, annotator: Option<&str>) -> ServiceResult<Vec<(&Tweet, &Annotation)>> {
        if let Some(a) = annotator {
            self.check_annotator(a)?;
        }
        Ok(self
            .annotations
            .range((phase, 0)..=(phase, usize::MAX))
            .flat_map(|((_, pos), votes)| votes.iter().map(move |(who, ann)| (*pos, who, ann)))
            .filter(|(_, who, _)| annotator.is_none_or(|a| a == who.as_str()))
            .map(|(pos, _, ann)| (&self.tweets[pos], ann))
            .collect())
    }

    pub fn relevance_rows(&self, annotator: &str) -> ServiceResult<Vec<(&Tweet, &RelevanceAnnotation)>> {
        Ok(self
            .records(Phase::Relevance, Some(annotator))?
            .into_iter()
            .filter_map(|(t, a)| match a {
                Annotation::Relevance(r) => Some((t, r)),
                Annotation::Truth(_) => None,
            })
            .collect())
    }

    pub fn truth_rows(&self, annotator: &str) -> ServiceResult<Vec<(&Tweet, &TruthAnnotation)>> {
        Ok(self
            .records(Phase::Truth, Some(annotator))?
            .into_iter()
            .filter_map(|(t, a)| match a {
                Annotation::Truth(r) => Some((t, r)),
                Annotation::Relevance(_) => None,
            })
            .collect())
    }

    /// Gold labels for every tweet whose annotation is complete, in corpus order.
    pub fn gold(&self) -> Vec<GoldLabel> {
        (0..self.tweets.len())
            .filter_map(|pos| {
                let label = match self.verdict(Phase::Relevance, pos)? {
                    Verdict::Final(g) => g,
                    Verdict::Relevant => match self.verdict(Phase::Truth, pos)? {
                        Verdict::Final(g) => g,
                        Verdict::Relevant => return None,
                    },
                };
                Some(GoldLabel {
                    tweet_id: self.tweets[pos].id.clone(),
                    label,
                })
            })
            .collect()
    }
}
