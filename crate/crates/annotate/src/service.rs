use std::path::Path;
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::Utc;
use misinfo_core::annotation::{write_gold, write_relevance_sheet, write_truth_sheet, Annotation, GoldLabel, Phase};
use misinfo_core::corpus::Tweet;

use crate::error::{ServiceError, ServiceResult};
use crate::log::Log;
use crate::state::{Agreement, Next, Progress, State, TaskAssignment};

#[derive(Debug)]
struct Inner {
    state: State,
    /// `None` for a read-only replay.
    log: Option<Log>,
}

/// Shared annotation state. Reads run concurrently; every write goes through
/// one lock and is durable in the log before the call returns.
#[derive(Debug)]
pub struct AnnotationService {
    inner: RwLock<Inner>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for ExportFormat {
    type Err = ServiceError;

    fn from_str(s: &str) -> ServiceResult<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "jsonl" => Ok(ExportFormat::Jsonl),
            other => Err(ServiceError::Invalid(format!("unknown export format {other:?}"))),
        }
    }
}

impl AnnotationService {
    /// Rebuilds state by replaying the log at `log_path`, creating it if needed.
    pub fn open(tweets: Vec<Tweet>, annotators: Vec<String>, log_path: impl AsRef<Path>) -> ServiceResult<Self> {
        let (log, records) = Log::open(log_path)?;
        let mut state = State::new(tweets, annotators)?;
        for r in &records {
            state.apply(r)?;
        }
        tracing::info!(path = %log.path().display(), records = records.len(), "replayed annotation log");
        Ok(AnnotationService {
            inner: RwLock::new(Inner { state, log: Some(log) }),
        })
    }

    /// Replays the log without touching it. Writes fail.
    pub fn open_read_only(
        tweets: Vec<Tweet>,
        annotators: Vec<String>,
        log_path: impl AsRef<Path>,
    ) -> ServiceResult<Self> {
        let mut state = State::new(tweets, annotators)?;
        for r in &Log::read(log_path)? {
            state.apply(r)?;
        }
        Ok(AnnotationService {
            inner: RwLock::new(Inner { state, log: None }),
        })
    }

    fn append(inner: &mut Inner, record: &crate::log::Record) -> ServiceResult<()> {
        match inner.log.as_mut() {
            Some(log) => log.append(record),
            None => Err(ServiceError::Invalid("the service was opened read-only".into())),
        }?;
        inner.state.apply(record)
    }

    fn read(&self) -> ServiceResult<RwLockReadGuard<'_, Inner>> {
        self.inner
            .read()
            .map_err(|_| ServiceError::Storage("state lock poisoned".into()))
    }

    fn write(&self) -> ServiceResult<RwLockWriteGuard<'_, Inner>> {
        self.inner
            .write()
            .map_err(|_| ServiceError::Storage("state lock poisoned".into()))
    }

    /// A copy of the current in-memory state.
    pub fn snapshot(&self) -> ServiceResult<State> {
        Ok(self.read()?.state.clone())
    }

    pub fn next_task(&self, annotator: &str, phase: Phase) -> ServiceResult<Option<TaskAssignment>> {
        match self.read()?.state.plan_next(annotator, phase, Utc::now())? {
            Next::Open(t) => return Ok(Some(t)),
            Next::Exhausted => return Ok(None),
            Next::New(..) => {}
        }
        let mut inner = self.write()?;
        match inner.state.plan_next(annotator, phase, Utc::now())? {
            Next::Open(t) => Ok(Some(t)),
            Next::Exhausted => Ok(None),
            Next::New(record, task) => {
                Self::append(&mut inner, &record)?;
                Ok(Some(task))
            }
        }
    }

    pub fn submit(&self, annotation: &Annotation) -> ServiceResult<()> {
        let mut inner = self.write()?;
        let record = inner.state.check_submission(annotation, Utc::now())?;
        Self::append(&mut inner, &record)
    }

    pub fn progress(&self, phase: Phase) -> ServiceResult<Progress> {
        Ok(self.read()?.state.progress(phase))
    }

    /// Agreement between `pair`, or the first two registered annotators.
    pub fn agreement(&self, phase: Phase, pair: Option<(&str, &str)>) -> ServiceResult<Agreement> {
        let inner = self.read()?;
        match pair {
            Some((a, b)) => inner.state.agreement(phase, a, b),
            None => match inner.state.annotators() {
                [a, b, ..] => inner.state.agreement(phase, a, b),
                _ => Err(ServiceError::Invalid("agreement needs two annotators".into())),
            },
        }
    }

    /// CSV uses the guideline sheet layout and therefore covers one
    /// annotator; JSONL holds full records, optionally for one annotator.
    pub fn export(&self, phase: Phase, format: ExportFormat, annotator: Option<&str>) -> ServiceResult<Vec<u8>> {
        let inner = self.read()?;
        let state = &inner.state;
        let mut out = Vec::new();
        match format {
            ExportFormat::Csv => {
                let a = annotator.ok_or_else(|| ServiceError::Invalid("csv export needs an annotator".into()))?;
                match phase {
                    Phase::Relevance => write_relevance_sheet(&mut out, &state.relevance_rows(a)?)?,
                    Phase::Truth => write_truth_sheet(&mut out, &state.truth_rows(a)?)?,
                }
            }
            ExportFormat::Jsonl => {
                for (_, ann) in state.records(phase, annotator)? {
                    serde_json::to_writer(&mut out, ann).map_err(|e| ServiceError::Storage(e.to_string()))?;
                    out.push(b'\n');
                }
            }
        }
        Ok(out)
    }

    pub fn gold(&self) -> ServiceResult<Vec<GoldLabel>> {
        Ok(self.read()?.state.gold())
    }

    pub fn gold_csv(&self) -> ServiceResult<Vec<u8>> {
        let mut out = Vec::new();
        write_gold(&mut out, &self.gold()?)?;
        Ok(out)
    }
}
