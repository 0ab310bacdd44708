use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use misinfo_core::annotation::{Annotation, Phase};
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum Record {
    Assignment {
        tweet_id: String,
        annotator_id: String,
        phase: Phase,
        assigned_at: DateTime<Utc>,
    },
    Annotation {
        annotation: Annotation,
        recorded_at: DateTime<Utc>,
    },
}

/// Append-only JSON-lines log. Every append is flushed to disk before it
/// returns.
#[derive(Debug)]
pub struct Log {
    path: PathBuf,
    file: File,
}

impl Log {
    /// Opens or creates the log and returns the records already in it. An
    /// unterminated final line is a write cut short by a crash; it is dropped
    /// and truncated away. Any other malformed line is an error.
    pub fn open(path: impl AsRef<Path>) -> ServiceResult<(Log, Vec<Record>)> {
        let path = path.as_ref().to_path_buf();
        let io = |e| ServiceError::Storage(format!("{}: {e}", path.display()));
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io)?;
        let mut records = Vec::new();
        let mut good_len = 0u64;
        let mut reader = BufReader::new(&file);
        let mut line = String::new();
        let mut line_no = 0;
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            if !line.ends_with('\n') {
                tracing::warn!(path = %path.display(), line = line_no, "dropping torn final log line");
                break;
            }
            if !line.trim().is_empty() {
                let rec = serde_json::from_str(&line)
                    .map_err(|e| ServiceError::Storage(format!("{}:{line_no}: corrupt record: {e}", path.display())))?;
                records.push(rec);
            }
            good_len += n as u64;
        }
        drop(reader);
        if file.metadata().map_err(io)?.len() != good_len {
            file.set_len(good_len).map_err(io)?;
            file.sync_all().map_err(io)?;
        }
        file.seek(SeekFrom::End(0)).map_err(io)?;
        Ok((Log { path, file }, records))
    }

    /// Reads the records without creating, repairing or locking the file.
    pub fn read(path: impl AsRef<Path>) -> ServiceResult<Vec<Record>> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))?;
        let complete = match text.rfind('\n') {
            Some(end) => &text[..=end],
            None => "",
        };
        complete
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| ServiceError::Storage(format!("{}:{}: corrupt record: {e}", path.display(), i + 1)))
            })
            .collect()
    }

    pub fn append(&mut self, record: &Record) -> ServiceResult<()> {
        let mut line = serde_json::to_vec(record).map_err(|e| ServiceError::Storage(e.to_string()))?;
        line.push(b'\n');
        let io = |e| ServiceError::Storage(format!("{}: {e}", self.path.display()));
        self.file.write_all(&line).map_err(io)?;
        self.file.sync_data().map_err(io)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use misinfo_core::annotation::{Truth, TruthAnnotation};

    fn truth(id: &str) -> Record {
        Record::Annotation {
            annotation: Annotation::Truth(TruthAnnotation {
                tweet_id: id.into(),
                annotator_id: "a".into(),
                truth: Truth::True,
            }),
            recorded_at: DateTime::from_timestamp(0, 0).unwrap(),
        }
    }

    #[test]
    fn round_trip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        {
            let (mut log, recs) = Log::open(&path).unwrap();
            assert!(recs.is_empty());
            log.append(&truth("1")).unwrap();
            log.append(&truth("2")).unwrap();
        }
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 5]).unwrap();
        let (mut log, recs) = Log::open(&path).unwrap();
        assert_eq!(recs, vec![truth("1")]);
        log.append(&truth("3")).unwrap();
        drop(log);
        let (_, recs) = Log::open(&path).unwrap();
        assert_eq!(recs, vec![truth("1"), truth("3")]);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(b"{\"rec");
        std::fs::write(&path, &bytes).unwrap();
        assert_eq!(Log::read(&path).unwrap(), recs);
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        std::fs::write(&path, "{oops}\n").unwrap();
        assert!(matches!(Log::open(&path), Err(ServiceError::Storage(_))));
    }
}
