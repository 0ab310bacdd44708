//! Annotation task service.
//!
//! Tweets are handed out in corpus order, one open assignment per annotator
//! and phase. Answers and assignments go to an append-only JSON-lines log;
//! the in-memory state is rebuilt from it at startup. The truth phase only
//! serves tweets whose relevance votes adjudicate to relevant.

mod error;
pub mod http;
mod log;
mod service;
mod state;

pub use error::{ServiceError, ServiceResult};
pub use http::{router, serve};
pub use log::{Log, Record};
pub use service::{AnnotationService, ExportFormat};
pub use state::{agreement_label, Agreement, Next, Progress, State, TaskAssignment};
