use std::sync::Arc;

use misinfo_annotate::{serve, AnnotationService, ExportFormat};
use misinfo_core::annotation::Phase;
use misinfo_core::corpus::load_corpus;

use super::{jsonl, Context};
use crate::args::{AnnotateCommand, AnnotateExportArgs, RecordFormat, ServeArgs};
use crate::{emit, CliError, CliResult};

pub(crate) fn run(ctx: &Context, cmd: AnnotateCommand) -> CliResult<()> {
    match cmd {
        AnnotateCommand::Serve(a) => serve_cmd(a),
        AnnotateCommand::Export(a) => export(ctx, a),
    }
}

fn serve_cmd(a: ServeArgs) -> CliResult<()> {
    let tweets = load_corpus(&a.store.corpus)?;
    let service = AnnotationService::open(tweets, a.store.annotators, &a.store.log)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    runtime
        .block_on(serve(Arc::new(service), a.addr))
        .map_err(|e| CliError::Io(format!("{}: {e}", a.addr)))
}

fn export(ctx: &Context, a: AnnotateExportArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.store.corpus, &a.store.log])?;
    let tweets = load_corpus(&a.store.corpus)?;
    let service = AnnotationService::open_read_only(tweets, a.store.annotators, &a.store.log)?;
    let bytes = if a.gold {
        match a.format {
            RecordFormat::Csv => service.gold_csv()?,
            RecordFormat::Jsonl => jsonl(&service.gold()?),
        }
    } else {
        let phase: Phase = a.phase.as_deref().unwrap_or_default().parse()?;
        let format = match a.format {
            RecordFormat::Csv => ExportFormat::Csv,
            RecordFormat::Jsonl => ExportFormat::Jsonl,
        };
        service.export(phase, format, a.annotator.as_deref())?
    };
    emit(ctx.out(), &bytes)
}
