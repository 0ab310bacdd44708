use misinfo_core::corpus::{filter_keywords, load_corpus, sample, top_ngrams, KeywordQuery, QueryMode};

use super::{jsonl, Context};
use crate::args::{CorpusCommand, FilterArgs, Mode, NgramArgs, SampleArgs};
use crate::{emit, CliResult};

pub(crate) fn run(ctx: &Context, cmd: CorpusCommand) -> CliResult<()> {
    match cmd {
        CorpusCommand::Filter(a) => filter(ctx, a),
        CorpusCommand::Sample(a) => sample_cmd(ctx, a),
        CorpusCommand::Ngrams(a) => ngrams(ctx, a),
    }
}

fn filter(ctx: &Context, a: FilterArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.input])?;
    let mut tweets = load_corpus(&a.input)?;
    let before = tweets.len();
    if !a.keywords.is_empty() {
        let mode = match a.mode {
            Mode::Include => QueryMode::Include,
            Mode::Exclude => QueryMode::Exclude,
        };
        tweets = filter_keywords(&tweets, &KeywordQuery::new(&a.keywords, mode)?);
    }
    if a.exclude_malay {
        tweets = filter_keywords(&tweets, &KeywordQuery::malay_exclusion());
    }
    tracing::info!(kept = tweets.len(), dropped = before - tweets.len(), "filtered corpus");
    emit(ctx.out(), &jsonl(&tweets))
}

fn sample_cmd(ctx: &Context, a: SampleArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.input])?;
    let tweets = load_corpus(&a.input)?;
    let picked = sample(&tweets, a.count, ctx.seed)?;
    tracing::info!(count = picked.len(), seed = ctx.seed, "sampled corpus");
    emit(ctx.out(), &jsonl(&picked))
}

fn ngrams(ctx: &Context, a: NgramArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.input])?;
    let tweets = load_corpus(&a.input)?;
    let mut out = String::from("ngram\tcount\n");
    for (gram, count) in top_ngrams(&tweets, a.n, a.top)? {
        out.push_str(&format!("{gram}\t{count}\n"));
    }
    emit(ctx.out(), out.as_bytes())
}
