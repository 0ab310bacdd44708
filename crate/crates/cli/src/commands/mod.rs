mod annotate;
mod corpus;
mod dataset;
mod experiment;

use std::path::{Path, PathBuf};

use misinfo_core::eval::{ExperimentConfig, DEFAULT_SEED};

use crate::args::{Cli, Command};
use crate::{invalid, CliResult};

/// Flags shared by every verb, resolved once per invocation.
pub(crate) struct Context {
    pub seed: u64,
    pub config: Option<ExperimentConfig>,
    pub out: Option<PathBuf>,
}

impl Context {
    fn new(cli: &Cli) -> CliResult<Self> {
        let mut config = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
        let seed = cli.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(DEFAULT_SEED);
        if let Some(c) = config.as_mut() {
            c.seed = seed;
        }
        Ok(Context {
            seed,
            config,
            out: cli.out.clone(),
        })
    }

    pub fn config(&self, verb: &str) -> CliResult<&ExperimentConfig> {
        self.config
            .as_ref()
            .ok_or_else(|| invalid(format!("{verb} needs --config <file>")))
    }

    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    /// Refuses an --out that would overwrite one of the inputs.
    pub fn check_inputs(&self, inputs: &[&Path]) -> CliResult<()> {
        let Some(out) = self.out() else { return Ok(()) };
        let out = out.canonicalize().unwrap_or_else(|_| out.to_path_buf());
        for input in inputs {
            if input.canonicalize().is_ok_and(|p| p == out) {
                return Err(invalid(format!(
                    "--out {} would overwrite an input file",
                    out.display()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn dispatch(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(&cli)?;
    tracing::info!(seed = ctx.seed, "starting");
    match cli.command {
        Command::Corpus(c) => corpus::run(&ctx, c),
        Command::Dataset(c) => dataset::run(&ctx, c),
        Command::Annotate(c) => annotate::run(&ctx, c),
        Command::Train(a) => experiment::train(&ctx, a),
        Command::Eval(c) => experiment::eval(&ctx, c),
        Command::Compare(a) => experiment::compare(&ctx, a),
        Command::Report(a) => experiment::report(&ctx, a),
    }
}

/// Serializes each item as one JSON line.
pub(crate) fn jsonl<T: serde::Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable value");
        out.push(b'\n');
    }
    out
}
