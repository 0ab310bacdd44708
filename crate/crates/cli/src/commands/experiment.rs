use std::fs;
use std::path::Path;

use misinfo_core::corpus::load_labeled;
use misinfo_core::eval::{
    documents, experiment_report, kfold_scores, label_strings, run_single, run_two_stage, ttest, FittedClassifier,
    Leaderboard, MetricsReport, TestMode, ALPHA, TARGET,
};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::args::{CompareArgs, EvalCommand, ReportArgs, TableFormat, TrainArgs};
use crate::{emit, invalid, io_err, out_dir, read_json, to_json, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct RunRecord {
    pub name: String,
    pub report: MetricsReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance_report: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub misinformation_report: Option<MetricsReport>,
    pub predictions: Vec<String>,
}

/// Contents of `runs.json`.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct RunsFile {
    pub seed: u64,
    pub mode: String,
    pub runs: Vec<RunRecord>,
}

/// Contents of a k-fold score file.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ScoreFile {
    pub name: String,
    pub k: usize,
    pub seed: u64,
    pub scores: Vec<f64>,
    pub mean: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScoreInput {
    File { name: Option<String>, scores: Vec<f64> },
    Bare(Vec<f64>),
}

pub(crate) fn train(ctx: &Context, a: TrainArgs) -> CliResult<()> {
    let cfg = ctx.config("train")?;
    let specs = cfg.specs();
    let spec = specs.get(a.classifier).ok_or_else(|| {
        invalid(format!(
            "--classifier {} is out of range; the config has {}",
            a.classifier,
            specs.len()
        ))
    })?;
    let dir = out_dir(ctx.out(), "train")?;
    let splits = cfg.load_splits()?;
    let (val_docs, val_y) = (documents(&splits.val), label_strings(&splits.val));
    let fitted = FittedClassifier::fit(
        spec,
        &documents(&splits.train),
        &label_strings(&splits.train),
        Some((&val_docs, &val_y)),
        &cfg.setup(),
    )?;
    fitted.save(&dir)?;
    tracing::info!(model = %spec.name(), synthetic = fitted.n_synthetic, dir = %dir.display(), "saved model");
    emit(None, format!("{}\t{}\n", spec.name(), dir.display()).as_bytes())
}

fn leaderboard_table(board: &Leaderboard) -> String {
    let width = board.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4) + 2;
    let mut s = format!(
        "target {}\n{:<width$}{:>10}{:>11}{:>8}{:>8}\n",
        board.target, "name", "accuracy", "precision", "recall", "f1"
    );
    for r in &board.rows {
        s.push_str(&format!(
            "{:<width$}{:>10.2}{:>11.2}{:>8.2}{:>8.2}\n",
            r.name, r.accuracy, r.precision, r.recall, r.f1
        ));
    }
    s
}

fn board_of(runs: &[RunRecord]) -> CliResult<Leaderboard> {
    let pairs: Vec<(String, MetricsReport)> = runs.iter().map(|r| (r.name.clone(), r.report.clone())).collect();
    Ok(experiment_report(&pairs)?)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))
}

pub(crate) fn eval(ctx: &Context, cmd: EvalCommand) -> CliResult<()> {
    let cfg = ctx.config("eval")?;
    let setup = cfg.setup();
    let specs = cfg.specs();
    let dir = out_dir(ctx.out(), "eval")?;

    let (mode, runs) = match cmd {
        EvalCommand::Kfold => return kfold(ctx, &dir),
        EvalCommand::Single => {
            let splits = cfg.load_splits()?;
            let runs = specs
                .iter()
                .map(|spec| {
                    tracing::info!(model = %spec.name(), "training");
                    let run = run_single(spec, &splits, &setup)?;
                    Ok(RunRecord {
                        name: run.name,
                        report: run.report,
                        relevance_report: None,
                        misinformation_report: None,
                        predictions: run.predictions,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            ("single", runs)
        }
        EvalCommand::TwoStage => {
            let [relevance, misinformation] = specs.as_slice() else {
                return Err(invalid(format!(
                    "eval two-stage needs exactly 2 classifiers (relevance, misinformation), got {}",
                    specs.len()
                )));
            };
            let splits = cfg.load_splits()?;
            let run = run_two_stage(relevance, misinformation, &splits, &setup)?;
            let violations = run.cascade_violations();
            if violations > 0 {
                return Err(invalid(format!("cascade produced {violations} inconsistent rows")));
            }
            let record = RunRecord {
                name: run.name,
                report: run.report,
                relevance_report: Some(run.relevance_report),
                misinformation_report: Some(run.misinformation_report),
                predictions: run.predictions,
            };
            ("two-stage", vec![record])
        }
    };

    let board = board_of(&runs)?;
    let mut grids = String::new();
    for r in &runs {
        grids.push_str(&format!("{}\n{}\n", r.name, r.report.confusion));
    }
    let file = RunsFile {
        seed: ctx.seed,
        mode: mode.to_string(),
        runs,
    };
    write(&dir, "runs.json", &to_json(&file))?;
    write(&dir, "leaderboard.csv", board.to_csv()?.as_bytes())?;
    write(&dir, "leaderboard.json", &to_json(&board))?;
    write(&dir, "confusion.txt", grids.as_bytes())?;
    emit(
        None,
        format!("seed {}\n{}\n{grids}", ctx.seed, leaderboard_table(&board)).as_bytes(),
    )
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

fn kfold(ctx: &Context, dir: &Path) -> CliResult<()> {
    let cfg = ctx.config("eval kfold")?;
    let full = cfg
        .data
        .full
        .as_ref()
        .ok_or_else(|| invalid("eval kfold needs data.full in the config"))?;
    let data = load_labeled(full)?;
    let setup = cfg.setup();
    let mut summary = format!("seed {}  k {}\n", ctx.seed, cfg.k);
    for (i, spec) in cfg.specs().iter().enumerate() {
        tracing::info!(model = %spec.name(), k = cfg.k, "cross-validating");
        let scores = kfold_scores(spec, &data, cfg.k, ctx.seed, &setup, TARGET)?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let file = ScoreFile {
            name: spec.name(),
            k: cfg.k,
            seed: ctx.seed,
            scores,
            mean,
        };
        let fname = format!("kfold-{i}-{}.json", slug(&file.name));
        write(dir, &fname, &to_json(&file))?;
        summary.push_str(&format!("{}\tmean f1 {:.2}\t{fname}\n", file.name, mean));
    }
    emit(None, summary.as_bytes())
}

fn read_scores(path: &Path) -> CliResult<(String, Vec<f64>)> {
    let fallback = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(match read_json::<ScoreInput>(path)? {
        ScoreInput::File { name, scores } => (name.unwrap_or(fallback), scores),
        ScoreInput::Bare(scores) => (fallback, scores),
    })
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    a: &'a str,
    b: &'a str,
    mode: TestMode,
    t: f64,
    p: f64,
    df: f64,
    alpha: f64,
    significant: bool,
}

pub(crate) fn compare(ctx: &Context, a: CompareArgs) -> CliResult<()> {
    let [pa, pb] = a.scores.as_slice() else {
        return Err(invalid("--scores takes exactly two files"));
    };
    let mode = if a.unpaired {
        TestMode::Unpaired
    } else {
        ctx.config.as_ref().map(|c| c.test_mode).unwrap_or_default()
    };
    let (name_a, sa) = read_scores(pa)?;
    let (name_b, sb) = read_scores(pb)?;
    let test = ttest(&sa, &sb, mode)?;
    let verdict = if test.significant {
        "significant"
    } else {
        "not significant"
    };
    let line = format!(
        "{name_a} vs {name_b}: t = {:.4}, p = {:.4}, df = {}, {verdict} at alpha {ALPHA}\n",
        test.t, test.p, test.df
    );
    emit(None, line.as_bytes())?;
    if let Some(out) = ctx.out() {
        let result = CompareOutput {
            a: &name_a,
            b: &name_b,
            mode,
            t: test.t,
            p: test.p,
            df: test.df,
            alpha: ALPHA,
            significant: test.significant,
        };
        emit(Some(out), &to_json(&result))?;
    }
    Ok(())
}

pub(crate) fn report(ctx: &Context, a: ReportArgs) -> CliResult<()> {
    let inputs: Vec<&Path> = a.runs.iter().map(|p| p.as_path()).collect();
    ctx.check_inputs(&inputs)?;
    let mut runs = Vec::new();
    for path in &a.runs {
        runs.extend(read_json::<RunsFile>(path)?.runs);
    }
    let board = board_of(&runs)?;
    let bytes = match a.format {
        TableFormat::Table => leaderboard_table(&board).into_bytes(),
        TableFormat::Csv => board.to_csv()?.into_bytes(),
        TableFormat::Json => to_json(&board),
    };
    emit(ctx.out(), &bytes)
}
