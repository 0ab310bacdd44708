use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use misinfo_annotate::{agreement_label, Agreement};
use misinfo_core::annotation::{
    cohen_kappa, contingency, label_distribution, read_gold, Annotation, DistributionRow, Phase,
};
use misinfo_core::corpus::{
    load_corpus, load_labeled, stratified_split, write_labeled, Label, LabeledTweet, SplitRatios,
};
use serde::Serialize;

use super::Context;
use crate::args::{DatasetCommand, ExportArgs, KappaArgs, SplitArgs, StatsArgs, TableFormat};
use crate::{emit, invalid, io_err, out_dir, to_json, CliResult};

pub(crate) fn run(ctx: &Context, cmd: DatasetCommand) -> CliResult<()> {
    match cmd {
        DatasetCommand::Split(a) => split(ctx, a),
        DatasetCommand::Stats(a) => stats(ctx, a),
        DatasetCommand::Kappa(a) => kappa(ctx, a),
        DatasetCommand::Export(a) => export(ctx, a),
    }
}

#[derive(Serialize)]
struct SplitManifest {
    seed: u64,
    ratios: [f64; 3],
    /// label -> [train, val, test]
    counts: BTreeMap<Label, [usize; 3]>,
}

fn split(ctx: &Context, a: SplitArgs) -> CliResult<()> {
    let ratios: SplitRatios = a.ratios.parse()?;
    let data = load_labeled(&a.input)?;
    let dir = out_dir(ctx.out(), "dataset split")?;
    let splits = stratified_split(&data, ratios, ctx.seed)?;
    let mut counts: BTreeMap<Label, [usize; 3]> = BTreeMap::new();
    for (i, part) in [&splits.train, &splits.val, &splits.test].into_iter().enumerate() {
        for t in part {
            counts.entry(t.label).or_default()[i] += 1;
        }
    }
    for (name, part) in [("train", &splits.train), ("val", &splits.val), ("test", &splits.test)] {
        let path = dir.join(format!("{name}.csv"));
        if fs::canonicalize(&path).ok() == fs::canonicalize(&a.input).ok() && path.exists() {
            return Err(invalid(format!("{} would overwrite the input", path.display())));
        }
        write_labeled(&path, part)?;
    }
    let manifest = SplitManifest {
        seed: ctx.seed,
        ratios: [ratios.train, ratios.val, ratios.test],
        counts,
    };
    let path = dir.join("split.json");
    fs::write(&path, to_json(&manifest)).map_err(|e| io_err(&path, e))?;

    let mut table = format!(
        "seed {}\n{:<16}{:>8}{:>8}{:>8}\n",
        ctx.seed, "label", "train", "val", "test"
    );
    let mut total = [0usize; 3];
    for (label, c) in &manifest.counts {
        table.push_str(&format!("{:<16}{:>8}{:>8}{:>8}\n", label.as_str(), c[0], c[1], c[2]));
        for i in 0..3 {
            total[i] += c[i];
        }
    }
    table.push_str(&format!(
        "{:<16}{:>8}{:>8}{:>8}\n",
        "total", total[0], total[1], total[2]
    ));
    emit(None, table.as_bytes())
}

pub(crate) fn distribution_table(rows: &[DistributionRow], format: TableFormat) -> CliResult<Vec<u8>> {
    let total: usize = rows.iter().map(|r| r.count).sum();
    Ok(match format {
        TableFormat::Table => {
            let mut s = format!("{:<16}{:>8}{:>12}\n", "label", "count", "percentage");
            for r in rows {
                s.push_str(&format!(
                    "{:<16}{:>8}{:>12.2}\n",
                    r.label.as_str(),
                    r.count,
                    r.percentage
                ));
            }
            s.push_str(&format!("{:<16}{:>8}{:>12.2}\n", "total", total, 100.0));
            s.into_bytes()
        }
        TableFormat::Csv => {
            let mut s = String::from("label,count,percentage\n");
            for r in rows {
                s.push_str(&format!("{},{},{:.2}\n", r.label.as_str(), r.count, r.percentage));
            }
            s.into_bytes()
        }
        TableFormat::Json => to_json(&rows),
    })
}

fn stats(ctx: &Context, a: StatsArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.gold])?;
    let file = fs::File::open(&a.gold).map_err(|e| io_err(&a.gold, e))?;
    let gold = read_gold(file)?;
    let rows = label_distribution(&gold)?;
    emit(ctx.out(), &distribution_table(&rows, a.format)?)
}

fn read_annotations(path: &Path) -> CliResult<Vec<Annotation>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let ann: Annotation =
                serde_json::from_str(l).map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
            ann.validate()?;
            Ok(ann)
        })
        .collect()
}

/// Kappa over the tweets both annotators labeled in `phase`.
pub(crate) fn agreement(annotations: &[Annotation], phase: Phase, a: &str, b: &str) -> CliResult<Agreement> {
    let mut pairs: BTreeMap<&str, [Option<String>; 2]> = BTreeMap::new();
    for ann in annotations.iter().filter(|x| x.phase() == phase) {
        let slot = match ann.annotator_id() {
            id if id == a => 0,
            id if id == b => 1,
            _ => continue,
        };
        let entry = pairs.entry(ann.tweet_id()).or_default();
        if entry[slot].is_some() {
            return Err(invalid(format!(
                "{} annotated tweet {} twice",
                ann.annotator_id(),
                ann.tweet_id()
            )));
        }
        entry[slot] = Some(agreement_label(ann)?);
    }
    let (la, lb): (Vec<String>, Vec<String>) = pairs.into_values().filter_map(|[x, y]| Some((x?, y?))).unzip();
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

fn kappa(ctx: &Context, a: KappaArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.annotations])?;
    let phase: Phase = a.phase.parse()?;
    let (x, y) = a
        .annotators
        .split_once(',')
        .map(|(x, y)| (x.trim(), y.trim()))
        .filter(|(x, y)| !x.is_empty() && !y.is_empty() && x != y)
        .ok_or_else(|| invalid("--annotators takes two distinct ids, e.g. a,b"))?;
    let annotations = read_annotations(&a.annotations)?;
    let result = agreement(&annotations, phase, x, y)?;
    emit(ctx.out(), &to_json(&result))
}

fn export(ctx: &Context, a: ExportArgs) -> CliResult<()> {
    ctx.check_inputs(&[&a.gold, &a.corpus])?;
    let out = ctx.out().ok_or_else(|| invalid("dataset export needs --out <file>"))?;
    let file = fs::File::open(&a.gold).map_err(|e| io_err(&a.gold, e))?;
    let gold = read_gold(file)?;
    let corpus = load_corpus(&a.corpus)?;
    let by_id: HashMap<&str, usize> = corpus.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
    let mut data = Vec::new();
    for g in &gold {
        let Some(label) = g.label.final_label() else { continue };
        let i = *by_id
            .get(g.tweet_id.as_str())
            .ok_or_else(|| invalid(format!("tweet {} is labeled but missing from the corpus", g.tweet_id)))?;
        data.push(LabeledTweet {
            tweet: corpus[i].clone(),
            label,
        });
    }
    tracing::info!(
        kept = data.len(),
        dropped = gold.len() - data.len(),
        "exported final dataset"
    );
    write_labeled(out, &data)?;
    Ok(())
}
