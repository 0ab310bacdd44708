//! Acceptance gate. Prints one `[PASS]` / `[FAIL]` line per criterion.
//!
//! Criteria that need the released data read it from `MISINFO_RELEASE_DIR`
//! when set (`gold.csv`, `dataset.csv`, optionally `train.csv`, `val.csv`,
//! `test.csv`). Without it they run on reconstructed fixtures where that is
//! meaningful and report red where it is not. A red line only passes the
//! test run when its cause is established inside the check itself.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use misinfo_core::annotation::{cohen_kappa, GoldClass};
use misinfo_core::corpus::{
    load_labeled, stratified_split, write_labeled, DatasetSplits, Label, LabeledTweet, SplitRatios, Tweet,
};
use misinfo_core::eval::{compute_metrics, f1, is_significant, paired_ttest, run_single, run_two_stage, TrainingSetup};
use misinfo_core::features::{
    balance, contextual_encode, BalanceConfig, EncoderHandle, EncoderMode, FeatureMatrix, HashEncoder, TokenizedDoc,
};
use misinfo_core::models::{train, ClassifierSpec, Family, FeatureKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

const PUBLISHED_DISTRIBUTION: [(GoldClass, usize, f64); 6] = [
    (GoldClass::Irrelevant, 2059, 45.76),
    (GoldClass::True, 1632, 35.60),
    (GoldClass::Misinformation, 404, 8.98),
    (GoldClass::NotSure, 237, 5.93),
    (GoldClass::NoConsensus, 146, 3.24),
    (GoldClass::NeedExpert, 22, 0.49),
];
/// Rows train, val, test; columns irrelevant, true, misinformation.
const PUBLISHED_SPLIT: [[usize; 3]; 3] = [[1876, 979, 242], [625, 327, 81], [626, 326, 81]];
const FINAL_COUNTS: [usize; 3] = [3127, 1632, 404];

const PCT_TOL: f64 = 0.01;
const KAPPA_TOL: f64 = 1e-9;
const KAPPA_SYM_TOL: f64 = 1e-12;
const T_TOL: f64 = 1e-6;
const SEGMENT_TOL: f64 = 1e-9;
const LR_FLOOR: f64 = 75.0;
const DEEP_FLOOR: f64 = 0.95;
const DEEP_EPOCHS: i64 = 200;

struct Outcome {
    pass: bool,
    detail: String,
    /// Why a red result cannot be turned green by the implementation.
    unattainable: Option<String>,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
            unattainable: None,
        }
    }
}

fn release_dir() -> Option<PathBuf> {
    std::env::var_os("MISINFO_RELEASE_DIR")
        .map(PathBuf::from)
        .filter(|p| p.is_dir())
}

fn misinfo(args: &[&str]) -> (String, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_misinfo"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (String::from_utf8(out.stdout).unwrap(), elapsed)
}

fn synthetic_final(counts: [usize; 3]) -> Vec<LabeledTweet> {
    let mut out = Vec::new();
    for (label, n) in Label::ALL.into_iter().zip(counts) {
        for _ in 0..n {
            let i = out.len();
            out.push(LabeledTweet {
                tweet: Tweet::new(format!("r{i}"), format!("covid {label} {i}")),
                label,
            });
        }
    }
    out
}

fn distribution_replay(tmp: &Path) -> Outcome {
    let (gold, source) = match release_dir().map(|d| d.join("gold.csv")).filter(|p| p.exists()) {
        Some(p) => (p, "released gold labels"),
        None => {
            let p = tmp.join("gold.csv");
            let mut text = String::from("tweet_id,label\n");
            let mut id = 0;
            for (label, count, _) in PUBLISHED_DISTRIBUTION {
                for _ in 0..count {
                    text.push_str(&format!("g{id},{}\n", label.as_str()));
                    id += 1;
                }
            }
            fs::write(&p, text).unwrap();
            (p, "fixture rebuilt from the published counts; release not present")
        }
    };
    let (csv, elapsed) = misinfo(&["dataset", "stats", "--gold", gold.to_str().unwrap(), "--format", "csv"]);
    let mut rows = std::collections::BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        rows.insert(
            f[0].to_string(),
            (f[1].parse::<usize>().unwrap(), f[2].parse::<f64>().unwrap()),
        );
    }
    let total: usize = PUBLISHED_DISTRIBUTION.iter().map(|r| r.1).sum();
    let mut bad = Vec::new();
    let mut inconsistent = Vec::new();
    for (label, count, pct) in PUBLISHED_DISTRIBUTION {
        let (c, p) = rows.get(label.as_str()).copied().unwrap_or((0, 0.0));
        if c != count || (p - pct).abs() > PCT_TOL + 1e-12 {
            bad.push(format!("{label} {c}/{p:.2} want {count}/{pct:.2}"));
        }
        let implied = 100.0 * count as f64 / total as f64;
        if (implied - pct).abs() > PCT_TOL {
            inconsistent.push(format!("{label}: {count}/{total} = {implied:.2}%, printed {pct:.2}%"));
        }
    }
    let fast = elapsed < Duration::from_secs(1);
    let counts_ok = PUBLISHED_DISTRIBUTION
        .iter()
        .all(|(l, c, _)| rows.get(l.as_str()).map(|r| r.0) == Some(*c));
    let mut o = Outcome::check(
        bad.is_empty() && fast,
        format!(
            "{source}; {} ms; mismatches: {}",
            elapsed.as_millis(),
            if bad.is_empty() { "none".into() } else { bad.join("; ") }
        ),
    );
    if !o.pass && fast && counts_ok && !inconsistent.is_empty() {
        o.unattainable = Some(format!(
            "the published percentages contradict the published counts ({}); no label file satisfies both",
            inconsistent.join("; ")
        ));
    }
    o
}

fn split_replay(tmp: &Path) -> Outcome {
    let (input, source) = match release_dir().map(|d| d.join("dataset.csv")).filter(|p| p.exists()) {
        Some(p) => (p, "released dataset"),
        None => {
            let p = tmp.join("final.csv");
            write_labeled(&p, &synthetic_final(FINAL_COUNTS)).unwrap();
            (p, "synthetic rows with the published class counts")
        }
    };
    let out = tmp.join("split");
    let (_, elapsed) = misinfo(&[
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
        "dataset",
        "split",
        "--input",
        input.to_str().unwrap(),
        "--ratios",
        "0.6,0.2,0.2",
    ]);
    let manifest: Value = serde_json::from_slice(&fs::read(out.join("split.json")).unwrap()).unwrap();
    let mut worst = 0i64;
    let mut cells = Vec::new();
    for (c, label) in Label::ALL.iter().enumerate() {
        for (s, row) in PUBLISHED_SPLIT.iter().enumerate() {
            let got = manifest["counts"][label.as_str()][s].as_u64().unwrap() as i64;
            worst = worst.max((got - row[c] as i64).abs());
            cells.push(got.to_string());
        }
    }
    let misinfo_exact =
        (0..3).all(|s| manifest["counts"]["misinformation"][s].as_u64() == Some(PUBLISHED_SPLIT[s][2] as u64));
    Outcome::check(
        worst <= 1 && misinfo_exact && elapsed < Duration::from_secs(1),
        format!(
            "{source}; max cell drift {worst}; irrelevant/true/misinformation by train,val,test = {}; {} ms",
            cells.join("/"),
            elapsed.as_millis()
        ),
    )
}

fn metric_arithmetic() -> Outcome {
    let from_table = f1(59.75, 60.49);
    // 1,033-row test stratum; 49 of the 81 misinformation tweets are found.
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (label, n) in [("irrelevant", 626), ("true", 326), ("misinformation", 81)] {
        for i in 0..n {
            gold.push(label.to_string());
            let p = match label {
                "misinformation" if i < 49 => "misinformation",
                "misinformation" => "true",
                "true" if i < 33 => "misinformation",
                other => other,
            };
            pred.push(p.to_string());
        }
    }
    let r = compute_metrics(&gold, &pred, "misinformation").unwrap();
    let ok = (from_table - 60.12).abs() <= PCT_TOL
        && (r.recall - 60.49).abs() <= PCT_TOL
        && (r.f1 - f1(r.precision, r.recall)).abs() < 1e-9;
    Outcome::check(
        ok,
        format!("F1(59.75, 60.49) = {from_table:.4}; recall 49/81 = {:.4}", r.recall),
    )
}

fn kappa_oracle(a: &[usize], b: &[usize], k: usize) -> f64 {
    let n = a.len() as f64;
    let mut table = vec![vec![0usize; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let p_o = (0..k).map(|i| table[i][i]).sum::<usize>() as f64 / n;
    let p_e = (0..k)
        .map(|i| {
            let row: usize = table[i].iter().sum();
            let col: usize = table.iter().map(|r| r[i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (n * n);
    if p_e == 1.0 {
        1.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

fn kappa_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut worst_sym) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let k = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=300);
        let a: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let b: Vec<usize> = (0..n)
            .map(|i| if rng.gen_bool(0.6) { a[i] } else { rng.gen_range(0..k) })
            .collect();
        let got = cohen_kappa(&a, &b).unwrap();
        worst = worst.max((got - kappa_oracle(&a, &b, k)).abs());
        worst_sym = worst_sym.max((got - cohen_kappa(&b, &a).unwrap()).abs());
    }
    Outcome::check(
        worst <= KAPPA_TOL && worst_sym <= KAPPA_SYM_TOL,
        format!("1000 pairs; max |kappa - oracle| = {worst:.2e}; max asymmetry = {worst_sym:.2e}"),
    )
}

fn ttest_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=30);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let t = mean / (var / n as f64).sqrt();
        let got = paired_ttest(&a, &b).unwrap();
        worst = worst.max((got.t - t).abs() / t.abs().max(1.0));
        assert_eq!(got.significant, got.p < 0.05);
    }
    let rule = !is_significant(0.2129);
    Outcome::check(
        worst <= T_TOL && rule,
        format!(
            "100 samples; max t error {worst:.2e}; p = 0.2129 significant: {}",
            !rule
        ),
    )
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (p.iter().zip(a).zip(&ab).map(|((p, a), d)| (p - a) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    p.iter()
        .zip(a)
        .zip(&ab)
        .map(|((p, a), d)| (p - (a + t * d)).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn balancing_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut worst, mut synthetic, mut failures) = (0.0f64, 0usize, Vec::new());
    for case in 0..40 {
        let sizes = [rng.gen_range(40..80), rng.gen_range(10..40), rng.gen_range(6..12)];
        let dims = rng.gen_range(2..6);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                rows.push(
                    (0..dims)
                        .map(|_| c as f64 * 3.0 + rng.gen_range(-1.0..1.0))
                        .collect::<Vec<f64>>(),
                );
                y.push(c);
            }
        }
        let x = FeatureMatrix::from_dense_rows((0..rows.len()).map(|i| i.to_string()).collect(), dims, rows.clone())
            .unwrap();
        let cfg = BalanceConfig {
            oversample_ratio: rng.gen_range(0.3..1.0),
            target_minority_ratio: rng.gen_range(0.5..1.0),
            k_neighbors: rng.gen_range(1..=5),
        };
        let out = balance(&x, &y, &cfg, case).unwrap();

        let majority = *sizes.iter().max().unwrap();
        let over = (cfg.oversample_ratio * majority as f64 + 1e-9).floor() as usize;
        let after_smote: Vec<usize> = sizes.iter().map(|&n| n.max(over)).collect();
        let cap = (*after_smote.iter().min().unwrap() as f64 / cfg.target_minority_ratio + 1e-9).floor() as usize;
        let want: Vec<usize> = after_smote.iter().map(|&n| n.min(cap)).collect();
        let got: Vec<usize> = (0..3).map(|c| out.labels.iter().filter(|&&l| l == c).count()).collect();
        if got != want {
            failures.push(format!("case {case}: counts {got:?} want {want:?}"));
        }

        for (pos, &row) in out.kept.iter().enumerate() {
            if out.features.dense_row(pos) != rows[row] || out.labels[pos] != y[row] {
                failures.push(format!("case {case}: kept row {row} altered"));
            }
        }
        for c in 0..3 {
            if want[c] >= sizes[c] && out.kept.iter().filter(|&&r| y[r] == c).count() != sizes[c] {
                failures.push(format!("case {case}: class {c} lost original rows"));
            }
        }
        for (n, s) in out.synthetic.iter().enumerate() {
            let row = out.features.dense_row(out.kept.len() + n);
            worst = worst.max(segment_distance(&row, &rows[s.seed], &rows[s.neighbor]));
            if y[s.seed] != y[s.neighbor] || s.seed == s.neighbor {
                failures.push(format!("case {case}: neighbor outside seed class"));
            }
        }
        synthetic += out.synthetic.len();
    }
    Outcome::check(
        failures.is_empty() && worst <= SEGMENT_TOL && synthetic > 0,
        format!(
            "40 chains, {synthetic} synthetic rows; max segment distance {worst:.2e}; {}",
            if failures.is_empty() {
                "counts and originals exact".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

/// Overlapping vocabularies so both stages make mistakes.
fn noisy_final(counts: [usize; 3], seed: u64) -> Vec<LabeledTweet> {
    let own: [&[&str]; 3] = [
        &["resep", "bola", "konser", "macet", "diskon", "film", "kopi", "hujan"],
        &[
            "vaksin", "masker", "jarak", "cuci", "dokter", "kasus", "sembuh", "isolasi",
        ],
        &[
            "hoaks",
            "chip",
            "konspirasi",
            "racun",
            "magnet",
            "dokter",
            "kasus",
            "vaksin",
        ],
    ];
    let shared = [
        "covid", "corona", "hari", "ini", "kata", "warga", "berita", "jakarta", "orang", "baru",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (c, label) in Label::ALL.into_iter().enumerate() {
        for _ in 0..counts[c] {
            let words: Vec<&str> = (0..7)
                .map(|_| {
                    if rng.gen_bool(0.35) {
                        own[c][rng.gen_range(0..own[c].len())]
                    } else if rng.gen_bool(0.15) {
                        let other = rng.gen_range(0..3);
                        own[other][rng.gen_range(0..own[other].len())]
                    } else {
                        shared[rng.gen_range(0..shared.len())]
                    }
                })
                .collect();
            let i = out.len();
            out.push(LabeledTweet {
                tweet: Tweet::new(format!("n{i}"), words.join(" ")),
                label,
            });
        }
    }
    out
}

fn cascade_check() -> Outcome {
    let splits = stratified_split(
        &noisy_final(FINAL_COUNTS, 5),
        SplitRatios::new(0.6, 0.2, 0.2).unwrap(),
        42,
    )
    .unwrap();
    let lr = ClassifierSpec::new(Family::LogisticRegression, FeatureKind::Tfidf);
    let nb = ClassifierSpec::new(Family::NaiveBayes, FeatureKind::Bow);
    let run = run_two_stage(&lr, &nb, &splits, &TrainingSetup::default()).unwrap();
    let irr = Label::Irrelevant.as_str();
    let violations = run
        .stage1_predictions
        .iter()
        .zip(&run.predictions)
        .filter(|(s, f)| (s.as_str() == irr) != (f.as_str() == irr))
        .count();
    let stage1_errors = run
        .stage1_predictions
        .iter()
        .zip(&splits.test)
        .filter(|(s, t)| (s.as_str() == irr) != (t.label == Label::Irrelevant))
        .count();
    Outcome::check(
        violations == 0 && run.predictions.len() == 1033,
        format!(
            "{} test rows; {violations} violations; stage 1 misrouted {stage1_errors} rows",
            run.predictions.len()
        ),
    )
}

fn release_splits() -> Option<DatasetSplits> {
    let dir = release_dir()?;
    let parts = ["train.csv", "val.csv", "test.csv"].map(|f| dir.join(f));
    if parts.iter().all(|p| p.exists()) {
        let [train, val, test] = parts.map(|p| load_labeled(p).unwrap());
        return Some(DatasetSplits { train, val, test });
    }
    let full = dir.join("dataset.csv");
    full.exists().then(|| {
        stratified_split(
            &load_labeled(full).unwrap(),
            SplitRatios::new(0.6, 0.2, 0.2).unwrap(),
            42,
        )
        .unwrap()
    })
}

fn lr_floor() -> Outcome {
    let lr = ClassifierSpec::new(Family::LogisticRegression, FeatureKind::Tfidf).with_seed(42);
    match release_splits() {
        Some(splits) => {
            let start = Instant::now();
            let run = run_single(&lr, &splits, &TrainingSetup::default()).unwrap();
            let elapsed = start.elapsed();
            Outcome::check(
                run.report.accuracy >= LR_FLOOR && elapsed < Duration::from_secs(300),
                format!(
                    "released split; accuracy {:.2}; {} s",
                    run.report.accuracy,
                    elapsed.as_secs()
                ),
            )
        }
        None => {
            let splits = stratified_split(
                &noisy_final(FINAL_COUNTS, 8),
                SplitRatios::new(0.6, 0.2, 0.2).unwrap(),
                42,
            )
            .unwrap();
            let start = Instant::now();
            let run = run_single(&lr, &splits, &TrainingSetup::default()).unwrap();
            Outcome {
                pass: false,
                detail: format!(
                    "released split not present; synthetic stand-in of the same shape ran end to end in {} ms \
                     (accuracy {:.2}, not evidence for this criterion)",
                    start.elapsed().as_millis(),
                    run.report.accuracy
                ),
                unattainable: Some(
                    "the criterion is defined on the released tweets, which are not available here".into(),
                ),
            }
        }
    }
}

fn toy_docs() -> (Vec<TokenizedDoc>, Vec<String>) {
    let pos = ["vaksin", "aman", "halal", "efektif", "gratis", "puskesmas"];
    let neg = ["hoaks", "chip", "konspirasi", "5g", "racun", "magnet"];
    (0..40)
        .map(|i| {
            let (vocab, label) = if i % 2 == 0 {
                (&pos, "true")
            } else {
                (&neg, "misinformation")
            };
            let tokens = (0..4 + (i * 7) % 4)
                .map(|t| vocab[(i * 5 + t * 3) % 6].to_string())
                .collect();
            (
                TokenizedDoc {
                    id: format!("toy{i}"),
                    tokens,
                },
                label.to_string(),
            )
        })
        .unzip()
}

fn deep_suite() -> Outcome {
    let (docs, y) = toy_docs();
    let handle = EncoderHandle::hash(16, 32, EncoderMode::Frozen);
    let (pooled, seqs) = contextual_encode(&docs, &HashEncoder::new(handle.clone())).unwrap();
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for (family, feature) in [
        (Family::Dnn, FeatureKind::ContextualPooled),
        (Family::Cnn, FeatureKind::ContextualSequence),
        (Family::BiLstm, FeatureKind::ContextualSequence),
    ] {
        for seed in [1, 2, 3] {
            let spec = ClassifierSpec::new(family, feature)
                .with_seed(seed)
                .with_param("epochs", DEEP_EPOCHS)
                .with_encoder(handle.clone());
            let x = if feature == FeatureKind::ContextualPooled {
                (&pooled).into()
            } else {
                (&seqs).into()
            };
            let model = train(&spec, x, &y, None).unwrap();
            let pred = model.predict(x).unwrap();
            let scores = model.predict_scores(x).unwrap();
            let acc = pred.iter().zip(&y).filter(|(p, g)| p == g).count() as f64 / y.len() as f64;
            worst = worst.min(acc);
            let name = format!("{} seed {seed}", spec.name());
            if acc < DEEP_FLOOR {
                failures.push(format!("{name}: accuracy {acc:.3}"));
            }
            if model.meta.epochs_run.is_none_or(|e| e > DEEP_EPOCHS as usize) {
                failures.push(format!("{name}: epochs {:?}", model.meta.epochs_run));
            }
            let shapes = scores.len() == y.len() && scores.iter().all(|r| r.len() == model.label_set.len());
            let argmax = scores.iter().zip(&pred).all(|(row, p)| {
                let best = (0..row.len()).fold(0, |b, i| if row[i] > row[b] { i } else { b });
                &model.label_set[best] == p && row.iter().all(|v| v.is_finite())
            });
            if !shapes || !argmax {
                failures.push(format!("{name}: shapes {shapes}, argmax {argmax}"));
            }
            if train(&spec, x, &y, None).unwrap().parameters != model.parameters {
                failures.push(format!("{name}: retraining differs"));
            }
        }
    }
    Outcome::check(
        failures.is_empty(),
        format!(
            "DNN/CNN/BiLSTM x 3 seeds; min accuracy {worst:.3}; {}",
            if failures.is_empty() {
                "shapes, argmax and determinism hold".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

fn main() {
    let tmp = TempDir::new().unwrap();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("distribution replay", Box::new(|| distribution_replay(tmp.path()))),
        ("split replay", Box::new(|| split_replay(tmp.path()))),
        ("metric arithmetic", Box::new(metric_arithmetic)),
        ("kappa oracle", Box::new(kappa_check)),
        ("t-test oracle", Box::new(ttest_check)),
        ("balancing geometry", Box::new(balancing_check)),
        ("cascade correctness", Box::new(cascade_check)),
        ("LR + TF-IDF accuracy floor", Box::new(lr_floor)),
        ("deep-path property suite", Box::new(deep_suite)),
    ];
    let mut unexplained = Vec::new();
    let mut passed = 0;
    for (name, check) in &checks {
        let o = check();
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass {
            passed += 1;
            continue;
        }
        match &o.unattainable {
            Some(why) => println!("       unattainable: {why}"),
            None => unexplained.push(*name),
        }
    }
    println!("acceptance: {passed}/{} pass", checks.len());
    if !unexplained.is_empty() {
        eprintln!("failing criteria: {unexplained:?}");
        std::process::exit(1);
    }
}
