//! Tweet corpora: loading, keyword filtering, n-gram statistics, sampling
//! and stratified splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::text::{match_tokens, preprocess};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetSource {
    #[default]
    Crawl,
    Archive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub urls: Vec<String>,
    /// Absent for tweets read from a labeled dataset file, which carries no dates.
    #[serde(rename = "date", default, skip_serializing_if = "Option::is_none")]
    pub posted_at: Option<NaiveDate>,
    #[serde(rename = "lang", default, skip_serializing_if = "Option::is_none")]
    pub lang_tag: Option<String>,
    #[serde(default)]
    pub source: TweetSource,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            text: text.into(),
            urls: Vec::new(),
            posted_at: None,
            lang_tag: None,
            source: TweetSource::Crawl,
        }
    }
}

/// The three classes of the final dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Irrelevant,
    True,
    Misinformation,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Irrelevant, Label::True, Label::Misinformation];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Irrelevant => "irrelevant",
            Label::True => "true",
            Label::Misinformation => "misinformation",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "irrelevant" => Ok(Label::Irrelevant),
            "true" => Ok(Label::True),
            "misinformation" => Ok(Label::Misinformation),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTweet {
    pub tweet: Tweet,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    Include,
    Exclude,
}

/// A list of lowercase, whitespace-normalized phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordQuery {
    phrases: Vec<Vec<String>>,
    mode: QueryMode,
}

impl KeywordQuery {
    pub fn new<S: AsRef<str>>(phrases: &[S], mode: QueryMode) -> Result<Self> {
        if phrases.is_empty() {
            return Err(Error::invalid("keyword query needs at least one phrase"));
        }
        let mut normalized = Vec::with_capacity(phrases.len());
        for phrase in phrases {
            let tokens = match_tokens(phrase.as_ref());
            if tokens.is_empty() {
                return Err(Error::invalid(format!(
                    "keyword phrase {:?} is empty after normalization",
                    phrase.as_ref()
                )));
            }
            normalized.push(tokens);
        }
        Ok(KeywordQuery {
            phrases: normalized,
            mode,
        })
    }

    /// The Malaysian-context phrases used to drop Malay tweets mislabeled as Indonesian.
    pub fn malay_exclusion() -> Self {
        KeywordQuery::new(&["malaysia", "kkmputrajaya", "kes baharu"], QueryMode::Exclude)
            .expect("static phrases are valid")
    }

    pub fn mode(&self) -> QueryMode {
        self.mode
    }

    pub fn phrases(&self) -> impl Iterator<Item = String> + '_ {
        self.phrases.iter().map(|p| p.join(" "))
    }

    pub fn with_mode(&self, mode: QueryMode) -> Self {
        KeywordQuery {
            phrases: self.phrases.clone(),
            mode,
        }
    }

    fn matches(&self, text: &str) -> bool {
        let tokens = match_tokens(text);
        self.phrases
            .iter()
            .any(|phrase| tokens.windows(phrase.len()).any(|window| window == phrase.as_slice()))
    }
}

/// Reads a line-delimited JSON corpus.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Tweet>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut seen = HashSet::new();
    let mut tweets = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: display.clone(),
            line: idx + 1,
            message,
        };
        let tweet: Tweet = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if tweet.posted_at.is_none() {
            return Err(parse_err("missing field `date`".into()));
        }
        if tweet.text.trim().is_empty() {
            return Err(parse_err("tweet text is empty".into()));
        }
        if !seen.insert(tweet.id.clone()) {
            return Err(Error::DuplicateId(tweet.id));
        }
        tweets.push(tweet);
    }
    Ok(tweets)
}

pub fn write_corpus(path: impl AsRef<Path>, tweets: &[Tweet]) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for tweet in tweets {
        serde_json::to_writer(&mut out, tweet)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct LabeledRow {
    tweet_id: String,
    text: String,
    label: String,
}

/// Reads a `tweet_id,text,label` file with a header row.
pub fn load_labeled(path: impl AsRef<Path>) -> Result<Vec<LabeledTweet>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["tweet_id", "text", "label"] {
        return Err(Error::Parse {
            path: display,
            line: 1,
            message: format!("expected header tweet_id,text,label, found {:?}", headers),
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, row) in reader.deserialize::<LabeledRow>().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Parse {
            path: display.clone(),
            line,
            message: e.to_string(),
        })?;
        let label = row.label.parse::<Label>().map_err(|e| Error::Parse {
            path: display.clone(),
            line,
            message: e.to_string(),
        })?;
        if !seen.insert(row.tweet_id.clone()) {
            return Err(Error::DuplicateId(row.tweet_id));
        }
        out.push(LabeledTweet {
            tweet: Tweet::new(row.tweet_id, row.text),
            label,
        });
    }
    Ok(out)
}

pub fn write_labeled(path: impl AsRef<Path>, data: &[LabeledTweet]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    for item in data {
        writer.serialize(LabeledRow {
            tweet_id: item.tweet.id.clone(),
            text: item.tweet.text.clone(),
            label: item.label.as_str().to_string(),
        })?;
    }
    if data.is_empty() {
        writer.write_record(["tweet_id", "text", "label"])?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Keeps (include) or drops (exclude) tweets containing any query phrase as a
/// whole-token match. Order is preserved.
pub fn filter_keywords(corpus: &[Tweet], query: &KeywordQuery) -> Vec<Tweet> {
    let keep_matches = query.mode == QueryMode::Include;
    corpus
        .iter()
        .filter(|t| query.matches(&t.text) == keep_matches)
        .cloned()
        .collect()
}

/// Most frequent `n`-grams over preprocessed tokens, ties broken lexicographically.
pub fn top_ngrams(corpus: &[Tweet], n: usize, k: usize) -> Result<Vec<(String, usize)>> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n and k must both be at least 1"));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for tweet in corpus {
        let tokens = preprocess(&tweet.text);
        for window in tokens.windows(n) {
            *counts.entry(window.join(" ")).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    // BTreeMap order is already lexicographic; a stable sort keeps it for ties.
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked.truncate(k);
    Ok(ranked)
}

/// Uniform sample without replacement, deterministic per seed.
pub fn sample(corpus: &[Tweet], count: usize, seed: u64) -> Result<Vec<Tweet>> {
    if count > corpus.len() {
        return Err(Error::invalid(format!(
            "cannot sample {count} tweets from a corpus of {}",
            corpus.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, corpus.len(), count)
        .into_iter()
        .map(|i| corpus[i].clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let all = [train, val, test];
        if all.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::invalid("split ratios must be positive"));
        }
        if (train + val + test - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split ratios must sum to 1, got {}",
                train + val + test
            )));
        }
        Ok(SplitRatios { train, val, test })
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad ratio {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        match parts.as_slice() {
            [a, b, c] => SplitRatios::new(*a, *b, *c),
            _ => Err(Error::invalid("expected three comma-separated ratios")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetSplits {
    pub train: Vec<LabeledTweet>,
    pub val: Vec<LabeledTweet>,
    pub test: Vec<LabeledTweet>,
}

/// Size of a holdout taking fraction `frac` of `n` items, rounded up.
fn holdout_size(n: usize, frac: f64) -> usize {
    ((frac * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Per-class split sizes. Each class gets the floor of its quota in every
/// split; its leftover items go one per split to splits with a fractional
/// quota, preferring the split furthest below its overall target. Targets
/// are those of two successive holdouts (test, then val), each rounded up.
/// Ties go to test, then val, then train.
fn split_sizes(counts: &[usize], ratios: SplitRatios) -> Vec<[usize; 3]> {
    let n: usize = counts.iter().sum();
    let n_test = holdout_size(n, ratios.test);
    let n_val = holdout_size(n - n_test, ratios.val / (ratios.train + ratios.val));
    let target = [n - n_test - n_val, n_val, n_test];
    let r = ratios.as_array();

    let mut sizes = Vec::with_capacity(counts.len());
    let mut remainders = Vec::with_capacity(counts.len());
    for &c in counts {
        let quota = r.map(|x| x * c as f64);
        let floor = quota.map(|q| (q + 1e-9).floor() as usize);
        remainders.push([0, 1, 2].map(|s| quota[s] - floor[s] as f64));
        sizes.push(floor);
    }
    let mut deficit: [i64; 3] = [0, 1, 2].map(|s| target[s] as i64 - sizes.iter().map(|z| z[s] as i64).sum::<i64>());
    for (ci, &c) in counts.iter().enumerate() {
        let mut left = c - sizes[ci].iter().sum::<usize>();
        let mut open: Vec<usize> = (0..3).filter(|&s| remainders[ci][s] > 1e-9).collect();
        while left > 0 && !open.is_empty() {
            let (k, &s) = open
                .iter()
                .enumerate()
                .max_by(|a, b| deficit[*a.1].cmp(&deficit[*b.1]).then(a.1.cmp(b.1)))
                .expect("non-empty");
            open.remove(k);
            sizes[ci][s] += 1;
            deficit[s] -= 1;
            left -= 1;
        }
        sizes[ci][0] += left;
    }
    sizes
}

/// Stratified train/val/test split. Every per-class count is within one of
/// its exact quota; see [`split_sizes`] for how leftovers are placed.
pub fn stratified_split(data: &[LabeledTweet], ratios: SplitRatios, seed: u64) -> Result<DatasetSplits> {
    let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, item) in data.iter().enumerate() {
        by_class.entry(item.label).or_default().push(i);
    }
    for (label, members) in &by_class {
        if members.len() < 3 {
            return Err(Error::ClassTooSmall {
                class: label.to_string(),
                count: members.len(),
                required: 3,
            });
        }
    }
    let counts: Vec<usize> = by_class.values().map(Vec::len).collect();
    let sizes = split_sizes(&counts, ratios);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; data.len()];
    for (members, size) in by_class.values_mut().zip(&sizes) {
        members.shuffle(&mut rng);
        let (val_end, test_end) = (size[1], size[1] + size[2]);
        for &i in &members[..val_end] {
            assignment[i] = 1;
        }
        for &i in &members[val_end..test_end] {
            assignment[i] = 2;
        }
    }

    let mut splits = DatasetSplits::default();
    for (item, split) in data.iter().zip(assignment) {
        let target = match split {
            0 => &mut splits.train,
            1 => &mut splits.val,
            _ => &mut splits.test,
        };
        target.push(item.clone());
    }
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tweet(id: &str, text: &str) -> Tweet {
        Tweet::new(id, text)
    }

    fn labeled(counts: &[(Label, usize)]) -> Vec<LabeledTweet> {
        let mut out = Vec::new();
        for &(label, n) in counts {
            for i in 0..n {
                out.push(LabeledTweet {
                    tweet: tweet(&format!("{label}-{i}"), "x"),
                    label,
                });
            }
        }
        out
    }

    fn count(split: &[LabeledTweet], label: Label) -> usize {
        split.iter().filter(|t| t.label == label).count()
    }

    #[test]
    fn load_empty_file() {
        let file = tempfile::NamedTempFile::new().unwrap();
        assert!(load_corpus(file.path()).unwrap().is_empty());
    }

    #[test]
    fn load_preserves_order() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for id in ["c", "a", "b"] {
            writeln!(
                file,
                r#"{{"id":"{id}","text":"teks {id}","urls":[],"date":"2020-08-01","lang":"in"}}"#
            )
            .unwrap();
        }
        let tweets = load_corpus(file.path()).unwrap();
        let ids: Vec<_> = tweets.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(tweets[0].posted_at, NaiveDate::from_ymd_opt(2020, 8, 1));
        assert_eq!(tweets[0].lang_tag.as_deref(), Some("in"));
    }

    #[test]
    fn load_rejects_duplicate_ids() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for _ in 0..2 {
            writeln!(file, r#"{{"id":"t1","text":"a","urls":[],"date":"2020-08-01"}}"#).unwrap();
        }
        match load_corpus(file.path()) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "t1"),
            other => panic!("expected duplicate id error, got {other:?}"),
        }
    }

    #[test]
    fn load_reports_malformed_line_number() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, r#"{{"id":"t1","text":"a","urls":[],"date":"2020-08-01"}}"#).unwrap();
        writeln!(file, r#"{{"id":"t2","text":"#).unwrap();
        match load_corpus(file.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_missing_file() {
        assert!(load_corpus("/nonexistent/corpus.jsonl").unwrap_err().is_io());
    }

    #[test]
    fn include_is_case_insensitive() {
        let q = KeywordQuery::new(&["vaksin"], QueryMode::Include).unwrap();
        let kept = filter_keywords(&[tweet("1", "Vaksin sudah datang")], &q);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn exclude_drops_malay_phrases() {
        let q = KeywordQuery::new(&["kes baharu", "malaysia"], QueryMode::Exclude).unwrap();
        let kept = filter_keywords(&[tweet("1", "kes baharu covid di malaysia")], &q);
        assert!(kept.is_empty());
    }

    #[test]
    fn malay_exclusion_catches_ministry_handle() {
        let q = KeywordQuery::malay_exclusion();
        let corpus = [
            tweet("1", "Kenyataan media @KKMPutrajaya hari ini"),
            tweet("2", "Kasus baru covid di Jakarta"),
        ];
        let kept = filter_keywords(&corpus, &q);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "2");
    }

    #[test]
    fn include_without_match_is_empty() {
        let q = KeywordQuery::new(&["rsud"], QueryMode::Include).unwrap();
        assert!(filter_keywords(&[tweet("1", "masker wajib")], &q).is_empty());
    }

    #[test]
    fn phrase_match_respects_token_boundaries() {
        let q = KeywordQuery::new(&["masker"], QueryMode::Include).unwrap();
        assert!(filter_keywords(&[tweet("1", "pesta maskerade")], &q).is_empty());
    }

    #[test]
    fn query_normalizes_phrases() {
        let q = KeywordQuery::new(&["  Kes   BAHARU "], QueryMode::Include).unwrap();
        assert_eq!(q.phrases().collect::<Vec<_>>(), ["kes baharu"]);
        assert!(KeywordQuery::new(&["!!"], QueryMode::Include).is_err());
        assert!(KeywordQuery::new::<&str>(&[], QueryMode::Include).is_err());
    }

    #[test]
    fn unigram_counts() {
        let got = top_ngrams(&[tweet("1", "a b a")], 1, 10).unwrap();
        assert_eq!(got, vec![("a".to_string(), 2), ("b".to_string(), 1)]);
    }

    #[test]
    fn bigram_counts() {
        let got = top_ngrams(&[tweet("1", "a b a")], 2, 10).unwrap();
        assert_eq!(got, vec![("a b".to_string(), 1), ("b a".to_string(), 1)]);
    }

    #[test]
    fn ngram_longer_than_tweet() {
        assert!(top_ngrams(&[tweet("1", "a b")], 3, 10).unwrap().is_empty());
        assert!(top_ngrams(&[tweet("1", "a b")], 0, 10).is_err());
    }

    #[test]
    fn sample_edge_cases() {
        let corpus: Vec<Tweet> = (0..20).map(|i| tweet(&i.to_string(), "x")).collect();
        let all = sample(&corpus, 20, 7).unwrap();
        let mut ids: Vec<_> = all.iter().map(|t| t.id.clone()).collect();
        ids.sort();
        let mut expected: Vec<_> = corpus.iter().map(|t| t.id.clone()).collect();
        expected.sort();
        assert_eq!(ids, expected);
        assert!(sample(&corpus, 0, 7).unwrap().is_empty());
        assert_eq!(sample(&corpus, 5, 99).unwrap(), sample(&corpus, 5, 99).unwrap());
        assert!(sample(&corpus, 21, 7).is_err());
    }

    #[test]
    fn split_reproduces_published_strata() {
        let data = labeled(&[
            (Label::Irrelevant, 3127),
            (Label::True, 1632),
            (Label::Misinformation, 404),
        ]);
        let s = stratified_split(&data, SplitRatios::new(0.6, 0.2, 0.2).unwrap(), 1).unwrap();
        let mis = [&s.train, &s.val, &s.test].map(|p| count(p, Label::Misinformation));
        assert_eq!(mis, [242, 81, 81]);
        let tru = [&s.train, &s.val, &s.test].map(|p| count(p, Label::True));
        assert_eq!(tru, [979, 327, 326]);
        let irr = [&s.train, &s.val, &s.test].map(|p| count(p, Label::Irrelevant));
        assert_eq!(irr, [1876, 625, 626]);
    }

    #[test]
    fn split_exact_division() {
        let data = labeled(&[(Label::True, 10)]);
        let s = stratified_split(&data, SplitRatios::new(0.6, 0.2, 0.2).unwrap(), 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
    }

    #[test]
    fn split_rejects_tiny_class() {
        let data = labeled(&[(Label::True, 10), (Label::Misinformation, 2)]);
        assert!(matches!(
            stratified_split(&data, SplitRatios::new(0.6, 0.2, 0.2).unwrap(), 3),
            Err(Error::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn ratios_validation() {
        assert!("0.6,0.2,0.2".parse::<SplitRatios>().is_ok());
        assert!("0.6,0.2,0.3".parse::<SplitRatios>().is_err());
        assert!("0.8,0.2,0".parse::<SplitRatios>().is_err());
        assert!("0.5,0.5".parse::<SplitRatios>().is_err());
    }

    fn brute_ngrams(corpus: &[Tweet], n: usize) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for t in corpus {
            let toks = preprocess(&t.text);
            if toks.len() < n {
                continue;
            }
            for start in 0..=toks.len() - n {
                let mut gram = String::new();
                for (j, tok) in toks[start..start + n].iter().enumerate() {
                    if j > 0 {
                        gram.push(' ');
                    }
                    gram.push_str(tok);
                }
                *out.entry(gram).or_insert(0) += 1;
            }
        }
        out
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Tweet>> {
        prop::collection::vec(
            prop::collection::vec(
                prop::sample::select(vec!["vaksin", "covid", "masker", "kes", "baharu", "rsud"]),
                1..8,
            ),
            0..50,
        )
        .prop_map(|docs| {
            docs.into_iter()
                .enumerate()
                .map(|(i, words)| tweet(&i.to_string(), &words.join(" ")))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn filter_is_idempotent_and_partitions(corpus in corpus_strategy(), word in prop::sample::select(vec!["vaksin", "kes baharu", "rsud"])) {
            let inc = KeywordQuery::new(&[word], QueryMode::Include).unwrap();
            let exc = inc.with_mode(QueryMode::Exclude);
            let kept = filter_keywords(&corpus, &inc);
            prop_assert_eq!(&filter_keywords(&kept, &inc), &kept);
            let dropped = filter_keywords(&corpus, &exc);
            prop_assert_eq!(&filter_keywords(&dropped, &exc), &dropped);
            prop_assert_eq!(kept.len() + dropped.len(), corpus.len());
            let kept_ids: HashSet<_> = kept.iter().map(|t| &t.id).collect();
            prop_assert!(dropped.iter().all(|t| !kept_ids.contains(&t.id)));
        }

        #[test]
        fn ngrams_match_sliding_window(corpus in corpus_strategy(), n in 1usize..4) {
            let got = top_ngrams(&corpus, n, usize::MAX).unwrap();
            let brute = brute_ngrams(&corpus, n);
            prop_assert_eq!(got.len(), brute.len());
            for (gram, c) in &got {
                prop_assert_eq!(brute.get(gram), Some(c));
            }
            for pair in got.windows(2) {
                prop_assert!(pair[0].1 > pair[1].1 || (pair[0].1 == pair[1].1 && pair[0].0 < pair[1].0));
            }
        }

        #[test]
        fn split_drift_bounded(irr in 3usize..300, tru in 3usize..300, mis in 3usize..100, seed in any::<u64>(), w in prop::array::uniform3(1u32..10)) {
            let total = f64::from(w[0] + w[1] + w[2]);
            let (r0, r1) = (f64::from(w[0]) / total, f64::from(w[1]) / total);
            let ratios = SplitRatios::new(r0, r1, 1.0 - r0 - r1).unwrap();
            let data = labeled(&[(Label::Irrelevant, irr), (Label::True, tru), (Label::Misinformation, mis)]);
            let s = stratified_split(&data, ratios, seed).unwrap();
            let parts = [&s.train, &s.val, &s.test];
            for (label, n) in [(Label::Irrelevant, irr), (Label::True, tru), (Label::Misinformation, mis)] {
                for (part, r) in parts.iter().zip(ratios.as_array()) {
                    let diff = count(part, label) as f64 - r * n as f64;
                    prop_assert!(diff.abs() <= 1.0, "{label}: {diff}");
                }
            }
            let mut ids: Vec<_> = parts.iter().flat_map(|p| p.iter().map(|t| t.tweet.id.clone())).collect();
            ids.sort();
            let mut expected: Vec<_> = data.iter().map(|t| t.tweet.id.clone()).collect();
            expected.sort();
            prop_assert_eq!(ids, expected);
        }
    }
}
