//! Vocabulary fitting and the sparse bag-of-words / TF-IDF encoders.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use super::text::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            tokens: r.tokens,
            df: r.df,
            n_docs: r.n_docs,
            index,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens,
            df: v.df,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn document_frequency(&self, token: &str) -> Option<usize> {
        self.index_of(token).map(|i| self.df[i])
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.df[index] as f64)).ln() + 1.0
    }

    fn term_counts(&self, doc: &TokenizedDoc) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for t in &doc.tokens {
            if let Some(i) = self.index_of(t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Keeps tokens appearing in at least `min_df` documents, indexed lexicographically.
pub fn fit_vocabulary(docs: &[TokenizedDoc], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Empty("documents"));
    }
    if min_df == 0 {
        return Err(Error::invalid("min_df must be at least 1"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let (tokens, df): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, c)| c >= min_df)
        .map(|(t, c)| (t.to_string(), c))
        .unzip();
    if tokens.is_empty() {
        return Err(Error::EmptyVocabulary(min_df));
    }
    Ok(VocabularyRepr {
        tokens,
        df,
        n_docs: docs.len(),
    }
    .into())
}

fn ids(docs: &[TokenizedDoc]) -> Vec<String> {
    docs.iter().map(|d| d.id.clone()).collect()
}

/// Binary presence features: 1 when the token occurs in the document.
pub fn bow_binary(docs: &[TokenizedDoc], vocab: &Vocabulary) -> Result<FeatureMatrix> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary(0));
    }
    let rows = docs
        .iter()
        .map(|d| vocab.term_counts(d).into_keys().map(|i| (i, 1.0)).collect())
        .collect();
    FeatureMatrix::sparse(ids(docs), vocab.len(), rows)
}

/// Raw term counts times smoothed idf, each row scaled to unit L2 norm.
pub fn tfidf(docs: &[TokenizedDoc], vocab: &Vocabulary) -> Result<FeatureMatrix> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary(0));
    }
    let rows = docs
        .iter()
        .map(|d| {
            let mut row: Vec<(usize, f64)> = vocab
                .term_counts(d)
                .into_iter()
                .map(|(i, tf)| (i, tf as f64 * vocab.idf(i)))
                .collect();
            let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in &mut row {
                    *v /= norm;
                }
            }
            row
        })
        .collect();
    FeatureMatrix::sparse(ids(docs), vocab.len(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            id: id.into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn vocabulary_min_df() {
        let docs = [doc("1", &["a", "b"]), doc("2", &["a"])];
        let v = fit_vocabulary(&docs, 1).unwrap();
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("b"), Some(1));
        assert_eq!(v.document_frequency("a"), Some(2));
        let v2 = fit_vocabulary(&docs, 2).unwrap();
        assert_eq!(v2.len(), 1);
        assert_eq!(v2.index_of("a"), Some(0));
        assert!(matches!(fit_vocabulary(&docs, 3), Err(Error::EmptyVocabulary(3))));
        assert!(fit_vocabulary(&[], 1).is_err());
    }

    #[test]
    fn document_frequency_counts_documents_not_tokens() {
        let v = fit_vocabulary(&[doc("1", &["a", "a", "a"])], 1).unwrap();
        assert_eq!(v.document_frequency("a"), Some(1));
    }

    #[test]
    fn binary_bow() {
        let vocab: Vocabulary = VocabularyRepr {
            tokens: vec!["covid".into(), "vaksin".into(), "masker".into()],
            df: vec![1, 1, 1],
            n_docs: 1,
        }
        .into();
        let m = bow_binary(
            &[
                doc("1", &["covid", "covid", "vaksin"]),
                doc("2", &[]),
                doc("3", &["zzz"]),
            ],
            &vocab,
        )
        .unwrap();
        assert_eq!(m.dense_row(0), vec![1.0, 1.0, 0.0]);
        assert_eq!(m.dense_row(1), vec![0.0; 3]);
        assert_eq!(m.dense_row(2), vec![0.0; 3]);
    }

    #[test]
    fn tfidf_single_ubiquitous_token() {
        let docs = [doc("1", &["covid"]), doc("2", &["covid"])];
        let v = fit_vocabulary(&docs, 1).unwrap();
        let m = tfidf(&docs, &v).unwrap();
        assert!((m.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tfidf_empty_doc_is_zero_row() {
        let docs = [doc("1", &["covid"])];
        let v = fit_vocabulary(&docs, 1).unwrap();
        let m = tfidf(&[doc("2", &[])], &v).unwrap();
        assert_eq!(m.dense_row(0), vec![0.0]);
    }

    #[test]
    fn tfidf_matches_hand_computed_fixture() {
        // Independently evaluated: tf * (ln((1+3)/(1+df)) + 1), then L2-normalized.
        // Columns: covid, masker, rsud, vaksin.
        let expected = [
            [0.8944271909999159, 0.0, 0.0, 0.4472135954999579],
            [0.0, 0.7959605415681652, 0.0, 0.6053485081062916],
            [0.6053485081062916, 0.0, 0.7959605415681652, 0.0],
        ];
        let docs = [
            doc("1", &["covid", "vaksin", "covid"]),
            doc("2", &["vaksin", "masker"]),
            doc("3", &["covid", "rsud"]),
        ];
        let v = fit_vocabulary(&docs, 1).unwrap();
        let m = tfidf(&docs, &v).unwrap();
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!((m.get(i, j) - want).abs() < 1e-12, "cell ({i},{j})");
            }
        }
    }

    fn corpus() -> impl Strategy<Value = Vec<TokenizedDoc>> {
        prop::collection::vec(
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..10),
            1..20,
        )
        .prop_map(|docs| docs.iter().enumerate().map(|(i, t)| doc(&i.to_string(), t)).collect())
    }

    proptest! {
        #[test]
        fn tfidf_rows_unit_or_zero(docs in corpus()) {
            prop_assume!(docs.iter().any(|d| !d.tokens.is_empty()));
            let v = fit_vocabulary(&docs, 1).unwrap();
            let m = tfidf(&docs, &v).unwrap();
            for (i, d) in docs.iter().enumerate() {
                let norm = m.row(i).squared_norm().sqrt();
                if d.tokens.is_empty() {
                    prop_assert_eq!(norm, 0.0);
                } else {
                    prop_assert!((norm - 1.0).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn bow_is_binary(docs in corpus()) {
            prop_assume!(docs.iter().any(|d| !d.tokens.is_empty()));
            let v = fit_vocabulary(&docs, 1).unwrap();
            let m = bow_binary(&docs, &v).unwrap();
            for i in 0..m.n_rows() {
                prop_assert!(m.dense_row(i).iter().all(|&x| x == 0.0 || x == 1.0));
            }
        }
    }
}
