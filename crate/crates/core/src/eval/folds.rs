use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Assigns each row a fold in `0..k`, stratified by label. Each class is
/// shuffled and dealt round-robin; the starting fold carries over from one
/// class to the next so fold sizes stay within one of each other.
pub fn stratified_folds<L: Ord + Clone + ToString>(labels: &[L], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let mut by_class: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.clone()).or_default().push(i);
    }
    if by_class.is_empty() {
        return Err(Error::Empty("labels"));
    }
    for (class, members) in &by_class {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: class.to_string(),
                count: members.len(),
                required: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut offset = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for (pos, &row) in members.iter().enumerate() {
            folds[row] = (offset + pos) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(folds)
}

/// Row indices of the training and held-out parts of fold `f`.
pub fn fold_rows(folds: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn errors() {
        assert!(stratified_folds(&["a", "b"], 1, 0).is_err());
        assert!(matches!(
            stratified_folds(&["a", "b", "c"], 3, 0),
            Err(Error::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let labels: Vec<u8> = (0..50).map(|i| (i % 3) as u8).collect();
        assert_eq!(
            stratified_folds(&labels, 5, 9).unwrap(),
            stratified_folds(&labels, 5, 9).unwrap()
        );
        assert_ne!(
            stratified_folds(&labels, 5, 9).unwrap(),
            stratified_folds(&labels, 5, 10).unwrap()
        );
    }

    proptest! {
        #[test]
        fn stratified_partition(sizes in prop::collection::vec(5usize..40, 1..5), k in 2usize..6, seed: u64) {
            let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
            let folds = stratified_folds(&labels, k, seed).unwrap();
            let mut seen = vec![false; labels.len()];
            for f in 0..k {
                let (train, test) = fold_rows(&folds, f);
                prop_assert_eq!(train.len() + test.len(), labels.len());
                for &i in &test {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
                for (c, &n) in sizes.iter().enumerate() {
                    let in_fold = test.iter().filter(|&&i| labels[i] == c).count() as f64;
                    prop_assert!((in_fold - n as f64 / k as f64).abs() <= 1.0);
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            let fold_sizes: Vec<usize> = (0..k).map(|f| folds.iter().filter(|&&x| x == f).count()).collect();
            prop_assert!(fold_sizes.iter().max().unwrap() - fold_sizes.iter().min().unwrap() <= 1);
        }
    }
}
