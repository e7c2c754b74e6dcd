//! Seeded split assignment and K-balanced passage sampling.
//!
//! Passage counts per idiom are heavily skewed, so the dataset caps each
//! idiom at K passages, sampled uniformly without replacement; idioms
//! with fewer than K keep everything. All randomness is driven by an
//! explicit seed and every output is re-sorted, so identical inputs give
//! byte-identical datasets.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::idiom::{DatasetEntry, IdiomEntry, IdiomKey, SplitName};
use crate::label::Language;

/// Per-idiom passage cap. `k: None` means "All".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub k: Option<u32>,
    pub seed: u64,
}

/// Train/Dev/Test fractions; must be non-negative and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.6, dev: 0.2, test: 0.2 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<(), BadRatios> {
        let parts = [self.train, self.dev, self.test];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) || float_abs(sum - 1.0) > 1e-9 {
            return Err(BadRatios);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("split ratios must be non-negative and sum to 1")]
pub struct BadRatios;

fn float_abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Assigns every idiom to a split.
///
/// Labeled idioms (gold label present or derivable from CALO annotations)
/// are sorted by key, shuffled with the seeded generator, and partitioned
/// with floor-sized Dev and Test and the remainder going to Train.
/// Unlabeled idioms all map to Unlabelled. The outcome depends only on
/// the idiom key set and the seed, never on input order.
pub fn assign_splits(
    idioms: &[IdiomEntry],
    ratios: SplitRatios,
    seed: u64,
) -> Result<BTreeMap<IdiomKey, SplitName>, BadRatios> {
    ratios.validate()?;

    let mut labeled: Vec<IdiomKey> = Vec::new();
    let mut assignment = BTreeMap::new();
    for idiom in idioms {
        let key = idiom.key();
        if assignment.contains_key(&key) || labeled.contains(&key) {
            continue;
        }
        if idiom.is_labeled() {
            labeled.push(key);
        } else {
            assignment.insert(key, SplitName::Unlabelled);
        }
    }
    labeled.sort();
    labeled.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    labeled.shuffle(&mut rng);

    let n = labeled.len();
    let dev = (n as f64 * ratios.dev) as usize;
    let test = (n as f64 * ratios.test) as usize;
    let train = n - dev - test;

    for (index, key) in labeled.into_iter().enumerate() {
        let split = if index < train {
            SplitName::Train
        } else if index < train + dev {
            SplitName::Dev
        } else {
            SplitName::Test
        };
        assignment.insert(key, split);
    }
    Ok(assignment)
}

/// `take` distinct indices out of `0..len`, sorted ascending, drawn
/// uniformly without replacement from the seeded generator.
pub fn sample_indices(len: usize, take: usize, seed: u64) -> Vec<usize> {
    let take = take.min(len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, len, take).into_vec();
    picked.sort_unstable();
    picked
}

/// Retains at most K passages per idiom. Each idiom draws from its own
/// seed stream (derived from the global seed and the idiom key), so one
/// idiom's sample never depends on which other idioms are present.
/// Output is sorted by (language, surface, passage id).
pub fn balance_sample(entries: &[DatasetEntry], config: &SamplingConfig) -> Vec<DatasetEntry> {
    let mut groups: BTreeMap<IdiomKey, Vec<&DatasetEntry>> = BTreeMap::new();
    for entry in entries {
        groups.entry(entry.idiom.key()).or_default().push(entry);
    }

    let mut out: Vec<DatasetEntry> = Vec::new();
    for (key, mut group) in groups {
        group.sort_by(|a, b| a.passage.id.cmp(&b.passage.id));
        match config.k {
            None => out.extend(group.into_iter().cloned()),
            Some(k) => {
                let take = (k as usize).min(group.len());
                if take == group.len() {
                    out.extend(group.into_iter().cloned());
                } else {
                    for index in sample_indices(group.len(), take, idiom_seed(config.seed, &key)) {
                        out.push(group[index].clone());
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (a.idiom.language, &a.idiom.surface, &a.passage.id).cmp(&(
            b.idiom.language,
            &b.idiom.surface,
            &b.passage.id,
        ))
    });
    out
}

/// Stable per-idiom sub-seed: global seed xor FNV-1a of the idiom key.
fn idiom_seed(seed: u64, key: &IdiomKey) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    };
    eat(match key.language {
        Language::Zh => 0,
        Language::En => 1,
    });
    for byte in key.surface.as_bytes() {
        eat(*byte);
    }
    seed ^ hash
}

/// One table cell: distinct idioms and total rows for a
/// (language, split, K) combination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsCell {
    pub idioms: u64,
    pub entries: u64,
}

/// Cell key; `k: None` (All) sorts after every finite K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsKey {
    pub language: Language,
    pub split: SplitName,
    pub k: Option<u32>,
}

impl StatsKey {
    fn order(&self) -> (Language, SplitName, u64) {
        (self.language, self.split, self.k.map_or(u64::MAX, u64::from))
    }
}

impl Ord for StatsKey {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.order().cmp(&other.order())
    }
}

impl PartialOrd for StatsKey {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Dataset statistics over every requested K.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub cells: BTreeMap<StatsKey, StatsCell>,
}

/// Counts idioms and rows per (language, split, K) cell, applying
/// [`balance_sample`] for each requested K.
pub fn compute_stats(entries: &[DatasetEntry], ks: &[Option<u32>], seed: u64) -> DatasetStats {
    let mut stats = DatasetStats::default();
    for k in ks {
        let sampled = balance_sample(entries, &SamplingConfig { k: *k, seed });
        let mut idioms: BTreeMap<(Language, SplitName), Vec<IdiomKey>> = BTreeMap::new();
        for entry in &sampled {
            let cell_key = StatsKey { language: entry.idiom.language, split: entry.split, k: *k };
            let cell = stats.cells.entry(cell_key).or_default();
            cell.entries += 1;
            let seen = idioms.entry((entry.idiom.language, entry.split)).or_default();
            let key = entry.idiom.key();
            if !seen.contains(&key) {
                seen.push(key);
                cell.idioms += 1;
            }
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idiom::CorpusDocument;
    use crate::label::SentimentLabel;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn labeled(surface: &str, language: Language) -> IdiomEntry {
        IdiomEntry::new(surface, language).with_sentiment(SentimentLabel::Positive)
    }

    fn entry(surface: &str, passage_id: &str, split: SplitName) -> DatasetEntry {
        DatasetEntry {
            idiom: labeled(surface, Language::En),
            passage: CorpusDocument::new(passage_id, &format!("text with {surface}"), Language::En),
            split,
        }
    }

    fn group(surface: &str, passages: usize) -> Vec<DatasetEntry> {
        (0..passages)
            .map(|i| entry(surface, &format!("{surface}-{i:04}"), SplitName::Train))
            .collect()
    }

    #[test]
    fn ten_idioms_split_six_two_two() {
        let idioms: Vec<IdiomEntry> =
            (0..10).map(|i| labeled(&format!("idiom {i}"), Language::En)).collect();
        let splits = assign_splits(&idioms, SplitRatios::default(), 7).unwrap();
        let count = |s: SplitName| splits.values().filter(|v| **v == s).count();
        assert_eq!(
            (count(SplitName::Train), count(SplitName::Dev), count(SplitName::Test)),
            (6, 2, 2)
        );
    }

    #[test]
    fn unlabeled_idioms_go_to_unlabelled() {
        let idioms = vec![IdiomEntry::new("no label", Language::En)];
        let splits = assign_splits(&idioms, SplitRatios::default(), 0).unwrap();
        assert_eq!(splits[&idioms[0].key()], SplitName::Unlabelled);
    }

    #[test]
    fn bad_ratios_are_rejected() {
        let ratios = SplitRatios { train: 0.5, dev: 0.2, test: 0.2 };
        assert_eq!(assign_splits(&[], ratios, 0), Err(BadRatios));
        let negative = SplitRatios { train: 1.2, dev: -0.1, test: -0.1 };
        assert_eq!(assign_splits(&[], negative, 0), Err(BadRatios));
    }

    #[test]
    fn assignment_ignores_input_order() {
        let mut idioms: Vec<IdiomEntry> =
            (0..30).map(|i| labeled(&format!("idiom {i}"), Language::En)).collect();
        let forward = assign_splits(&idioms, SplitRatios::default(), 42).unwrap();
        idioms.reverse();
        let reversed = assign_splits(&idioms, SplitRatios::default(), 42).unwrap();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn cap_keeps_small_groups_whole() {
        let entries = group("come in", 2);
        let sampled = balance_sample(&entries, &SamplingConfig { k: Some(4), seed: 1 });
        assert_eq!(sampled.len(), 2);
    }

    #[test]
    fn cap_cuts_large_groups() {
        let entries = group("come in", 10);
        let sampled = balance_sample(&entries, &SamplingConfig { k: Some(1), seed: 1 });
        assert_eq!(sampled.len(), 1);
    }

    #[test]
    fn mixed_groups_sum_min_oracle() {
        let mut entries = Vec::new();
        for (i, n) in [1usize, 3, 4, 8, 20].iter().enumerate() {
            entries.extend(group(&format!("idiom {i}"), *n));
        }
        let sampled = balance_sample(&entries, &SamplingConfig { k: Some(4), seed: 9 });
        // sum of min(4, n_i) = 1 + 3 + 4 + 4 + 4
        assert_eq!(sampled.len(), 16);
    }

    #[test]
    fn absent_k_keeps_everything() {
        let entries = group("come in", 10);
        let sampled = balance_sample(&entries, &SamplingConfig { k: None, seed: 1 });
        assert_eq!(sampled.len(), 10);
    }

    #[test]
    fn stats_mixed_ks() {
        let mut entries = Vec::new();
        for (i, n) in [2usize, 5, 9].iter().enumerate() {
            entries.extend(group(&format!("idiom {i}"), *n));
        }
        let stats = compute_stats(&entries, &[Some(8)], 3);
        let key = StatsKey { language: Language::En, split: SplitName::Train, k: Some(8) };
        assert_eq!(stats.cells[&key], StatsCell { idioms: 3, entries: 15 });
    }

    #[test]
    fn stats_of_empty_dataset_are_empty() {
        let stats = compute_stats(&[], &[Some(1), None], 0);
        assert!(stats.cells.is_empty());
    }

    proptest! {
        /// Split partition: every labeled idiom lands in exactly one of
        /// Train/Dev/Test, for any seed.
        #[test]
        fn split_is_a_partition(seed in any::<u64>(), n in 1usize..60) {
            let idioms: Vec<IdiomEntry> =
                (0..n).map(|i| labeled(&format!("idiom {i}"), Language::En)).collect();
            let splits = assign_splits(&idioms, SplitRatios::default(), seed).unwrap();
            prop_assert_eq!(splits.len(), n);
            for idiom in &idioms {
                let split = splits[&idiom.key()];
                prop_assert!(matches!(split, SplitName::Train | SplitName::Dev | SplitName::Test));
            }
        }

        /// Cap law and determinism of balanced sampling.
        #[test]
        fn cap_law_and_determinism(seed in any::<u64>(), sizes in proptest::collection::vec(1usize..12, 1..6), k in 1u32..8) {
            let mut entries = Vec::new();
            for (i, n) in sizes.iter().enumerate() {
                entries.extend(group(&format!("idiom {i}"), *n));
            }
            let config = SamplingConfig { k: Some(k), seed };
            let first = balance_sample(&entries, &config);
            let second = balance_sample(&entries, &config);
            prop_assert_eq!(&first, &second);

            for (i, n) in sizes.iter().enumerate() {
                let surface = format!("idiom {i}");
                let got = first.iter().filter(|e| e.idiom.surface == surface).count();
                prop_assert_eq!(got, (k as usize).min(*n));
            }
        }

        /// Entry counts are monotone in K.
        #[test]
        fn entry_count_is_monotone_in_k(seed in any::<u64>(), sizes in proptest::collection::vec(1usize..20, 1..6)) {
            let mut entries = Vec::new();
            for (i, n) in sizes.iter().enumerate() {
                entries.extend(group(&format!("idiom {i}"), *n));
            }
            let mut previous = 0usize;
            for k in [Some(1u32), Some(4), Some(8), Some(16), None] {
                let sampled = balance_sample(&entries, &SamplingConfig { k, seed });
                prop_assert!(sampled.len() >= previous);
                previous = sampled.len();
            }
        }
    }
}
