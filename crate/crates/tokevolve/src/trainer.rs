//! BPE training: iterated most-frequent-pair merging over a word-count
//! table.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::byte_map::{pre_tokenize, ByteUnicodeMap};
use crate::error::{Error, Result};
use crate::tokenizer::{MergeRule, SpecialTokens, Tokenizer, Vocab, DEFAULT_SPECIALS};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Total vocabulary size to stop at (specials + 256 base symbols +
    /// merge results).
    pub target_vocab_size: usize,
    /// A pair must occur at least this often to be merged.
    pub min_pair_frequency: u64,
    pub specials: [String; 5],
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            target_vocab_size: 1000,
            min_pair_frequency: 2,
            specials: DEFAULT_SPECIALS.map(String::from),
        }
    }
}

impl TrainConfig {
    pub fn base_size(&self) -> usize {
        256 + self.specials.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_vocab_size < self.base_size() {
            return Err(Error::InvalidConfig(format!(
                "target_vocab_size {} is below the base size {} (256 bytes + {} specials)",
                self.target_vocab_size,
                self.base_size(),
                self.specials.len()
            )));
        }
        if self.min_pair_frequency == 0 {
            return Err(Error::InvalidConfig(
                "min_pair_frequency must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Pre-tokenized word (symbol string) -> occurrence count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordCounts(pub HashMap<String, u64>);

/// Count pre-tokenized words across documents. Order of documents does
/// not affect the result.
pub fn count_words<S: AsRef<str> + Sync>(docs: &[S]) -> WordCounts {
    let byte_map = ByteUnicodeMap::default();
    let counts = docs
        .par_iter()
        .map(|doc| {
            let mut local: HashMap<String, u64> = HashMap::new();
            for word in pre_tokenize(doc.as_ref(), &byte_map) {
                *local.entry(word).or_insert(0) += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (w, c) in b {
                *a.entry(w).or_insert(0) += c;
            }
            a
        });
    WordCounts(counts)
}

/// Frequency of each adjacent token pair over the current segmentation,
/// weighted by word count. Adjacency is positional, so "a a a" holds two
/// occurrences of (a, a).
pub fn count_pairs(segments: &[(Vec<String>, u64)]) -> HashMap<(String, String), u64> {
    let mut pairs: HashMap<(String, String), u64> = HashMap::new();
    for (parts, count) in segments {
        for window in parts.windows(2) {
            *pairs
                .entry((window[0].clone(), window[1].clone()))
                .or_insert(0) += count;
        }
    }
    pairs
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub tokenizer: Tokenizer,
    pub warnings: Vec<String>,
}

/// Train a byte-level BPE tokenizer.
///
/// Starts from the specials plus the 256 base symbols and repeatedly
/// merges the most frequent adjacent pair, lexicographic smallest
/// (left, right) on ties, until the vocab reaches the target size or no
/// pair reaches `min_pair_frequency`. Pairs whose concatenation already
/// names a vocab token (including special literals) are never selected.
pub fn train<S: AsRef<str> + Sync>(docs: &[S], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let word_counts = count_words(docs);
    train_from_counts(&word_counts, config)
}

pub fn train_from_counts(word_counts: &WordCounts, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;

    let mut vocab = Vocab::new();
    let mut special_ids = [0; 5];
    for (i, lit) in config.specials.iter().enumerate() {
        special_ids[i] = vocab.push(lit.clone());
    }
    let byte_map = ByteUnicodeMap::default();
    for b in 0u8..=255 {
        vocab.push(byte_map.byte_to_char(b).to_string());
    }

    let mut segments: Vec<(Vec<String>, u64)> = word_counts
        .0
        .iter()
        .map(|(word, &count)| (word.chars().map(|c| c.to_string()).collect(), count))
        .collect();

    let mut merges: Vec<MergeRule> = Vec::new();
    let mut warnings = Vec::new();

    while vocab.len() < config.target_vocab_size {
        let pairs = count_pairs(&segments);
        let best = pairs
            .iter()
            .filter(|((l, r), &freq)| {
                freq >= config.min_pair_frequency && !vocab.contains(&format!("{l}{r}"))
            })
            .max_by(|(pa, fa), (pb, fb)| fa.cmp(fb).then_with(|| pb.cmp(pa)));
        let Some(((left, right), _)) = best else {
            warnings.push(format!(
                "stopped at vocab size {} of {}: no remaining pair reaches min frequency {}",
                vocab.len(),
                config.target_vocab_size,
                config.min_pair_frequency
            ));
            break;
        };
        let rule = MergeRule::new(left.clone(), right.clone(), merges.len() as u32);
        vocab.push(rule.result.clone());
        for (parts, _) in &mut segments {
            apply_merge(parts, &rule.left, &rule.right);
        }
        merges.push(rule);
    }

    let tokenizer = Tokenizer::new(
        vocab,
        merges,
        SpecialTokens::from_literals(&config.specials, special_ids),
    );
    Ok(TrainOutcome {
        tokenizer,
        warnings,
    })
}

/// Replace adjacent (left, right) with their concatenation, scanning
/// leftmost-first.
fn apply_merge(parts: &mut Vec<String>, left: &str, right: &str) {
    let mut i = 0;
    while i + 1 < parts.len() {
        if parts[i] == left && parts[i + 1] == right {
            let r = parts.remove(i + 1);
            parts[i].push_str(&r);
        } else {
            i += 1;
        }
    }
}
