//! Shared helpers for integration tests: fixture corpora, independent
//! reference implementations used as oracles, and seeded generators.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tokevolve::byte_map::{pre_tokenize, ByteUnicodeMap};
use tokevolve::tokenizer::{Tokenizer, DEFAULT_SPECIALS};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> Vec<String> {
    let raw = std::fs::read_to_string(fixture_path(name)).unwrap();
    raw.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            v["text"].as_str().unwrap().to_string()
        })
        .collect()
}

/// Naive reference BPE trainer: re-counts every pair from scratch each
/// iteration. Returns the merge list as (left, right) pairs in order.
/// Selection: highest frequency >= `min_freq`, ties broken by the
/// lexicographically smallest (left, right); pairs whose concatenation
/// already names a token are skipped.
pub fn reference_train_merges(
    docs: &[String],
    max_merges: usize,
    min_freq: u64,
) -> Vec<(String, String)> {
    let byte_map = ByteUnicodeMap::default();
    let mut word_counts: BTreeMap<String, u64> = BTreeMap::new();
    for doc in docs {
        for word in pre_tokenize(doc, &byte_map) {
            *word_counts.entry(word).or_insert(0) += 1;
        }
    }

    let mut vocab: BTreeSet<String> = DEFAULT_SPECIALS.iter().map(|s| s.to_string()).collect();
    for b in 0u8..=255 {
        vocab.insert(byte_map.byte_to_char(b).to_string());
    }

    let mut segments: Vec<(Vec<String>, u64)> = word_counts
        .iter()
        .map(|(w, &c)| (w.chars().map(|ch| ch.to_string()).collect(), c))
        .collect();

    let mut merges = Vec::new();
    for _ in 0..max_merges {
        let mut pair_counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (parts, count) in &segments {
            for i in 0..parts.len().saturating_sub(1) {
                *pair_counts
                    .entry((parts[i].clone(), parts[i + 1].clone()))
                    .or_insert(0) += count;
            }
        }
        let mut best: Option<(&(String, String), u64)> = None;
        for (pair, &freq) in &pair_counts {
            if freq < min_freq || vocab.contains(&format!("{}{}", pair.0, pair.1)) {
                continue;
            }
            best = match best {
                None => Some((pair, freq)),
                // BTreeMap iterates in ascending pair order, so on a
                // frequency tie the earlier (smaller) pair is kept
                Some((_, best_freq)) if freq > best_freq => Some((pair, freq)),
                some => some,
            };
        }
        let Some(((left, right), _)) = best else {
            break;
        };
        let (left, right) = (left.clone(), right.clone());
        vocab.insert(format!("{left}{right}"));
        for (parts, _) in &mut segments {
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
        merges.push((left, right));
    }
    merges
}

/// Reference greedy applier: walks the rule list in rank order and applies
/// the first applicable rule at its leftmost position, then restarts.
pub fn reference_encode_tokens(tokenizer: &Tokenizer, text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in pre_tokenize(text, tokenizer.byte_map()) {
        let mut parts: Vec<String> = word.chars().map(|c| c.to_string()).collect();
        'outer: loop {
            for rule in tokenizer.merges() {
                for i in 0..parts.len().saturating_sub(1) {
                    if parts[i] == rule.left && parts[i + 1] == rule.right {
                        let r = parts.remove(i + 1);
                        parts[i].push_str(&r);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        out.extend(parts);
    }
    out
}

/// Random unicode strings spanning ASCII, accented latin, Cyrillic, CJK,
/// emoji and control characters.
pub fn random_unicode_string(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| match rng.gen_range(0..8u8) {
            0 => ' ',
            1 | 2 => rng.gen_range(b'a'..=b'z') as char,
            3 => rng.gen_range(b'A'..=b'Z') as char,
            4 => *['é', 'ë', 'ï', 'ü', 'ñ', 'ß', 'ç'].choose(rng).unwrap(),
            5 => *['д', 'ж', 'щ', 'λ', 'Ω', '中', '語', '字'].choose(rng).unwrap(),
            6 => *['😀', '🦀', '🚀', '👍', '🌍'].choose(rng).unwrap(),
            _ => *['\t', '\n', '\u{1}', '\u{7}', '\u{1b}', '\u{0}'].choose(rng).unwrap(),
        })
        .collect()
}

/// Random lowercase "word salad" documents over a small alphabet.
pub fn random_small_corpus(rng: &mut ChaCha8Rng, n_docs: usize, alphabet: &[char]) -> Vec<String> {
    (0..n_docs)
        .map(|_| {
            let words = rng.gen_range(1..=12);
            (0..words)
                .map(|_| {
                    let len = rng.gen_range(1..=6);
                    (0..len)
                        .map(|_| *alphabet.choose(rng).unwrap())
                        .collect::<String>()
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}
