//! Vocabulary evolution: merge a newly trained tokenizer into an existing
//! one without disturbing any existing token id, then report on the added
//! tokens.
//!
//! The merged tokenizer keeps the old vocabulary and merge rules verbatim.
//! Rules of the new tokenizer whose result token is genuinely new are
//! appended after all old rules (in their original relative order) and the
//! result tokens get the next free ids, so old embedding rows stay valid
//! and new rows form a contiguous suffix.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::byte_map::BOUNDARY_CHAR;
use crate::error::{Error, Result, TokenId};
use crate::tokenizer::{MergeRule, Tokenizer};

#[derive(Debug)]
pub struct MergeOutcome {
    pub merged: Tokenizer,
    /// Newly added tokens with their assigned ids, in assignment order.
    pub added_tokens: Vec<(String, TokenId)>,
    /// Rules appended to the old rule list, re-ranked.
    pub appended_rules: Vec<MergeRule>,
    /// New-tokenizer rules whose result was already covered.
    pub skipped_rules: Vec<MergeRule>,
}

/// Tokens present in `new` but not in `old`.
pub fn vocab_diff(old: &Tokenizer, new: &Tokenizer) -> HashSet<String> {
    new.vocab()
        .iter()
        .filter(|(token, _)| !old.vocab().contains(token))
        .map(|(token, _)| token.to_string())
        .collect()
}

/// Merge `new` into `old`, producing a tokenizer that extends `old` with
/// the tokens only `new` knows about. Every old token keeps its id.
pub fn merge_tokenizers(old: &Tokenizer, new: &Tokenizer) -> Result<MergeOutcome> {
    if old.byte_map() != new.byte_map() {
        return Err(Error::MergeMismatch("byte map"));
    }
    if old.specials() != new.specials() {
        return Err(Error::MergeMismatch("special tokens"));
    }

    let mut vocab = old.vocab().clone();
    let mut merges = old.merges().to_vec();
    let mut added_tokens = Vec::new();
    let mut appended_rules = Vec::new();
    let mut skipped_rules = Vec::new();

    for rule in new.merges() {
        if vocab.contains(&rule.result) {
            skipped_rules.push(rule.clone());
            continue;
        }
        for operand in [&rule.left, &rule.right] {
            if !vocab.contains(operand) {
                return Err(Error::UnreachableRule {
                    left: rule.left.clone(),
                    right: rule.right.clone(),
                });
            }
        }
        let id = vocab.push(rule.result.clone());
        added_tokens.push((rule.result.clone(), id));
        let reranked = MergeRule {
            rank: merges.len() as u32,
            ..rule.clone()
        };
        appended_rules.push(reranked.clone());
        merges.push(reranked);
    }

    let merged = Tokenizer::new(vocab, merges, old.specials().clone());
    Ok(MergeOutcome {
        merged,
        added_tokens,
        appended_rules,
        skipped_rules,
    })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DiffEntry {
    pub token: String,
    pub id: TokenId,
    pub frequency: u64,
    /// The same token with the leading Ġ toggled also exists.
    pub has_boundary_variant: bool,
    /// Another token matches case-insensitively with the same Ġ status.
    pub capitalization_duplicate: bool,
    pub category: Option<String>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct DiffReport {
    pub entries: Vec<DiffEntry>,
}

/// Annotate the added tokens with their frequency over a corpus (encoded
/// with the merged tokenizer) and duplicate-artifact flags.
pub fn build_diff_report<S: AsRef<str> + Sync>(
    outcome: &MergeOutcome,
    corpus: &[S],
    categories: &HashMap<String, String>,
) -> DiffReport {
    let merged = &outcome.merged;
    let mut freq: HashMap<TokenId, u64> =
        outcome.added_tokens.iter().map(|&(_, id)| (id, 0)).collect();

    let doc_counts: Vec<HashMap<TokenId, u64>> = corpus
        .par_iter()
        .map(|doc| {
            let mut local: HashMap<TokenId, u64> = HashMap::new();
            for id in merged.encode(doc.as_ref()) {
                *local.entry(id).or_insert(0) += 1;
            }
            local
        })
        .collect();
    for counts in doc_counts {
        for (id, c) in counts {
            if let Some(slot) = freq.get_mut(&id) {
                *slot += c;
            }
        }
    }

    // case-insensitive twin lookup, keyed by (has Ġ, lowercased remainder)
    let mut by_folded: HashMap<(bool, String), u32> = HashMap::new();
    for (token, _) in merged.vocab().iter() {
        let (bound, rest) = split_boundary(token);
        *by_folded.entry((bound, rest.to_lowercase())).or_insert(0) += 1;
    }

    let entries = outcome
        .added_tokens
        .iter()
        .map(|(token, id)| {
            let (bound, rest) = split_boundary(token);
            let twin = if bound {
                rest.to_string()
            } else {
                format!("{BOUNDARY_CHAR}{token}")
            };
            DiffEntry {
                token: token.clone(),
                id: *id,
                frequency: freq[id],
                has_boundary_variant: merged.vocab().contains(&twin),
                capitalization_duplicate: by_folded[&(bound, rest.to_lowercase())] > 1,
                category: categories.get(token).cloned(),
            }
        })
        .collect();
    DiffReport { entries }
}

fn split_boundary(token: &str) -> (bool, &str) {
    match token.strip_prefix(BOUNDARY_CHAR) {
        Some(rest) => (true, rest),
        None => (false, token),
    }
}

impl DiffReport {
    /// Tab-separated export: token, frequency, flags, category.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("token\tfrequency\thas_boundary_variant\tcapitalization_duplicate\tcategory\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.token,
                e.frequency,
                e.has_boundary_variant,
                e.capitalization_duplicate,
                e.category.as_deref().unwrap_or("")
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.entries).expect("report serializes")
    }
}
