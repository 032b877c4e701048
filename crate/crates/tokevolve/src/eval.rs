//! Pseudo-log-likelihood and pseudo-perplexity over token-id corpora
//! under a pluggable masked-token scorer.
//!
//! The transformer MLM itself is out of scope; [`MaskedScorer`] is the
//! seam where a real model plugs in. [`UnigramScorer`] is a desk-scale
//! stand-in useful as an oracle and for drift checks.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result, TokenId};

/// Probabilities below this are floored before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Scores a masked position: given a token-id sequence and a position,
/// produce a probability distribution over the vocabulary for that
/// position with all other positions visible.
pub trait MaskedScorer: Sync {
    fn vocab_size(&self) -> usize;

    /// Full distribution for position `pos`. Must be nonnegative and sum
    /// to 1 within 1e-9.
    fn distribution(&self, ids: &[TokenId], pos: usize) -> Vec<f64>;

    /// Probability of the true token at `pos`. Override when the full
    /// distribution is unnecessarily expensive.
    fn prob(&self, ids: &[TokenId], pos: usize) -> f64 {
        self.distribution(ids, pos)[ids[pos] as usize]
    }
}

/// Position- and context-independent scorer with add-one smoothing,
/// estimated from a training corpus.
#[derive(Debug, Clone)]
pub struct UnigramScorer {
    probs: Vec<f64>,
}

impl UnigramScorer {
    /// Fit on token-id sequences: p(w) = (count(w) + 1) / (N + |V|).
    pub fn fit(corpus: &[Vec<TokenId>], vocab_size: usize) -> Self {
        let mut counts = vec![0u64; vocab_size];
        let mut total = 0u64;
        for seq in corpus {
            for &id in seq {
                counts[id as usize] += 1;
                total += 1;
            }
        }
        let denom = total as f64 + vocab_size as f64;
        let probs = counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect();
        UnigramScorer { probs }
    }
}

impl MaskedScorer for UnigramScorer {
    fn vocab_size(&self) -> usize {
        self.probs.len()
    }

    fn distribution(&self, _ids: &[TokenId], _pos: usize) -> Vec<f64> {
        self.probs.clone()
    }

    fn prob(&self, ids: &[TokenId], pos: usize) -> f64 {
        self.probs[ids[pos] as usize]
    }
}

/// Uniform distribution over the vocabulary; pppl of any corpus under it
/// is exactly |V|.
#[derive(Debug, Clone)]
pub struct UniformScorer {
    pub vocab_size: usize,
}

impl MaskedScorer for UniformScorer {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn distribution(&self, _ids: &[TokenId], _pos: usize) -> Vec<f64> {
        vec![1.0 / self.vocab_size as f64; self.vocab_size]
    }

    fn prob(&self, _ids: &[TokenId], _pos: usize) -> f64 {
        1.0 / self.vocab_size as f64
    }
}

/// Sum over non-special positions of ln p(true token | rest visible).
///
/// Per-position terms are accumulated in position order regardless of the
/// order the scorer is queried in, so the sum is bitwise reproducible.
pub fn pseudo_log_likelihood(
    scorer: &dyn MaskedScorer,
    ids: &[TokenId],
    special_ids: &HashSet<TokenId>,
) -> Result<f64> {
    let order: Vec<usize> = (0..ids.len()).collect();
    pll_with_query_order(scorer, ids, special_ids, &order)
}

/// [`pseudo_log_likelihood`] with an explicit scorer query order; the
/// result is identical for any permutation of the positions.
pub fn pll_with_query_order(
    scorer: &dyn MaskedScorer,
    ids: &[TokenId],
    special_ids: &HashSet<TokenId>,
    order: &[usize],
) -> Result<f64> {
    if ids.is_empty() {
        return Err(Error::EmptyInput("token sequence"));
    }
    let mut terms = vec![0.0f64; ids.len()];
    let mut scored = vec![false; ids.len()];
    for &pos in order {
        if special_ids.contains(&ids[pos]) {
            continue;
        }
        terms[pos] = scorer.prob(ids, pos).max(PROB_FLOOR).ln();
        scored[pos] = true;
    }
    Ok(terms
        .iter()
        .zip(&scored)
        .filter(|(_, &s)| s)
        .map(|(&t, _)| t)
        .sum())
}

fn count_scorable(ids: &[TokenId], special_ids: &HashSet<TokenId>) -> u64 {
    ids.iter().filter(|id| !special_ids.contains(id)).count() as u64
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DocScore {
    pub n_tokens: u64,
    pub pll: f64,
    pub pppl: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PpplReport {
    pub n_tokens: u64,
    pub pll_sum: f64,
    pub pppl: f64,
    pub per_doc: Vec<DocScore>,
}

impl PpplReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Corpus-level pseudo-perplexity: exp(-PLL / N) with N the total count
/// of non-special tokens. Documents are scored in order; empty documents
/// are skipped.
pub fn pppl(
    scorer: &dyn MaskedScorer,
    corpus: &[Vec<TokenId>],
    special_ids: &HashSet<TokenId>,
) -> Result<PpplReport> {
    let mut per_doc = Vec::new();
    let mut pll_sum = 0.0f64;
    let mut n_tokens = 0u64;
    for seq in corpus {
        if seq.is_empty() {
            continue;
        }
        let pll = pseudo_log_likelihood(scorer, seq, special_ids)?;
        let n = count_scorable(seq, special_ids);
        if n == 0 {
            continue;
        }
        per_doc.push(DocScore {
            n_tokens: n,
            pll,
            pppl: (-pll / n as f64).exp(),
        });
        pll_sum += pll;
        n_tokens += n;
    }
    if n_tokens == 0 {
        return Err(Error::EmptyInput("corpus"));
    }
    Ok(PpplReport {
        n_tokens,
        pll_sum,
        pppl: (-pll_sum / n_tokens as f64).exp(),
        per_doc,
    })
}

/// Early-stopping rule on a history of validation pppl values: stop once
/// the best (strictly smallest) value is `patience` or more evaluations
/// old.
pub fn early_stop_check(history: &[f64], patience: usize) -> bool {
    assert!(!history.is_empty(), "history must be nonempty");
    assert!(patience >= 1, "patience must be at least 1");
    let mut best = history[0];
    let mut best_idx = 0;
    for (i, &v) in history.iter().enumerate().skip(1) {
        if v < best {
            best = v;
            best_idx = i;
        }
    }
    history.len() - 1 - best_idx >= patience
}
