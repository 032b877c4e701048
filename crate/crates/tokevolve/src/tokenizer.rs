//! Core byte-level BPE tokenizer: vocabulary, merge rules, greedy
//! encoding, decoding and structural validation.

use std::collections::HashMap;

use crate::byte_map::{pre_tokenize, ByteUnicodeMap};
use crate::error::{Error, Result, TokenId};

/// One merge rule: `left ++ right -> result`, applied in rank order
/// (lower rank first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub result: String,
    pub rank: u32,
}

impl MergeRule {
    pub fn new(left: impl Into<String>, right: impl Into<String>, rank: u32) -> Self {
        let left = left.into();
        let right = right.into();
        let result = format!("{left}{right}");
        MergeRule {
            left,
            right,
            result,
            rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialToken {
    pub text: String,
    pub id: TokenId,
}

/// RoBERTa-style control tokens. All five are present in the vocab with
/// distinct ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialTokens {
    pub bos: SpecialToken,
    pub pad: SpecialToken,
    pub eos: SpecialToken,
    pub unk: SpecialToken,
    pub mask: SpecialToken,
}

/// Default special literals, in default id order (bos=0 .. mask=4).
pub const DEFAULT_SPECIALS: [&str; 5] = ["<s>", "<pad>", "</s>", "<unk>", "<mask>"];

impl SpecialTokens {
    pub fn from_literals(literals: &[String; 5], ids: [TokenId; 5]) -> Self {
        let tok = |i: usize| SpecialToken {
            text: literals[i].clone(),
            id: ids[i],
        };
        SpecialTokens {
            bos: tok(0),
            pad: tok(1),
            eos: tok(2),
            unk: tok(3),
            mask: tok(4),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpecialToken> {
        [&self.bos, &self.pad, &self.eos, &self.unk, &self.mask].into_iter()
    }

    pub fn ids(&self) -> [TokenId; 5] {
        [
            self.bos.id,
            self.pad.id,
            self.eos.id,
            self.unk.id,
            self.mask.id,
        ]
    }

    pub fn contains_id(&self, id: TokenId) -> bool {
        self.ids().contains(&id)
    }

    pub fn contains_text(&self, text: &str) -> bool {
        self.iter().any(|s| s.text == text)
    }
}

/// Token string <-> id bijection with ids contiguous in `[0, len)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    token_to_id: HashMap<String, TokenId>,
    id_to_token: Vec<String>,
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::default()
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    pub fn id_of(&self, token: &str) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    pub fn token_of(&self, id: TokenId) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    /// Insert a token at the next free id. Returns the existing id if the
    /// token is already present.
    pub fn push(&mut self, token: impl Into<String>) -> TokenId {
        let token = token.into();
        if let Some(&id) = self.token_to_id.get(&token) {
            return id;
        }
        let id = self.id_to_token.len() as TokenId;
        self.token_to_id.insert(token.clone(), id);
        self.id_to_token.push(token);
        id
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, TokenId)> {
        self.id_to_token
            .iter()
            .enumerate()
            .map(|(id, t)| (t.as_str(), id as TokenId))
    }
}

/// How `decode` renders special-token ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpecialPolicy {
    /// Drop special tokens from the output (default).
    #[default]
    Skip,
    /// Render their literal text.
    Keep,
}

/// An immutable byte-level BPE tokenizer. Safe to share across threads
/// for concurrent encoding.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    vocab: Vocab,
    merges: Vec<MergeRule>,
    specials: SpecialTokens,
    byte_map: ByteUnicodeMap,
    // (left, right) -> rank; result is implicit concatenation
    pair_rank: HashMap<(String, String), u32>,
}

impl Tokenizer {
    pub fn new(vocab: Vocab, merges: Vec<MergeRule>, specials: SpecialTokens) -> Self {
        let pair_rank = merges
            .iter()
            .map(|r| ((r.left.clone(), r.right.clone()), r.rank))
            .collect();
        Tokenizer {
            vocab,
            merges,
            specials,
            byte_map: ByteUnicodeMap::default(),
            pair_rank,
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn specials(&self) -> &SpecialTokens {
        &self.specials
    }

    pub fn byte_map(&self) -> &ByteUnicodeMap {
        &self.byte_map
    }

    /// Greedily merge a word's symbol sequence: repeatedly apply the
    /// lowest-ranked applicable rule, leftmost occurrence first.
    pub fn merge_word(&self, word: &str) -> Vec<String> {
        let mut parts: Vec<String> = word.chars().map(|c| c.to_string()).collect();
        loop {
            let mut best: Option<(u32, usize)> = None;
            for i in 0..parts.len().saturating_sub(1) {
                // TODO: switch the pair key to interned ids if encoding
                // large corpora ever shows up in profiles
                let key = (parts[i].clone(), parts[i + 1].clone());
                if let Some(&rank) = self.pair_rank.get(&key) {
                    if best.is_none_or(|(r, _)| rank < r) {
                        best = Some((rank, i));
                    }
                }
            }
            match best {
                Some((_, i)) => {
                    let right = parts.remove(i + 1);
                    parts[i].push_str(&right);
                }
                None => return parts,
            }
        }
    }

    /// Encode text to token ids. Byte-level base symbols guarantee no
    /// out-of-vocabulary input.
    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        let mut ids = Vec::new();
        for word in pre_tokenize(text, &self.byte_map) {
            for part in self.merge_word(&word) {
                let id = self
                    .vocab
                    .id_of(&part)
                    .expect("base symbols and merge results must be in vocab");
                ids.push(id);
            }
        }
        ids
    }

    /// Decode token ids back to text.
    pub fn decode(&self, ids: &[TokenId], policy: SpecialPolicy) -> Result<String> {
        let mut bytes = Vec::new();
        for &id in ids {
            let token = self
                .vocab
                .token_of(id)
                .ok_or(Error::IdOutOfRange(id, self.vocab.len()))?;
            if self.specials.contains_id(id) {
                if policy == SpecialPolicy::Keep {
                    bytes.extend_from_slice(token.as_bytes());
                }
                continue;
            }
            match self.byte_map.unmap_str(token) {
                Some(raw) => bytes.extend_from_slice(&raw),
                // tolerate unknown symbols (e.g. user-added literals)
                None => bytes.extend_from_slice(token.as_bytes()),
            }
        }
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Build a tokenizer with the default layout (specials at ids 0..5,
    /// then the 256 base symbols, then one result token per merge pair in
    /// rank order). Handy for fixtures and bootstrap vocabularies.
    pub fn from_merge_pairs(pairs: &[(&str, &str)]) -> Self {
        let mut vocab = Vocab::new();
        let literals: [String; 5] = DEFAULT_SPECIALS.map(String::from);
        let mut ids = [0; 5];
        for (i, lit) in literals.iter().enumerate() {
            ids[i] = vocab.push(lit.clone());
        }
        let map = ByteUnicodeMap::default();
        for b in 0u8..=255 {
            vocab.push(map.byte_to_char(b).to_string());
        }
        let mut merges = Vec::new();
        for (rank, (l, r)) in pairs.iter().enumerate() {
            let rule = MergeRule::new(*l, *r, rank as u32);
            vocab.push(rule.result.clone());
            merges.push(rule);
        }
        Tokenizer::new(vocab, merges, SpecialTokens::from_literals(&literals, ids))
    }

    /// Check every structural invariant. Returns one diagnostic per
    /// violation; an empty list means the tokenizer is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();

        // vocab bijection and contiguity
        if self.vocab.token_to_id.len() != self.vocab.id_to_token.len() {
            violations.push("vocab token->id and id->token sizes differ".into());
        }
        for (id, token) in self.vocab.id_to_token.iter().enumerate() {
            if token.is_empty() {
                violations.push(format!("empty token at id {id}"));
            }
            if self.vocab.token_to_id.get(token) != Some(&(id as TokenId)) {
                violations.push(format!("vocab bijection broken at id {id} ({token:?})"));
            }
        }

        // specials present with matching ids, all distinct
        let mut ids_seen = std::collections::HashSet::new();
        for s in self.specials.iter() {
            if !ids_seen.insert(s.id) {
                violations.push(format!("special token id {} used twice", s.id));
            }
            if self.vocab.token_of(s.id) != Some(s.text.as_str()) {
                violations.push(format!(
                    "special token {:?} not in vocab at id {}",
                    s.text, s.id
                ));
            }
        }

        // all 256 base symbols present
        for b in 0u8..=255 {
            let sym = self.byte_map.byte_to_char(b).to_string();
            if !self.vocab.contains(&sym) {
                violations.push(format!("base symbol for byte {b:#04x} missing from vocab"));
            }
        }

        // merge rules: rank contiguity, concatenation, closure
        let mut result_rank: HashMap<&str, Vec<u32>> = HashMap::new();
        for (i, rule) in self.merges.iter().enumerate() {
            if rule.rank != i as u32 {
                violations.push(format!(
                    "rule {i} has rank {}, expected contiguous rank {i}",
                    rule.rank
                ));
            }
            if rule.result != format!("{}{}", rule.left, rule.right) {
                violations.push(format!(
                    "rule {i}: result {:?} is not left ++ right",
                    rule.result
                ));
            }
            for part in [&rule.left, &rule.right, &rule.result] {
                if !self.vocab.contains(part) {
                    violations.push(format!("rule {i}: token {part:?} not in vocab"));
                }
            }
            result_rank.entry(&rule.result).or_default().push(rule.rank);
        }

        // well-formedness: each non-special multi-symbol token has exactly
        // one producing rule
        for token in &self.vocab.id_to_token {
            if self.specials.contains_text(token) {
                continue;
            }
            let n_producers = result_rank.get(token.as_str()).map_or(0, Vec::len);
            if token.chars().count() > 1 && n_producers != 1 {
                violations.push(format!(
                    "token {token:?} produced by {n_producers} rules, expected 1"
                ));
            }
        }

        // reachability: operands are base symbols or earlier results
        for rule in &self.merges {
            for operand in [&rule.left, &rule.right] {
                if operand.chars().count() == 1 {
                    continue;
                }
                let reachable = result_rank
                    .get(operand.as_str())
                    .is_some_and(|ranks| ranks.iter().any(|&r| r < rule.rank));
                if !reachable {
                    violations.push(format!(
                        "rule at rank {}: operand {operand:?} not derivable before it",
                        rule.rank
                    ));
                }
            }
        }

        violations
    }
}
