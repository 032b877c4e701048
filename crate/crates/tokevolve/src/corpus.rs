//! Document pre-processing: rule-based sentence splitting and greedy
//! packing of complete sentences into fixed token budgets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::TokenId;
use crate::tokenizer::Tokenizer;

/// Abbreviations that end with a period but do not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "dhr.", "mevr.", "mr.", "dr.", "drs.", "prof.", "ir.", "ing.", "st.", "nr.", "o.a.", "d.w.z.",
    "bijv.", "etc.", "ca.", "resp.", "p.", "vs.", "jl.", "m.b.t.",
];

/// Split a document into sentences.
///
/// A sentence ends at `.`, `!`, `?` or `…` (optionally followed by a
/// closing quote or bracket) when the next non-whitespace char starts a
/// new sentence (uppercase, digit or opening quote). A short abbreviation
/// list guards common false splits. Joining the returned sentences with
/// single spaces reproduces the document text up to inter-sentence
/// whitespace normalization.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?' | '…') {
            let mut end = i + 1;
            // trailing closers stay with the sentence
            while end < chars.len() && matches!(chars[end], '"' | '\'' | '”' | '’' | ')' | ']') {
                end += 1;
            }
            let mut j = end;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            let boundary = j > end
                && j < chars.len()
                && (chars[j].is_uppercase()
                    || chars[j].is_ascii_digit()
                    || matches!(chars[j], '"' | '\'' | '“' | '‘' | '(' | '['))
                && !(c == '.' && ends_with_abbreviation(&chars[start..end]));
            if boundary {
                let sentence: String = chars[start..end].iter().collect();
                let trimmed = sentence.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                start = j;
                i = j;
                continue;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let trimmed = tail.trim();
        if !trimmed.is_empty() {
            sentences.push(trimmed.to_string());
        }
    }
    sentences
}

fn ends_with_abbreviation(chars: &[char]) -> bool {
    let s: String = chars.iter().collect();
    let last_word = s.rsplit(char::is_whitespace).next().unwrap_or("");
    ABBREVIATIONS
        .iter()
        .any(|a| last_word.eq_ignore_ascii_case(a))
}

/// A token-budget chunk of complete sentences.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PackedChunk {
    pub doc_id: String,
    pub ids: Vec<TokenId>,
    /// (start, end) index pairs into `ids`, one per sentence, tiling the
    /// chunk exactly.
    pub spans: Vec<(usize, usize)>,
}

impl PackedChunk {
    /// One JSONL record: `{"doc_id":...,"ids":[...],"spans":[[s,e],...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("chunk serializes")
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PackWarning {
    pub doc_id: String,
    pub sentence_index: usize,
    pub token_count: usize,
    pub budget: usize,
}

#[derive(Debug, Default)]
pub struct PackOutput {
    pub chunks: Vec<PackedChunk>,
    pub warnings: Vec<PackWarning>,
}

/// Greedily pack sentences into chunks of at most `max_tokens` tokens.
///
/// Sentences are appended in order while they fit; a sentence that would
/// overflow closes the current chunk. A single sentence longer than the
/// budget is emitted alone, truncated, with a warning.
pub fn pack_document(
    doc_id: &str,
    sentences: &[String],
    tokenizer: &Tokenizer,
    max_tokens: usize,
) -> PackOutput {
    let encoded: Vec<Vec<TokenId>> = sentences.iter().map(|s| tokenizer.encode(s)).collect();
    pack_encoded(doc_id, &encoded, max_tokens)
}

/// Packing over already-encoded sentences; `pack_document` is this plus
/// tokenization.
pub fn pack_encoded(doc_id: &str, encoded: &[Vec<TokenId>], max_tokens: usize) -> PackOutput {
    assert!(max_tokens >= 1, "max_tokens must be at least 1");
    let mut out = PackOutput::default();
    let mut ids: Vec<TokenId> = Vec::new();
    let mut spans: Vec<(usize, usize)> = Vec::new();

    let flush = |ids: &mut Vec<TokenId>, spans: &mut Vec<(usize, usize)>, out: &mut PackOutput| {
        if !ids.is_empty() {
            out.chunks.push(PackedChunk {
                doc_id: doc_id.to_string(),
                ids: std::mem::take(ids),
                spans: std::mem::take(spans),
            });
        }
    };

    for (index, sent) in encoded.iter().enumerate() {
        if sent.is_empty() {
            continue;
        }
        if sent.len() > max_tokens {
            flush(&mut ids, &mut spans, &mut out);
            out.warnings.push(PackWarning {
                doc_id: doc_id.to_string(),
                sentence_index: index,
                token_count: sent.len(),
                budget: max_tokens,
            });
            out.chunks.push(PackedChunk {
                doc_id: doc_id.to_string(),
                ids: sent[..max_tokens].to_vec(),
                spans: vec![(0, max_tokens)],
            });
            continue;
        }
        if ids.len() + sent.len() > max_tokens {
            flush(&mut ids, &mut spans, &mut out);
        }
        let start = ids.len();
        ids.extend_from_slice(sent);
        spans.push((start, ids.len()));
    }
    flush(&mut ids, &mut spans, &mut out);
    out
}

/// Split and pack many documents. Output order matches input order.
pub fn pack_corpus<S: AsRef<str> + Sync>(
    docs: &[S],
    tokenizer: &Tokenizer,
    max_tokens: usize,
) -> PackOutput {
    let per_doc: Vec<PackOutput> = docs
        .par_iter()
        .enumerate()
        .map(|(i, doc)| {
            let sentences = split_sentences(doc.as_ref());
            pack_document(&format!("doc{i}"), &sentences, tokenizer, max_tokens)
        })
        .collect();
    let mut out = PackOutput::default();
    for mut p in per_doc {
        out.chunks.append(&mut p.chunks);
        out.warnings.append(&mut p.warnings);
    }
    out
}
