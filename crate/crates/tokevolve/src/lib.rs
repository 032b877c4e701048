//! Byte-level BPE tokenizer toolkit for vocabulary evolution: train
//! tokenizers, merge a newly trained vocabulary into an existing one
//! without renumbering old tokens, pack corpora into sentence-complete
//! token-budget chunks, grow embedding matrices for the added tokens,
//! and evaluate corpora with pseudo-perplexity under pluggable
//! masked-token scorers.

pub mod byte_map;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod evolve;
pub mod io;
pub mod tokenizer;
pub mod trainer;

pub use byte_map::{build_byte_map, pre_tokenize, ByteUnicodeMap, BOUNDARY_CHAR};
pub use error::{Error, Result, TokenId};
pub use tokenizer::{MergeRule, SpecialPolicy, SpecialTokens, Tokenizer, Vocab};
