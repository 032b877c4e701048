//! Property tests for the tokenizer core and the vocabulary merger.

mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use common::{load_fixture, reference_encode_tokens};
use tokevolve::evolve::merge_tokenizers;
use tokevolve::tokenizer::{SpecialPolicy, Tokenizer};
use tokevolve::trainer::{train, TrainConfig};

fn trained() -> &'static Tokenizer {
    static T: OnceLock<Tokenizer> = OnceLock::new();
    T.get_or_init(|| {
        let docs = load_fixture("corpus_a.jsonl");
        let config = TrainConfig {
            target_vocab_size: 261 + 80,
            min_pair_frequency: 2,
            ..TrainConfig::default()
        };
        train(&docs, &config).unwrap().tokenizer
    })
}

fn merged_pair() -> &'static (Tokenizer, Tokenizer) {
    static T: OnceLock<(Tokenizer, Tokenizer)> = OnceLock::new();
    T.get_or_init(|| {
        let a = load_fixture("corpus_a.jsonl");
        let mut ab = a.clone();
        ab.extend(load_fixture("corpus_b.jsonl"));
        let config = TrainConfig {
            target_vocab_size: 261 + 80,
            min_pair_frequency: 2,
            ..TrainConfig::default()
        };
        let old = train(&a, &config).unwrap().tokenizer;
        let new = train(&ab, &config).unwrap().tokenizer;
        let merged = merge_tokenizers(&old, &new).unwrap().merged;
        (old, merged)
    })
}

proptest! {
    #[test]
    fn roundtrip_identity(s in any::<String>()) {
        let t = trained();
        let decoded = t.decode(&t.encode(&s), SpecialPolicy::Skip).unwrap();
        prop_assert_eq!(decoded, s);
    }

    #[test]
    fn encode_is_deterministic(s in any::<String>()) {
        let t = trained();
        prop_assert_eq!(t.encode(&s), t.encode(&s));
    }

    #[test]
    fn encode_matches_reference_applier(s in "[a-z ]{0,40}") {
        let t = trained();
        let via_impl: Vec<String> = t
            .encode(&s)
            .iter()
            .map(|&id| t.vocab().token_of(id).unwrap().to_string())
            .collect();
        prop_assert_eq!(via_impl, reference_encode_tokens(t, &s));
    }

    #[test]
    fn merged_never_longer(s in any::<String>()) {
        let (old, merged) = merged_pair();
        prop_assert!(merged.encode(&s).len() <= old.encode(&s).len());
    }

    #[test]
    fn merged_roundtrip(s in any::<String>()) {
        let (_, merged) = merged_pair();
        let decoded = merged.decode(&merged.encode(&s), SpecialPolicy::Skip).unwrap();
        prop_assert_eq!(decoded, s);
    }
}

#[test]
fn merged_tokenizer_validates() {
    let (old, merged) = merged_pair();
    assert!(old.validate().is_empty());
    assert!(merged.validate().is_empty());
}
