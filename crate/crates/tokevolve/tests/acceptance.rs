//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

mod common;

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::*;
use tokevolve::corpus::{pack_corpus, pack_encoded, split_sentences};
use tokevolve::embed::{extend_embeddings, load_binary, save_binary, EmbeddingMatrix, InitStrategy};
use tokevolve::eval::{pppl, UnigramScorer, UniformScorer};
use tokevolve::evolve::{build_diff_report, merge_tokenizers, vocab_diff, MergeOutcome};
use tokevolve::tokenizer::{SpecialPolicy, Tokenizer};
use tokevolve::trainer::{train, TrainConfig};

fn config(extra: usize, min_freq: u64) -> TrainConfig {
    TrainConfig {
        target_vocab_size: 261 + extra,
        min_pair_frequency: min_freq,
        ..TrainConfig::default()
    }
}

/// T_O trained on corpus A, T_N on A ∪ B, and their merge outcome.
fn evolved() -> &'static (Tokenizer, Tokenizer, MergeOutcome) {
    static T: OnceLock<(Tokenizer, Tokenizer, MergeOutcome)> = OnceLock::new();
    T.get_or_init(|| {
        let a = load_fixture("corpus_a.jsonl");
        let mut ab = a.clone();
        ab.extend(load_fixture("corpus_b.jsonl"));
        let old = train(&a, &config(80, 2)).unwrap().tokenizer;
        let new = train(&ab, &config(140, 2)).unwrap().tokenizer;
        let outcome = merge_tokenizers(&old, &new).unwrap();
        (old, new, outcome)
    })
}

#[test]
fn acceptance_01_roundtrip_10k_random_strings() {
    let (_, _, outcome) = evolved();
    let t = &outcome.merged;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let start = Instant::now();
    for _ in 0..10_000 {
        let s = random_unicode_string(&mut rng, 48);
        let decoded = t.decode(&t.encode(&s), SpecialPolicy::Skip).unwrap();
        assert_eq!(decoded, s, "round-trip failed for {s:?}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!("acceptance 1 (round-trip, 10k strings in {elapsed:?}): PASS");
}

#[test]
fn acceptance_02_trainer_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let alphabets: [&[char]; 3] = [
        &['a', 'b'],
        &['a', 'b', 'c'],
        &['d', 'e', 'k', 'o', 'r'],
    ];
    let mut checked = 0;
    for case in 0..24 {
        let alphabet = alphabets[case % alphabets.len()];
        let min_freq = if case % 2 == 0 { 1 } else { 2 };
        let n_docs = rng.gen_range(2..=10);
        let docs = random_small_corpus(&mut rng, n_docs, alphabet);
        let total_bytes: usize = docs.iter().map(String::len).sum();
        assert!(total_bytes <= 2048, "corpus too large for the oracle bound");

        let max_merges = 50;
        let trained = train(&docs, &config(max_merges, min_freq)).unwrap().tokenizer;
        let got: Vec<(String, String)> = trained
            .merges()
            .iter()
            .map(|r| (r.left.clone(), r.right.clone()))
            .collect();
        let expected = reference_train_merges(&docs, max_merges, min_freq);
        assert_eq!(got, expected, "merge lists diverge on corpus {docs:?}");
        checked += 1;
    }
    assert!(checked >= 20);
    println!("acceptance 2 (trainer oracle equivalence, {checked} corpora): PASS");
}

#[test]
fn acceptance_03_merge_invariants() {
    let (old, new, outcome) = evolved();
    let diff = vocab_diff(old, new);
    assert_eq!(
        outcome.merged.vocab_size(),
        old.vocab_size() + diff.len(),
        "|V_M| = |V_O| + |V_N \\ V_O|"
    );
    for (token, id) in old.vocab().iter() {
        assert_eq!(outcome.merged.vocab().id_of(token), Some(id), "old id moved: {token:?}");
    }
    for (i, (_, id)) in outcome.added_tokens.iter().enumerate() {
        assert_eq!(*id as usize, old.vocab_size() + i, "added ids not contiguous");
    }
    assert!(outcome.merged.validate().is_empty());

    // size arithmetic with the published constants
    let old_size = 40_000usize;
    let added = 2_774usize;
    assert_eq!(old_size + added, 42_774);
    println!(
        "acceptance 3 (merge invariants, {} added tokens; 40000+2774=42774): PASS",
        outcome.added_tokens.len()
    );
}

#[test]
fn acceptance_04_compression_monotonicity() {
    let (old, _, outcome) = evolved();
    let merged = &outcome.merged;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let s = random_unicode_string(&mut rng, 64);
        assert!(
            merged.encode(&s).len() <= old.encode(&s).len(),
            "merged encoding longer for {s:?}"
        );
    }

    // constructed fixture: T_O splits "Coron", T_M has it whole
    let fig_old = Tokenizer::from_merge_pairs(&[("o", "r"), ("C", "or"), ("o", "n")]);
    let fig_new =
        Tokenizer::from_merge_pairs(&[("o", "r"), ("C", "or"), ("o", "n"), ("Cor", "on")]);
    let fig = merge_tokenizers(&fig_old, &fig_new).unwrap();
    assert!(fig.merged.encode("Coron").len() < fig_old.encode("Coron").len());
    assert_eq!(fig.merged.encode("Coron").len(), 1);

    // and the evolved fixture strictly improves on the new corpus vocabulary
    assert!(merged.encode("de corona maatregelen").len() < old.encode("de corona maatregelen").len());
    println!("acceptance 4 (compression monotonicity, 1000 strings + fixtures): PASS");
}

#[test]
fn acceptance_05_conservativity() {
    let (old, _, outcome) = evolved();
    let merged = &outcome.merged;
    let appended: Vec<(&str, &str)> = outcome
        .appended_rules
        .iter()
        .map(|r| (r.left.as_str(), r.right.as_str()))
        .collect();

    let untouched_by_appended = |s: &str| {
        let tokens: Vec<&str> = old
            .encode(s)
            .iter()
            .map(|&id| old.vocab().token_of(id).unwrap())
            .collect();
        tokens
            .windows(2)
            .all(|w| !appended.contains(&(w[0], w[1])))
    };

    let a_docs = load_fixture("corpus_a.jsonl");
    let words: Vec<&str> = a_docs.iter().flat_map(|d| d.split_whitespace()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = 0;
    let mut attempts = 0;
    while cases < 100 && attempts < 10_000 {
        attempts += 1;
        let n = rng.gen_range(1..=8);
        let s = (0..n)
            .map(|_| *words.choose(&mut rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ");
        if !untouched_by_appended(&s) {
            continue;
        }
        assert_eq!(
            merged.encode(&s),
            old.encode(&s),
            "conservativity violated for {s:?}"
        );
        cases += 1;
    }
    assert_eq!(cases, 100, "could not construct 100 conservative cases");
    println!("acceptance 5 (conservativity, 100 cases): PASS");
}

#[test]
fn acceptance_06_packing() {
    let (_, _, outcome) = evolved();
    let tokenizer = &outcome.merged;
    let budget = 40;

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let base = load_fixture("corpus_a.jsonl");
    let docs: Vec<String> = (0..500)
        .map(|_| {
            let n = rng.gen_range(1..=6);
            (0..n)
                .map(|_| base.choose(&mut rng).unwrap().as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();

    let packed = pack_corpus(&docs, tokenizer, budget);
    for chunk in &packed.chunks {
        assert!(chunk.ids.len() <= budget, "chunk over budget");
        let mut pos = 0;
        for &(s, e) in &chunk.spans {
            assert_eq!(s, pos, "spans do not tile");
            pos = e;
        }
        assert_eq!(pos, chunk.ids.len(), "spans do not cover the chunk");
    }

    // independent greedy simulation per document
    for (i, doc) in docs.iter().enumerate() {
        let doc_id = format!("doc{i}");
        let sentences = split_sentences(doc);
        let encoded: Vec<Vec<u32>> = sentences
            .iter()
            .map(|s| tokenizer.encode(s))
            .filter(|ids| !ids.is_empty())
            .collect();
        let doc_chunks: Vec<_> = packed.chunks.iter().filter(|c| c.doc_id == doc_id).collect();

        // order preservation: concatenated chunk ids = concatenated
        // sentence encodings (with oversize truncation)
        let flat_chunks: Vec<u32> = doc_chunks.iter().flat_map(|c| c.ids.clone()).collect();
        let flat_sentences: Vec<u32> = encoded
            .iter()
            .flat_map(|ids| ids.iter().take(budget).copied())
            .collect();
        assert_eq!(flat_chunks, flat_sentences, "sentence order broken in doc {i}");

        // greedy maximality: every non-final chunk could not take the
        // next sentence
        let mut sentence_idx = 0;
        for (ci, chunk) in doc_chunks.iter().enumerate() {
            sentence_idx += chunk.spans.len();
            if ci + 1 < doc_chunks.len() {
                let next_len = encoded[sentence_idx].len().min(budget);
                assert!(
                    chunk.ids.len() + next_len > budget,
                    "chunk {ci} of doc {i} is not maximal"
                );
            }
        }
    }

    // worked example
    let fake: Vec<Vec<u32>> = [100, 200, 250, 400].iter().map(|&n| vec![9; n]).collect();
    let out = pack_encoded("w", &fake, 512);
    let sizes: Vec<Vec<usize>> = out
        .chunks
        .iter()
        .map(|c| c.spans.iter().map(|(s, e)| e - s).collect())
        .collect();
    assert_eq!(sizes, vec![vec![100, 200], vec![250], vec![400]]);
    println!("acceptance 6 (packing, 500 documents): PASS");
}

#[test]
fn acceptance_07_pppl_identities() {
    let specials = std::collections::HashSet::new();
    let corpus = vec![vec![0u32, 1, 2, 3], vec![4, 5, 6], vec![7, 8]];

    let uniform = UniformScorer { vocab_size: 321 };
    let report = pppl(&uniform, &corpus, &specials).unwrap();
    assert!((report.pppl - 321.0).abs() / 321.0 < 1e-9, "uniform pppl != |V|");

    struct Perfect;
    impl tokevolve::eval::MaskedScorer for Perfect {
        fn vocab_size(&self) -> usize {
            16
        }
        fn distribution(&self, ids: &[u32], pos: usize) -> Vec<f64> {
            let mut d = vec![0.0; 16];
            d[ids[pos] as usize] = 1.0;
            d
        }
    }
    let report = pppl(&Perfect, &corpus, &specials).unwrap();
    assert!((report.pppl - 1.0).abs() < 1e-12, "perfect pppl != 1");

    let scorer = UnigramScorer::fit(&corpus, 16);
    let ids = vec![0u32, 5, 3, 8, 2, 7, 1];
    let forward = tokevolve::eval::pseudo_log_likelihood(&scorer, &ids, &specials).unwrap();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let shuffled =
        tokevolve::eval::pll_with_query_order(&scorer, &ids, &specials, &order).unwrap();
    assert_eq!(forward.to_bits(), shuffled.to_bits(), "evaluation order changed the sum");
    println!("acceptance 7 (pppl identities): PASS");
}

#[test]
fn acceptance_08_drift_direction() {
    let (_, _, outcome) = evolved();
    let tokenizer = &outcome.merged;
    let a: Vec<Vec<u32>> = load_fixture("corpus_a.jsonl")
        .iter()
        .map(|d| tokenizer.encode(d))
        .collect();
    let b: Vec<Vec<u32>> = load_fixture("corpus_b.jsonl")
        .iter()
        .map(|d| tokenizer.encode(d))
        .collect();
    let mut ab = a.clone();
    ab.extend(b.clone());

    let specials = tokenizer.specials().ids().into_iter().collect();
    let old_scorer = UnigramScorer::fit(&a, tokenizer.vocab_size());
    let refit_scorer = UnigramScorer::fit(&ab, tokenizer.vocab_size());
    let p_old = pppl(&old_scorer, &b, &specials).unwrap().pppl;
    let p_refit = pppl(&refit_scorer, &b, &specials).unwrap().pppl;
    assert!(
        p_old > p_refit,
        "expected drift direction p_old ({p_old}) > p_refit ({p_refit})"
    );
    println!("acceptance 8 (drift direction, {p_old:.2} > {p_refit:.2}): PASS");
}

#[test]
fn acceptance_09_embedding_extension() {
    let (old, _, outcome) = evolved();
    let dim = 16;
    let e_old = EmbeddingMatrix::random(old.vocab_size(), dim, 0.5, 1234);
    let extended =
        extend_embeddings(&e_old, old, outcome, InitStrategy::SubtokenMean).unwrap();

    // old rows bitwise identical
    for i in 0..old.vocab_size() {
        let a: Vec<u32> = e_old.row(i).iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = extended.row(i).iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b, "old row {i} changed");
    }

    // subtoken-mean rows match an independently computed mean
    for (token, id) in &outcome.added_tokens {
        let sub_tokens = {
            // independent segmentation route: encode the decoded surface
            let bytes = old.byte_map().unmap_str(token).unwrap();
            let text = String::from_utf8(bytes).unwrap();
            old.encode(&text)
        };
        let mut expected = vec![0.0f64; dim];
        for &sid in &sub_tokens {
            for (d, v) in e_old.row(sid as usize).iter().enumerate() {
                expected[d] += *v as f64;
            }
        }
        for v in expected.iter_mut() {
            *v /= sub_tokens.len() as f64;
        }
        for (d, v) in extended.row(*id as usize).iter().enumerate() {
            assert!(
                (expected[d] - *v as f64).abs() < 1e-6,
                "subtoken mean off for {token:?} dim {d}"
            );
        }
    }

    // zero-added case is the identity
    let id_outcome = merge_tokenizers(old, old).unwrap();
    let same = extend_embeddings(&e_old, old, &id_outcome, InitStrategy::SubtokenMean).unwrap();
    assert_eq!(same, e_old);

    // binary round-trip is bitwise
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.bin");
    save_binary(&extended, &path).unwrap();
    let loaded = load_binary(&path).unwrap();
    let a: Vec<u32> = extended.values.iter().map(|v| v.to_bits()).collect();
    let b: Vec<u32> = loaded.values.iter().map(|v| v.to_bits()).collect();
    assert_eq!(a, b);
    println!("acceptance 9 (embedding extension): PASS");
}

#[test]
fn acceptance_10_end_to_end_pipeline() {
    let start = Instant::now();

    let a = load_fixture("corpus_a.jsonl");
    let b = load_fixture("corpus_b.jsonl");
    let mut ab = a.clone();
    ab.extend(b.clone());

    let old = train(&a, &config(80, 2)).unwrap().tokenizer;
    assert!(old.validate().is_empty());
    let new = train(&ab, &config(140, 2)).unwrap().tokenizer;
    assert!(new.validate().is_empty());

    let outcome = merge_tokenizers(&old, &new).unwrap();
    assert!(outcome.merged.validate().is_empty());
    assert!(!outcome.added_tokens.is_empty());

    let report = build_diff_report(&outcome, &b, &HashMap::new());
    assert!(
        report.entries.iter().any(|e| e.has_boundary_variant),
        "no Ġ-variant pair among added tokens: {:?}",
        report.entries.iter().map(|e| &e.token).collect::<Vec<_>>()
    );

    let packed = pack_corpus(&b, &outcome.merged, 64);
    assert!(!packed.chunks.is_empty());
    for chunk in &packed.chunks {
        assert!(chunk.ids.len() <= 64);
    }

    let e_old = EmbeddingMatrix::random(old.vocab_size(), 8, 0.02, 5);
    let extended = extend_embeddings(&e_old, &old, &outcome, InitStrategy::SubtokenMean).unwrap();
    assert_eq!(extended.rows, outcome.merged.vocab_size());

    let encoded: Vec<Vec<u32>> = b.iter().map(|d| outcome.merged.encode(d)).collect();
    let specials = outcome.merged.specials().ids().into_iter().collect();
    let scorer = UnigramScorer::fit(&encoded, outcome.merged.vocab_size());
    let report = pppl(&scorer, &encoded, &specials).unwrap();
    assert!(report.pppl > 0.0 && report.pppl.is_finite());

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "pipeline took {elapsed:?}");
    println!("acceptance 10 (end-to-end pipeline in {elapsed:?}): PASS");
}
