//! Pipeline CLI: train -> diff -> merge -> pack -> extend-embeddings ->
//! pppl, plus a standalone validate step. Diagnostics go to stderr as
//! single-line `level=... msg=...` records; data goes to files or stdout.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tokevolve::corpus::pack_corpus;
use tokevolve::embed::{extend_embeddings, load_binary, save_binary, save_text, InitStrategy};
use tokevolve::error::{Error, Result};
use tokevolve::eval::{pppl, MaskedScorer, UnigramScorer, UniformScorer};
use tokevolve::evolve::{build_diff_report, merge_tokenizers, vocab_diff};
use tokevolve::io::{load, save};
use tokevolve::trainer::{train, TrainConfig};
use tokevolve::Tokenizer;

#[derive(Parser)]
#[command(name = "tokevolve", about = "Byte-level BPE vocabulary evolution toolkit")]
struct Cli {
    /// Cap the internal worker thread count.
    #[arg(long, global = true, env = "TOKEVOLVE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Treat the corpus as plain text, one document per line, instead of
    /// JSONL records with a `text` field.
    #[arg(long, env = "TOKEVOLVE_PLAIN")]
    plain: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train a byte-level BPE tokenizer on a corpus.
    Train {
        corpus: PathBuf,
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1000, env = "TOKEVOLVE_VOCAB_SIZE")]
        vocab_size: usize,
        #[arg(long, default_value_t = 2, env = "TOKEVOLVE_MIN_FREQ")]
        min_freq: u64,
        #[command(flatten)]
        corpus_args: CorpusArgs,
    },
    /// List tokens present in the new tokenizer but not the old one.
    Diff { old_dir: PathBuf, new_dir: PathBuf },
    /// Merge a newly trained tokenizer into an existing one, keeping old ids.
    Merge {
        old_dir: PathBuf,
        new_dir: PathBuf,
        out_dir: PathBuf,
        /// Write a diff report for the added tokens to this path.
        #[arg(long, env = "TOKEVOLVE_REPORT")]
        report: Option<PathBuf>,
        /// Report format: tsv or json.
        #[arg(long, default_value = "tsv", env = "TOKEVOLVE_REPORT_FORMAT")]
        report_format: String,
        /// Corpus to count added-token frequencies over (otherwise 0).
        #[arg(long, env = "TOKEVOLVE_REPORT_CORPUS")]
        report_corpus: Option<PathBuf>,
        #[command(flatten)]
        corpus_args: CorpusArgs,
    },
    /// Pack documents into token-budget chunks of complete sentences.
    Pack {
        corpus: PathBuf,
        tokenizer_dir: PathBuf,
        out: PathBuf,
        #[arg(long, default_value_t = 512, env = "TOKEVOLVE_MAX_TOKENS")]
        max_tokens: usize,
        #[command(flatten)]
        corpus_args: CorpusArgs,
    },
    /// Grow an embedding matrix to cover a merged vocabulary.
    ExtendEmbeddings {
        emb_in: PathBuf,
        old_dir: PathBuf,
        merged_dir: PathBuf,
        emb_out: PathBuf,
        #[arg(long, default_value = "subtoken-mean", env = "TOKEVOLVE_STRATEGY")]
        strategy: String,
        #[arg(long, default_value_t = 0.02, env = "TOKEVOLVE_STD")]
        std: f32,
        #[arg(long, default_value_t = 0, env = "TOKEVOLVE_SEED")]
        seed: u64,
        /// Also write a text export for inspection.
        #[arg(long, env = "TOKEVOLVE_TEXT_OUT")]
        text_out: Option<PathBuf>,
    },
    /// Compute corpus pseudo-perplexity under a masked-token scorer.
    Pppl {
        tokenizer_dir: PathBuf,
        corpus: PathBuf,
        #[arg(long, default_value = "unigram", env = "TOKEVOLVE_SCORER")]
        scorer: String,
        /// Corpus the unigram scorer is fit on (defaults to the scored corpus).
        #[arg(long, env = "TOKEVOLVE_FIT_CORPUS")]
        fit_corpus: Option<PathBuf>,
        #[command(flatten)]
        corpus_args: CorpusArgs,
    },
    /// Check all tokenizer invariants and report violations.
    Validate { tokenizer_dir: PathBuf },
}

fn diag(level: &str, msg: &str) {
    eprintln!("level={level} msg={msg:?}");
}

fn read_corpus(path: &Path, plain: bool) -> Result<Vec<String>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    if plain {
        return Ok(raw.lines().map(String::from).collect());
    }
    let mut docs = Vec::new();
    for (index, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::CorpusDocument {
                index,
                msg: e.to_string(),
            })?;
        let text = value
            .get("text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::CorpusDocument {
                index,
                msg: "record has no string `text` field".into(),
            })?;
        docs.push(text.to_string());
    }
    Ok(docs)
}

fn load_validated(dir: &Path) -> Result<Tokenizer> {
    let tokenizer = load(dir)?;
    let violations = tokenizer.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(format!(
            "{}: {}",
            dir.display(),
            violations.join("; ")
        )));
    }
    Ok(tokenizer)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("cannot set thread count: {e}")))?;
    }

    match cli.command {
        Command::Train {
            corpus,
            out_dir,
            vocab_size,
            min_freq,
            corpus_args,
        } => {
            let docs = read_corpus(&corpus, corpus_args.plain)?;
            let config = TrainConfig {
                target_vocab_size: vocab_size,
                min_pair_frequency: min_freq,
                ..TrainConfig::default()
            };
            let outcome = train(&docs, &config)?;
            for w in &outcome.warnings {
                diag("warn", w);
            }
            save(&outcome.tokenizer, &out_dir)?;
            println!(
                "trained tokenizer: vocab size {}, {} merges",
                outcome.tokenizer.vocab_size(),
                outcome.tokenizer.merges().len()
            );
        }
        Command::Diff { old_dir, new_dir } => {
            let old = load_validated(&old_dir)?;
            let new = load_validated(&new_dir)?;
            let mut tokens: Vec<String> = vocab_diff(&old, &new).into_iter().collect();
            tokens.sort();
            for t in tokens {
                println!("{t}");
            }
        }
        Command::Merge {
            old_dir,
            new_dir,
            out_dir,
            report,
            report_format,
            report_corpus,
            corpus_args,
        } => {
            let old = load_validated(&old_dir)?;
            let new = load_validated(&new_dir)?;
            let outcome = merge_tokenizers(&old, &new)?;
            save(&outcome.merged, &out_dir)?;
            println!("added {} tokens", outcome.added_tokens.len());
            if let Some(report_path) = report {
                let docs = match report_corpus {
                    Some(p) => read_corpus(&p, corpus_args.plain)?,
                    None => Vec::new(),
                };
                let rep = build_diff_report(&outcome, &docs, &HashMap::new());
                let body = match report_format.as_str() {
                    "tsv" => rep.to_tsv(),
                    "json" => rep.to_json(),
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unknown report format {other:?} (expected tsv or json)"
                        )))
                    }
                };
                fs::write(&report_path, body).map_err(|e| Error::Io {
                    path: report_path.display().to_string(),
                    source: e,
                })?;
            }
        }
        Command::Pack {
            corpus,
            tokenizer_dir,
            out,
            max_tokens,
            corpus_args,
        } => {
            if max_tokens == 0 {
                return Err(Error::InvalidConfig("max-tokens must be at least 1".into()));
            }
            let tokenizer = load_validated(&tokenizer_dir)?;
            let docs = read_corpus(&corpus, corpus_args.plain)?;
            let packed = pack_corpus(&docs, &tokenizer, max_tokens);
            for w in &packed.warnings {
                diag(
                    "warn",
                    &format!(
                        "oversize sentence truncated: doc={} sentence={} tokens={} budget={}",
                        w.doc_id, w.sentence_index, w.token_count, w.budget
                    ),
                );
            }
            let mut body = String::new();
            for chunk in &packed.chunks {
                body.push_str(&serde_json::to_string(chunk).expect("chunk serializes"));
                body.push('\n');
            }
            fs::write(&out, body).map_err(|e| Error::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            println!("packed {} chunks from {} documents", packed.chunks.len(), docs.len());
        }
        Command::ExtendEmbeddings {
            emb_in,
            old_dir,
            merged_dir,
            emb_out,
            strategy,
            std,
            seed,
            text_out,
        } => {
            let old = load_validated(&old_dir)?;
            let merged = load_validated(&merged_dir)?;
            // re-derive the added-token list; ids line up with merged_dir
            let outcome = merge_tokenizers(&old, &merged)?;
            if outcome.merged.vocab_size() != merged.vocab_size() {
                return Err(Error::Invalid(format!(
                    "{} does not extend {}",
                    merged_dir.display(),
                    old_dir.display()
                )));
            }
            let matrix = load_binary(&emb_in)?;
            let strategy = InitStrategy::parse(&strategy, std, seed)?;
            let extended = extend_embeddings(&matrix, &old, &outcome, strategy)?;
            save_binary(&extended, &emb_out)?;
            if let Some(text_path) = text_out {
                save_text(&extended, &text_path)?;
            }
            println!(
                "extended embeddings: {} -> {} rows, dim {}",
                matrix.rows, extended.rows, extended.dim
            );
        }
        Command::Pppl {
            tokenizer_dir,
            corpus,
            scorer,
            fit_corpus,
            corpus_args,
        } => {
            let tokenizer = load_validated(&tokenizer_dir)?;
            let docs = read_corpus(&corpus, corpus_args.plain)?;
            let encoded: Vec<Vec<u32>> = docs.iter().map(|d| tokenizer.encode(d)).collect();
            let specials = tokenizer.specials().ids().into_iter().collect();
            let scorer: Box<dyn MaskedScorer> = match scorer.as_str() {
                "uniform" => Box::new(UniformScorer {
                    vocab_size: tokenizer.vocab_size(),
                }),
                "unigram" => {
                    let fit_encoded = match fit_corpus {
                        Some(p) => read_corpus(&p, corpus_args.plain)?
                            .iter()
                            .map(|d| tokenizer.encode(d))
                            .collect(),
                        None => encoded.clone(),
                    };
                    Box::new(UnigramScorer::fit(&fit_encoded, tokenizer.vocab_size()))
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown scorer {other:?} (expected unigram or uniform)"
                    )))
                }
            };
            let report = pppl(scorer.as_ref(), &encoded, &specials)?;
            println!("{}", report.to_json());
        }
        Command::Validate { tokenizer_dir } => {
            let tokenizer = load(&tokenizer_dir)?;
            let violations = tokenizer.validate();
            if violations.is_empty() {
                println!("ok: {} tokens, {} merges", tokenizer.vocab_size(), tokenizer.merges().len());
            } else {
                for v in &violations {
                    diag("error", v);
                }
                return Err(Error::Invalid(format!("{} violations", violations.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            diag("error", &e.to_string());
            ExitCode::FAILURE
        }
    }
}
