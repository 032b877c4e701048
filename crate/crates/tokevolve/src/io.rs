//! On-disk tokenizer format: `vocab.json` (flat token -> id object),
//! `merges.txt` (`#version: 0.2` header then one `left right` pair per
//! line in rank order), and `special_tokens.json` (role -> literal).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result, TokenId};
use crate::tokenizer::{MergeRule, SpecialTokens, Tokenizer, Vocab, DEFAULT_SPECIALS};

const VOCAB_FILE: &str = "vocab.json";
const MERGES_FILE: &str = "merges.txt";
const SPECIALS_FILE: &str = "special_tokens.json";
const MERGES_HEADER: &str = "#version: 0.2";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `vocab.json`, `merges.txt` and `special_tokens.json` into `dir`
/// (created if missing). Output is byte-deterministic for a given tokenizer.
pub fn save(tokenizer: &Tokenizer, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let mut vocab_map = serde_json::Map::new();
    for (token, id) in tokenizer.vocab().iter() {
        vocab_map.insert(token.to_string(), json!(id));
    }
    let vocab_path = dir.join(VOCAB_FILE);
    fs::write(
        &vocab_path,
        serde_json::to_string(&serde_json::Value::Object(vocab_map)).expect("vocab serializes"),
    )
    .map_err(|e| io_err(&vocab_path, e))?;

    let mut merges = String::from(MERGES_HEADER);
    merges.push('\n');
    for rule in tokenizer.merges() {
        merges.push_str(&rule.left);
        merges.push(' ');
        merges.push_str(&rule.right);
        merges.push('\n');
    }
    let merges_path = dir.join(MERGES_FILE);
    fs::write(&merges_path, merges).map_err(|e| io_err(&merges_path, e))?;

    let s = tokenizer.specials();
    let specials = json!({
        "bos": s.bos.text,
        "pad": s.pad.text,
        "eos": s.eos.text,
        "unk": s.unk.text,
        "mask": s.mask.text,
    });
    let specials_path = dir.join(SPECIALS_FILE);
    fs::write(&specials_path, serde_json::to_string(&specials).unwrap())
        .map_err(|e| io_err(&specials_path, e))?;
    Ok(())
}

/// Load a tokenizer from a directory written by [`save`] (or any conforming
/// `vocab.json` + `merges.txt`; `special_tokens.json` is optional and
/// defaults to the RoBERTa literals).
pub fn load(dir: &Path) -> Result<Tokenizer> {
    let vocab_path = dir.join(VOCAB_FILE);
    let raw = fs::read_to_string(&vocab_path).map_err(|e| io_err(&vocab_path, e))?;
    let parsed: HashMap<String, TokenId> =
        serde_json::from_str(&raw).map_err(|e| Error::Malformed {
            file: vocab_path.display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;

    let mut id_to_token: Vec<Option<String>> = vec![None; parsed.len()];
    for (token, id) in parsed {
        match id_to_token.get_mut(id as usize) {
            Some(slot @ None) => *slot = Some(token),
            Some(_) => {
                return Err(Error::Invalid(format!(
                    "vocab.json assigns id {id} to more than one token"
                )))
            }
            None => {
                return Err(Error::Invalid(format!(
                    "vocab.json id {id} out of contiguous range [0, {})",
                    id_to_token.len()
                )))
            }
        }
    }
    let mut vocab = Vocab::new();
    for (id, token) in id_to_token.into_iter().enumerate() {
        let token = token
            .ok_or_else(|| Error::Invalid(format!("vocab.json has no token for id {id}")))?;
        vocab.push(token);
    }

    let merges_path = dir.join(MERGES_FILE);
    let raw = fs::read_to_string(&merges_path).map_err(|e| io_err(&merges_path, e))?;
    let mut merges = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let (left, right) = match (parts.next(), parts.next(), parts.next()) {
            (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => (l, r),
            _ => {
                return Err(Error::Malformed {
                    file: merges_path.display().to_string(),
                    line: lineno + 1,
                    msg: "expected exactly `<left> <right>` separated by one space".into(),
                })
            }
        };
        let rule = MergeRule::new(left, right, merges.len() as u32);
        for part in [&rule.left, &rule.right, &rule.result] {
            if !vocab.contains(part) {
                return Err(Error::UnknownMergeToken {
                    left: rule.left.clone(),
                    right: rule.right.clone(),
                });
            }
        }
        merges.push(rule);
    }

    let specials_path = dir.join(SPECIALS_FILE);
    let literals: [String; 5] = if specials_path.exists() {
        let raw = fs::read_to_string(&specials_path).map_err(|e| io_err(&specials_path, e))?;
        let m: HashMap<String, String> =
            serde_json::from_str(&raw).map_err(|e| Error::Malformed {
                file: specials_path.display().to_string(),
                line: e.line(),
                msg: e.to_string(),
            })?;
        let get = |role: &str| -> Result<String> {
            m.get(role)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("special_tokens.json missing role {role:?}")))
        };
        [get("bos")?, get("pad")?, get("eos")?, get("unk")?, get("mask")?]
    } else {
        DEFAULT_SPECIALS.map(String::from)
    };

    let mut ids = [0 as TokenId; 5];
    for (i, lit) in literals.iter().enumerate() {
        ids[i] = vocab.id_of(lit).ok_or_else(|| {
            Error::Invalid(format!("special token {lit:?} not present in vocab.json"))
        })?;
    }

    Ok(Tokenizer::new(
        vocab,
        merges,
        SpecialTokens::from_literals(&literals, ids),
    ))
}
