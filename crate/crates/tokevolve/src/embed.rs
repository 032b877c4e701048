//! Token-embedding matrix growth for a merged vocabulary: old rows are
//! copied bit-for-bit, new rows are initialized per strategy.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::evolve::MergeOutcome;
use crate::tokenizer::Tokenizer;

/// Row-major |V| x d matrix; row index = token id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub rows: usize,
    pub dim: usize,
    pub values: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            values: vec![0.0; rows * dim],
        }
    }

    /// Seeded random matrix, N(0, std).
    pub fn random(rows: usize, dim: usize, std: f32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0f32, std).expect("std must be finite");
        let values = (0..rows * dim).map(|_| normal.sample(&mut rng)).collect();
        EmbeddingMatrix { rows, dim, values }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitStrategy {
    /// Mean of the old embedding rows of the token's segmentation under
    /// the old tokenizer (default).
    SubtokenMean,
    /// i.i.d. N(0, std) with a fixed seed.
    Gaussian { std: f32, seed: u64 },
}

impl InitStrategy {
    pub fn parse(name: &str, std: f32, seed: u64) -> Result<Self> {
        match name {
            "subtoken-mean" => Ok(InitStrategy::SubtokenMean),
            "gaussian" => Ok(InitStrategy::Gaussian { std, seed }),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

/// Grow `old_matrix` to cover the merged vocabulary. Rows `[0, |V_O|)`
/// are copied unchanged; each added token gets a fresh row.
pub fn extend_embeddings(
    old_matrix: &EmbeddingMatrix,
    old_tokenizer: &Tokenizer,
    outcome: &MergeOutcome,
    strategy: InitStrategy,
) -> Result<EmbeddingMatrix> {
    if old_matrix.rows != old_tokenizer.vocab_size() {
        return Err(Error::RowCountMismatch {
            got: old_matrix.rows,
            expected: old_tokenizer.vocab_size(),
        });
    }
    let new_rows = outcome.merged.vocab_size();
    let dim = old_matrix.dim;
    let mut result = EmbeddingMatrix::zeros(new_rows, dim);
    result.values[..old_matrix.values.len()].copy_from_slice(&old_matrix.values);

    let mut sampler = match strategy {
        InitStrategy::Gaussian { std, seed } => Some((
            Normal::new(0.0f32, std)
                .map_err(|_| Error::InvalidConfig(format!("invalid gaussian std {std}")))?,
            ChaCha8Rng::seed_from_u64(seed),
        )),
        InitStrategy::SubtokenMean => None,
    };

    for (token, id) in &outcome.added_tokens {
        match strategy {
            InitStrategy::SubtokenMean => {
                // segment the new token's symbol string with the old rules
                let parts = old_tokenizer.merge_word(token);
                let sub_ids: Vec<usize> = parts
                    .iter()
                    .map(|p| {
                        old_tokenizer
                            .vocab()
                            .id_of(p)
                            .expect("old tokenizer covers all base symbols")
                            as usize
                    })
                    .collect();
                let row = result.row_mut(*id as usize);
                for &sid in &sub_ids {
                    for (dst, src) in (0..dim).zip(old_matrix.row(sid)) {
                        row[dst] += src;
                    }
                }
                let n = sub_ids.len() as f32;
                for v in row.iter_mut() {
                    *v /= n;
                }
            }
            InitStrategy::Gaussian { .. } => {
                let (normal, rng) = sampler.as_mut().unwrap();
                for v in result.row_mut(*id as usize).iter_mut() {
                    *v = normal.sample(rng);
                }
            }
        }
    }
    Ok(result)
}

const MAGIC: &[u8; 4] = b"EMB1";

/// Write the binary format: `EMB1`, u32-le rows, u32-le dim, then
/// row-major f32-le values.
pub fn save_binary(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let io_err = |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut buf = Vec::with_capacity(12 + matrix.values.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(matrix.rows as u32).to_le_bytes());
    buf.extend_from_slice(&(matrix.dim as u32).to_le_bytes());
    for v in &matrix.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(&buf).map_err(io_err)?;
    Ok(())
}

pub fn load_binary(path: &Path) -> Result<EmbeddingMatrix> {
    let raw = fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let malformed = |msg: &str| Error::Malformed {
        file: path.display().to_string(),
        line: 0,
        msg: msg.to_string(),
    };
    if raw.len() < 12 || &raw[..4] != MAGIC {
        return Err(malformed("missing EMB1 magic"));
    }
    let rows = u32::from_le_bytes(raw[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(raw[8..12].try_into().unwrap()) as usize;
    let expected = 12 + rows * dim * 4;
    if raw.len() != expected {
        return Err(malformed(&format!(
            "expected {expected} bytes for {rows}x{dim}, found {}",
            raw.len()
        )));
    }
    let values = raw[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(EmbeddingMatrix { rows, dim, values })
}

/// Text export for inspection: one row per line, space-separated decimals.
pub fn save_text(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..matrix.rows {
        let row: Vec<String> = matrix.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
