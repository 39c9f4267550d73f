use std::io::{Read, Write};

use super::DecodeError;

const MAGIC: &[u8; 4] = b"EMAT";
const VERSION: u32 = 1;
const ROW_TOLERANCE: f64 = 1e-6;

/// `steps × vocab` row-major log-probabilities; every row is a
/// distribution over the alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct EmissionMatrix {
    steps: usize,
    vocab: usize,
    data: Vec<f32>,
}

impl EmissionMatrix {
    pub fn new(steps: usize, vocab: usize, data: Vec<f32>) -> Result<Self, DecodeError> {
        if vocab == 0 {
            return Err(DecodeError::Matrix("vocabulary size must be positive".into()));
        }
        if data.len() != steps * vocab {
            return Err(DecodeError::Matrix(format!(
                "expected {} entries, found {}",
                steps * vocab,
                data.len()
            )));
        }
        for (t, row) in data.chunks(vocab).enumerate() {
            if let Some(bad) = row.iter().find(|v| v.is_nan() || **v == f32::INFINITY) {
                return Err(DecodeError::Matrix(format!("row {t} holds {bad}")));
            }
            let mass: f64 = row.iter().map(|&v| (v as f64).exp()).sum();
            if (mass - 1.0).abs() > ROW_TOLERANCE {
                return Err(DecodeError::Matrix(format!("row {t} sums to {mass}")));
            }
        }
        Ok(Self { steps, vocab, data })
    }

    /// Builds from linear probabilities (rows must already be normalized).
    pub fn from_probs(rows: &[Vec<f64>]) -> Result<Self, DecodeError> {
        let vocab = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * vocab);
        for row in rows {
            if row.len() != vocab {
                return Err(DecodeError::Matrix("ragged rows".into()));
            }
            data.extend(row.iter().map(|&p| p.ln() as f32));
        }
        Self::new(rows.len(), vocab, data)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.vocab..(t + 1) * self.vocab]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// `EMAT`, then little-endian u32 version, T and V, then T×V
    /// little-endian f32 log-probabilities.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), DecodeError> {
        w.write_all(MAGIC)?;
        for n in [VERSION, self.steps as u32, self.vocab as u32] {
            w.write_all(&n.to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.data.len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, DecodeError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(DecodeError::Matrix("missing EMAT header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let version = word(4);
        if version != VERSION {
            return Err(DecodeError::Matrix(format!("unsupported version {version}")));
        }
        let (steps, vocab) = (word(8) as usize, word(12) as usize);
        let body = &bytes[16..];
        if body.len() != steps * vocab * 4 {
            return Err(DecodeError::Matrix(format!(
                "expected {} payload bytes, found {}",
                steps * vocab * 4,
                body.len()
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Self::new(steps, vocab, data)
    }
}
