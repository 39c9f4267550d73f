//! Lexicon-driven post-correction: flag out-of-lexicon words, propose
//! lexicon words within a small edit distance, and keep the candidate
//! minimizing masked-prediction surprisal times sentence perplexity.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::lexicon::{candidates_within_distance, is_word_char, normalize_token, Lexicon, NormalizeConfig, PrefixTree};
use crate::lm::{LmError, NGramModel};

#[derive(Debug, Error)]
pub enum CorrectionError {
    #[error("language model has not been trained")]
    UntrainedModel,
    #[error("invalid correction config: {0}")]
    Config(String),
    #[error(transparent)]
    Lm(#[from] LmError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionConfig {
    /// Upper bound on refinement passes over the sentence.
    pub max_iterations: usize,
    pub max_edit_distance: usize,
    pub max_candidates: usize,
    /// Shorter words are never flagged.
    pub min_word_length: usize,
    pub normalize: NormalizeConfig,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self {
            max_iterations: 3,
            max_edit_distance: 2,
            max_candidates: 10,
            min_word_length: 2,
            normalize: NormalizeConfig::default(),
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<(), CorrectionError> {
        if self.max_iterations == 0 || self.max_edit_distance == 0 || self.max_candidates == 0 || self.min_word_length == 0
        {
            return Err(CorrectionError::Config(
                "max_iterations, max_edit_distance, max_candidates and min_word_length must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    /// Token index within the sentence.
    pub position: usize,
    pub original: String,
    pub replacement: String,
    pub ce_score: f64,
    pub ppl_score: f64,
    /// `ce_score * ppl_score`.
    pub final_score: f64,
    /// 1-based pass in which the substitution was made.
    pub iteration: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionResult {
    pub sentence: String,
    pub substitutions: Vec<Substitution>,
    /// Flagged positions with no lexicon word within reach.
    pub uncorrectable: Vec<(usize, String)>,
    pub iterations: usize,
}

impl CorrectionResult {
    /// Audit rows: `line<TAB>position<TAB>original<TAB>replacement<TAB>ce<TAB>ppl<TAB>final`.
    /// Uncorrectable words appear with `-` in the score columns.
    pub fn audit_rows(&self, line: usize) -> String {
        let mut out = String::new();
        for s in &self.substitutions {
            let _ = writeln!(
                out,
                "{line}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                s.position, s.original, s.replacement, s.ce_score, s.ppl_score, s.final_score
            );
        }
        for (pos, word) in &self.uncorrectable {
            let _ = writeln!(out, "{line}\t{pos}\t{word}\t-\t-\t-\t-");
        }
        out
    }
}

pub const AUDIT_HEADER: &str = "line\tposition\toriginal\treplacement\tce\tppl\tfinal\n";

fn is_word_token(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(is_word_char)
}

/// Positions of word tokens whose normalized form is missing from the
/// lexicon and at least `min_word_length` characters long. Tokens with any
/// non-word character (digits, punctuation, Latin) are never flagged.
pub fn detect_misspelled<S: AsRef<str>>(tokens: &[S], lex: &Lexicon, cfg: &CorrectionConfig) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let t = t.as_ref();
            if !is_word_token(t) {
                return false;
            }
            let norm = normalize_token(t, &cfg.normalize);
            norm.chars().count() >= cfg.min_word_length && !lex.contains(&norm)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Whitespace tokens together with the separators around them, so the
/// sentence can be rebuilt byte-for-byte apart from substituted words.
struct Tokenized {
    /// `seps[i]` precedes `tokens[i]`; the last entry trails the sentence.
    seps: Vec<String>,
    tokens: Vec<String>,
}

impl Tokenized {
    fn new(s: &str) -> Self {
        let mut seps = vec![String::new()];
        let mut tokens = Vec::new();
        let mut cur = String::new();
        for c in s.chars() {
            if c.is_whitespace() {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                    seps.push(String::new());
                }
                seps.last_mut().unwrap().push(c);
            } else {
                cur.push(c);
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
            seps.push(String::new());
        }
        Self { seps, tokens }
    }

    fn join(&self) -> String {
        let mut out = String::new();
        for (sep, tok) in self.seps.iter().zip(&self.tokens) {
            out.push_str(sep);
            out.push_str(tok);
        }
        out.push_str(self.seps.last().unwrap());
        out
    }
}

/// Scores of one candidate at a masked position.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateScore {
    pub word: String,
    pub ce: f64,
    pub ppl: f64,
    pub final_score: f64,
}

/// Scores every candidate for position `pos` of `lm_tokens` (the sentence
/// in model vocabulary, unpadded): ce = −ln Q(c) under the masked
/// prediction, ppl = perplexity of the padded sentence with `c` in place.
pub fn score_candidates(
    m: &NGramModel,
    lm_tokens: &[String],
    pos: usize,
    candidates: &[String],
) -> Result<Vec<CandidateScore>, CorrectionError> {
    let mut padded = m.pad_sentence(lm_tokens);
    let offset = if m.order() >= 2 { m.order() - 1 } else { 0 };
    let p = pos + offset;
    let q = m.predict_masked(&padded[..p], &padded[p + 1..], candidates)?;
    let mut out = Vec::with_capacity(candidates.len());
    for (c, (_, qc)) in candidates.iter().zip(q.entries()) {
        padded[p].clone_from(c);
        let ce = -qc.ln();
        let ppl = m.perplexity(&padded)?;
        out.push(CandidateScore {
            word: c.clone(),
            ce,
            ppl,
            final_score: ce * ppl,
        });
    }
    Ok(out)
}

/// Repeated passes of detect, propose, score, substitute. A pass visits
/// flagged positions left to right and sees earlier substitutions of the
/// same pass; the loop stops after a pass without substitutions or after
/// `max_iterations` passes.
pub fn correct_sentence(
    sentence: &str,
    m: &NGramModel,
    lex: &Lexicon,
    tree: &PrefixTree,
    cfg: &CorrectionConfig,
) -> Result<CorrectionResult, CorrectionError> {
    if !m.is_trained() {
        return Err(CorrectionError::UntrainedModel);
    }
    cfg.validate()?;
    let mut tok = Tokenized::new(sentence);
    let mut substitutions = Vec::new();
    let mut uncorrectable: Vec<(usize, String)> = Vec::new();
    let mut iterations = 0;

    for pass in 1..=cfg.max_iterations {
        iterations = pass;
        let mut changed = false;
        for pos in detect_misspelled(&tok.tokens, lex, cfg) {
            let original = tok.tokens[pos].clone();
            let norm = normalize_token(&original, &cfg.normalize);
            let mut cands = candidates_within_distance(tree, &norm, cfg.max_edit_distance);
            cands.truncate(cfg.max_candidates);
            if cands.is_empty() {
                if !uncorrectable.iter().any(|(p, _)| *p == pos) {
                    uncorrectable.push((pos, original));
                }
                continue;
            }
            let words: Vec<String> = cands.into_iter().map(|c| c.word).collect();
            let lm_tokens: Vec<String> = tok.tokens.iter().map(|t| normalize_token(t, &cfg.normalize)).collect();
            let scores = score_candidates(m, &lm_tokens, pos, &words)?;
            let mut best = &scores[0];
            for s in &scores[1..] {
                if s.final_score < best.final_score {
                    best = s;
                }
            }
            substitutions.push(Substitution {
                position: pos,
                original,
                replacement: best.word.clone(),
                ce_score: best.ce,
                ppl_score: best.ppl,
                final_score: best.final_score,
                iteration: pass,
            });
            tok.tokens[pos].clone_from(&best.word);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    uncorrectable.sort_by_key(|u| u.0);
    Ok(CorrectionResult {
        sentence: tok.join(),
        substitutions,
        uncorrectable,
        iterations,
    })
}

/// Corrects each line independently, in parallel, results in input order.
pub fn correct_corpus<S: AsRef<str> + Sync>(
    lines: &[S],
    m: &NGramModel,
    lex: &Lexicon,
    tree: &PrefixTree,
    cfg: &CorrectionConfig,
) -> Result<Vec<CorrectionResult>, CorrectionError> {
    lines
        .par_iter()
        .map(|l| correct_sentence(l.as_ref(), m, lex, tree, cfg))
        .collect()
}
