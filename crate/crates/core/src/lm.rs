//! Word n-gram model with stupid backoff, used as a stand-in masked
//! language model: sentence log-probability, perplexity, masked-slot
//! prediction over a candidate list, and cross-entropy.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::lexicon::{normalize_token, word_tokens, NormalizeConfig};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const BOS_ID: u32 = 0;
const UNKNOWN_ID: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("model order must be at least 1")]
    BadOrder,
    #[error("backoff factor must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("perplexity of an empty sequence is undefined")]
    EmptySequence,
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("distributions are over different candidate sets")]
    SupportMismatch,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("model line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmConfig {
    pub order: usize,
    pub alpha: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { order: 3, alpha: 0.4 }
    }
}

#[derive(Clone, Debug)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    /// Every counted k-gram, 1 ≤ k ≤ order.
    counts: HashMap<Vec<u32>, u64>,
    /// Σ_w count(context · w) for each context of length ≥ 1.
    context_totals: HashMap<Vec<u32>, u64>,
    /// Unigram mass, sentence-start markers excluded.
    unigram_total: u64,
}

impl NGramModel {
    fn empty(order: usize, alpha: f64) -> Result<Self, LmError> {
        if order == 0 {
            return Err(LmError::BadOrder);
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(LmError::BadAlpha(alpha));
        }
        let mut m = Self {
            order,
            alpha,
            vocab: Vec::new(),
            ids: HashMap::new(),
            counts: HashMap::new(),
            context_totals: HashMap::new(),
            unigram_total: 0,
        };
        m.intern(BOS);
        m.intern(EOS);
        Ok(m)
    }

    fn intern(&mut self, tok: &str) -> u32 {
        if let Some(&id) = self.ids.get(tok) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(tok.to_owned());
        self.ids.insert(tok.to_owned(), id);
        id
    }

    fn id(&self, tok: &str) -> u32 {
        self.ids.get(tok).copied().unwrap_or(UNKNOWN_ID)
    }

    fn add_gram(&mut self, gram: Vec<u32>, count: u64) {
        if gram.len() >= 2 {
            *self.context_totals.entry(gram[..gram.len() - 1].to_vec()).or_insert(0) += count;
        } else if gram[0] != BOS_ID {
            self.unigram_total += count;
        }
        *self.counts.entry(gram).or_insert(0) += count;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_trained(&self) -> bool {
        self.unigram_total > 0
    }

    /// Distinct predictable tokens plus one unknown-token slot.
    pub fn vocab_size(&self) -> usize {
        let counted = self
            .counts
            .keys()
            .filter(|g| g.len() == 1 && g[0] != BOS_ID)
            .count();
        counted + 1
    }

    pub fn count(&self, gram: &[&str]) -> u64 {
        let ids: Vec<u32> = gram.iter().map(|t| self.id(t)).collect();
        self.counts.get(&ids).copied().unwrap_or(0)
    }

    /// Stupid-backoff score of `word` after `context` (oldest first):
    /// relative frequency at the longest matching order, times `alpha`
    /// per order dropped, bottoming out at an add-one unigram floor.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let ctx: Vec<u32> = context.iter().map(|t| self.id(t)).collect();
        self.prob_ids(&ctx, self.id(word))
    }

    fn prob_ids(&self, ctx: &[u32], w: u32) -> f64 {
        let usable = ctx.len().min(self.order - 1);
        let mut factor = 1.0;
        let mut gram: Vec<u32> = Vec::with_capacity(usable + 1);
        for k in (1..=usable).rev() {
            let context = &ctx[ctx.len() - k..];
            gram.clear();
            gram.extend_from_slice(context);
            gram.push(w);
            if let Some(&c) = self.counts.get(&gram) {
                let total = self.context_totals[context];
                return factor * c as f64 / total as f64;
            }
            factor *= self.alpha;
        }
        match self.counts.get(&[w][..]) {
            Some(&c) if w != BOS_ID => factor * c as f64 / self.unigram_total as f64,
            _ => factor / (self.unigram_total + self.vocab_size() as u64) as f64,
        }
    }

    /// Σ log P(w_i | up to order−1 preceding tokens). Sentence-start
    /// markers are context only and are not scored.
    pub fn sequence_logprob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let ids: Vec<u32> = tokens.iter().map(|t| self.id(t.as_ref())).collect();
        let mut total = 0.0;
        for i in 0..ids.len() {
            if ids[i] == BOS_ID {
                continue;
            }
            let start = i.saturating_sub(self.order - 1);
            total += self.prob_ids(&ids[start..i], ids[i]).ln();
        }
        total
    }

    /// exp(−logprob / N) over the scored tokens.
    pub fn perplexity<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64, LmError> {
        let n = tokens.iter().filter(|t| t.as_ref() != BOS).count();
        if n == 0 {
            return Err(LmError::EmptySequence);
        }
        Ok((-self.sequence_logprob(tokens) / n as f64).exp())
    }

    /// Sentence wrapped in boundary markers (when the order uses context).
    pub fn pad_sentence<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len() + self.order);
        if self.order >= 2 {
            out.extend(std::iter::repeat_n(BOS.to_owned(), self.order - 1));
        }
        out.extend(tokens.iter().map(|t| t.as_ref().to_owned()));
        if self.order >= 2 {
            out.push(EOS.to_owned());
        }
        out
    }

    /// Perplexity of a whole sentence including its boundaries.
    pub fn sentence_perplexity<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64, LmError> {
        self.perplexity(&self.pad_sentence(tokens))
    }

    /// Distribution over `candidates` for a masked slot: each candidate is
    /// scored by the log-probability of the window formed by up to
    /// order−1 tokens either side, then softmax-normalized.
    pub fn predict_masked<S: AsRef<str>>(
        &self,
        left: &[S],
        right: &[S],
        candidates: &[String],
    ) -> Result<ScoreDistribution, LmError> {
        if candidates.is_empty() {
            return Err(LmError::NoCandidates);
        }
        let span = self.order - 1;
        let left: Vec<&str> = left[left.len().saturating_sub(span)..].iter().map(|s| s.as_ref()).collect();
        let right: Vec<&str> = right[..right.len().min(span)].iter().map(|s| s.as_ref()).collect();
        let mut window: Vec<&str> = Vec::with_capacity(left.len() + right.len() + 1);
        let scores: Vec<f64> = candidates
            .iter()
            .map(|c| {
                window.clear();
                window.extend_from_slice(&left);
                window.push(c);
                window.extend_from_slice(&right);
                self.sequence_logprob(&window)
            })
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        Ok(ScoreDistribution {
            entries: candidates.iter().cloned().zip(exps.into_iter().map(|e| e / z)).collect(),
        })
    }

    /// Header `ngram <n> <alpha>`, then `order<TAB>context<TAB>token<TAB>count`
    /// per counted gram, sorted.
    pub fn to_text(&self) -> String {
        let mut rows: BTreeMap<(usize, String, String), u64> = BTreeMap::new();
        for (gram, &c) in &self.counts {
            let words: Vec<&str> = gram.iter().map(|&i| self.vocab[i as usize].as_str()).collect();
            let (ctx, tok) = words.split_at(words.len() - 1);
            rows.insert((gram.len(), ctx.join(" "), tok[0].to_owned()), c);
        }
        let mut out = format!("ngram {} {}\n", self.order, self.alpha);
        for ((order, ctx, tok), c) in rows {
            let _ = writeln!(out, "{order}\t{ctx}\t{tok}\t{c}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<NGramModel, LmError> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: &str| LmError::Parse {
            line: line + 1,
            msg: msg.to_owned(),
        };
        let (_, header) = lines.next().ok_or_else(|| err(0, "missing header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "ngram" {
            return Err(err(0, "expected `ngram <n> <alpha>`"));
        }
        let order: usize = parts[1].parse().map_err(|_| err(0, "bad order"))?;
        let alpha: f64 = parts[2].parse().map_err(|_| err(0, "bad alpha"))?;
        let mut m = NGramModel::empty(order, alpha)?;
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(err(i, "expected 4 tab-separated fields"));
            }
            let k: usize = f[0].parse().map_err(|_| err(i, "bad order"))?;
            let count: u64 = f[3].parse().map_err(|_| err(i, "bad count"))?;
            let ctx: Vec<&str> = f[1].split(' ').filter(|s| !s.is_empty()).collect();
            if k == 0 || k > order || ctx.len() + 1 != k || f[2].is_empty() {
                return Err(err(i, "gram length does not match its order"));
            }
            let gram: Vec<u32> = ctx.iter().chain([&f[2]]).map(|t| m.intern(t)).collect();
            m.add_gram(gram, count);
        }
        if !m.is_trained() {
            return Err(LmError::EmptyCorpus);
        }
        Ok(m)
    }
}

/// Counts every k-gram (k ≤ n) of each sentence. For n ≥ 2 sentences are
/// padded with n−1 start markers and one end marker.
pub fn train_ngram<S: AsRef<str>>(sentences: &[Vec<S>], cfg: &LmConfig) -> Result<NGramModel, LmError> {
    let mut m = NGramModel::empty(cfg.order, cfg.alpha)?;
    for sentence in sentences {
        if sentence.is_empty() {
            continue;
        }
        let padded: Vec<u32> = m
            .pad_sentence(sentence)
            .iter()
            .map(|t| m.intern(t))
            .collect::<Vec<_>>();
        for k in 1..=cfg.order {
            for gram in padded.windows(k) {
                m.add_gram(gram.to_vec(), 1);
            }
        }
    }
    if !m.is_trained() {
        return Err(LmError::EmptyCorpus);
    }
    Ok(m)
}

/// Sentences from a text corpus: one per line, normalized word tokens.
pub fn corpus_sentences(text: &str, norm: &NormalizeConfig) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| {
            word_tokens(line)
                .map(|t| normalize_token(t, norm))
                .filter(|t| !t.is_empty())
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Probabilities over a candidate word list.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreDistribution {
    entries: Vec<(String, f64)>,
}

impl ScoreDistribution {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self, LmError> {
        if entries.is_empty() {
            return Err(LmError::NoCandidates);
        }
        if entries.iter().any(|(_, p)| !(*p >= 0.0)) {
            return Err(LmError::InvalidDistribution("negative or NaN probability".into()));
        }
        let z: f64 = entries.iter().map(|e| e.1).sum();
        if (z - 1.0).abs() > 1e-9 {
            return Err(LmError::InvalidDistribution(format!("mass {z}")));
        }
        Ok(Self { entries })
    }

    /// All mass on `word` within `support`.
    pub fn one_hot(word: &str, support: &[String]) -> Result<Self, LmError> {
        if !support.iter().any(|s| s == word) {
            return Err(LmError::SupportMismatch);
        }
        Self::new(support.iter().map(|s| (s.clone(), f64::from(s == word))).collect())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn prob(&self, word: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == word).map(|e| e.1)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// H(P, Q) = −Σ P(x) ln Q(x); +∞ when Q(x) = 0 where P(x) > 0.
pub fn cross_entropy(p: &ScoreDistribution, q: &ScoreDistribution) -> Result<f64, LmError> {
    let q_map: HashMap<&str, f64> = q.entries.iter().map(|(w, v)| (w.as_str(), *v)).collect();
    if q_map.len() != q.entries.len() || p.entries.len() != q.entries.len() {
        return Err(LmError::SupportMismatch);
    }
    let mut h = 0.0;
    for (w, pv) in &p.entries {
        let qv = *q_map.get(w.as_str()).ok_or(LmError::SupportMismatch)?;
        if *pv > 0.0 {
            if qv == 0.0 {
                return Ok(f64::INFINITY);
            }
            h -= pv * qv.ln();
        }
    }
    Ok(h)
}
