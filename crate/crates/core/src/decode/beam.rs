use std::cmp::Ordering;

use super::{check_consistent, Alphabet, DecodeConfig, DecodeError, DecodeResult, Decoder, EmissionMatrix};

/// A live or finished hypothesis carrying decoder-specific state.
#[derive(Clone, Debug)]
pub(crate) struct Hyp<S> {
    pub symbols: Vec<usize>,
    pub score: f64,
    pub done: bool,
    pub state: S,
}

impl<S: Default> Hyp<S> {
    pub fn empty() -> Self {
        Self {
            symbols: Vec::new(),
            score: 0.0,
            done: false,
            state: S::default(),
        }
    }
}

/// Extension of `parent` by `symbol`, or a finished parent carried over
/// unchanged (`symbol == None`).
pub(crate) struct Cand<S> {
    pub parent: usize,
    pub symbol: Option<usize>,
    pub score: f64,
    /// Selection key; equals `score` except under diversity penalties.
    pub rank: f64,
    pub done: bool,
    pub state: S,
}

impl<S: Clone> Cand<S> {
    pub fn carry(parent: usize, hyp: &Hyp<S>) -> Self {
        Self {
            parent,
            symbol: None,
            score: hyp.score,
            rank: hyp.score,
            done: true,
            state: hyp.state.clone(),
        }
    }
}

/// Higher rank first; equal ranks fall back to the symbol-index sequence
/// in lexicographic order.
fn compare<S>(hyps: &[Hyp<S>], a: &Cand<S>, b: &Cand<S>) -> Ordering {
    b.rank.total_cmp(&a.rank).then_with(|| {
        let sa = hyps[a.parent].symbols.iter().chain(a.symbol.iter());
        let sb = hyps[b.parent].symbols.iter().chain(b.symbol.iter());
        sa.cmp(sb)
    })
}

/// Keeps the best `k` candidates, sorted, materialized as hypotheses.
pub(crate) fn select<S: Clone>(hyps: &[Hyp<S>], mut cands: Vec<Cand<S>>, k: usize) -> Vec<Hyp<S>> {
    if cands.len() > k {
        cands.select_nth_unstable_by(k - 1, |a, b| compare(hyps, a, b));
        cands.truncate(k);
    }
    cands.sort_by(|a, b| compare(hyps, a, b));
    cands
        .into_iter()
        .map(|c| {
            let mut symbols = Vec::with_capacity(hyps[c.parent].symbols.len() + 1);
            symbols.extend_from_slice(&hyps[c.parent].symbols);
            symbols.extend(c.symbol);
            Hyp {
                symbols,
                score: c.score,
                done: c.done,
                state: c.state,
            }
        })
        .collect()
}

pub(crate) fn sort_hyps<S>(hyps: &mut [Hyp<S>]) {
    hyps.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.symbols.cmp(&b.symbols)));
}

pub(crate) fn to_results<S>(hyps: Vec<Hyp<S>>, a: &Alphabet) -> Vec<DecodeResult> {
    hyps.into_iter()
        .map(|h| DecodeResult::from_symbols(h.symbols, h.score, a))
        .collect()
}

/// Breadth-synchronous beam search. Finished beams stay in the pool and
/// compete for the `beam_width` slots.
pub fn beam_search(e: &EmissionMatrix, a: &Alphabet, cfg: &DecodeConfig) -> Result<Vec<DecodeResult>, DecodeError> {
    check_consistent(e, a)?;
    cfg.check_beam()?;
    let mut hyps: Vec<Hyp<()>> = vec![Hyp::empty()];
    for t in 0..cfg.steps(e) {
        if hyps.iter().all(|h| h.done) {
            break;
        }
        let row = e.row(t);
        let mut cands = Vec::with_capacity(hyps.len() * row.len());
        for (i, h) in hyps.iter().enumerate() {
            if h.done {
                cands.push(Cand::carry(i, h));
                continue;
            }
            for (s, &lp) in row.iter().enumerate() {
                let score = h.score + lp as f64;
                cands.push(Cand {
                    parent: i,
                    symbol: Some(s),
                    score,
                    rank: score,
                    done: s == a.eos(),
                    state: (),
                });
            }
        }
        hyps = select(&hyps, cands, cfg.beam_width);
    }
    sort_hyps(&mut hyps);
    Ok(to_results(hyps, a))
}

#[derive(Clone, Debug)]
pub struct BeamSearch {
    config: DecodeConfig,
}

impl BeamSearch {
    pub const NAME: &'static str = "beam";

    pub fn new(config: DecodeConfig) -> Self {
        Self { config }
    }
}

impl Decoder for BeamSearch {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn decode(&self, e: &EmissionMatrix, a: &Alphabet) -> Result<Vec<DecodeResult>, DecodeError> {
        beam_search(e, a, &self.config)
    }
}
