use std::sync::Arc;

use super::beam::{select, sort_hyps, Cand, Hyp};
use super::{
    check_consistent, greedy_decode, Alphabet, DecodeConfig, DecodeError, DecodeResult, Decoder, EmissionMatrix,
    SymbolClass,
};
use crate::lexicon::{normalize_char, NodeId, NormalizeConfig, PrefixTree};

/// Beam mode: between words, or inside a word at a prefix-tree node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
enum Mode {
    #[default]
    NonWord,
    Word(NodeId),
}

/// Mode after emitting `symbol`, or `None` when the constraint forbids it.
fn transition(
    tree: &PrefixTree,
    a: &Alphabet,
    norm: &NormalizeConfig,
    mode: Mode,
    symbol: usize,
) -> Option<Mode> {
    let at_word_end = |m: Mode| match m {
        Mode::NonWord => true,
        Mode::Word(n) => tree.is_word(n).unwrap_or(false),
    };
    match a.class(symbol) {
        SymbolClass::NonWord | SymbolClass::Eos => at_word_end(mode).then_some(Mode::NonWord),
        SymbolClass::Word => {
            if a.is_diacritic(symbol) {
                // marks ride on the current letter without moving the cursor
                return match mode {
                    Mode::Word(_) => Some(mode),
                    Mode::NonWord => None,
                };
            }
            let c = normalize_char(a.symbol(symbol), norm)?;
            let from = match mode {
                Mode::NonWord => tree.root(),
                Mode::Word(n) => n,
            };
            tree.descend(from, c).ok().flatten().map(Mode::Word)
        }
    }
}

/// Word beam search for a character-synchronous decoder.
///
/// Outside a word any non-word symbol, EOS, or a letter starting some
/// lexicon word may follow. Inside a word only the prefix-tree children of
/// the current node (plus diacritics) may follow, and the word can be
/// closed by a non-word symbol or EOS only at a word end. Disallowed
/// symbols are pruned without renormalizing the row, so scores remain log
/// joint probabilities. Beams still inside an unfinished word when the
/// matrix runs out are dropped; if nothing eligible is left the best raw
/// beam comes back with `unconstrained` set.
pub fn word_beam_search(
    e: &EmissionMatrix,
    a: &Alphabet,
    tree: &PrefixTree,
    cfg: &DecodeConfig,
) -> Result<Vec<DecodeResult>, DecodeError> {
    word_beam_search_with(e, a, tree, cfg, &NormalizeConfig::default())
}

pub(crate) fn word_beam_search_with(
    e: &EmissionMatrix,
    a: &Alphabet,
    tree: &PrefixTree,
    cfg: &DecodeConfig,
    norm: &NormalizeConfig,
) -> Result<Vec<DecodeResult>, DecodeError> {
    check_consistent(e, a)?;
    cfg.check_beam()?;

    let mut hyps: Vec<Hyp<Mode>> = vec![Hyp::empty()];
    for t in 0..cfg.steps(e) {
        if hyps.iter().all(|h| h.done) {
            break;
        }
        let row = e.row(t);
        let mut cands = Vec::with_capacity(hyps.len() * 8);
        for (i, h) in hyps.iter().enumerate() {
            if h.done {
                cands.push(Cand::carry(i, h));
                continue;
            }
            for (s, &lp) in row.iter().enumerate() {
                let Some(next) = transition(tree, a, norm, h.state, s) else {
                    continue;
                };
                let score = h.score + lp as f64;
                cands.push(Cand {
                    parent: i,
                    symbol: Some(s),
                    score,
                    rank: score,
                    done: s == a.eos(),
                    state: next,
                });
            }
        }
        if cands.is_empty() {
            // every beam is stuck in a word whose continuations are not in the alphabet
            let mut fallback = greedy_decode(e, a)?;
            fallback.unconstrained = true;
            return Ok(vec![fallback]);
        }
        hyps = select(&hyps, cands, cfg.beam_width);
    }

    let (mut eligible, mut stuck): (Vec<_>, Vec<_>) = hyps.into_iter().partition(|h| match h.state {
        Mode::NonWord => true,
        Mode::Word(n) => tree.is_word(n).unwrap_or(false),
    });
    if eligible.is_empty() {
        sort_hyps(&mut stuck);
        let best = stuck.swap_remove(0);
        let mut r = DecodeResult::from_symbols(best.symbols, best.score, a);
        r.unconstrained = true;
        return Ok(vec![r]);
    }
    sort_hyps(&mut eligible);
    Ok(eligible
        .into_iter()
        .map(|h| DecodeResult::from_symbols(h.symbols, h.score, a))
        .collect())
}

#[derive(Clone, Debug)]
pub struct WordBeamSearch {
    tree: Arc<PrefixTree>,
    config: DecodeConfig,
    normalize: NormalizeConfig,
}

impl WordBeamSearch {
    pub const NAME: &'static str = "wbs";

    pub fn new(tree: Arc<PrefixTree>, config: DecodeConfig, normalize: NormalizeConfig) -> Self {
        Self {
            tree,
            config,
            normalize,
        }
    }
}

impl Decoder for WordBeamSearch {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn decode(&self, e: &EmissionMatrix, a: &Alphabet) -> Result<Vec<DecodeResult>, DecodeError> {
        word_beam_search_with(e, a, &self.tree, &self.config, &self.normalize)
    }
}
