//! Decoders over per-step character emission matrices.
//!
//! Every algorithm implements [`Decoder`] and is registered by name in a
//! [`DecoderRegistry`], so callers (the CLI, the pipeline) select one at
//! runtime from configuration:
//!
//! | name           | algorithm                                      |
//! |----------------|------------------------------------------------|
//! | `greedy`       | per-step argmax                                |
//! | `beam`         | breadth-synchronous beam search                |
//! | `diverse-beam` | grouped beam search with Hamming diversity     |
//! | `wbs`          | word beam search constrained by a prefix tree  |
//!
//! Decoding is character-synchronous: the recognizer emits one symbol per
//! step and an explicit end-of-sequence symbol, so there is no blank and
//! no repeat-collapsing.

mod alphabet;
mod beam;
mod diverse;
mod emissions;
mod greedy;
mod wbs;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

pub use alphabet::{Alphabet, SymbolClass};
pub use beam::{beam_search, BeamSearch};
pub use diverse::{diverse_beam_search, diverse_beam_search_groups, DiverseBeamSearch};
pub use emissions::EmissionMatrix;
pub use greedy::{greedy_decode, Greedy};
pub use wbs::{word_beam_search, WordBeamSearch};

use crate::lexicon::{NormalizeConfig, PrefixTree};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("emission matrix has {matrix} symbols but the alphabet has {alphabet}")]
    DimensionMismatch { matrix: usize, alphabet: usize },
    #[error("invalid decode config: {0}")]
    Config(String),
    #[error("invalid emission matrix: {0}")]
    Matrix(String),
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("unknown decoder {0:?}")]
    UnknownDecoder(String),
    #[error("decoder {0:?} needs a prefix tree")]
    MissingPrefixTree(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeConfig {
    pub beam_width: usize,
    /// Number of diverse-beam groups; must divide `beam_width`.
    pub dbs_groups: usize,
    /// Hamming diversity strength.
    pub dbs_penalty: f64,
    /// Cap on consumed steps; `None` reads the whole matrix.
    pub max_steps: Option<usize>,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            beam_width: 16,
            dbs_groups: 4,
            dbs_penalty: 0.5,
            max_steps: None,
        }
    }
}

impl DecodeConfig {
    pub fn with_beam_width(beam_width: usize) -> Self {
        Self {
            beam_width,
            ..Self::default()
        }
    }

    pub(crate) fn check_beam(&self) -> Result<(), DecodeError> {
        if self.beam_width == 0 {
            return Err(DecodeError::Config("beam width must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn check_groups(&self) -> Result<(), DecodeError> {
        self.check_beam()?;
        if self.dbs_groups == 0 || self.beam_width % self.dbs_groups != 0 {
            return Err(DecodeError::Config(format!(
                "{} groups do not divide beam width {}",
                self.dbs_groups, self.beam_width
            )));
        }
        if !(self.dbs_penalty >= 0.0) {
            return Err(DecodeError::Config("diversity penalty must be nonnegative".into()));
        }
        Ok(())
    }

    pub(crate) fn steps(&self, e: &EmissionMatrix) -> usize {
        self.max_steps.map_or(e.steps(), |m| m.min(e.steps()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Decoded text, end-of-sequence excluded.
    pub text: String,
    /// Sum of the chosen per-step log-probabilities.
    pub score: f64,
    /// Chosen symbol index at each consumed step (including EOS if reached).
    pub symbols: Vec<usize>,
    /// Set when a constrained decoder had to return a beam that violates
    /// its constraint.
    pub unconstrained: bool,
}

impl DecodeResult {
    pub(crate) fn from_symbols(symbols: Vec<usize>, score: f64, alphabet: &Alphabet) -> Self {
        Self {
            text: alphabet.render(&symbols),
            score,
            symbols,
            unconstrained: false,
        }
    }

    /// Recomputes the score from the chosen symbols, independently of the
    /// search that produced them.
    pub fn rescore(&self, e: &EmissionMatrix) -> f64 {
        self.symbols
            .iter()
            .enumerate()
            .map(|(t, &s)| e.row(t)[s] as f64)
            .sum()
    }
}

pub trait Decoder: Send + Sync {
    fn name(&self) -> &'static str;

    /// Hypotheses, best first.
    fn decode(&self, emissions: &EmissionMatrix, alphabet: &Alphabet) -> Result<Vec<DecodeResult>, DecodeError>;

    fn decode_best(&self, emissions: &EmissionMatrix, alphabet: &Alphabet) -> Result<DecodeResult, DecodeError> {
        self.decode(emissions, alphabet)?
            .into_iter()
            .next()
            .ok_or_else(|| DecodeError::Matrix("decoder produced no hypothesis".into()))
    }
}

pub(crate) fn check_consistent(e: &EmissionMatrix, a: &Alphabet) -> Result<(), DecodeError> {
    if e.vocab() != a.len() {
        return Err(DecodeError::DimensionMismatch {
            matrix: e.vocab(),
            alphabet: a.len(),
        });
    }
    Ok(())
}

/// Everything a decoder factory may draw on.
#[derive(Clone, Debug, Default)]
pub struct DecoderContext {
    pub config: DecodeConfig,
    pub tree: Option<Arc<PrefixTree>>,
    pub normalize: NormalizeConfig,
}

pub type DecoderFactory = fn(&DecoderContext) -> Result<Box<dyn Decoder>, DecodeError>;

#[derive(Clone, Default)]
pub struct DecoderRegistry {
    factories: BTreeMap<&'static str, DecoderFactory>,
}

impl DecoderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry preloaded with the four built-in decoders.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Greedy::NAME, |_| Ok(Box::new(Greedy)));
        r.register(BeamSearch::NAME, |ctx| {
            ctx.config.check_beam()?;
            Ok(Box::new(BeamSearch::new(ctx.config.clone())))
        });
        r.register(DiverseBeamSearch::NAME, |ctx| {
            ctx.config.check_groups()?;
            Ok(Box::new(DiverseBeamSearch::new(ctx.config.clone())))
        });
        r.register(WordBeamSearch::NAME, |ctx| {
            ctx.config.check_beam()?;
            let tree = ctx
                .tree
                .clone()
                .ok_or(DecodeError::MissingPrefixTree(WordBeamSearch::NAME))?;
            Ok(Box::new(WordBeamSearch::new(tree, ctx.config.clone(), ctx.normalize)))
        });
        r
    }

    /// Registers (or replaces) a factory under `name`.
    pub fn register(&mut self, name: &'static str, factory: DecoderFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn create(&self, name: &str, ctx: &DecoderContext) -> Result<Box<dyn Decoder>, DecodeError> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| DecodeError::UnknownDecoder(name.to_owned()))?;
        factory(ctx)
    }
}
