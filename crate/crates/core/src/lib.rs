//! Arabic OCR pipeline around a character-level recognizer: line image
//! enhancement, page segmentation, lexicon-constrained decoding of
//! emission matrices, n-gram post-correction, and CER/WER evaluation,
//! plus seeded generators for testing all of it without a trained model.

pub mod decode;
pub mod enhance;
pub mod eval;
pub mod image;
pub mod lexicon;
pub mod lm;
pub mod pipeline;
pub mod postcorrect;
pub mod segment;
pub mod sim;

pub use decode::{Alphabet, DecodeConfig, DecodeResult, Decoder, DecoderRegistry, EmissionMatrix};
pub use image::{BinaryImage, GrayImage};
pub use lexicon::{Lexicon, NormalizeConfig, PrefixTree};
pub use lm::NGramModel;
