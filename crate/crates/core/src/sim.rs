//! Seeded generators standing in for the recognizer and the scanned data:
//! noisy emission matrices, corrupted text, image augmentation, synthetic
//! pages and text lines, and a Markov-chain corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decode::{Alphabet, DecodeError, EmissionMatrix};
use crate::image::{BinaryImage, GrayImage, ImageError};
use crate::lexicon::LETTERS;
use crate::segment::{Region, RegionClass};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// The 28 base letters of the Arabic alphabet.
pub const BASE_LETTERS: &str = "ابتثجحخدذرزسشصضطظعغفقكلمنهوي";

/// Letters that never join to the following letter, so a recognizer may
/// read a word break after them.
pub const NON_CONNECTING: &str = "اأإآدذرزوؤةء";

// Independent random streams per generator, so adding draws to one never
// perturbs another.
const STREAM_EMISSIONS: u64 = 1;
const STREAM_CORRUPT: u64 = 2;
const STREAM_AUGMENT: u64 = 3;
const STREAM_PAGE: u64 = 4;
const STREAM_LINE: u64 = 5;
const STREAM_CORPUS: u64 = 6;
const STREAM_DERIVE: u64 = 7;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A per-item seed drawn from `seed`, for batches of generated items.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = rng_for(seed, STREAM_DERIVE);
    rng.set_word_pos(u128::from(index) * 2);
    rng.gen()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Confusion {
    pub from: char,
    pub to: char,
    /// Chance that a `from` position is misread as `to`.
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    pub confusions: Vec<Confusion>,
    /// Mass left on the runner-up symbol of a confusable position.
    pub shadow_mass: f64,
    /// Mass spread evenly over all symbols not otherwise assigned.
    pub epsilon: f64,
    /// Chance that the letter after a non-connecting letter is read as a space.
    pub space_split_prob: f64,
    pub seed: u64,
}

impl NoiseConfig {
    /// No confusions, no splits, and no smoothing: one-hot rows.
    pub fn noiseless(seed: u64) -> Self {
        Self {
            confusions: Vec::new(),
            shadow_mass: 0.0,
            epsilon: 0.0,
            space_split_prob: 0.0,
            seed,
        }
    }

    /// Dotting pairs in both directions, each with the given probability.
    pub fn dotting_pairs(prob: f64) -> Vec<Confusion> {
        [('ي', 'ب'), ('ت', 'ث'), ('ح', 'خ')]
            .into_iter()
            .flat_map(|(a, b)| [Confusion { from: a, to: b, prob }, Confusion { from: b, to: a, prob }])
            .collect()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.epsilon) || !unit(self.shadow_mass) || !unit(self.space_split_prob) {
            return Err(SimError::Config("epsilon, shadow_mass and space_split_prob must lie in [0, 1]".into()));
        }
        if self.epsilon + self.shadow_mass >= 1.0 {
            return Err(SimError::Config("epsilon + shadow_mass must be below 1".into()));
        }
        // the runner-up must not outweigh the peak
        if self.shadow_mass > 1.0 - self.epsilon - self.shadow_mass {
            return Err(SimError::Config("shadow_mass exceeds the peak mass".into()));
        }
        for c in &self.confusions {
            if !unit(c.prob) || c.from == c.to {
                return Err(SimError::Config(format!("bad confusion {} -> {}", c.from, c.to)));
            }
        }
        let mut froms: Vec<char> = self.confusions.iter().map(|c| c.from).collect();
        froms.sort_unstable();
        for w in froms.windows(2).filter(|w| w[0] == w[1]) {
            let total: f64 = self.confusions.iter().filter(|c| c.from == w[0]).map(|c| c.prob).sum();
            if total > 1.0 {
                return Err(SimError::Config(format!("confusions from {} exceed probability 1", w[0])));
            }
        }
        Ok(())
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            confusions: Self::dotting_pairs(0.1),
            shadow_mass: 0.3,
            epsilon: 0.01,
            space_split_prob: 0.05,
            seed: 0,
        }
    }
}

/// Emission matrix for `text` with `len + 1` rows, the last peaking on EOS.
///
/// Each position peaks on one symbol with mass `1 − epsilon − shadow`:
/// normally the true symbol, but with a confusion's probability the
/// confused symbol instead, leaving `shadow_mass` on the true one. Rows of
/// confusable letters that were not flipped still carry `shadow_mass` on
/// their first confusion target. After a non-connecting letter, the next
/// letter may be read as a space in the same way. `epsilon` is spread
/// evenly over every remaining symbol.
pub fn synth_emissions(text: &str, a: &Alphabet, noise: &NoiseConfig) -> Result<EmissionMatrix, SimError> {
    noise.validate()?;
    let truth = a.encode(text)?;
    let chars: Vec<char> = text.chars().collect();
    let space = a.index_of(' ');
    let mut rng = rng_for(noise.seed, STREAM_EMISSIONS);
    let v = a.len();
    let mut data = Vec::with_capacity((truth.len() + 1) * v);

    for (t, &sym) in truth.iter().chain([&a.eos()]).enumerate() {
        let mut peak = sym;
        let mut shadow = None;
        let c = chars.get(t).copied();
        // the same number of draws per row keeps rows independent of each other's outcomes
        let u_split: f64 = rng.gen();
        let u_conf: f64 = rng.gen();
        let after_non_connecting = t > 0
            && NON_CONNECTING.contains(chars[t - 1])
            && c.is_some_and(|c| LETTERS.contains(&c));
        if let (true, Some(sp)) = (after_non_connecting, space) {
            if u_split < noise.space_split_prob {
                peak = sp;
                shadow = Some(sym);
            }
        }
        if peak == sym {
            if let Some(c) = c {
                let mut acc = 0.0;
                let mut first = None;
                for conf in noise.confusions.iter().filter(|k| k.from == c) {
                    let Some(to) = a.index_of(conf.to) else { continue };
                    first.get_or_insert(to);
                    acc += conf.prob;
                    if u_conf < acc && shadow.is_none() {
                        peak = to;
                        shadow = Some(sym);
                    }
                }
                if shadow.is_none() {
                    shadow = first;
                }
            }
        }
        let shadow_mass = if shadow.is_some() { noise.shadow_mass } else { 0.0 };
        let assigned = 1 + usize::from(shadow.is_some());
        let rest = if v > assigned { noise.epsilon / (v - assigned) as f64 } else { 0.0 };
        let peak_mass = 1.0 - shadow_mass - if v > assigned { noise.epsilon } else { 0.0 };
        let start = data.len();
        data.resize(start + v, 0f32);
        let row = &mut data[start..];
        for (s, x) in row.iter_mut().enumerate() {
            let p = if s == peak {
                peak_mass
            } else if Some(s) == shadow {
                shadow_mass
            } else {
                rest
            };
            *x = p.ln() as f32;
        }
    }
    Ok(EmissionMatrix::new(truth.len() + 1, v, data)?)
}

/// Each whitespace-separated word containing a letter receives, with
/// probability `rate` (clamped to [0, 1]), one substitution of a random
/// letter by a different base letter. Separators are kept verbatim.
pub fn corrupt_text(text: &str, rate: f64, seed: u64) -> String {
    let rate = rate.clamp(0.0, 1.0);
    let letters: Vec<char> = BASE_LETTERS.chars().collect();
    let mut rng = rng_for(seed, STREAM_CORRUPT);
    let mut out = String::with_capacity(text.len());
    let mut word: Vec<char> = Vec::new();
    let flush = |word: &mut Vec<char>, out: &mut String, rng: &mut ChaCha8Rng| {
        if word.is_empty() {
            return;
        }
        let slots: Vec<usize> = (0..word.len()).filter(|&i| LETTERS.contains(&word[i])).collect();
        if !slots.is_empty() && rng.gen_bool(rate) {
            let i = *slots.choose(rng).unwrap();
            let old = word[i];
            let choices: Vec<char> = letters.iter().copied().filter(|&c| c != old).collect();
            word[i] = *choices.choose(rng).unwrap();
        }
        out.extend(word.drain(..));
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut word, &mut out, &mut rng);
            out.push(c);
        } else {
            word.push(c);
        }
    }
    flush(&mut word, &mut out, &mut rng);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentConfig {
    /// Rotation angle range in degrees.
    pub rotation_deg: (f64, f64),
    /// Horizontal scale factor range.
    pub stretch: (f64, f64),
    pub brightness: (i32, i32),
    /// Per-side margin range in pixels; negative crops, positive pads.
    pub margin: (i32, i32),
    pub salt_pepper: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self::identity(0)
    }
}

impl AugmentConfig {
    pub fn identity(seed: u64) -> Self {
        Self {
            rotation_deg: (0.0, 0.0),
            stretch: (1.0, 1.0),
            brightness: (0, 0),
            margin: (0, 0),
            salt_pepper: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ordered = self.rotation_deg.0 <= self.rotation_deg.1
            && self.stretch.0 <= self.stretch.1
            && self.brightness.0 <= self.brightness.1
            && self.margin.0 <= self.margin.1;
        if !ordered {
            return Err(SimError::Config("ranges must be (low, high) with low <= high".into()));
        }
        if !(self.stretch.0 > 0.0) || !self.rotation_deg.0.is_finite() || !self.rotation_deg.1.is_finite() {
            return Err(SimError::Config("stretch must be positive and angles finite".into()));
        }
        if !(0.0..1.0).contains(&self.salt_pepper) {
            return Err(SimError::Config(format!("salt_pepper density must lie in [0, 1), got {}", self.salt_pepper)));
        }
        Ok(())
    }
}

fn sample_f(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn sample_i(rng: &mut ChaCha8Rng, (lo, hi): (i32, i32)) -> i32 {
    rng.gen_range(lo..=hi)
}

/// Bilinear rotation about the image center, background 255.
pub fn rotate(img: &GrayImage, degrees: f64) -> GrayImage {
    if degrees == 0.0 {
        return img.clone();
    }
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (img.width() as f64 - 1.0) / 2.0;
    let cy = (img.height() as f64 - 1.0) / 2.0;
    let sample = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= img.width() as isize || y >= img.height() as isize {
            255.0
        } else {
            f64::from(img.get(x as usize, y as usize))
        }
    };
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        // inverse mapping: rotate the output coordinate back by -angle
        let sx = cos * dx + sin * dy + cx;
        let sy = -sin * dx + cos * dy + cy;
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as isize, y0 as isize);
        let top = sample(x0, y0) * (1.0 - fx) + sample(x0 + 1, y0) * fx;
        let bottom = sample(x0, y0 + 1) * (1.0 - fx) + sample(x0 + 1, y0 + 1) * fx;
        (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
    })
    .expect("same dimensions as a valid image")
}

/// Horizontal resampling by `factor` with linear interpolation.
pub fn stretch_horizontal(img: &GrayImage, factor: f64) -> GrayImage {
    if factor == 1.0 {
        return img.clone();
    }
    let w = ((img.width() as f64 * factor).round() as usize).max(1);
    let last = img.width() - 1;
    GrayImage::from_fn(w, img.height(), |x, y| {
        let sx = ((x as f64 + 0.5) / factor - 0.5).clamp(0.0, last as f64);
        let x0 = sx.floor() as usize;
        let x1 = (x0 + 1).min(last);
        let f = sx - x0 as f64;
        (f64::from(img.get(x0, y)) * (1.0 - f) + f64::from(img.get(x1, y)) * f).round() as u8
    })
    .expect("stretched width is at least 1")
}

pub fn adjust_brightness(img: &GrayImage, delta: i32) -> GrayImage {
    if delta == 0 {
        return img.clone();
    }
    let data = img.data().iter().map(|&v| (i32::from(v) + delta).clamp(0, 255) as u8).collect();
    GrayImage::new(img.width(), img.height(), data).expect("unchanged dimensions")
}

/// Per-side margins (left, top, right, bottom): negative crops, positive
/// pads with white.
pub fn crop_pad(img: &GrayImage, margins: [i32; 4]) -> Result<GrayImage, SimError> {
    let [l, t, r, b] = margins.map(i64::from);
    let w = img.width() as i64 + l + r;
    let h = img.height() as i64 + t + b;
    if w < 1 || h < 1 {
        return Err(SimError::Config(format!(
            "crop {margins:?} removes the whole {}x{} image",
            img.width(),
            img.height()
        )));
    }
    Ok(GrayImage::from_fn(w as usize, h as usize, |x, y| {
        let sx = x as i64 - l;
        let sy = y as i64 - t;
        if sx < 0 || sy < 0 || sx >= img.width() as i64 || sy >= img.height() as i64 {
            255
        } else {
            img.get(sx as usize, sy as usize)
        }
    })?)
}

/// Each pixel independently becomes 0 or 255 (even odds) with probability `density`.
pub fn salt_pepper(img: &GrayImage, density: f64, seed: u64) -> GrayImage {
    let mut rng = rng_for(seed, STREAM_AUGMENT);
    salt_pepper_with(img, density, &mut rng)
}

fn salt_pepper_with(img: &GrayImage, density: f64, rng: &mut ChaCha8Rng) -> GrayImage {
    let data = img
        .data()
        .iter()
        .map(|&v| {
            if density > 0.0 && rng.gen_bool(density) {
                if rng.gen_bool(0.5) {
                    255
                } else {
                    0
                }
            } else {
                v
            }
        })
        .collect();
    GrayImage::new(img.width(), img.height(), data).expect("unchanged dimensions")
}

/// Rotation, horizontal stretch, brightness, crop/pad, then salt-and-pepper.
pub fn augment_image(img: &GrayImage, cfg: &AugmentConfig) -> Result<GrayImage, SimError> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, STREAM_AUGMENT);
    let angle = sample_f(&mut rng, cfg.rotation_deg);
    let factor = sample_f(&mut rng, cfg.stretch);
    let delta = sample_i(&mut rng, cfg.brightness);
    let margins = [(); 4].map(|_| sample_i(&mut rng, cfg.margin));

    let out = rotate(img, angle);
    let out = stretch_horizontal(&out, factor);
    let out = adjust_brightness(&out, delta);
    let out = crop_pad(&out, margins)?;
    Ok(salt_pepper_with(&out, cfg.salt_pepper, &mut rng))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageGeometry {
    pub width: usize,
    pub margin: usize,
    pub band_height: (usize, usize),
    pub gap: (usize, usize),
    /// Largest random inset of a band's left and right ends.
    pub max_indent: usize,
    /// Fraction of band pixels inked, beyond the guaranteed row ends.
    pub ink_density: f64,
}

impl Default for PageGeometry {
    fn default() -> Self {
        Self {
            width: 320,
            margin: 12,
            band_height: (6, 16),
            gap: (4, 14),
            max_indent: 40,
            ink_density: 0.35,
        }
    }
}

impl PageGeometry {
    fn validate(&self) -> Result<(), SimError> {
        let (h0, h1) = self.band_height;
        let (g0, g1) = self.gap;
        if h0 == 0 || h0 > h1 || g0 == 0 || g0 > g1 {
            return Err(SimError::Config("band_height and gap must be nonempty positive ranges".into()));
        }
        if self.width < 2 * (self.margin + self.max_indent) + 2 {
            return Err(SimError::Config(format!(
                "width {} leaves no room for bands with margin {} and indent {}",
                self.width, self.margin, self.max_indent
            )));
        }
        if !(0.0..=1.0).contains(&self.ink_density) {
            return Err(SimError::Config("ink_density must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Page with `k` horizontal ink bands separated by blank gaps. Every band
/// row has ink at both ends, so the returned boxes are the exact ink
/// bounding boxes.
pub fn synth_page(k: usize, geom: &PageGeometry, seed: u64) -> Result<(BinaryImage, Vec<Region>), SimError> {
    if k == 0 {
        return Err(SimError::Config("a page needs at least one band".into()));
    }
    geom.validate()?;
    let mut rng = rng_for(seed, STREAM_PAGE);
    let heights: Vec<usize> = (0..k).map(|_| rng.gen_range(geom.band_height.0..=geom.band_height.1)).collect();
    let gaps: Vec<usize> = (1..k).map(|_| rng.gen_range(geom.gap.0..=geom.gap.1)).collect();
    let height = 2 * geom.margin + heights.iter().sum::<usize>() + gaps.iter().sum::<usize>();
    let mut img = BinaryImage::zeros(geom.width, height)?;
    let mut regions = Vec::with_capacity(k);
    let mut y = geom.margin;
    for (i, &h) in heights.iter().enumerate() {
        let left = geom.margin + rng.gen_range(0..=geom.max_indent);
        let right = geom.width - 1 - geom.margin - rng.gen_range(0..=geom.max_indent);
        for row in y..y + h {
            img.set(left, row, true);
            img.set(right, row, true);
            for x in left + 1..right {
                if rng.gen_bool(geom.ink_density) {
                    img.set(x, row, true);
                }
            }
        }
        regions.push(Region {
            x: left,
            y,
            w: right - left + 1,
            h,
            class: RegionClass::TextLine,
            confidence: 1.0,
        });
        y += h + gaps.get(i).copied().unwrap_or(0);
    }
    Ok((img, regions))
}

/// Clean synthetic text line: dark strokes two pixels thick on white,
/// a baseline per word with vertical strokes rising from it.
pub fn synth_text_line(width: usize, height: usize, seed: u64) -> Result<GrayImage, SimError> {
    if width < 16 || height < 12 {
        return Err(SimError::Config(format!("text line {width}x{height} is too small (min 16x12)")));
    }
    let mut rng = rng_for(seed, STREAM_LINE);
    let mut img = GrayImage::filled(width, height, 255)?;
    let base = height * 2 / 3;
    let mut x = 2 + rng.gen_range(0..4);
    while x + 6 < width - 2 {
        let len = rng.gen_range(6..=24).min(width - 2 - x);
        for xx in x..x + len {
            img.set(xx, base, 0);
            img.set(xx, base + 1, 0);
        }
        // vertical strokes, at least two blank columns apart
        let mut sx = x + rng.gen_range(0..3);
        while sx + 2 <= x + len {
            if rng.gen_bool(0.5) {
                let top = rng.gen_range(2..base.saturating_sub(2).max(3));
                for yy in top..base {
                    img.set(sx, yy, 0);
                    img.set(sx + 1, yy, 0);
                }
            }
            sx += 4 + rng.gen_range(0..4);
        }
        x += len + rng.gen_range(4..10);
    }
    Ok(img)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusConfig {
    pub vocab_size: usize,
    pub word_len: (usize, usize),
    /// Successor words per word in the Markov chain.
    pub successors: usize,
    pub sentence_len: (usize, usize),
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            vocab_size: 300,
            word_len: (3, 7),
            successors: 4,
            sentence_len: (5, 12),
            seed: 0,
        }
    }
}

/// First-order Markov chain over a random vocabulary of base-letter words.
#[derive(Clone, Debug)]
pub struct MarkovCorpus {
    vocab: Vec<String>,
    next: Vec<Vec<(usize, u32)>>,
    sentence_len: (usize, usize),
}

impl MarkovCorpus {
    pub fn new(cfg: &CorpusConfig) -> Result<Self, SimError> {
        let (l0, l1) = cfg.word_len;
        if cfg.vocab_size < 2 || l0 == 0 || l0 > l1 || cfg.successors == 0 {
            return Err(SimError::Config("vocabulary needs >= 2 words, positive lengths and successors".into()));
        }
        if cfg.sentence_len.0 == 0 || cfg.sentence_len.0 > cfg.sentence_len.1 {
            return Err(SimError::Config("sentence_len must be a positive range".into()));
        }
        let letters: Vec<char> = BASE_LETTERS.chars().collect();
        let mut rng = rng_for(cfg.seed, STREAM_CORPUS);
        let mut vocab: Vec<String> = Vec::with_capacity(cfg.vocab_size);
        let mut seen = std::collections::HashSet::new();
        let mut attempts = 0;
        while vocab.len() < cfg.vocab_size {
            attempts += 1;
            if attempts > cfg.vocab_size * 100 {
                return Err(SimError::Config("word length range too narrow for the vocabulary size".into()));
            }
            let len = rng.gen_range(l0..=l1);
            let w: String = (0..len).map(|_| *letters.choose(&mut rng).unwrap()).collect();
            if seen.insert(w.clone()) {
                vocab.push(w);
            }
        }
        let next = (0..cfg.vocab_size)
            .map(|_| {
                (0..cfg.successors)
                    .map(|_| (rng.gen_range(0..cfg.vocab_size), rng.gen_range(1..=8)))
                    .collect()
            })
            .collect();
        Ok(Self {
            vocab,
            next,
            sentence_len: cfg.sentence_len,
        })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// `count` space-joined sentences; distinct `stream` values give
    /// independent draws from the same chain.
    pub fn sentences(&self, count: usize, stream: u64) -> Vec<String> {
        let mut rng = rng_for(stream, STREAM_CORPUS);
        (0..count)
            .map(|_| {
                let len = rng.gen_range(self.sentence_len.0..=self.sentence_len.1);
                let mut w = rng.gen_range(0..self.vocab.len());
                let mut words = Vec::with_capacity(len);
                for _ in 0..len {
                    words.push(self.vocab[w].as_str());
                    let succ = &self.next[w];
                    let total: u32 = succ.iter().map(|s| s.1).sum();
                    let mut pick = rng.gen_range(0..total);
                    for &(s, weight) in succ {
                        if pick < weight {
                            w = s;
                            break;
                        }
                        pick -= weight;
                    }
                }
                words.join(" ")
            })
            .collect()
    }
}
