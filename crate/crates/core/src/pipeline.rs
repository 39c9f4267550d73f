//! End-to-end run: enhance → segment → decode → correct → eval, with every
//! intermediate artifact written under one output directory.
//!
//! The recognizer itself is external: line images are enhanced and
//! segmented here, while its per-line emission matrices arrive as EMAT
//! files and are decoded in file-name order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::decode::{Alphabet, DecodeConfig, DecoderContext, DecoderRegistry, EmissionMatrix};
use crate::enhance::{binarize, enhance_line, EnhanceConfig};
use crate::eval::{evaluate_corpus, EvalConfig, EvalReport};
use crate::image::GrayImage;
use crate::lexicon::{build_prefix_tree, Lexicon, NormalizeConfig};
use crate::lm::{LmConfig, NGramModel};
use crate::postcorrect::{correct_corpus, CorrectionConfig, AUDIT_HEADER};
use crate::segment::{segment_blocks, segment_lines, write_annotations, SegmentConfig};
use crate::sim::{AugmentConfig, Confusion, NoiseConfig};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{what} file not found: {}", path.display())]
    MissingFile { what: &'static str, path: PathBuf },
    #[error("stage {stage} failed on {input}: {source}")]
    Stage {
        stage: &'static str,
        input: String,
        #[source]
        source: BoxError,
    },
}

impl PipelineError {
    fn stage(stage: &'static str, input: impl std::fmt::Display, source: impl Into<BoxError>) -> Self {
        Self::Stage {
            stage,
            input: input.to_string(),
            source: source.into(),
        }
    }

    fn key(msg: impl Into<String>) -> Self {
        Self::Config { line: 0, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub enhance: EnhanceConfig,
    pub segment: SegmentConfig,
    pub decoder: String,
    pub decode: DecodeConfig,
    pub normalize: NormalizeConfig,
    pub correct_enabled: bool,
    pub correction: CorrectionConfig,
    pub lm: LmConfig,
    pub eval: EvalConfig,
    pub noise: NoiseConfig,
    pub augment: AugmentConfig,
    pub lexicon_path: Option<PathBuf>,
    pub lm_path: Option<PathBuf>,
    pub alphabet_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            enhance: EnhanceConfig::default(),
            segment: SegmentConfig::default(),
            decoder: "wbs".into(),
            decode: DecodeConfig::default(),
            normalize: NormalizeConfig::default(),
            correct_enabled: true,
            correction: CorrectionConfig::default(),
            lm: LmConfig::default(),
            eval: EvalConfig::default(),
            noise: NoiseConfig::default(),
            augment: AugmentConfig::default(),
            lexicon_path: None,
            lm_path: None,
            alphabet_path: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, PipelineError> {
    value
        .parse()
        .map_err(|_| PipelineError::key(format!("{key}: cannot parse {value:?}")))
}

fn parse_range<T: FromStr>(key: &str, value: &str) -> Result<(T, T), PipelineError> {
    let (a, b) = value
        .split_once(',')
        .ok_or_else(|| PipelineError::key(format!("{key}: expected `low,high`")))?;
    Ok((parse(key, a.trim())?, parse(key, b.trim())?))
}

fn parse_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

/// `ي>ب:0.1,ب>ي:0.1`
fn parse_confusions(value: &str) -> Result<Vec<Confusion>, PipelineError> {
    let bad = || PipelineError::key(format!("noise.confusions: expected `from>to:prob,...`, got {value:?}"));
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (pair, prob) = item.split_once(':').ok_or_else(bad)?;
            let (from, to) = pair.split_once('>').ok_or_else(bad)?;
            let one = |s: &str| {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(bad()),
                }
            };
            Ok(Confusion {
                from: one(from)?,
                to: one(to)?,
                prob: prob.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

impl PipelineConfig {
    /// Applies one `section.key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let v = value.trim();
        match key.trim() {
            "enhance.contrast_low_pct" => self.enhance.contrast_low_pct = parse(key, v)?,
            "enhance.contrast_high_pct" => self.enhance.contrast_high_pct = parse(key, v)?,
            "enhance.edge_threshold" => self.enhance.edge_threshold = parse(key, v)?,
            "enhance.cei_threshold" => self.enhance.cei_threshold = parse(key, v)?,
            "enhance.median_window" => self.enhance.median_window = parse(key, v)?,
            "segment.min_gap_rows" => self.segment.min_gap_rows = parse(key, v)?,
            "segment.min_line_height" => self.segment.min_line_height = parse(key, v)?,
            "segment.smear_radius" => self.segment.smear_radius = parse(key, v)?,
            "segment.margin_band_frac" => self.segment.margin_band_frac = parse(key, v)?,
            "decode.decoder" => self.decoder = v.to_owned(),
            "decode.beam_width" => self.decode.beam_width = parse(key, v)?,
            "decode.dbs_groups" => self.decode.dbs_groups = parse(key, v)?,
            "decode.dbs_penalty" => self.decode.dbs_penalty = parse(key, v)?,
            "decode.max_steps" => {
                self.decode.max_steps = if v.is_empty() || v == "none" { None } else { Some(parse(key, v)?) }
            }
            "normalize.strip_diacritics" => self.normalize.strip_diacritics = parse(key, v)?,
            "normalize.unify_alef_forms" => self.normalize.unify_alef_forms = parse(key, v)?,
            "normalize.lowercase_latin" => self.normalize.lowercase_latin = parse(key, v)?,
            "correct.enabled" => self.correct_enabled = parse(key, v)?,
            "correct.max_iterations" => self.correction.max_iterations = parse(key, v)?,
            "correct.max_edit_distance" => self.correction.max_edit_distance = parse(key, v)?,
            "correct.max_candidates" => self.correction.max_candidates = parse(key, v)?,
            "correct.min_word_length" => self.correction.min_word_length = parse(key, v)?,
            "lm.order" => self.lm.order = parse(key, v)?,
            "lm.alpha" => self.lm.alpha = parse(key, v)?,
            "eval.strip_diacritics" => self.eval.strip_diacritics = parse(key, v)?,
            "eval.normalize_whitespace" => self.eval.normalize_whitespace = parse(key, v)?,
            "noise.confusions" => self.noise.confusions = parse_confusions(v)?,
            "noise.shadow_mass" => self.noise.shadow_mass = parse(key, v)?,
            "noise.epsilon" => self.noise.epsilon = parse(key, v)?,
            "noise.space_split_prob" => self.noise.space_split_prob = parse(key, v)?,
            "noise.seed" => self.noise.seed = parse(key, v)?,
            "augment.rotation_deg" => self.augment.rotation_deg = parse_range(key, v)?,
            "augment.stretch" => self.augment.stretch = parse_range(key, v)?,
            "augment.brightness" => self.augment.brightness = parse_range(key, v)?,
            "augment.margin" => self.augment.margin = parse_range(key, v)?,
            "augment.salt_pepper" => self.augment.salt_pepper = parse(key, v)?,
            "augment.seed" => self.augment.seed = parse(key, v)?,
            "paths.lexicon" => self.lexicon_path = parse_path(v),
            "paths.lm" => self.lm_path = parse_path(v),
            "paths.alphabet" => self.alphabet_path = parse_path(v),
            other => return Err(PipelineError::key(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a config file body; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| PipelineError::Config {
                line: i + 1,
                msg: "expected `section.key = value`".into(),
            })?;
            self.set(k, v).map_err(|e| match e {
                PipelineError::Config { msg, .. } => PipelineError::Config { line: i + 1, msg },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, PipelineError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Every setting as `key = value`, sorted by key. Feeding the output
    /// back through [`PipelineConfig::from_text`] reproduces the config.
    pub fn effective(&self) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        let e = &self.enhance;
        m.insert("enhance.contrast_low_pct", e.contrast_low_pct.to_string());
        m.insert("enhance.contrast_high_pct", e.contrast_high_pct.to_string());
        m.insert("enhance.edge_threshold", e.edge_threshold.to_string());
        m.insert("enhance.cei_threshold", e.cei_threshold.to_string());
        m.insert("enhance.median_window", e.median_window.to_string());
        let s = &self.segment;
        m.insert("segment.min_gap_rows", s.min_gap_rows.to_string());
        m.insert("segment.min_line_height", s.min_line_height.to_string());
        m.insert("segment.smear_radius", s.smear_radius.to_string());
        m.insert("segment.margin_band_frac", s.margin_band_frac.to_string());
        let d = &self.decode;
        m.insert("decode.decoder", self.decoder.clone());
        m.insert("decode.beam_width", d.beam_width.to_string());
        m.insert("decode.dbs_groups", d.dbs_groups.to_string());
        m.insert("decode.dbs_penalty", d.dbs_penalty.to_string());
        m.insert(
            "decode.max_steps",
            d.max_steps.map_or_else(|| "none".into(), |n| n.to_string()),
        );
        let n = &self.normalize;
        m.insert("normalize.strip_diacritics", n.strip_diacritics.to_string());
        m.insert("normalize.unify_alef_forms", n.unify_alef_forms.to_string());
        m.insert("normalize.lowercase_latin", n.lowercase_latin.to_string());
        let c = &self.correction;
        m.insert("correct.enabled", self.correct_enabled.to_string());
        m.insert("correct.max_iterations", c.max_iterations.to_string());
        m.insert("correct.max_edit_distance", c.max_edit_distance.to_string());
        m.insert("correct.max_candidates", c.max_candidates.to_string());
        m.insert("correct.min_word_length", c.min_word_length.to_string());
        m.insert("lm.order", self.lm.order.to_string());
        m.insert("lm.alpha", self.lm.alpha.to_string());
        m.insert("eval.strip_diacritics", self.eval.strip_diacritics.to_string());
        m.insert("eval.normalize_whitespace", self.eval.normalize_whitespace.to_string());
        let nz = &self.noise;
        let conf: Vec<String> = nz.confusions.iter().map(|c| format!("{}>{}:{}", c.from, c.to, c.prob)).collect();
        m.insert("noise.confusions", conf.join(","));
        m.insert("noise.shadow_mass", nz.shadow_mass.to_string());
        m.insert("noise.epsilon", nz.epsilon.to_string());
        m.insert("noise.space_split_prob", nz.space_split_prob.to_string());
        m.insert("noise.seed", nz.seed.to_string());
        let a = &self.augment;
        m.insert("augment.rotation_deg", format!("{},{}", a.rotation_deg.0, a.rotation_deg.1));
        m.insert("augment.stretch", format!("{},{}", a.stretch.0, a.stretch.1));
        m.insert("augment.brightness", format!("{},{}", a.brightness.0, a.brightness.1));
        m.insert("augment.margin", format!("{},{}", a.margin.0, a.margin.1));
        m.insert("augment.salt_pepper", a.salt_pepper.to_string());
        m.insert("augment.seed", a.seed.to_string());
        m.insert("paths.lexicon", show_path(&self.lexicon_path));
        m.insert("paths.lm", show_path(&self.lm_path));
        m.insert("paths.alphabet", show_path(&self.alphabet_path));
        let mut out = String::new();
        for (k, v) in m {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Nested invariants plus existence of every referenced file.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg = |e: String| PipelineError::key(e);
        self.enhance.validate().map_err(|e| cfg(e.to_string()))?;
        self.segment.validate().map_err(|e| cfg(e.to_string()))?;
        self.correction.validate().map_err(|e| cfg(e.to_string()))?;
        self.noise.validate().map_err(|e| cfg(e.to_string()))?;
        self.augment.validate().map_err(|e| cfg(e.to_string()))?;
        for (what, p) in [
            ("lexicon", &self.lexicon_path),
            ("language model", &self.lm_path),
            ("alphabet", &self.alphabet_path),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(PipelineError::MissingFile { what, path: p.clone() });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineInputs {
    pub page: Option<PathBuf>,
    /// Per-line emission matrices; decoded in sorted path order.
    pub emissions: Vec<PathBuf>,
    /// One reference transcription per emission file, in the same order.
    pub references: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub line_count: usize,
    pub decoded: Vec<String>,
    pub corrected: Option<Vec<String>>,
    pub report: Option<EvalReport>,
}

pub const ENHANCED_FILE: &str = "01_enhanced.pgm";
pub const LINES_DIR: &str = "02_lines";
pub const DECODED_FILE: &str = "03_decoded.txt";
pub const CORRECTED_FILE: &str = "04_corrected.txt";
pub const CORRECTIONS_AUDIT_FILE: &str = "04_corrections.tsv";
pub const REPORT_FILE: &str = "report.tsv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CONFIG_ECHO_FILE: &str = "effective_config.txt";
pub const LOG_FILE: &str = "pipeline.log";

struct Run<'a> {
    out: &'a Path,
    log: String,
}

impl Run<'_> {
    fn write(&self, stage: &'static str, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let p = self.out.join(name);
        fs::write(&p, bytes).map_err(|e| PipelineError::stage(stage, p.display(), e))
    }

    fn note(&mut self, stage: &str, msg: impl std::fmt::Display) -> Result<(), PipelineError> {
        let _ = writeln!(self.log, "[{stage}] {msg}");
        let p = self.out.join(LOG_FILE);
        fs::write(&p, &self.log).map_err(|e| PipelineError::stage("log", p.display(), e))
    }
}

fn read(stage: &'static str, p: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(p).map_err(|e| PipelineError::stage(stage, p.display(), e))
}

fn read_text(stage: &'static str, p: &Path) -> Result<String, PipelineError> {
    String::from_utf8(read(stage, p)?).map_err(|e| PipelineError::stage(stage, p.display(), e))
}

fn lines_of(text: &str) -> Vec<String> {
    text.lines().map(str::to_owned).collect()
}

fn joined(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Runs every stage whose inputs are present, writing artifacts into
/// `out_dir` as it goes so a failure leaves earlier outputs in place.
pub fn run_pipeline(inputs: &PipelineInputs, cfg: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| PipelineError::stage("setup", out_dir.display(), e))?;
    let mut run = Run {
        out: out_dir,
        log: String::new(),
    };
    run.write("setup", CONFIG_ECHO_FILE, cfg.effective().as_bytes())?;

    // resources
    let lexicon = match &cfg.lexicon_path {
        Some(p) => {
            let lex = Lexicon::from_tsv(&read_text("load", p)?).map_err(|e| PipelineError::stage("load", p.display(), e))?;
            run.note("load", format!("lexicon {} words", lex.len()))?;
            Some(lex)
        }
        None => None,
    };
    let tree = match &lexicon {
        Some(lex) => Some(Arc::new(
            build_prefix_tree(lex).map_err(|e| PipelineError::stage("load", "lexicon", e))?,
        )),
        None => None,
    };
    let model = match &cfg.lm_path {
        Some(p) => Some(NGramModel::from_text(&read_text("load", p)?).map_err(|e| PipelineError::stage("load", p.display(), e))?),
        None => None,
    };
    let alphabet = match &cfg.alphabet_path {
        Some(p) => Alphabet::parse(&read_text("load", p)?).map_err(|e| PipelineError::stage("load", p.display(), e))?,
        None => Alphabet::arabic(),
    };

    // enhance + segment
    let mut line_count = 0;
    if let Some(page) = &inputs.page {
        let img = GrayImage::read_pgm(&read("enhance", page)?[..]).map_err(|e| PipelineError::stage("enhance", page.display(), e))?;
        let enhanced = enhance_line(&img, &cfg.enhance).map_err(|e| PipelineError::stage("enhance", page.display(), e))?;
        run.write("enhance", ENHANCED_FILE, &enhanced.to_pgm_bytes())?;
        run.note("enhance", format!("{} {}x{}", page.display(), img.width(), img.height()))?;

        let ink = binarize(&enhanced.inverted(), cfg.enhance.cei_threshold);
        let lines = segment_lines(&ink, &cfg.segment).map_err(|e| PipelineError::stage("segment", page.display(), e))?;
        let blocks = segment_blocks(&ink, &cfg.segment).map_err(|e| PipelineError::stage("segment", page.display(), e))?;
        let dir = out_dir.join(LINES_DIR);
        fs::create_dir_all(&dir).map_err(|e| PipelineError::stage("segment", dir.display(), e))?;
        for (i, r) in lines.iter().enumerate() {
            let crop = enhanced
                .crop(r.x, r.y, r.w, r.h)
                .map_err(|e| PipelineError::stage("segment", format!("line {i}"), e))?;
            run.write("segment", &format!("{LINES_DIR}/line_{i:03}.pgm"), &crop.to_pgm_bytes())?;
        }
        run.write("segment", &format!("{LINES_DIR}/lines.txt"), write_annotations(&lines).as_bytes())?;
        run.write("segment", &format!("{LINES_DIR}/blocks.txt"), write_annotations(&blocks).as_bytes())?;
        run.note("segment", format!("{} lines, {} blocks", lines.len(), blocks.len()))?;
        line_count = lines.len();
    }

    // decode
    let mut files = inputs.emissions.clone();
    files.sort();
    let mut decoded = Vec::new();
    if !files.is_empty() {
        let ctx = DecoderContext {
            config: cfg.decode.clone(),
            tree: tree.clone(),
            normalize: cfg.normalize,
        };
        let decoder = DecoderRegistry::with_builtins()
            .create(&cfg.decoder, &ctx)
            .map_err(|e| PipelineError::stage("decode", &cfg.decoder, e))?;
        let results: Vec<Result<(String, bool), PipelineError>> = files
            .par_iter()
            .map(|p| {
                let e = EmissionMatrix::from_bytes(&read("decode", p)?).map_err(|e| PipelineError::stage("decode", p.display(), e))?;
                let r = decoder
                    .decode_best(&e, &alphabet)
                    .map_err(|e| PipelineError::stage("decode", p.display(), e))?;
                Ok((r.text, r.unconstrained))
            })
            .collect();
        let mut unconstrained = 0;
        for r in results {
            let (text, flag) = r?;
            unconstrained += usize::from(flag);
            decoded.push(text);
        }
        run.write("decode", DECODED_FILE, joined(&decoded).as_bytes())?;
        run.note(
            "decode",
            format!("{} lines with {}, {} unconstrained", decoded.len(), cfg.decoder, unconstrained),
        )?;
    }

    // correct
    let corrected = match (&model, &lexicon, &tree) {
        (Some(m), Some(lex), Some(tree)) if cfg.correct_enabled && !decoded.is_empty() => {
            let corr_cfg = CorrectionConfig {
                normalize: cfg.normalize,
                ..cfg.correction
            };
            let results =
                correct_corpus(&decoded, m, lex, tree, &corr_cfg).map_err(|e| PipelineError::stage("correct", DECODED_FILE, e))?;
            let mut audit = String::from(AUDIT_HEADER);
            for (i, r) in results.iter().enumerate() {
                audit.push_str(&r.audit_rows(i + 1));
            }
            let lines: Vec<String> = results.into_iter().map(|r| r.sentence).collect();
            run.write("correct", CORRECTED_FILE, joined(&lines).as_bytes())?;
            run.write("correct", CORRECTIONS_AUDIT_FILE, audit.as_bytes())?;
            run.note("correct", format!("{} substitutions", audit.lines().count() - 1))?;
            Some(lines)
        }
        _ => {
            if !decoded.is_empty() {
                run.note("correct", "skipped (needs correct.enabled, a lexicon and a language model)")?;
            }
            None
        }
    };

    // eval
    let report = match &inputs.references {
        Some(p) => {
            let refs = lines_of(&read_text("eval", p)?);
            let hyps = corrected.as_ref().unwrap_or(&decoded);
            if refs.len() != hyps.len() {
                return Err(PipelineError::stage(
                    "eval",
                    p.display(),
                    format!("{} references for {} hypotheses", refs.len(), hyps.len()),
                ));
            }
            let pairs: Vec<(&String, &String)> = refs.iter().zip(hyps).collect();
            let report = evaluate_corpus(&pairs, &cfg.eval).map_err(|e| PipelineError::stage("eval", p.display(), e))?;
            run.write("eval", REPORT_FILE, report.to_tsv().as_bytes())?;
            let mut summary = report.summary();
            if corrected.is_some() {
                let raw: Vec<(&String, &String)> = refs.iter().zip(&decoded).collect();
                let before = evaluate_corpus(&raw, &cfg.eval).map_err(|e| PipelineError::stage("eval", p.display(), e))?;
                let _ = writeln!(summary, "cer_before_correction\t{:.6}\nwer_before_correction\t{:.6}", before.cer, before.wer);
            }
            run.write("eval", SUMMARY_FILE, summary.as_bytes())?;
            run.note("eval", format!("cer {:.6} wer {:.6}", report.cer, report.wer))?;
            Some(report)
        }
        None => None,
    };

    Ok(PipelineOutput {
        line_count,
        decoded,
        corrected,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text("# comment\ndecode.beam_width = 8\nnoise.confusions = ي>ب:0.2\naugment.margin = -2,3\n\npaths.lexicon = lex.tsv\n")
            .unwrap();
        assert_eq!(cfg.decode.beam_width, 8);
        assert_eq!(cfg.noise.confusions, vec![Confusion { from: 'ي', to: 'ب', prob: 0.2 }]);
        assert_eq!(cfg.augment.margin, (-2, 3));
        assert_eq!(cfg.lexicon_path, Some(PathBuf::from("lex.tsv")));
        let back = PipelineConfig::from_text(&cfg.effective()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(PipelineConfig::from_text(&PipelineConfig::default().effective()).unwrap(), PipelineConfig::default());
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = PipelineConfig::from_text("decode.beam_width = 4\nbogus.key = 1\n").unwrap_err();
        assert!(matches!(err, PipelineError::Config { line: 2, .. }), "{err}");
        let err = PipelineConfig::from_text("decode.beam_width = x\n").unwrap_err();
        assert!(err.to_string().contains("decode.beam_width"));
        assert!(PipelineConfig::from_text("no equals sign\n").is_err());
    }

    #[test]
    fn missing_lexicon_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig {
            lexicon_path: Some(dir.path().join("nope.tsv")),
            ..PipelineConfig::default()
        };
        let err = run_pipeline(&PipelineInputs::default(), &cfg, &dir.path().join("out")).unwrap_err();
        assert!(err.to_string().contains("nope.tsv"), "{err}");
    }
}
