use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use arocr::decode::{Alphabet, DecoderContext, DecoderRegistry, EmissionMatrix};
use arocr::enhance::{binarize, enhance_line_stages};
use arocr::eval::evaluate_corpus;
use arocr::image::{BinaryImage, GrayImage};
use arocr::lexicon::{build_lexicon, build_prefix_tree, Lexicon};
use arocr::lm::{corpus_sentences, train_ngram, NGramModel};
use arocr::pipeline::{run_pipeline, PipelineConfig, PipelineInputs};
use arocr::postcorrect::{correct_corpus, AUDIT_HEADER};
use arocr::segment::{segment_blocks, segment_lines, write_annotations};
use arocr::sim::{augment_image, corrupt_text, derive_seed, synth_emissions, synth_page, PageGeometry};
use clap::{Args, Parser, Subcommand};

/// Arabic OCR toolkit: enhancement, segmentation, decoding, post-correction, evaluation.
#[derive(Parser)]
#[command(name = "arocr", version)]
struct Cli {
    /// Config file of `section.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set decode.beam_width=8`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the line enhancement chain on a PGM image.
    Enhance(EnhanceArgs),
    /// Find text lines (and blocks) in a page image.
    Segment(SegmentArgs),
    /// Decode emission matrices into text.
    Decode(DecodeArgs),
    /// Post-correct text, one sentence per line.
    Correct(CorrectArgs),
    /// Corpus CER/WER from parallel reference and hypothesis files.
    Eval(EvalArgs),
    #[command(subcommand)]
    Lexicon(LexiconCmd),
    #[command(subcommand)]
    Lm(LmCmd),
    #[command(subcommand)]
    Sim(SimCmd),
    /// Full run: enhance, segment, decode, correct, evaluate.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct EnhanceArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the intermediate rasters into this directory.
    #[arg(long)]
    stages_dir: Option<PathBuf>,
    #[arg(long)]
    contrast_low_pct: Option<f64>,
    #[arg(long)]
    contrast_high_pct: Option<f64>,
    #[arg(long)]
    edge_threshold: Option<u8>,
    #[arg(long)]
    cei_threshold: Option<u8>,
    #[arg(long)]
    median_window: Option<usize>,
}

#[derive(Args)]
struct SegmentArgs {
    /// PGM (dark ink) or PBM page.
    input: PathBuf,
    /// Line annotations; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write XY-cut block annotations here.
    #[arg(long)]
    blocks: Option<PathBuf>,
    #[arg(long)]
    min_gap_rows: Option<usize>,
    #[arg(long)]
    min_line_height: Option<usize>,
}

#[derive(Args)]
struct DecodeArgs {
    /// EMAT files, decoded in sorted order, one output line each.
    #[arg(required = true)]
    emissions: Vec<PathBuf>,
    /// Decoder name (greedy, beam, diverse-beam, wbs).
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    alphabet: Option<PathBuf>,
    #[arg(long)]
    beam_width: Option<usize>,
    /// Print the n best hypotheses with scores instead of the top text.
    #[arg(long)]
    nbest: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorrectArgs {
    input: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    lm: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Tab-separated substitution log.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    reference: PathBuf,
    hypothesis: PathBuf,
    /// Per-line TSV report.
    #[arg(long)]
    tsv: Option<PathBuf>,
    #[arg(long)]
    strip_diacritics: bool,
    #[arg(long)]
    normalize_whitespace: bool,
}

#[derive(Subcommand)]
enum LexiconCmd {
    /// Word counts from a UTF-8 corpus.
    Build {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum LmCmd {
    /// Train an n-gram model, one sentence per corpus line.
    Train {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Log-probability and perplexity of each line.
    Score {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// One EMAT file per text line.
    Emissions {
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random single-letter substitutions per word.
    Corrupt {
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Augment a PGM image per the `augment.*` settings.
    Augment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Synthetic page of horizontal bands plus its ground-truth boxes.
    Page {
        #[arg(long)]
        lines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// PBM output.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    page: Option<PathBuf>,
    /// EMAT files or directories of them.
    #[arg(long, num_args = 1..)]
    emissions: Vec<PathBuf>,
    #[arg(long)]
    references: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    lm: Option<PathBuf>,
    #[arg(long)]
    decoder: Option<String>,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(p) = &cli.config {
        let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in config {}", p.display()))?;
    }
    for o in &cli.overrides {
        let (k, v) = o.split_once('=').with_context(|| format!("--set {o:?}: expected KEY=VALUE"))?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

/// Applies flag values on top of the file and `--set` settings.
fn set_opt<T: ToString>(cfg: &mut PipelineConfig, key: &str, v: &Option<T>) -> Result<()> {
    if let Some(v) = v {
        cfg.set(key, &v.to_string())?;
    }
    Ok(())
}

fn set_path(cfg: &mut PipelineConfig, key: &str, v: &Option<PathBuf>) -> Result<()> {
    set_opt(cfg, key, &v.as_ref().map(|p| p.display().to_string()))
}

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn write_out(p: &Option<PathBuf>, text: &str) -> Result<()> {
    match p {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_lexicon(cfg: &PipelineConfig) -> Result<Option<Lexicon>> {
    match &cfg.lexicon_path {
        Some(p) => {
            if !p.is_file() {
                bail!("lexicon file not found: {}", p.display());
            }
            Ok(Some(Lexicon::from_tsv(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?))
        }
        None => Ok(None),
    }
}

fn load_page(p: &Path) -> Result<BinaryImage> {
    let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
    if bytes.starts_with(b"P4") {
        return BinaryImage::read_pbm(&bytes[..]).with_context(|| format!("parsing {}", p.display()));
    }
    let img = GrayImage::read_pgm(&bytes[..]).with_context(|| format!("parsing {}", p.display()))?;
    Ok(binarize(&img.inverted(), 128))
}

fn expand_emissions(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in fs::read_dir(p).with_context(|| format!("listing {}", p.display()))? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "emat") {
                    out.push(path);
                }
            }
        } else {
            out.push(p.clone());
        }
    }
    out.sort();
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.cmd {
        Cmd::Enhance(a) => {
            set_opt(&mut cfg, "enhance.contrast_low_pct", &a.contrast_low_pct)?;
            set_opt(&mut cfg, "enhance.contrast_high_pct", &a.contrast_high_pct)?;
            set_opt(&mut cfg, "enhance.edge_threshold", &a.edge_threshold)?;
            set_opt(&mut cfg, "enhance.cei_threshold", &a.cei_threshold)?;
            set_opt(&mut cfg, "enhance.median_window", &a.median_window)?;
            let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let img = GrayImage::read_pgm(&bytes[..]).with_context(|| format!("parsing {}", a.input.display()))?;
            let stages = enhance_line_stages(&img, &cfg.enhance)?;
            fs::write(&a.output, stages.output.to_pgm_bytes())?;
            if let Some(dir) = a.stages_dir {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("contrast.pgm"), stages.contrast.to_pgm_bytes())?;
                fs::write(dir.join("edges.pbm"), stages.edge_bin.to_pbm_bytes())?;
                fs::write(dir.join("ink.pbm"), stages.contrast_bin.to_pbm_bytes())?;
                fs::write(dir.join("text_location.pbm"), stages.text_location.to_pbm_bytes())?;
            }
        }
        Cmd::Segment(a) => {
            set_opt(&mut cfg, "segment.min_gap_rows", &a.min_gap_rows)?;
            set_opt(&mut cfg, "segment.min_line_height", &a.min_line_height)?;
            let page = load_page(&a.input)?;
            let lines = segment_lines(&page, &cfg.segment)?;
            write_out(&a.output, &write_annotations(&lines))?;
            if let Some(p) = a.blocks {
                let blocks = segment_blocks(&page, &cfg.segment)?;
                fs::write(&p, write_annotations(&blocks))?;
            }
        }
        Cmd::Decode(a) => {
            set_opt(&mut cfg, "decode.decoder", &a.decoder)?;
            set_opt(&mut cfg, "decode.beam_width", &a.beam_width)?;
            set_path(&mut cfg, "paths.lexicon", &a.lexicon)?;
            set_path(&mut cfg, "paths.alphabet", &a.alphabet)?;
            let alphabet = match &cfg.alphabet_path {
                Some(p) => Alphabet::parse(&read_text(p)?)?,
                None => Alphabet::arabic(),
            };
            let tree = load_lexicon(&cfg)?.map(|l| build_prefix_tree(&l).map(Arc::new)).transpose()?;
            let ctx = DecoderContext {
                config: cfg.decode.clone(),
                tree,
                normalize: cfg.normalize,
            };
            let decoder = DecoderRegistry::with_builtins().create(&cfg.decoder, &ctx)?;
            let mut out = String::new();
            for p in expand_emissions(&a.emissions)? {
                let bytes = fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
                let e = EmissionMatrix::from_bytes(&bytes).with_context(|| format!("parsing {}", p.display()))?;
                let results = decoder.decode(&e, &alphabet).with_context(|| format!("decoding {}", p.display()))?;
                match a.nbest {
                    Some(n) => {
                        for r in results.iter().take(n) {
                            let flag = if r.unconstrained { "\tunconstrained" } else { "" };
                            out.push_str(&format!("{}\t{:.6}\t{}{flag}\n", p.display(), r.score, r.text));
                        }
                    }
                    None => {
                        out.push_str(results.first().map_or("", |r| r.text.as_str()));
                        out.push('\n');
                    }
                }
            }
            write_out(&a.output, &out)?;
        }
        Cmd::Correct(a) => {
            set_path(&mut cfg, "paths.lexicon", &a.lexicon)?;
            set_path(&mut cfg, "paths.lm", &a.lm)?;
            let Some(lex) = load_lexicon(&cfg)? else {
                bail!("correct needs a lexicon (--lexicon or paths.lexicon)");
            };
            let Some(lm_path) = &cfg.lm_path else {
                bail!("correct needs a language model (--lm or paths.lm)");
            };
            let model = NGramModel::from_text(&read_text(lm_path)?).with_context(|| format!("parsing {}", lm_path.display()))?;
            let tree = build_prefix_tree(&lex)?;
            let lines: Vec<String> = read_text(&a.input)?.lines().map(str::to_owned).collect();
            let corr = arocr::postcorrect::CorrectionConfig {
                normalize: cfg.normalize,
                ..cfg.correction
            };
            let results = correct_corpus(&lines, &model, &lex, &tree, &corr)?;
            let mut text = String::new();
            let mut audit = String::from(AUDIT_HEADER);
            for (i, r) in results.iter().enumerate() {
                text.push_str(&r.sentence);
                text.push('\n');
                audit.push_str(&r.audit_rows(i + 1));
            }
            write_out(&a.output, &text)?;
            if let Some(p) = a.audit {
                fs::write(&p, audit)?;
            }
        }
        Cmd::Eval(a) => {
            if a.strip_diacritics {
                cfg.eval.strip_diacritics = true;
            }
            if a.normalize_whitespace {
                cfg.eval.normalize_whitespace = true;
            }
            let refs: Vec<String> = read_text(&a.reference)?.lines().map(str::to_owned).collect();
            let hyps: Vec<String> = read_text(&a.hypothesis)?.lines().map(str::to_owned).collect();
            if refs.len() != hyps.len() {
                bail!("{} reference lines but {} hypothesis lines", refs.len(), hyps.len());
            }
            let pairs: Vec<(&String, &String)> = refs.iter().zip(&hyps).collect();
            let report = evaluate_corpus(&pairs, &cfg.eval)?;
            print!("{}", report.summary());
            if let Some(p) = a.tsv {
                fs::write(&p, report.to_tsv())?;
            }
        }
        Cmd::Lexicon(LexiconCmd::Build { corpus, output }) => {
            let bytes = fs::read(&corpus).with_context(|| format!("reading {}", corpus.display()))?;
            let lex = build_lexicon(&bytes, &cfg.normalize).with_context(|| format!("in {}", corpus.display()))?;
            fs::write(&output, lex.to_tsv())?;
            eprintln!("{} words, {} tokens", lex.len(), lex.total_tokens());
        }
        Cmd::Lm(LmCmd::Train {
            corpus,
            output,
            order,
            alpha,
        }) => {
            set_opt(&mut cfg, "lm.order", &order)?;
            set_opt(&mut cfg, "lm.alpha", &alpha)?;
            let sentences = corpus_sentences(&read_text(&corpus)?, &cfg.normalize);
            let model = train_ngram(&sentences, &cfg.lm)?;
            fs::write(&output, model.to_text())?;
        }
        Cmd::Lm(LmCmd::Score { input, model }) => {
            let m = NGramModel::from_text(&read_text(&model)?).with_context(|| format!("parsing {}", model.display()))?;
            let mut out = String::from("line\tlogprob\tperplexity\n");
            for (i, s) in corpus_sentences_keep_empty(&read_text(&input)?, &cfg).iter().enumerate() {
                let padded = m.pad_sentence(s);
                let lp = m.sequence_logprob(&padded);
                let ppl = m.perplexity(&padded)?;
                out.push_str(&format!("{}\t{lp:.6}\t{ppl:.6}\n", i + 1));
            }
            print!("{out}");
        }
        Cmd::Sim(SimCmd::Emissions { input, out_dir, seed }) => {
            set_opt(&mut cfg, "noise.seed", &seed)?;
            let a = match &cfg.alphabet_path {
                Some(p) => Alphabet::parse(&read_text(p)?)?,
                None => Alphabet::arabic(),
            };
            fs::create_dir_all(&out_dir)?;
            for (i, line) in read_text(&input)?.lines().enumerate() {
                let noise = cfg.noise.with_seed(derive_seed(cfg.noise.seed, i as u64));
                let e = synth_emissions(line, &a, &noise).with_context(|| format!("line {}", i + 1))?;
                fs::write(out_dir.join(format!("line_{i:05}.emat")), e.to_bytes())?;
            }
        }
        Cmd::Sim(SimCmd::Corrupt {
            input,
            rate,
            seed,
            output,
        }) => {
            let mut out = String::new();
            for (i, line) in read_text(&input)?.lines().enumerate() {
                out.push_str(&corrupt_text(line, rate, derive_seed(seed, i as u64)));
                out.push('\n');
            }
            write_out(&output, &out)?;
        }
        Cmd::Sim(SimCmd::Augment { input, output, seed }) => {
            set_opt(&mut cfg, "augment.seed", &seed)?;
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let img = GrayImage::read_pgm(&bytes[..]).with_context(|| format!("parsing {}", input.display()))?;
            fs::write(&output, augment_image(&img, &cfg.augment)?.to_pgm_bytes())?;
        }
        Cmd::Sim(SimCmd::Page {
            lines,
            seed,
            output,
            truth,
        }) => {
            let (img, regions) = synth_page(lines, &PageGeometry::default(), seed)?;
            fs::write(&output, img.to_pbm_bytes())?;
            fs::write(&truth, write_annotations(&regions))?;
        }
        Cmd::Pipeline(a) => {
            set_path(&mut cfg, "paths.lexicon", &a.lexicon)?;
            set_path(&mut cfg, "paths.lm", &a.lm)?;
            set_opt(&mut cfg, "decode.decoder", &a.decoder)?;
            let inputs = PipelineInputs {
                page: a.page,
                emissions: expand_emissions(&a.emissions)?,
                references: a.references,
            };
            let out = run_pipeline(&inputs, &cfg, &a.out_dir)?;
            eprintln!(
                "{} page lines, {} decoded lines{}",
                out.line_count,
                out.decoded.len(),
                out.report.map(|r| format!(", CER {:.4}, WER {:.4}", r.cer, r.wer)).unwrap_or_default()
            );
        }
    }
    Ok(())
}

/// Scoring keeps one row per input line, including empty ones.
fn corpus_sentences_keep_empty(text: &str, cfg: &PipelineConfig) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| corpus_sentences(l, &cfg.normalize).into_iter().next().unwrap_or_default())
        .collect()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
