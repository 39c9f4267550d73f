//! Edit distance and corpus-level character / word error rates.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lexicon::is_diacritic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("reference text is empty")]
    EmptyReference,
    #[error("no scorable lines")]
    NoLines,
}

/// Unit-cost insert/delete/substitute distance, two-row DP.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn levenshtein_str(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein(&a, &b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalConfig {
    /// Drop Arabic diacritics from both sides before scoring.
    pub strip_diacritics: bool,
    /// Collapse whitespace runs to one space and trim the ends.
    pub normalize_whitespace: bool,
}

fn prepare(text: &str, cfg: &EvalConfig) -> String {
    let text: String = if cfg.strip_diacritics {
        text.chars().filter(|&c| !is_diacritic(c)).collect()
    } else {
        text.to_owned()
    };
    if cfg.normalize_whitespace {
        text.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        text
    }
}

/// (edit distance, reference length) over Unicode scalars.
pub fn char_errors(reference: &str, hypothesis: &str, cfg: &EvalConfig) -> (usize, usize) {
    let r: Vec<char> = prepare(reference, cfg).chars().collect();
    let h: Vec<char> = prepare(hypothesis, cfg).chars().collect();
    (levenshtein(&r, &h), r.len())
}

/// (edit distance, reference length) over whitespace tokens.
pub fn word_errors(reference: &str, hypothesis: &str, cfg: &EvalConfig) -> (usize, usize) {
    let r = prepare(reference, cfg);
    let h = prepare(hypothesis, cfg);
    let r: Vec<&str> = r.split_whitespace().collect();
    let h: Vec<&str> = h.split_whitespace().collect();
    (levenshtein(&r, &h), r.len())
}

pub fn cer_with(reference: &str, hypothesis: &str, cfg: &EvalConfig) -> Result<f64, EvalError> {
    let (d, n) = char_errors(reference, hypothesis, cfg);
    if n == 0 {
        return Err(EvalError::EmptyReference);
    }
    Ok(d as f64 / n as f64)
}

pub fn wer_with(reference: &str, hypothesis: &str, cfg: &EvalConfig) -> Result<f64, EvalError> {
    let (d, n) = word_errors(reference, hypothesis, cfg);
    if n == 0 {
        return Err(EvalError::EmptyReference);
    }
    Ok(d as f64 / n as f64)
}

pub fn cer(reference: &str, hypothesis: &str) -> Result<f64, EvalError> {
    cer_with(reference, hypothesis, &EvalConfig::default())
}

pub fn wer(reference: &str, hypothesis: &str) -> Result<f64, EvalError> {
    wer_with(reference, hypothesis, &EvalConfig::default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineScore {
    pub reference: String,
    pub hypothesis: String,
    pub char_distance: usize,
    pub char_len: usize,
    pub word_distance: usize,
    pub word_len: usize,
    /// Set when the line could not be scored and was left out of the totals.
    pub error: Option<EvalError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub lines: Vec<LineScore>,
    pub total_char_distance: usize,
    pub total_chars: usize,
    pub total_word_distance: usize,
    pub total_words: usize,
    pub cer: f64,
    pub wer: f64,
}

impl EvalReport {
    pub fn excluded(&self) -> usize {
        self.lines.iter().filter(|l| l.error.is_some()).count()
    }

    pub fn summary(&self) -> String {
        format!(
            "lines\t{}\nexcluded\t{}\nchars\t{}\nchar_errors\t{}\nwords\t{}\nword_errors\t{}\ncer\t{:.6}\nwer\t{:.6}\n",
            self.lines.len(),
            self.excluded(),
            self.total_chars,
            self.total_char_distance,
            self.total_words,
            self.total_word_distance,
            self.cer,
            self.wer
        )
    }

    /// Per-line TSV with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("line\tchar_dist\tchar_len\tword_dist\tword_len\tstatus\treference\thypothesis\n");
        for (i, l) in self.lines.iter().enumerate() {
            let status = match &l.error {
                None => "ok".to_string(),
                Some(e) => format!("excluded: {e}"),
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                l.char_distance,
                l.char_len,
                l.word_distance,
                l.word_len,
                status,
                l.reference,
                l.hypothesis
            );
        }
        out
    }
}

/// Length-weighted corpus CER/WER. Lines with empty references are kept
/// in the report with an error and excluded from the totals.
pub fn evaluate_corpus<R: AsRef<str>, H: AsRef<str>>(
    pairs: &[(R, H)],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::NoLines);
    }
    let mut lines = Vec::with_capacity(pairs.len());
    let (mut cd, mut cn, mut wd, mut wn) = (0, 0, 0, 0);
    for (r, h) in pairs {
        let (r, h) = (r.as_ref(), h.as_ref());
        let (char_distance, char_len) = char_errors(r, h, cfg);
        let (word_distance, word_len) = word_errors(r, h, cfg);
        let error = (char_len == 0).then_some(EvalError::EmptyReference);
        if error.is_none() {
            cd += char_distance;
            cn += char_len;
            wd += word_distance;
            wn += word_len;
        }
        lines.push(LineScore {
            reference: r.to_owned(),
            hypothesis: h.to_owned(),
            char_distance,
            char_len,
            word_distance,
            word_len,
            error,
        });
    }
    if cn == 0 {
        return Err(EvalError::NoLines);
    }
    Ok(EvalReport {
        lines,
        total_char_distance: cd,
        total_chars: cn,
        total_word_distance: wd,
        total_words: wn,
        cer: cd as f64 / cn as f64,
        wer: if wn == 0 { 0.0 } else { wd as f64 / wn as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein_str("جمال", "جمال"), 0);
        assert_eq!(levenshtein_str("جمال", "جما ل"), 1);
        assert_eq!(levenshtein_str("", "abc"), 3);
        assert_eq!(levenshtein_str("kitten", "sitting"), 3);
    }

    #[test]
    fn cer_examples() {
        assert_eq!(cer("جمال", "جمال").unwrap(), 0.0);
        assert_eq!(cer("اب", "اج").unwrap(), 0.5);
        assert_eq!(cer("ابجد", "").unwrap(), 1.0);
        assert!(cer("ab", "abcdef").unwrap() > 1.0);
        assert_eq!(cer("", "x"), Err(EvalError::EmptyReference));
        assert_eq!(wer("a b c d", "a x c").unwrap(), 0.5);
    }

    #[test]
    fn diacritic_flag() {
        let cfg = EvalConfig {
            strip_diacritics: true,
            ..EvalConfig::default()
        };
        assert_eq!(cer_with("كَتَبَ", "كتب", &cfg).unwrap(), 0.0);
        assert!(cer("كَتَبَ", "كتب").unwrap() > 0.0);
    }

    #[test]
    fn whitespace_flag() {
        let cfg = EvalConfig {
            normalize_whitespace: true,
            ..EvalConfig::default()
        };
        assert_eq!(cer_with("ab  cd ", "ab cd", &cfg).unwrap(), 0.0);
    }

    #[test]
    fn corpus_is_length_weighted() {
        // per-line CERs 1.0 and 0.0 average to 0.5, but the corpus CER is 1/11
        let pairs = [("a", "b"), ("abcdefghij", "abcdefghij")];
        let rep = evaluate_corpus(&pairs, &EvalConfig::default()).unwrap();
        assert!((rep.cer - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_examples() {
        let same = [("ابت", "ابت"), ("ثج", "ثج")];
        let rep = evaluate_corpus(&same, &EvalConfig::default()).unwrap();
        assert_eq!((rep.cer, rep.wer), (0.0, 0.0));

        let pairs = [("aaaaaaaaaa", "aaaaaaaaab"), ("bbbbbbbbbb", "bbbbbbbccc")];
        let rep = evaluate_corpus(&pairs, &EvalConfig::default()).unwrap();
        assert!((rep.cer - 0.2).abs() < 1e-12);

        let single = [("اب", "اج")];
        let rep = evaluate_corpus(&single, &EvalConfig::default()).unwrap();
        assert_eq!(rep.cer, cer("اب", "اج").unwrap());
    }

    #[test]
    fn empty_reference_is_flagged_and_excluded() {
        let pairs = [("", "x"), ("ab", "ab")];
        let rep = evaluate_corpus(&pairs, &EvalConfig::default()).unwrap();
        assert_eq!(rep.excluded(), 1);
        assert_eq!(rep.total_chars, 2);
        assert_eq!(rep.cer, 0.0);
        assert!(rep.to_tsv().contains("excluded"));
    }
}
