use std::collections::HashMap;
use std::fmt::Write as _;

use super::DecodeError;
use crate::lexicon::is_diacritic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    /// Arabic letters and diacritics; subject to the lexicon constraint.
    Word,
    /// Space, digits, punctuation.
    NonWord,
    Eos,
}

/// Ordered output symbols of the recognizer. Symbol index = column of the
/// emission matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    classes: Vec<SymbolClass>,
    eos: usize,
    index: HashMap<char, usize>,
}

pub const DEFAULT_EOS: char = '\u{2403}';

impl Alphabet {
    pub fn new(entries: Vec<(char, SymbolClass)>) -> Result<Self, DecodeError> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut eos = None;
        for (i, &(c, class)) in entries.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(DecodeError::Alphabet(format!("duplicate symbol {c:?}")));
            }
            if class == SymbolClass::Eos {
                if eos.is_some() {
                    return Err(DecodeError::Alphabet("more than one end-of-sequence symbol".into()));
                }
                eos = Some(i);
            }
        }
        let eos = eos.ok_or_else(|| DecodeError::Alphabet("no end-of-sequence symbol".into()))?;
        let (symbols, classes) = entries.into_iter().unzip();
        Ok(Self {
            symbols,
            classes,
            eos,
            index,
        })
    }

    /// Arabic letters, diacritics, space, Arabic-Indic and ASCII digits,
    /// common punctuation, then EOS.
    pub fn arabic() -> Self {
        let mut entries: Vec<(char, SymbolClass)> = ('\u{0621}'..='\u{063A}')
            .chain('\u{0641}'..='\u{064A}')
            .chain('\u{064B}'..='\u{0652}')
            .map(|c| (c, SymbolClass::Word))
            .collect();
        entries.extend(
            [' ', '.', '،', '؟', ':']
                .into_iter()
                .chain('\u{0660}'..='\u{0669}')
                .chain('0'..='9')
                .map(|c| (c, SymbolClass::NonWord)),
        );
        entries.push((DEFAULT_EOS, SymbolClass::Eos));
        Self::new(entries).expect("built-in alphabet is well formed")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn eos(&self) -> usize {
        self.eos
    }

    pub fn symbol(&self, i: usize) -> char {
        self.symbols[i]
    }

    pub fn class(&self, i: usize) -> SymbolClass {
        self.classes[i]
    }

    pub fn is_diacritic(&self, i: usize) -> bool {
        self.classes[i] == SymbolClass::Word && is_diacritic(self.symbols[i])
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// Maps symbol indices to text, dropping EOS.
    pub fn render(&self, symbols: &[usize]) -> String {
        symbols
            .iter()
            .filter(|&&s| s != self.eos)
            .map(|&s| self.symbols[s])
            .collect()
    }

    /// Symbol indices for `text` (without EOS).
    pub fn encode(&self, text: &str) -> Result<Vec<usize>, DecodeError> {
        text.chars()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| DecodeError::Alphabet(format!("symbol {c:?} not in alphabet")))
            })
            .collect()
    }

    /// One symbol per line; `#eos` / `#nonword` directive lines classify
    /// the symbol on the following line. Unmarked symbols are word
    /// characters. Directive lines do not consume a symbol index.
    pub fn parse(text: &str) -> Result<Self, DecodeError> {
        let mut entries = Vec::new();
        let mut pending: Option<SymbolClass> = None;
        for (n, line) in text.split('\n').enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            match line {
                "#eos" | "#nonword" if pending.is_some() => {
                    return Err(DecodeError::Alphabet(format!("line {}: directive follows directive", n + 1)));
                }
                "#eos" => pending = Some(SymbolClass::Eos),
                "#nonword" => pending = Some(SymbolClass::NonWord),
                "" => {
                    // tolerate the trailing newline only
                    if n + 1 != text.split('\n').count() {
                        return Err(DecodeError::Alphabet(format!("line {}: empty line", n + 1)));
                    }
                }
                _ => {
                    let mut chars = line.chars();
                    let c = chars.next().expect("non-empty line");
                    if chars.next().is_some() {
                        return Err(DecodeError::Alphabet(format!(
                            "line {}: expected a single symbol, found {line:?}",
                            n + 1
                        )));
                    }
                    entries.push((c, pending.take().unwrap_or(SymbolClass::Word)));
                }
            }
        }
        if pending.is_some() {
            return Err(DecodeError::Alphabet("dangling directive at end of file".into()));
        }
        Self::new(entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, class) in self.symbols.iter().zip(&self.classes) {
            match class {
                SymbolClass::Word => {}
                SymbolClass::NonWord => out.push_str("#nonword\n"),
                SymbolClass::Eos => out.push_str("#eos\n"),
            }
            let _ = writeln!(out, "{c}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_directives() {
        let a = Alphabet::parse("ا\nب\n#nonword\n \n#eos\n$\n").unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.class(0), SymbolClass::Word);
        assert_eq!(a.class(2), SymbolClass::NonWord);
        assert_eq!(a.symbol(2), ' ');
        assert_eq!(a.eos(), 3);
        assert_eq!(Alphabet::parse(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(Alphabet::parse("ا\nب\n").is_err(), "missing eos");
        assert!(Alphabet::parse("#eos\n$\n#eos\n%\n").is_err(), "two eos");
        assert!(Alphabet::parse("ا\nا\n#eos\n$\n").is_err(), "duplicate");
        assert!(Alphabet::parse("اب\n#eos\n$\n").is_err(), "multi-char line");
        assert!(Alphabet::parse("ا\n#eos\n").is_err(), "dangling directive");
        assert!(Alphabet::parse("ا\n\n#eos\n$\n").is_err(), "blank line");
    }

    #[test]
    fn builtin_alphabet_roundtrip() {
        let a = Alphabet::arabic();
        assert_eq!(a.class(a.eos()), SymbolClass::Eos);
        assert_eq!(Alphabet::parse(&a.to_text()).unwrap(), a);
        let enc = a.encode("جمال ٣").unwrap();
        assert_eq!(a.render(&enc), "جمال ٣");
        assert!(a.is_diacritic(a.index_of('\u{064E}').unwrap()));
        assert!(a.encode("abc").is_err());
    }
}
