//! Word lexicon built from a corpus, its prefix tree, and bounded
//! edit-distance candidate generation over the tree.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("corpus is not valid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("cannot build a prefix tree from an empty lexicon")]
    Empty,
    #[error("unknown prefix-tree node {0}")]
    UnknownNode(u32),
    #[error("lexicon line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub const DIACRITICS: std::ops::RangeInclusive<char> = '\u{064B}'..='\u{0652}';
pub const LETTERS: std::ops::RangeInclusive<char> = '\u{0621}'..='\u{064A}';

pub fn is_diacritic(c: char) -> bool {
    DIACRITICS.contains(&c)
}

/// Arabic letter or diacritic mark.
pub fn is_word_char(c: char) -> bool {
    LETTERS.contains(&c) || is_diacritic(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizeConfig {
    pub strip_diacritics: bool,
    /// Map أ / إ / آ to bare alef.
    pub unify_alef_forms: bool,
    pub lowercase_latin: bool,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            strip_diacritics: true,
            unify_alef_forms: false,
            lowercase_latin: false,
        }
    }
}

/// Per-scalar normalization after NFC; `None` means the scalar is dropped.
pub fn normalize_char(c: char, cfg: &NormalizeConfig) -> Option<char> {
    if cfg.strip_diacritics && is_diacritic(c) {
        return None;
    }
    if cfg.unify_alef_forms && matches!(c, 'أ' | 'إ' | 'آ') {
        return Some('ا');
    }
    if cfg.lowercase_latin && c.is_ascii_uppercase() {
        return Some(c.to_ascii_lowercase());
    }
    Some(c)
}

pub fn normalize_token(raw: &str, cfg: &NormalizeConfig) -> String {
    raw.nfc().filter_map(|c| normalize_char(c, cfg)).collect()
}

/// Maximal runs of word characters.
pub fn word_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !is_word_char(c)).filter(|t| !t.is_empty())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, word: &str, count: u64) {
        if word.is_empty() || count == 0 {
            return;
        }
        *self.entries.entry(word.to_owned()).or_insert(0) += count;
        self.total_tokens += count;
    }

    pub fn add_text(&mut self, text: &str, cfg: &NormalizeConfig) {
        for tok in word_tokens(text) {
            let norm = normalize_token(tok, cfg);
            self.add(&norm, 1);
        }
    }

    pub fn add_corpus(&mut self, corpus: &[u8], cfg: &NormalizeConfig) -> Result<(), LexiconError> {
        let text = std::str::from_utf8(corpus).map_err(|e| LexiconError::InvalidUtf8 {
            offset: e.valid_up_to(),
        })?;
        self.add_text(text, cfg);
        Ok(())
    }

    pub fn count(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Entries in word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// `count<TAB>word` per line, sorted by word.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.iter() {
            let _ = writeln!(out, "{c}\t{w}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| LexiconError::Parse {
                line: i + 1,
                msg: msg.to_owned(),
            };
            let (count, word) = line.split_once('\t').ok_or_else(|| err("missing tab"))?;
            let count: u64 = count.parse().map_err(|_| err("bad count"))?;
            if count == 0 || word.is_empty() {
                return Err(err("entries need a word and a positive count"));
            }
            lex.add(word, count);
        }
        Ok(lex)
    }
}

/// Tokenizes and counts a UTF-8 corpus.
pub fn build_lexicon(corpus: &[u8], cfg: &NormalizeConfig) -> Result<Lexicon, LexiconError> {
    let mut lex = Lexicon::new();
    lex.add_corpus(corpus, cfg)?;
    Ok(lex)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    /// Sorted by key.
    children: Vec<(char, NodeId)>,
    count: u64,
}

/// Arena-backed character trie over the lexicon's words.
#[derive(Clone, Debug)]
pub struct PrefixTree {
    nodes: Vec<TrieNode>,
}

impl PrefixTree {
    pub const ROOT: NodeId = NodeId(0);

    pub fn root(&self) -> NodeId {
        Self::ROOT
    }

    fn node(&self, id: NodeId) -> Result<&TrieNode, LexiconError> {
        self.nodes.get(id.index()).ok_or(LexiconError::UnknownNode(id.0))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn descend(&self, node: NodeId, ch: char) -> Result<Option<NodeId>, LexiconError> {
        let n = self.node(node)?;
        Ok(n
            .children
            .binary_search_by_key(&ch, |&(c, _)| c)
            .ok()
            .map(|i| n.children[i].1))
    }

    pub fn next_chars(&self, node: NodeId) -> Result<Vec<char>, LexiconError> {
        Ok(self.node(node)?.children.iter().map(|&(c, _)| c).collect())
    }

    pub fn is_word(&self, node: NodeId) -> Result<bool, LexiconError> {
        Ok(self.node(node)?.count > 0)
    }

    pub fn word_count(&self, node: NodeId) -> Result<u64, LexiconError> {
        Ok(self.node(node)?.count)
    }

    /// Follows `word` from the root.
    pub fn lookup(&self, word: &str) -> Option<NodeId> {
        let mut cur = Self::ROOT;
        for c in word.chars() {
            cur = self.descend(cur, c).ok()??;
        }
        Some(cur)
    }

    /// All words with counts, in lexicographic order.
    pub fn enumerate(&self) -> Vec<(String, u64)> {
        let mut out = Vec::new();
        let mut prefix = String::new();
        self.walk(Self::ROOT, &mut prefix, &mut out);
        out
    }

    fn walk(&self, id: NodeId, prefix: &mut String, out: &mut Vec<(String, u64)>) {
        let node = &self.nodes[id.index()];
        if node.count > 0 {
            out.push((prefix.clone(), node.count));
        }
        for &(c, child) in &node.children {
            prefix.push(c);
            self.walk(child, prefix, out);
            prefix.pop();
        }
    }
}

pub fn build_prefix_tree(lex: &Lexicon) -> Result<PrefixTree, LexiconError> {
    if lex.is_empty() {
        return Err(LexiconError::Empty);
    }
    let mut nodes = vec![TrieNode::default()];
    for (word, count) in lex.iter() {
        let mut cur = 0usize;
        for c in word.chars() {
            let next = match nodes[cur].children.binary_search_by_key(&c, |&(k, _)| k) {
                Ok(i) => nodes[cur].children[i].1.index(),
                Err(i) => {
                    let id = nodes.len();
                    nodes.push(TrieNode::default());
                    nodes[cur].children.insert(i, (c, NodeId(id as u32)));
                    id
                }
            };
            cur = next;
        }
        nodes[cur].count = count;
    }
    Ok(PrefixTree { nodes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub word: String,
    pub distance: usize,
    pub count: u64,
}

/// Lexicon words within Levenshtein distance `k` of `word`, found by
/// carrying one DP row per trie node and pruning rows whose minimum
/// exceeds `k`. Sorted by distance, then descending count, then word.
pub fn candidates_within_distance(tree: &PrefixTree, word: &str, k: usize) -> Vec<Candidate> {
    let query: Vec<char> = word.chars().collect();
    let first_row: Vec<usize> = (0..=query.len()).collect();
    let mut out = Vec::new();
    let mut prefix = String::new();

    let root = &tree.nodes[0];
    if root.count > 0 && query.len() <= k {
        out.push(Candidate {
            word: String::new(),
            distance: query.len(),
            count: root.count,
        });
    }
    for &(c, child) in &root.children {
        prefix.push(c);
        search(tree, child, c, &query, &first_row, k, &mut prefix, &mut out);
        prefix.pop();
    }
    out.sort_by(|a, b| {
        a.distance
            .cmp(&b.distance)
            .then(b.count.cmp(&a.count))
            .then_with(|| a.word.cmp(&b.word))
    });
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    tree: &PrefixTree,
    id: NodeId,
    ch: char,
    query: &[char],
    prev: &[usize],
    k: usize,
    prefix: &mut String,
    out: &mut Vec<Candidate>,
) {
    let mut row = Vec::with_capacity(prev.len());
    row.push(prev[0] + 1);
    for j in 1..prev.len() {
        let sub = prev[j - 1] + usize::from(query[j - 1] != ch);
        row.push(sub.min(prev[j] + 1).min(row[j - 1] + 1));
    }
    let node = &tree.nodes[id.index()];
    let dist = row[query.len()];
    if node.count > 0 && dist <= k {
        out.push(Candidate {
            word: prefix.clone(),
            distance: dist,
            count: node.count,
        });
    }
    if row.iter().copied().min().unwrap_or(usize::MAX) > k {
        return;
    }
    for &(c, child) in &node.children {
        prefix.push(c);
        search(tree, child, c, query, &row, k, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex_of(words: &[(&str, u64)]) -> Lexicon {
        let mut l = Lexicon::new();
        for &(w, c) in words {
            l.add(w, c);
        }
        l
    }

    #[test]
    fn normalize_examples() {
        let cfg = NormalizeConfig::default();
        assert_eq!(normalize_token("جمال", &cfg), "جمال");
        let alef = NormalizeConfig {
            unify_alef_forms: true,
            ..cfg
        };
        assert_eq!(normalize_token("أحمد", &alef), "احمد");
        assert_eq!(normalize_token("كَتَبَ", &cfg), "كتب");
        let keep = NormalizeConfig {
            strip_diacritics: false,
            ..cfg
        };
        assert_eq!(normalize_token("كَتَبَ", &keep), "كَتَبَ");
    }

    #[test]
    fn build_lexicon_examples() {
        let cfg = NormalizeConfig::default();
        let empty = build_lexicon(b"", &cfg).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.total_tokens(), 0);

        let lex = build_lexicon("جمال جمال ليل".as_bytes(), &cfg).unwrap();
        assert_eq!(lex.count("جمال"), 2);
        assert_eq!(lex.count("ليل"), 1);
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.total_tokens(), 3);

        let split = build_lexicon("جما ل".as_bytes(), &cfg).unwrap();
        assert_eq!(split.count("جما"), 1);
        assert_eq!(split.count("ل"), 1);
        assert_eq!(split.total_tokens(), 2);
    }

    #[test]
    fn digits_and_punctuation_never_enter() {
        let lex = build_lexicon("كتب، ١٢٣ 42 (قلم).".as_bytes(), &NormalizeConfig::default()).unwrap();
        let words: Vec<_> = lex.iter().map(|(w, _)| w.to_owned()).collect();
        assert_eq!(words, vec!["قلم".to_string(), "كتب".to_string()]);
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let mut bytes = "جمال ".as_bytes().to_vec();
        let offset = bytes.len();
        bytes.push(0xff);
        match build_lexicon(&bytes, &NormalizeConfig::default()) {
            Err(LexiconError::InvalidUtf8 { offset: o }) => assert_eq!(o, offset),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tsv_roundtrip_and_errors() {
        let lex = lex_of(&[("ليل", 3), ("جمال", 2)]);
        let tsv = lex.to_tsv();
        assert_eq!(tsv, "2\tجمال\n3\tليل\n");
        assert_eq!(Lexicon::from_tsv(&tsv).unwrap(), lex);
        assert!(Lexicon::from_tsv("x\tجمال\n").is_err());
        assert!(Lexicon::from_tsv("3 جمال\n").is_err());
    }

    #[test]
    fn single_letter_tree() {
        let tree = build_prefix_tree(&lex_of(&[("ل", 1)])).unwrap();
        let l = tree.descend(tree.root(), 'ل').unwrap().unwrap();
        assert!(tree.is_word(l).unwrap());
        assert!(tree.next_chars(l).unwrap().is_empty());
    }

    #[test]
    fn figure_tree_children() {
        let lex = lex_of(&[("لا", 1), ("لاعب", 1), ("لحم", 1), ("لحن", 1)]);
        let tree = build_prefix_tree(&lex).unwrap();
        let l = tree.descend(tree.root(), 'ل').unwrap().unwrap();
        assert_eq!(tree.next_chars(l).unwrap(), vec!['ا', 'ح']);
        assert_eq!(tree.descend(l, 'م').unwrap(), None);
        assert_eq!(tree.descend(tree.root(), 'ب').unwrap(), None);
    }

    #[test]
    fn root_children_hand_built() {
        let tree = build_prefix_tree(&lex_of(&[("اب", 1), ("ات", 1), ("ليل", 1)])).unwrap();
        assert_eq!(tree.next_chars(tree.root()).unwrap(), vec!['ا', 'ل']);
    }

    #[test]
    fn empty_and_unknown_node_errors() {
        assert!(matches!(build_prefix_tree(&Lexicon::new()), Err(LexiconError::Empty)));
        let tree = build_prefix_tree(&lex_of(&[("ل", 1)])).unwrap();
        assert!(tree.descend(NodeId(99), 'ل').is_err());
        assert!(tree.next_chars(NodeId(99)).is_err());
    }

    #[test]
    fn candidates_exact_and_vacuous() {
        let lex = lex_of(&[("جمال", 5), ("جميل", 2), ("ليل", 7)]);
        let tree = build_prefix_tree(&lex).unwrap();
        assert_eq!(
            candidates_within_distance(&tree, "جمال", 0),
            vec![Candidate { word: "جمال".into(), distance: 0, count: 5 }]
        );
        let all = candidates_within_distance(&tree, "جمال", 4);
        assert_eq!(all.len(), 3);
        let order: Vec<_> = all.iter().map(|c| (c.word.as_str(), c.distance)).collect();
        assert_eq!(order, vec![("جمال", 0), ("جميل", 1), ("ليل", 3)]);
    }

    #[test]
    fn candidates_tie_break_by_count_then_word() {
        let lex = lex_of(&[("با", 1), ("تا", 3), ("ثا", 1)]);
        let tree = build_prefix_tree(&lex).unwrap();
        let got: Vec<_> = candidates_within_distance(&tree, "نا", 1)
            .into_iter()
            .map(|c| c.word)
            .collect();
        assert_eq!(got, vec!["تا", "با", "ثا"]);
    }
}
