//! Corpus loading, IPA tokenization and integer encoding of transcriptions.
//!
//! The corpus is a UTF-8 TSV file `word<TAB>ipa<TAB>frequency[<TAB>extra...]`.
//! Transcriptions are split into phoneme tokens, every distinct token gets a
//! dense integer ID in a [`PhonemeInventory`], and words become
//! [`EncodedWord`]s ready for alignment.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Combining double inverted breve, the IPA tie bar (as in `d͡ʒ`).
pub const TIE_BAR: char = '\u{0361}';
/// Combining double breve below, the alternative tie bar (as in `d͜ʒ`).
pub const TIE_BAR_BELOW: char = '\u{035C}';

fn is_tie_bar(c: char) -> bool {
    c == TIE_BAR || c == TIE_BAR_BELOW
}

/// Syllable and stress marks plus whitespace; dropped during tokenization.
pub fn is_separator(c: char) -> bool {
    matches!(c, '.' | 'ˈ' | 'ˌ') || c.is_whitespace()
}

/// Canonical composed form used for every transcription before matching.
pub fn normalize_ipa(ipa: &str) -> String {
    ipa.nfc().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRow {
    pub word: String,
    pub ipa: String,
    pub frequency: f64,
}

/// Parse corpus rows from a reader. See [`load_corpus`].
pub fn parse_corpus<R: Read>(reader: R, limit: Option<usize>) -> Result<Vec<CorpusRow>> {
    if limit == Some(0) {
        return Err(Error::invalid("limit must be positive"));
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected at least 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let word = fields[0].trim();
        let ipa = fields[1].trim();
        if word.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty word".into(),
            });
        }
        if ipa.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("empty transcription for {word:?}"),
            });
        }
        let frequency: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("unparsable frequency {:?}", fields[2]),
        })?;
        if !frequency.is_finite() || frequency < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("frequency must be a non-negative number, got {}", fields[2]),
            });
        }

        // Multiple transcriptions of one word: keep the first.
        if seen.insert(word.to_owned()) {
            rows.push(CorpusRow {
                word: word.to_owned(),
                ipa: ipa.to_owned(),
                frequency,
            });
        }
    }

    if rows.is_empty() {
        return Err(Error::data("corpus is empty"));
    }

    rows.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then_with(|| a.word.as_bytes().cmp(b.word.as_bytes()))
    });
    if let Some(limit) = limit {
        rows.truncate(limit);
    }
    Ok(rows)
}

/// Load a corpus TSV, deduplicate by word (first transcription wins), sort
/// by descending frequency with ties broken by orthography, and keep at most
/// `limit` rows.
pub fn load_corpus(path: impl AsRef<Path>, limit: Option<usize>) -> Result<Vec<CorpusRow>> {
    let path = path.as_ref();
    if limit == Some(0) {
        return Err(Error::invalid("limit must be positive"));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(file, limit)
}

/// Multi-symbol sequences that tokenize as a single phoneme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigraphSet {
    entries: HashSet<String>,
    max_units: usize,
}

impl DigraphSet {
    pub fn new<I, S>(digraphs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries = HashSet::new();
        let mut max_units = 0;
        for d in digraphs {
            let key: String = normalize_ipa(d.as_ref())
                .chars()
                .filter(|&c| !is_tie_bar(c) && !is_separator(c))
                .collect();
            let units = split_units(&key).len();
            if units >= 2 {
                max_units = max_units.max(units);
                entries.insert(key);
            }
        }
        DigraphSet { entries, max_units }
    }

    pub fn empty() -> Self {
        DigraphSet::new(std::iter::empty::<&str>())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for DigraphSet {
    /// The two affricates `dʒ` and `tʃ`.
    fn default() -> Self {
        DigraphSet::new(["dʒ", "tʃ"])
    }
}

/// A base character with its trailing combining marks.
#[derive(Debug)]
struct Unit {
    text: String,
    tied: bool,
}

impl Unit {
    fn key(&self) -> impl Iterator<Item = char> + '_ {
        self.text.chars().filter(|&c| !is_tie_bar(c))
    }
}

fn split_units(normalized: &str) -> Vec<Unit> {
    let mut units: Vec<Unit> = Vec::new();
    for c in normalized.chars().filter(|&c| !is_separator(c)) {
        match units.last_mut() {
            Some(unit) if is_combining_mark(c) => {
                unit.text.push(c);
                unit.tied |= is_tie_bar(c);
            }
            _ => units.push(Unit {
                text: c.to_string(),
                tied: is_tie_bar(c),
            }),
        }
    }
    units
}

/// Split an IPA transcription into phoneme tokens.
///
/// The input is NFC-normalized, separators are dropped, combining marks stay
/// with the preceding base symbol, and digraphs are matched greedily
/// (longest first, left to right). A tie bar is removed when its pair is
/// taken as a known digraph; otherwise the tied pair stays one token with
/// the tie bar kept.
pub fn tokenize_ipa(ipa: &str, digraphs: &DigraphSet) -> Result<Vec<String>> {
    let normalized = normalize_ipa(ipa);
    let units = split_units(&normalized);
    if units.is_empty() {
        return Err(Error::data(format!("no phonemes in {ipa:?}")));
    }

    let mut tokens = Vec::with_capacity(units.len());
    let mut i = 0;
    'outer: while i < units.len() {
        let longest = digraphs.max_units.min(units.len() - i);
        for span in (2..=longest).rev() {
            let candidate: String = units[i..i + span].iter().flat_map(Unit::key).collect();
            if digraphs.contains(&candidate) {
                tokens.push(candidate);
                i += span;
                continue 'outer;
            }
        }
        if units[i].tied && i + 1 < units.len() {
            tokens.push(format!("{}{}", units[i].text, units[i + 1].text));
            i += 2;
        } else {
            tokens.push(units[i].text.clone());
            i += 1;
        }
    }
    Ok(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhonemeId(pub u32);

impl fmt::Display for PhonemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Bijection between phoneme token strings and dense integer IDs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhonemeInventory {
    symbols: Vec<String>,
    id_of: HashMap<String, PhonemeId>,
}

impl PhonemeInventory {
    /// Build from `(token, id)` pairs. IDs must be dense `0..len` and tokens
    /// unique.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut pairs: Vec<(String, u32)> = pairs.into_iter().map(|(s, id)| (s.into(), id)).collect();
        pairs.sort_by_key(|&(_, id)| id);
        let mut inventory = PhonemeInventory::default();
        for (expected, (token, id)) in pairs.into_iter().enumerate() {
            if id as usize != expected {
                return Err(Error::data(format!(
                    "inventory IDs must be dense from 0: expected {expected}, found {id}"
                )));
            }
            if token.is_empty() {
                return Err(Error::data(format!("empty token for ID {id}")));
            }
            if inventory.id_of.contains_key(&token) {
                return Err(Error::data(format!("duplicate inventory token {token:?}")));
            }
            inventory.insert(token);
        }
        Ok(inventory)
    }

    fn insert(&mut self, token: String) -> PhonemeId {
        if let Some(&id) = self.id_of.get(&token) {
            return id;
        }
        let id = PhonemeId(self.symbols.len() as u32);
        self.symbols.push(token.clone());
        self.id_of.insert(token, id);
        id
    }

    pub fn id_of(&self, token: &str) -> Option<PhonemeId> {
        self.id_of.get(token).copied()
    }

    pub fn symbol(&self, id: PhonemeId) -> Option<&str> {
        self.symbols.get(id.0 as usize).map(String::as_str)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Sidecar format: one `token<TAB>id` line per symbol, sorted by ID.
    pub fn write_to<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for (id, token) in self.symbols.iter().enumerate() {
            writeln!(writer, "{token}\t{id}")?;
        }
        writer.flush()
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.is_empty() {
                continue;
            }
            let (token, id) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected token<TAB>id".into(),
            })?;
            let id: u32 = id.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("invalid phoneme ID {id:?}"),
            })?;
            pairs.push((token.to_owned(), id));
        }
        PhonemeInventory::from_pairs(pairs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        PhonemeInventory::read_from(file)
    }
}

/// Assign IDs to every token in order of first occurrence across `rows`.
pub fn build_inventory(rows: &[CorpusRow], digraphs: &DigraphSet) -> Result<PhonemeInventory> {
    if rows.is_empty() {
        return Err(Error::data("cannot build an inventory from an empty corpus"));
    }
    let mut inventory = PhonemeInventory::default();
    for row in rows {
        let tokens = tokenize_ipa(&row.ipa, digraphs).map_err(|e| Error::Word {
            word: row.word.clone(),
            message: e.to_string(),
        })?;
        for token in tokens {
            inventory.insert(token);
        }
    }
    Ok(inventory)
}

/// A word with its phoneme ID sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedWord {
    pub word: String,
    pub ipa: String,
    pub phonemes: Vec<PhonemeId>,
    pub frequency: f64,
}

impl EncodedWord {
    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }
}

pub fn encode_word(
    row: &CorpusRow,
    inventory: &PhonemeInventory,
    digraphs: &DigraphSet,
) -> Result<EncodedWord> {
    let tokens = tokenize_ipa(&row.ipa, digraphs).map_err(|e| Error::Word {
        word: row.word.clone(),
        message: e.to_string(),
    })?;
    let phonemes = tokens
        .iter()
        .map(|t| {
            inventory.id_of(t).ok_or_else(|| Error::Word {
                word: row.word.clone(),
                message: format!("token {t:?} is not in the phoneme inventory"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedWord {
        word: row.word.clone(),
        ipa: row.ipa.clone(),
        phonemes,
        frequency: row.frequency,
    })
}

pub fn encode_corpus(
    rows: &[CorpusRow],
    inventory: &PhonemeInventory,
    digraphs: &DigraphSet,
) -> Result<Vec<EncodedWord>> {
    rows.iter().map(|r| encode_word(r, inventory, digraphs)).collect()
}

/// Write the encoded word list: `word, ipa, length, frequency, ids` per line,
/// IDs comma-separated.
pub fn write_words<W: Write>(words: &[EncodedWord], mut writer: W) -> std::io::Result<()> {
    for w in words {
        let ids: Vec<String> = w.phonemes.iter().map(|p| p.0.to_string()).collect();
        writeln!(
            writer,
            "{}\t{}\t{}\t{}\t{}",
            w.word,
            w.ipa,
            w.phonemes.len(),
            w.frequency,
            ids.join(",")
        )?;
    }
    writer.flush()
}

pub fn read_words<R: Read>(reader: R) -> Result<Vec<EncodedWord>> {
    let mut words = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
        }
        let length: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("invalid length {:?}", fields[2])))?;
        let frequency: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(format!("invalid frequency {:?}", fields[3])))?;
        let phonemes = fields[4]
            .split(',')
            .map(|s| s.parse().map(PhonemeId))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err(format!("invalid phoneme list {:?}", fields[4])))?;
        if phonemes.is_empty() || phonemes.len() != length {
            return Err(parse_err(format!(
                "length column says {length} but {} phonemes listed",
                phonemes.len()
            )));
        }
        words.push(EncodedWord {
            word: fields[0].to_owned(),
            ipa: fields[1].to_owned(),
            phonemes,
            frequency,
        });
    }
    if words.is_empty() {
        return Err(Error::data("word list is empty"));
    }
    Ok(words)
}

pub fn save_words(words: &[EncodedWord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_words(words, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_words(path: impl AsRef<Path>) -> Result<Vec<EncodedWord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_words(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(ipa: &str) -> Vec<String> {
        tokenize_ipa(ipa, &DigraphSet::default()).unwrap()
    }

    #[test]
    fn tokenizes_nasal_vowels_as_one_token() {
        assert_eq!(toks("pɥisɑ̃s"), ["p", "ɥ", "i", "s", "ɑ̃", "s"]);
        assert_eq!(toks("nɥɑ̃s"), ["n", "ɥ", "ɑ̃", "s"]);
    }

    #[test]
    fn strips_syllable_separators() {
        assert_eq!(toks("ʁɑ̃.sɛɲ.mɑ̃"), ["ʁ", "ɑ̃", "s", "ɛ", "ɲ", "m", "ɑ̃"]);
        assert_eq!(toks("ˈa ˌb"), ["a", "b"]);
    }

    #[test]
    fn digraphs_are_single_tokens() {
        assert_eq!(toks("dʒin"), ["dʒ", "i", "n"]);
        assert_eq!(toks("d͡ʒin"), ["dʒ", "i", "n"]);
        assert_eq!(toks("tʃa"), ["tʃ", "a"]);
        let none = DigraphSet::empty();
        assert_eq!(tokenize_ipa("dʒin", &none).unwrap(), ["d", "ʒ", "i", "n"]);
    }

    #[test]
    fn unknown_tied_pair_stays_joined() {
        assert_eq!(toks("k͡pa"), ["k\u{361}p", "a"]);
    }

    #[test]
    fn longest_digraph_wins() {
        let set = DigraphSet::new(["ts", "tsʰ"]);
        // "ʰ" is a modifier letter, not a combining mark, so it is its own unit.
        assert_eq!(tokenize_ipa("tsʰa", &set).unwrap(), ["tsʰ", "a"]);
        assert_eq!(tokenize_ipa("tsa", &set).unwrap(), ["ts", "a"]);
    }

    #[test]
    fn decomposed_and_composed_inputs_agree() {
        assert_eq!(toks("e\u{301}"), toks("\u{e9}"));
    }

    #[test]
    fn separators_only_is_an_error() {
        assert!(tokenize_ipa(". ˈ", &DigraphSet::default()).is_err());
    }

    #[test]
    fn load_sorts_by_frequency_then_word() {
        let data = "a\tipaA\t2.0\nb\tipaB\t5.0\nc\tipaC\t2.0\n";
        let rows = parse_corpus(data.as_bytes(), Some(2)).unwrap();
        let got: Vec<(&str, f64)> = rows.iter().map(|r| (r.word.as_str(), r.frequency)).collect();
        assert_eq!(got, [("b", 5.0), ("a", 2.0)]);
    }

    #[test]
    fn load_keeps_first_transcription() {
        let mut data = String::new();
        for i in 0..10 {
            let line = match i {
                2 => "porte\tpɔʁt\t1\n".to_string(),
                8 => "porte\tpɔʁtə\t1\n".to_string(),
                _ => format!("w{i}\ta\t1\n"),
            };
            data.push_str(&line);
        }
        let rows = parse_corpus(data.as_bytes(), None).unwrap();
        let porte: Vec<_> = rows.iter().filter(|r| r.word == "porte").collect();
        assert_eq!(porte.len(), 1);
        assert_eq!(porte[0].ipa, "pɔʁt");
    }

    #[test]
    fn load_rejects_bad_input() {
        let err = parse_corpus("a\tb\t1\nbad line\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_corpus("a\tb\tx\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(parse_corpus("".as_bytes(), None).is_err());
        assert!(parse_corpus("\n\n".as_bytes(), None).is_err());
        let err = parse_corpus("a\tb\t1\n".as_bytes(), Some(0)).unwrap_err();
        assert_eq!(err.to_string(), "limit must be positive");
    }

    #[test]
    fn extra_columns_are_ignored() {
        let rows = parse_corpus("a\tb\t1\tNOM\textra\n".as_bytes(), None).unwrap();
        assert_eq!(rows[0].ipa, "b");
    }

    #[test]
    fn inventory_assigns_ids_by_first_occurrence() {
        let rows = vec![CorpusRow {
            word: "puissance".into(),
            ipa: "pɥisɑ̃s".into(),
            frequency: 1.0,
        }];
        let inv = build_inventory(&rows, &DigraphSet::default()).unwrap();
        assert_eq!(inv.symbols(), ["p", "ɥ", "i", "s", "ɑ̃"]);
        assert_eq!(inv.id_of("ɑ̃"), Some(PhonemeId(4)));
        assert!(build_inventory(&[], &DigraphSet::default()).is_err());
    }

    #[test]
    fn inventory_sidecar_roundtrip() {
        let rows = vec![CorpusRow {
            word: "x".into(),
            ipa: "dʒɑ̃tʃo".into(),
            frequency: 0.0,
        }];
        let inv = build_inventory(&rows, &DigraphSet::default()).unwrap();
        let mut buf = Vec::new();
        inv.write_to(&mut buf).unwrap();
        assert_eq!(PhonemeInventory::read_from(buf.as_slice()).unwrap(), inv);
    }

    #[test]
    fn inventory_rejects_sparse_or_duplicate_ids() {
        assert!(PhonemeInventory::from_pairs([("a", 0), ("b", 2)]).is_err());
        assert!(PhonemeInventory::from_pairs([("a", 0), ("a", 1)]).is_err());
    }

    #[test]
    fn encode_reports_unknown_tokens() {
        let inv = PhonemeInventory::from_pairs([("a", 0)]).unwrap();
        let row = CorpusRow {
            word: "ab".into(),
            ipa: "ab".into(),
            frequency: 1.0,
        };
        let err = encode_word(&row, &inv, &DigraphSet::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"b\"") && msg.contains("\"ab\""), "{msg}");
    }

    #[test]
    fn words_file_roundtrip() {
        let words = vec![EncodedWord {
            word: "nuance".into(),
            ipa: "nɥɑ̃s".into(),
            phonemes: vec![PhonemeId(29), PhonemeId(18), PhonemeId(26), PhonemeId(11)],
            frequency: 12.25,
        }];
        let mut buf = Vec::new();
        write_words(&words, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "nuance\tnɥɑ̃s\t4\t12.25\t29,18,26,11\n"
        );
        assert_eq!(read_words(buf.as_slice()).unwrap(), words);
    }
}
