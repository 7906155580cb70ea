//! Needleman–Wunsch global alignment over phoneme ID sequences.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::{PhonemeId, PhonemeInventory};
use crate::error::{Error, Result};

/// Symbol similarity plus a linear gap penalty.
///
/// Similarity is `match_score` on identical phonemes and `mismatch_score`
/// otherwise, unless a per-pair override is set. Overrides are stored under
/// the ordered pair so the scheme is symmetric by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringScheme {
    match_score: i32,
    mismatch_score: i32,
    gap: i32,
    overrides: BTreeMap<(PhonemeId, PhonemeId), i32>,
}

impl Default for ScoringScheme {
    fn default() -> Self {
        ScoringScheme::uniform(1, -1, -1)
    }
}

fn ordered(a: PhonemeId, b: PhonemeId) -> (PhonemeId, PhonemeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ScoringScheme {
    pub fn uniform(match_score: i32, mismatch_score: i32, gap: i32) -> Self {
        ScoringScheme {
            match_score,
            mismatch_score,
            gap,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, a: PhonemeId, b: PhonemeId, score: i32) -> Self {
        self.overrides.insert(ordered(a, b), score);
        self
    }

    pub fn match_score(&self) -> i32 {
        self.match_score
    }

    pub fn mismatch_score(&self) -> i32 {
        self.mismatch_score
    }

    pub fn gap(&self) -> i32 {
        self.gap
    }

    pub fn has_overrides(&self) -> bool {
        !self.overrides.is_empty()
    }

    #[inline]
    pub fn similarity(&self, a: PhonemeId, b: PhonemeId) -> i32 {
        if !self.overrides.is_empty() {
            if let Some(&s) = self.overrides.get(&ordered(a, b)) {
                return s;
            }
        }
        if a == b {
            self.match_score
        } else {
            self.mismatch_score
        }
    }

    /// Largest similarity any symbol pair can produce.
    pub fn max_similarity(&self) -> i32 {
        self.overrides
            .values()
            .copied()
            .fold(self.match_score.max(self.mismatch_score), i32::max)
    }

    /// Smallest similarity any symbol pair can produce.
    pub fn min_similarity(&self) -> i32 {
        self.overrides
            .values()
            .copied()
            .fold(self.match_score.min(self.mismatch_score), i32::min)
    }

    /// Inclusive range every optimal score of two sequences no longer than
    /// `max_len` must fall in.
    pub fn score_bounds(&self, max_len: usize) -> (i64, i64) {
        let q = max_len as i64;
        let gap = self.gap as i64;
        let best_pair = self.max_similarity() as i64;
        // An all-gap alignment always exists, so the optimum is at least its score.
        let lower = if gap <= 0 { 2 * q * gap } else { 0 };
        let upper = if gap <= 0 {
            q * best_pair.max(0)
        } else {
            2 * q * best_pair.max(gap)
        };
        (lower, upper)
    }

    /// Canonical text form; stable across runs and used for the scheme hash.
    pub fn describe(&self, inventory: Option<&PhonemeInventory>) -> String {
        let mut out = format!(
            "match\t{}\nmismatch\t{}\ngap\t{}\n",
            self.match_score, self.mismatch_score, self.gap
        );
        for (&(a, b), score) in &self.overrides {
            let name = |id: PhonemeId| {
                inventory
                    .and_then(|inv| inv.symbol(id))
                    .map(str::to_owned)
                    .unwrap_or_else(|| format!("#{id}"))
            };
            let _ = writeln!(out, "{}\t{}\t{}", name(a), name(b), score);
        }
        out
    }

    /// Parse a scheme file.
    ///
    /// Lines are `match N`, `mismatch N`, `gap N` (tab or space separated)
    /// and optional overrides `tokenA<TAB>tokenB<TAB>value`. Blank lines and
    /// `#` comments are skipped.
    pub fn parse(text: &str, inventory: &PhonemeInventory) -> Result<Self> {
        let mut match_score = None;
        let mut mismatch_score = None;
        let mut gap = None;
        let mut overrides = BTreeMap::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = if line.contains('\t') {
                line.split('\t').map(str::trim).collect()
            } else {
                line.split_whitespace().collect()
            };
            let int = |s: &str| {
                s.parse::<i32>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid integer {s:?}"),
                })
            };
            match fields.as_slice() {
                ["match", v] => match_score = Some(int(v)?),
                ["mismatch", v] => mismatch_score = Some(int(v)?),
                ["gap", v] => gap = Some(int(v)?),
                [a, b, v] => {
                    let lookup = |t: &str| {
                        inventory.id_of(t).ok_or_else(|| Error::Parse {
                            line: line_no,
                            message: format!("unknown phoneme {t:?}"),
                        })
                    };
                    let key = ordered(lookup(a)?, lookup(b)?);
                    let value = int(v)?;
                    if let Some(prev) = overrides.insert(key, value) {
                        if prev != value {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!("conflicting scores for pair {a} {b}"),
                            });
                        }
                    }
                }
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unrecognized scheme line {raw:?}"),
                    })
                }
            }
        }

        let missing = |name: &str| Error::data(format!("scheme file does not declare {name}"));
        Ok(ScoringScheme {
            match_score: match_score.ok_or_else(|| missing("match"))?,
            mismatch_score: mismatch_score.ok_or_else(|| missing("mismatch"))?,
            gap: gap.ok_or_else(|| missing("gap"))?,
            overrides,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Phoneme(PhonemeId),
    Gap,
}

impl Slot {
    pub fn phoneme(self) -> Option<PhonemeId> {
        match self {
            Slot::Phoneme(p) => Some(p),
            Slot::Gap => None,
        }
    }
}

/// One optimal global alignment and its score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<(Slot, Slot)>,
    pub score: i32,
}

impl Alignment {
    /// Recompute the score from the pairs.
    pub fn pair_score(&self, scheme: &ScoringScheme) -> Option<i32> {
        self.pairs.iter().try_fold(0i32, |acc, pair| match *pair {
            (Slot::Phoneme(a), Slot::Phoneme(b)) => Some(acc + scheme.similarity(a, b)),
            (Slot::Gap, Slot::Gap) => None,
            _ => Some(acc + scheme.gap()),
        })
    }
}

/// Optimal global alignment score of `a` and `b`.
///
/// Equivalent to the bottom-right cell of the full score matrix; only one
/// row is kept since each row reads only its predecessor.
pub fn nw_score(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> i32 {
    let mut row = Vec::with_capacity(b.len() + 1);
    score_with_row(a, b, scheme, &mut row)
}

fn score_with_row(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme, row: &mut Vec<i32>) -> i32 {
    let gap = scheme.gap();
    row.clear();
    row.extend((0..=b.len() as i32).map(|j| gap * j));

    if scheme.has_overrides() {
        fill_rows(a, b, gap, row, |x, y| scheme.similarity(x, y));
    } else {
        let (m, x) = (scheme.match_score(), scheme.mismatch_score());
        fill_rows(a, b, gap, row, |p, q| if p == q { m } else { x });
    }
    row[b.len()]
}

#[inline(always)]
fn fill_rows(
    a: &[PhonemeId],
    b: &[PhonemeId],
    gap: i32,
    row: &mut [i32],
    sim: impl Fn(PhonemeId, PhonemeId) -> i32,
) {
    for (i, &sa) in a.iter().enumerate() {
        let mut diag = row[0];
        let mut left = gap * (i as i32 + 1);
        row[0] = left;
        for (cell, &sb) in row[1..].iter_mut().zip(b) {
            let up = *cell;
            let v = (diag + sim(sa, sb)).max(up + gap).max(left + gap);
            diag = up;
            left = v;
            *cell = v;
        }
    }
}

/// Reusable scratch space for scoring many pairs without reallocating.
#[derive(Debug, Default)]
pub struct Aligner {
    row: Vec<i32>,
}

impl Aligner {
    /// Scratch sized for words of up to `max_len` phonemes.
    pub fn with_max_len(max_len: usize) -> Self {
        Aligner {
            row: Vec::with_capacity(max_len + 1),
        }
    }

    #[inline]
    pub fn score(&mut self, a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> i32 {
        score_with_row(a, b, scheme, &mut self.row)
    }
}

/// Full score matrix, `(len(a)+1) × (len(b)+1)` row-major.
pub fn score_matrix(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> Vec<i32> {
    let width = b.len() + 1;
    let gap = scheme.gap();
    let mut m = vec![0i32; (a.len() + 1) * width];
    for i in 0..=a.len() {
        m[i * width] = gap * i as i32;
    }
    for (j, cell) in m[..width].iter_mut().enumerate() {
        *cell = gap * j as i32;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let diag = m[(i - 1) * width + j - 1] + scheme.similarity(a[i - 1], b[j - 1]);
            let up = m[(i - 1) * width + j] + gap;
            let left = m[i * width + j - 1] + gap;
            m[i * width + j] = diag.max(up).max(left);
        }
    }
    m
}

/// One optimal alignment. On ties the traceback prefers the diagonal step,
/// then the step consuming only `a`, then the step consuming only `b`.
pub fn nw_align(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> Alignment {
    let m = score_matrix(a, b, scheme);
    let width = b.len() + 1;
    let gap = scheme.gap();
    let at = |i: usize, j: usize| m[i * width + j];

    let mut pairs = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (a.len(), b.len());
    while i > 0 || j > 0 {
        let here = at(i, j);
        if i > 0 && j > 0 && here == at(i - 1, j - 1) + scheme.similarity(a[i - 1], b[j - 1]) {
            pairs.push((Slot::Phoneme(a[i - 1]), Slot::Phoneme(b[j - 1])));
            i -= 1;
            j -= 1;
        } else if i > 0 && here == at(i - 1, j) + gap {
            pairs.push((Slot::Phoneme(a[i - 1]), Slot::Gap));
            i -= 1;
        } else {
            pairs.push((Slot::Gap, Slot::Phoneme(b[j - 1])));
            j -= 1;
        }
    }
    pairs.reverse();
    Alignment {
        pairs,
        score: at(a.len(), b.len()),
    }
}

/// Longest combined input the exhaustive oracle accepts.
pub const ORACLE_MAX_TOTAL_LEN: usize = 16;

/// Best score over every global alignment, by exhaustive recursion over the
/// three moves. Exponential; only for cross-checking [`nw_score`].
pub fn oracle_score(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> Result<i32> {
    if a.len() + b.len() > ORACLE_MAX_TOTAL_LEN {
        return Err(Error::invalid(format!(
            "oracle limited to combined length {ORACLE_MAX_TOTAL_LEN}, got {}",
            a.len() + b.len()
        )));
    }
    fn best(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> i32 {
        match (a.split_first(), b.split_first()) {
            (None, None) => 0,
            (Some((_, rest)), None) => scheme.gap() + best(rest, b, scheme),
            (None, Some((_, rest))) => scheme.gap() + best(a, rest, scheme),
            (Some((&x, ra)), Some((&y, rb))) => {
                let both = scheme.similarity(x, y) + best(ra, rb, scheme);
                let skip_a = scheme.gap() + best(ra, b, scheme);
                let skip_b = scheme.gap() + best(a, rb, scheme);
                both.max(skip_a).max(skip_b)
            }
        }
    }
    Ok(best(a, b, scheme))
}
