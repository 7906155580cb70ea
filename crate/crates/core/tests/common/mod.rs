#![allow(dead_code)]

use phonosim::corpus::{EncodedWord, PhonemeId};
use phonosim::ScoringScheme;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(v: &[u32]) -> Vec<PhonemeId> {
    v.iter().copied().map(PhonemeId).collect()
}

/// `n` distinct words of length `min_len..=max_len` over `alphabet` symbols.
pub fn random_words(seed: u64, n: usize, alphabet: u32, min_len: usize, max_len: usize) -> Vec<EncodedWord> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(min_len..=max_len);
            let phonemes: Vec<PhonemeId> = (0..len).map(|_| PhonemeId(rng.gen_range(0..alphabet))).collect();
            let ipa: String = phonemes.iter().map(|p| char::from(b'a' + (p.0 % 26) as u8)).collect();
            EncodedWord {
                word: format!("w{i:05}"),
                ipa,
                phonemes,
                frequency: (n - i) as f64,
            }
        })
        .collect()
}

/// Needleman–Wunsch written out directly from the textbook recurrence with a
/// full matrix, independent of the library's rolling-row scorer.
pub fn reference_score(a: &[PhonemeId], b: &[PhonemeId], scheme: &ScoringScheme) -> i32 {
    let p = scheme.gap();
    let mut m = vec![vec![0i32; b.len() + 1]; a.len() + 1];
    for (i, row) in m.iter_mut().enumerate() {
        row[0] = p * i as i32;
    }
    for (j, cell) in m[0].iter_mut().enumerate() {
        *cell = p * j as i32;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let matched = m[i - 1][j - 1] + scheme.similarity(a[i - 1], b[j - 1]);
            let delete = m[i - 1][j] + p;
            let insert = m[i][j - 1] + p;
            m[i][j] = matched.max(delete).max(insert);
        }
    }
    m[a.len()][b.len()]
}

/// Row-major double loop over `r < c`.
pub fn reference_payload(words: &[EncodedWord], scheme: &ScoringScheme) -> Vec<i8> {
    let mut out = Vec::new();
    for r in 0..words.len() {
        for c in r + 1..words.len() {
            out.push(reference_score(&words[r].phonemes, &words[c].phonemes, scheme) as i8);
        }
    }
    out
}
