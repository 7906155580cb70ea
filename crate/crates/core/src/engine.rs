//! All-pairs scoring in upper-triangle edge order.
//!
//! The edge range `[0, num_edges)` is cut into contiguous chunks. Workers
//! score chunks into private buffers and the caller's thread commits them to
//! the sink strictly in chunk order, so the payload never depends on the
//! worker count, the chunk size or scheduling.

use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;

use crate::aligner::{Aligner, ScoringScheme};
use crate::corpus::EncodedWord;
use crate::error::{Error, Result};
use crate::store::EdgeStoreWriter;
use crate::triangle::TriangleGeometry;

pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;

// Chunks in flight per worker between ordered commits.
const CHUNKS_PER_WORKER: usize = 8;

/// Destination for scores, written in edge order.
pub trait EdgeSink {
    fn write_scores(&mut self, scores: &[i8]) -> Result<()>;
}

impl EdgeSink for EdgeStoreWriter {
    fn write_scores(&mut self, scores: &[i8]) -> Result<()> {
        self.write(scores)
    }
}

impl EdgeSink for Vec<i8> {
    fn write_scores(&mut self, scores: &[i8]) -> Result<()> {
        self.extend_from_slice(scores);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComputePlan {
    pub chunk_size: u64,
    pub worker_count: usize,
}

impl Default for ComputePlan {
    fn default() -> Self {
        ComputePlan {
            chunk_size: DEFAULT_CHUNK_SIZE,
            worker_count: rayon::current_num_threads(),
        }
    }
}

impl ComputePlan {
    pub fn new(chunk_size: u64, worker_count: usize) -> Result<Self> {
        if chunk_size == 0 {
            return Err(Error::invalid("chunk size must be positive"));
        }
        if worker_count == 0 {
            return Err(Error::invalid("worker count must be positive"));
        }
        Ok(ComputePlan {
            chunk_size,
            worker_count,
        })
    }

    /// Contiguous, ordered, non-overlapping cover of `[0, num_edges)`.
    pub fn chunks(&self, num_edges: u64) -> impl Iterator<Item = Range<u64>> + '_ {
        let size = self.chunk_size.max(1);
        (0..num_edges.div_ceil(size)).map(move |k| k * size..((k + 1) * size).min(num_edges))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeStats {
    pub edges_written: u64,
    pub wall_time: f64,
    pub min_score: i32,
    pub max_score: i32,
    pub mean_score: f64,
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    count: u64,
    sum: i64,
    min: i32,
    max: i32,
}

impl Tally {
    const EMPTY: Tally = Tally {
        count: 0,
        sum: 0,
        min: i32::MAX,
        max: i32::MIN,
    };

    fn add(&mut self, s: i32) {
        self.count += 1;
        self.sum += s as i64;
        self.min = self.min.min(s);
        self.max = self.max.max(s);
    }

    fn merge(&mut self, other: &Tally) {
        self.count += other.count;
        self.sum += other.sum;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }
}

/// Longest word, after checking every achievable score fits in `i8`.
pub fn preflight_range_check(words: &[EncodedWord], scheme: &ScoringScheme) -> Result<usize> {
    if words.is_empty() {
        return Err(Error::invalid("word list is empty"));
    }
    if let Some(w) = words.iter().find(|w| w.phonemes.is_empty()) {
        return Err(Error::Word {
            word: w.word.clone(),
            message: "no phonemes".into(),
        });
    }
    let q = words.iter().map(EncodedWord::len).max().unwrap_or(0);
    let (lower, upper) = scheme.score_bounds(q);
    let mut problems = Vec::new();
    if lower < i8::MIN as i64 {
        problems.push(format!("lowest possible score {lower} < -128"));
    }
    if upper > i8::MAX as i64 {
        problems.push(format!("highest possible score {upper} > 127"));
    }
    if !problems.is_empty() {
        return Err(Error::ScoreRange(format!(
            "maximum word length {q} with match {}, mismatch {}, gap {}: {}",
            scheme.match_score(),
            scheme.mismatch_score(),
            scheme.gap(),
            problems.join("; ")
        )));
    }
    Ok(q)
}

fn score_chunk(
    words: &[EncodedWord],
    scheme: &ScoringScheme,
    geometry: &TriangleGeometry,
    range: Range<u64>,
    aligner: &mut Aligner,
) -> Result<(Vec<i8>, Tally)> {
    let len = (range.end - range.start) as usize;
    let mut out = Vec::with_capacity(len);
    let mut tally = Tally::EMPTY;
    for (r, c) in geometry.edges_from(range.start)?.take(len) {
        let s = aligner.score(&words[r as usize].phonemes, &words[c as usize].phonemes, scheme);
        let narrowed = i8::try_from(s).map_err(|_| {
            Error::ScoreRange(format!(
                "score {s} of ({}, {}) does not fit in 8 bits",
                words[r as usize].word, words[c as usize].word
            ))
        })?;
        tally.add(s);
        out.push(narrowed);
    }
    Ok((out, tally))
}

/// Score every pair `(r, c)`, `r < c`, and write the scores to `sink` in
/// edge-index order.
pub fn compute_all_pairs<S: EdgeSink + ?Sized>(
    words: &[EncodedWord],
    scheme: &ScoringScheme,
    sink: &mut S,
    plan: &ComputePlan,
) -> Result<ComputeStats> {
    let started = Instant::now();
    let max_len = preflight_range_check(words, scheme)?;
    let geometry = TriangleGeometry::new(words.len() as u64);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.worker_count)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let chunks: Vec<Range<u64>> = plan.chunks(geometry.num_edges).collect();
    let window = (plan.worker_count * CHUNKS_PER_WORKER).max(1);
    let mut total = Tally::EMPTY;

    for batch in chunks.chunks(window) {
        let scored: Vec<Result<(Vec<i8>, Tally)>> = pool.install(|| {
            batch
                .par_iter()
                .map_init(
                    || Aligner::with_max_len(max_len),
                    |aligner, range| score_chunk(words, scheme, &geometry, range.clone(), aligner),
                )
                .collect()
        });
        for result in scored {
            let (scores, tally) = result?;
            sink.write_scores(&scores)?;
            total.merge(&tally);
        }
    }

    let (min_score, max_score, mean_score) = if total.count == 0 {
        (0, 0, 0.0)
    } else {
        (total.min, total.max, total.sum as f64 / total.count as f64)
    };
    Ok(ComputeStats {
        edges_written: total.count,
        wall_time: started.elapsed().as_secs_f64(),
        min_score,
        max_score,
        mean_score,
    })
}
