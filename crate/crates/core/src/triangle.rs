//! Linear indexing of the strict upper triangle of an `n × n` matrix.
//!
//! Edges are numbered row-major: `(0,1), (0,2), …, (0,n−1), (1,2), …,
//! (n−2,n−1)`. Rows run `0..=n−2`. `S_r` below denotes the number of entries
//! up to and including row `r`, with `S_{-1} = 0`.

use crate::error::{Error, Result};

/// Number of edges of a complete graph on `n` nodes, `n(n−1)/2`.
pub fn num_edges(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let n = n as u128;
    (n * (n - 1) / 2) as u64
}

// S_r for r in -1..=n-2, exact.
fn prefix_count_unchecked(r: i64, n: u64) -> u64 {
    if r < 0 {
        return 0;
    }
    let (r, n) = (r as u128, n as u128);
    ((n - 1) * (r + 1) - r * (r + 1) / 2) as u64
}

/// Entries traversed up to the end of row `r`: `Σ_{k=0..r} (n−k−1)`.
pub fn prefix_count(r: u64, n: u64) -> Result<u64> {
    if n < 2 || r > n - 2 {
        return Err(Error::invalid(format!("row {r} out of range for n = {n}")));
    }
    Ok(prefix_count_unchecked(r as i64, n))
}

/// Row of edge `idx`.
///
/// Starts from the closed-form root `z − sqrt(z² − 2·idx)` with `z = n − ½`
/// in `f64`, then steps by whole rows until `S_{r−1} ≤ idx < S_r` holds in
/// exact integer arithmetic.
pub fn row_of(idx: u64, n: u64) -> Result<u64> {
    let total = num_edges(n);
    if idx >= total {
        return Err(Error::invalid(format!(
            "edge index {idx} out of range for n = {n} ({total} edges)"
        )));
    }
    let z = n as f64 - 0.5;
    let disc = (z * z - 2.0 * idx as f64).max(0.0);
    let estimate = (z - disc.sqrt()).floor();
    let last_row = (n - 2) as i64;
    let mut r = if estimate.is_finite() {
        (estimate as i64).clamp(0, last_row)
    } else {
        0
    };

    while r > 0 && prefix_count_unchecked(r - 1, n) > idx {
        r -= 1;
    }
    while prefix_count_unchecked(r, n) <= idx {
        r += 1;
    }
    Ok(r as u64)
}

/// Column of edge `idx` given its row.
pub fn col_of(idx: u64, n: u64, r: u64) -> Result<u64> {
    if idx >= num_edges(n) || r > n - 2 {
        return Err(Error::invalid(format!("edge index {idx} or row {r} out of range for n = {n}")));
    }
    let start = prefix_count_unchecked(r as i64 - 1, n);
    let end = prefix_count_unchecked(r as i64, n);
    if idx < start || idx >= end {
        return Err(Error::invalid(format!("edge {idx} does not lie in row {r}")));
    }
    Ok(r + 1 + (idx - start))
}

/// Row and column of edge `idx`.
pub fn position_of(idx: u64, n: u64) -> Result<(u64, u64)> {
    let r = row_of(idx, n)?;
    Ok((r, col_of(idx, n, r)?))
}

/// Linear index of `(r, c)`, `r < c < n`.
pub fn index_of(r: u64, c: u64, n: u64) -> Result<u64> {
    if r >= c || c >= n {
        return Err(Error::invalid(format!(
            "({r}, {c}) is not in the strict upper triangle for n = {n}"
        )));
    }
    Ok(prefix_count_unchecked(r as i64 - 1, n) + (c - r - 1))
}

/// Largest `n` whose edge count fits in `budget_bytes` at `bytes_per_edge`.
///
/// Uses `n = ½ + sqrt(¼ + 2·edges)` and then corrects in integers.
pub fn nodes_for_edge_budget(budget_bytes: u64, bytes_per_edge: u64) -> Result<u64> {
    if budget_bytes == 0 || bytes_per_edge == 0 {
        return Err(Error::invalid("budget and bytes per edge must be positive"));
    }
    let edges = budget_bytes / bytes_per_edge;
    let estimate = 0.5 + (0.25 + 2.0 * edges as f64).sqrt();
    let mut n = estimate.floor().max(1.0) as u64;
    while num_edges(n) > edges {
        n -= 1;
    }
    while num_edges(n + 1) <= edges {
        n += 1;
    }
    Ok(n)
}

pub const DEFAULT_MAX_THREADS: u64 = 1024;

/// Threads per block when each thread needs a worst-case `(q+1)²` byte score
/// matrix in shared memory.
pub fn plan_block_width(max_word_len: u64, shared_mem_bytes: u64, max_threads: u64) -> Result<u64> {
    if max_word_len == 0 {
        return Err(Error::invalid("maximum word length must be at least 1"));
    }
    if max_threads == 0 {
        return Err(Error::invalid("thread cap must be at least 1"));
    }
    let per_thread = (max_word_len + 1).pow(2);
    if per_thread > shared_mem_bytes {
        return Err(Error::invalid(format!(
            "word too long for block planning: {per_thread} bytes per thread exceed {shared_mem_bytes}"
        )));
    }
    Ok((shared_mem_bytes / per_thread).min(max_threads))
}

/// Node count with its derived edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangleGeometry {
    pub n: u64,
    pub num_edges: u64,
}

impl TriangleGeometry {
    pub fn new(n: u64) -> Self {
        TriangleGeometry {
            n,
            num_edges: num_edges(n),
        }
    }

    pub fn position_of(&self, idx: u64) -> Result<(u64, u64)> {
        position_of(idx, self.n)
    }

    pub fn index_of(&self, r: u64, c: u64) -> Result<u64> {
        index_of(r, c, self.n)
    }

    /// Edges from `start` onward, in index order.
    pub fn edges_from(&self, start: u64) -> Result<Edges> {
        let (r, c) = if start >= self.num_edges {
            (self.n, self.n)
        } else {
            self.position_of(start)?
        };
        Ok(Edges { n: self.n, r, c })
    }
}

/// Row-major walk over `(r, c)` pairs without recomputing square roots.
#[derive(Debug, Clone)]
pub struct Edges {
    n: u64,
    r: u64,
    c: u64,
}

impl Iterator for Edges {
    type Item = (u64, u64);

    #[inline]
    fn next(&mut self) -> Option<(u64, u64)> {
        if self.n < 2 || self.r >= self.n - 1 {
            return None;
        }
        let out = (self.r, self.c);
        self.c += 1;
        if self.c == self.n {
            self.r += 1;
            self.c = self.r + 1;
        }
        Some(out)
    }
}
