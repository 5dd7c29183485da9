//! Overlapping k-gram tallies over digit streams.
//!
//! A length-k sequence is indexed by its big-endian base-b value, so a table
//! is a dense array of b^k counters updated with a rolling index. Chunked and
//! parallel counting hand each chunk the k−1 digits that precede it and tally
//! only windows that end inside the chunk, so every window is seen once no
//! matter how the stream is cut.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digitgen::{Base, DigitBlock};
use crate::digitio::DigitStream;
use crate::error::{Error, Result};

/// Longest sequence length supported by the dense tables.
pub const MAX_K: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    base: Base,
    k: u32,
    counts: Vec<u64>,
    window_count: u64,
}

impl CountTable {
    pub fn zero(base: Base, k: u32) -> Result<Self> {
        check_k(k)?;
        let len = (base.get() as usize).pow(k);
        Ok(CountTable { base, k, counts: vec![0; len], window_count: 0 })
    }

    /// Rebuilds a table from stored tallies, checking its invariants.
    pub fn from_counts(base: Base, k: u32, counts: Vec<u64>, window_count: u64) -> Result<Self> {
        check_k(k)?;
        let len = (base.get() as usize).pow(k);
        if counts.len() != len {
            return Err(Error::ShapeMismatch(format!("{} counts for {base}^{k} = {len} sequences", counts.len())));
        }
        let mut total = 0u64;
        for &c in &counts {
            total = total.checked_add(c).ok_or(Error::Overflow)?;
        }
        if total != window_count {
            return Err(Error::ShapeMismatch(format!("counts sum to {total}, window count is {window_count}")));
        }
        Ok(CountTable { base, k, counts, window_count })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn window_count(&self) -> u64 {
        self.window_count
    }

    /// Tally of one sequence given as digit values.
    pub fn count_of(&self, sequence: &[u8]) -> u64 {
        assert_eq!(sequence.len(), self.k as usize, "sequence length must equal k");
        self.counts[sequence_index(self.base, sequence)]
    }

    /// Adds every window of `context ‖ digits` that ends inside `digits`.
    /// `context` holds at most k−1 digits.
    fn tally(&mut self, context: &[u8], digits: &[u8]) {
        let k = self.k as usize;
        debug_assert!(context.len() < k);
        let radix = self.base.get() as u64;
        let modulus = self.counts.len() as u64;
        let mut index = 0u64;
        let mut filled = 0usize;
        for &d in context {
            index = index * radix + d as u64;
            filled += 1;
        }
        let mut windows = 0u64;
        for &d in digits {
            index = (index * radix + d as u64) % modulus;
            if filled + 1 >= k {
                self.counts[index as usize] += 1;
                windows += 1;
            } else {
                filled += 1;
            }
        }
        self.window_count += windows;
    }

    fn add_assign(&mut self, other: &CountTable) -> Result<()> {
        if self.base != other.base || self.k != other.k {
            return Err(Error::ShapeMismatch(format!(
                "cannot merge base {} k={} with base {} k={}",
                self.base, self.k, other.base, other.k
            )));
        }
        for (a, &b) in self.counts.iter_mut().zip(&other.counts) {
            *a = a.checked_add(b).ok_or(Error::Overflow)?;
        }
        self.window_count = self.window_count.checked_add(other.window_count).ok_or(Error::Overflow)?;
        Ok(())
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidArgument(format!("sequence length {k} outside 1..={MAX_K}")));
    }
    Ok(())
}

/// Big-endian base-b value of a digit sequence.
pub fn sequence_index(base: Base, sequence: &[u8]) -> usize {
    sequence.iter().fold(0usize, |acc, &d| acc * base.get() as usize + d as usize)
}

/// Digits of sequence `index` of length `k`, most significant first.
pub fn sequence_digits(base: Base, k: u32, mut index: usize) -> Vec<u8> {
    let radix = base.get() as usize;
    let mut out = vec![0u8; k as usize];
    for slot in out.iter_mut().rev() {
        *slot = (index % radix) as u8;
        index /= radix;
    }
    out
}

/// Element-wise sum of two tables of the same shape.
pub fn merge(a: &CountTable, b: &CountTable) -> Result<CountTable> {
    let mut out = a.clone();
    out.add_assign(b)?;
    Ok(out)
}

/// The trailing digits needed to continue counting length-k windows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarryState {
    k: u32,
    tail: Vec<u8>,
}

impl CarryState {
    pub fn new(k: u32) -> Self {
        CarryState { k, tail: Vec::new() }
    }

    pub fn with_tail(k: u32, tail: Vec<u8>) -> Result<Self> {
        if k == 0 || tail.len() >= k as usize {
            return Err(Error::InvalidArgument(format!("carry of {} digits for k={k}", tail.len())));
        }
        Ok(CarryState { k, tail })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn tail(&self) -> &[u8] {
        &self.tail
    }

    fn advance(&self, digits: &[u8]) -> CarryState {
        let keep = self.k as usize - 1;
        CarryState { k: self.k, tail: last_digits(&self.tail, digits, keep) }
    }
}

/// Last `keep` digits of `head ‖ digits`.
fn last_digits(head: &[u8], digits: &[u8], keep: usize) -> Vec<u8> {
    if digits.len() >= keep {
        return digits[digits.len() - keep..].to_vec();
    }
    let from_head = (keep - digits.len()).min(head.len());
    let mut out = head[head.len() - from_head..].to_vec();
    out.extend_from_slice(digits);
    out
}

/// Tallies one block given the carry from everything before it.
pub fn count_block(block: &DigitBlock, k: u32, carry: &CarryState) -> Result<(CountTable, CarryState)> {
    if carry.k != k {
        return Err(Error::InvalidArgument(format!("carry for k={} used with k={k}", carry.k)));
    }
    let mut table = CountTable::zero(block.base(), k)?;
    table.tally(&carry.tail, block.digits());
    Ok((table, carry.advance(block.digits())))
}

/// Tables for every k in 1..=k_max over one stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSet {
    base: Base,
    tables: Vec<CountTable>,
    total_digits: u64,
}

impl CountSet {
    pub fn zero(base: Base, k_max: u32) -> Result<Self> {
        check_k(k_max)?;
        let tables = (1..=k_max).map(|k| CountTable::zero(base, k)).collect::<Result<_>>()?;
        Ok(CountSet { base, tables, total_digits: 0 })
    }

    pub fn from_tables(base: Base, tables: Vec<CountTable>, total_digits: u64) -> Result<Self> {
        let set = CountSet { base, tables, total_digits };
        set.validate()?;
        Ok(set)
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn k_max(&self) -> u32 {
        self.tables.len() as u32
    }

    pub fn total_digits(&self) -> u64 {
        self.total_digits
    }

    pub fn tables(&self) -> &[CountTable] {
        &self.tables
    }

    pub fn table(&self, k: u32) -> Option<&CountTable> {
        self.tables.get((k as usize).checked_sub(1)?)
    }

    /// Checks that table k exists for each k and holds max(N − k + 1, 0)
    /// windows.
    pub fn validate(&self) -> Result<()> {
        if self.tables.is_empty() {
            return Err(Error::ShapeMismatch("count set has no tables".into()));
        }
        for (i, table) in self.tables.iter().enumerate() {
            let k = i as u32 + 1;
            if table.base != self.base || table.k != k {
                return Err(Error::ShapeMismatch(format!("table {i} is base {} k={}", table.base, table.k)));
            }
            let expected = windows_for(self.total_digits, k);
            let sum = table.counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c)).ok_or(Error::Overflow)?;
            if table.window_count != expected || sum != expected {
                return Err(Error::ShapeMismatch(format!(
                    "k={k}: {sum} tallies, {} windows recorded, {expected} expected for {} digits",
                    table.window_count, self.total_digits
                )));
            }
        }
        Ok(())
    }
}

/// Number of length-k windows in an n-digit stream.
pub fn windows_for(n: u64, k: u32) -> u64 {
    (n + 1).saturating_sub(k as u64)
}

/// Incremental counter over a sequence of chunks. Holds the partial
/// [`CountSet`] and the trailing k_max − 1 digits seen so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamCounter {
    set: CountSet,
    tail: Vec<u8>,
}

impl StreamCounter {
    pub fn new(base: Base, k_max: u32) -> Result<Self> {
        Ok(StreamCounter { set: CountSet::zero(base, k_max)?, tail: Vec::new() })
    }

    /// Resumes from a partial set and the digits that end its prefix.
    pub fn resume(set: CountSet, tail: Vec<u8>) -> Result<Self> {
        set.validate()?;
        let want = (set.k_max() as usize - 1).min(set.total_digits as usize);
        if tail.len() != want {
            return Err(Error::InvalidArgument(format!("carry of {} digits, expected {want}", tail.len())));
        }
        if let Some(&digit) = tail.iter().find(|&&d| d >= set.base.get()) {
            return Err(Error::DigitOutOfRange { digit, base: set.base.get() });
        }
        Ok(StreamCounter { set, tail })
    }

    pub fn digits_consumed(&self) -> u64 {
        self.set.total_digits
    }

    pub fn counts(&self) -> &CountSet {
        &self.set
    }

    /// Carry for each k in 1..=k_max.
    pub fn carries(&self) -> Vec<CarryState> {
        (1..=self.set.k_max())
            .map(|k| {
                let keep = (k as usize - 1).min(self.tail.len());
                CarryState { k, tail: self.tail[self.tail.len() - keep..].to_vec() }
            })
            .collect()
    }

    /// Counts a batch of consecutive chunks, one task per chunk.
    pub fn feed(&mut self, chunks: &[DigitBlock]) -> Result<()> {
        let base = self.set.base;
        if let Some(bad) = chunks.iter().find(|c| c.base() != base) {
            return Err(Error::BaseMismatch { expected: base.get(), found: bad.base().get() });
        }
        let keep = self.set.k_max() as usize - 1;
        let mut contexts = Vec::with_capacity(chunks.len());
        let mut context = self.tail.clone();
        for chunk in chunks {
            let next = last_digits(&context, chunk.digits(), keep);
            contexts.push(std::mem::replace(&mut context, next));
        }

        let k_max = self.set.k_max();
        let partials = chunks
            .par_iter()
            .zip(contexts.par_iter())
            .map(|(chunk, context)| {
                let mut set = CountSet::zero(base, k_max)?;
                for table in &mut set.tables {
                    let k = table.k as usize;
                    let ctx = &context[context.len() - (k - 1).min(context.len())..];
                    table.tally(ctx, chunk.digits());
                }
                set.total_digits = chunk.len() as u64;
                Ok(set)
            })
            .collect::<Result<Vec<_>>>()?;

        for partial in &partials {
            for (mine, theirs) in self.set.tables.iter_mut().zip(&partial.tables) {
                mine.add_assign(theirs)?;
            }
            self.set.total_digits = self.set.total_digits.checked_add(partial.total_digits).ok_or(Error::Overflow)?;
        }
        self.tail = context;
        Ok(())
    }

    pub fn finish(self) -> CountSet {
        self.set
    }
}

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

pub(crate) fn check_chunking(k_max: u32, chunk_digits: usize) -> Result<()> {
    check_k(k_max)?;
    if chunk_digits < k_max as usize {
        return Err(Error::InvalidArgument(format!("chunk size {chunk_digits} smaller than k_max {k_max}")));
    }
    Ok(())
}

/// Reads up to `count` chunks; stops early at end of stream.
pub(crate) fn read_batch(stream: &mut DigitStream, chunk_digits: usize, count: usize) -> Result<Vec<DigitBlock>> {
    let mut batch = Vec::with_capacity(count);
    while batch.len() < count {
        let chunk = read_full_chunk(stream, chunk_digits)?;
        if chunk.is_empty() {
            break;
        }
        batch.push(chunk);
    }
    Ok(batch)
}

/// A chunk of exactly `chunk_digits` digits unless the stream ends first.
fn read_full_chunk(stream: &mut DigitStream, chunk_digits: usize) -> Result<DigitBlock> {
    let first = stream.read_chunk(chunk_digits)?;
    if first.len() == chunk_digits || first.is_empty() {
        return Ok(first);
    }
    let base = first.base();
    let mut digits = first.into_digits();
    while digits.len() < chunk_digits {
        let more = stream.read_chunk(chunk_digits - digits.len())?;
        if more.is_empty() {
            break;
        }
        digits.extend_from_slice(more.digits());
    }
    DigitBlock::new(base, digits)
}

/// Counts all k-grams for k in 1..=k_max over the remainder of `stream`.
///
/// The result does not depend on `chunk_digits` or `workers`.
pub fn count_stream(stream: &mut DigitStream, k_max: u32, chunk_digits: usize, workers: usize) -> Result<CountSet> {
    check_chunking(k_max, chunk_digits)?;
    let pool = worker_pool(workers)?;
    let mut counter = StreamCounter::new(stream.base(), k_max)?;
    loop {
        let batch = read_batch(stream, chunk_digits, workers)?;
        if batch.is_empty() {
            break;
        }
        pool.install(|| counter.feed(&batch))?;
    }
    Ok(counter.finish())
}
