//! Chunked counting with periodic checkpoints.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use log::{info, warn};

use super::checkpoint::{Checkpoint, DigestChain, InputDescriptor};
use crate::counter::{check_chunking, read_batch, worker_pool, CountSet, StreamCounter};
use crate::digitgen::Base;
use crate::digitio::{open_stream, DigitStream, Format};
use crate::error::{Error, Result};

pub const CHECKPOINT_EVERY_DIGITS: u64 = 100_000_000;
pub const CHECKPOINT_EVERY: Duration = Duration::from_secs(60);

#[derive(Clone, Debug)]
pub struct CountJob {
    pub input: PathBuf,
    pub format: Format,
    pub base: Base,
    pub k_max: u32,
    pub chunk_digits: usize,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every_digits: u64,
    pub checkpoint_every: Duration,
    /// Stop (after checkpointing) once at least this many digits are counted.
    pub halt_after_digits: Option<u64>,
}

impl CountJob {
    pub fn new(input: PathBuf, format: Format, base: Base, k_max: u32) -> Self {
        CountJob {
            input,
            format,
            base,
            k_max,
            chunk_digits: 1 << 20,
            workers: 1,
            checkpoint: None,
            checkpoint_every_digits: CHECKPOINT_EVERY_DIGITS,
            checkpoint_every: CHECKPOINT_EVERY,
            halt_after_digits: None,
        }
    }
}

#[derive(Debug)]
pub enum CountOutcome {
    Complete(CountSet),
    Halted { digits_consumed: u64 },
}

struct Progress {
    stream: DigitStream,
    counter: StreamCounter,
    chain: DigestChain,
    chunk_digits: usize,
}

/// Opens the input, resuming from the job's checkpoint when one exists.
fn start(job: &CountJob, descriptor: &InputDescriptor) -> Result<Progress> {
    let mut stream = open_stream(&job.input, job.format, job.base)?;
    let saved = match &job.checkpoint {
        Some(path) => Checkpoint::load(path)?,
        None => None,
    };
    let Some(saved) = saved else {
        return Ok(Progress {
            stream,
            counter: StreamCounter::new(job.base, job.k_max)?,
            chain: DigestChain::default(),
            chunk_digits: job.chunk_digits,
        });
    };

    let counter = saved.restore(descriptor)?;
    let chunk_digits = saved.chunk_digits as usize;
    if chunk_digits != job.chunk_digits {
        warn!("resuming with the checkpoint's chunk size {chunk_digits} instead of {}", job.chunk_digits);
    }

    // Re-read the consumed prefix and rebuild its digest.
    let mut chain = DigestChain::default();
    let keep = job.k_max as usize - 1;
    let mut recent: Vec<u8> = Vec::new();
    while stream.position() < saved.digits_consumed {
        let want = chunk_digits.min((saved.digits_consumed - stream.position()) as usize);
        let chunk = read_batch(&mut stream, want, 1)?;
        let Some(chunk) = chunk.into_iter().next() else {
            return Err(Error::Checkpoint(format!(
                "input has {} digits, checkpoint consumed {}",
                stream.position(),
                saved.digits_consumed
            )));
        };
        chain.update(chunk.digits());
        recent.extend_from_slice(chunk.digits());
        recent.drain(..recent.len().saturating_sub(keep));
    }
    if chain != saved.digest()? {
        return Err(Error::Checkpoint("input digest does not match the checkpoint".into()));
    }
    if stream.byte_offset() != saved.byte_offset {
        return Err(Error::Checkpoint(format!(
            "prefix ends at byte {}, checkpoint recorded {}",
            stream.byte_offset(),
            saved.byte_offset
        )));
    }
    let tail = counter.carries().pop().map(|c| c.tail().to_vec()).unwrap_or_default();
    if recent != tail {
        return Err(Error::Checkpoint("carry digits do not match the input".into()));
    }
    info!("resumed after {} digits", saved.digits_consumed);
    Ok(Progress { stream, counter, chain, chunk_digits })
}

/// Counts the job's input, writing checkpoints on the configured cadence.
pub fn run_count(job: &CountJob) -> Result<CountOutcome> {
    check_chunking(job.k_max, job.chunk_digits)?;
    let pool = worker_pool(job.workers)?;
    let descriptor = InputDescriptor::new(&job.input, job.format, job.base, job.k_max)?;
    let Progress { mut stream, mut counter, mut chain, chunk_digits } = start(job, &descriptor)?;

    let mut last_saved_digits = counter.digits_consumed();
    let mut last_saved_at = Instant::now();
    let save = |counter: &StreamCounter, stream: &DigitStream, chain: DigestChain| -> Result<()> {
        if let Some(path) = &job.checkpoint {
            Checkpoint::capture(&descriptor, counter, stream.byte_offset(), chunk_digits, chain).save(path)?;
            info!("checkpoint at {} digits", counter.digits_consumed());
        }
        Ok(())
    };

    loop {
        let batch = read_batch(&mut stream, chunk_digits, job.workers)?;
        if batch.is_empty() {
            break;
        }
        pool.install(|| counter.feed(&batch))?;
        for chunk in &batch {
            chain.update(chunk.digits());
        }

        let consumed = counter.digits_consumed();
        if job.halt_after_digits.is_some_and(|limit| consumed >= limit) {
            save(&counter, &stream, chain)?;
            return Ok(CountOutcome::Halted { digits_consumed: consumed });
        }
        if consumed - last_saved_digits >= job.checkpoint_every_digits || last_saved_at.elapsed() >= job.checkpoint_every {
            save(&counter, &stream, chain)?;
            last_saved_digits = consumed;
            last_saved_at = Instant::now();
        }
    }
    Ok(CountOutcome::Complete(counter.finish()))
}
