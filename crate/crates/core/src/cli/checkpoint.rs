//! Resumable counting state, stored as JSON.
//!
//! The digest binds a checkpoint to the digits it has consumed: it is a
//! SHA-256 chain over the canonical digit values (one byte per digit), one
//! link per counting chunk. Resuming re-reads the prefix, rebuilds the chain,
//! and refuses to continue if it differs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::counter::{CarryState, CountSet, CountTable, StreamCounter};
use crate::digitgen::Base;
use crate::digitio::Format;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Chained digest over consumed digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct DigestChain([u8; 32]);

impl DigestChain {
    pub fn update(&mut self, digits: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(self.0);
        hasher.update(digits);
        self.0 = hasher.finalize().into();
    }

    pub fn to_hex(self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let bytes = hex::decode(text).map_err(|e| Error::Checkpoint(format!("bad digest: {e}")))?;
        let array: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::Checkpoint("digest must be 32 bytes".into()))?;
        Ok(DigestChain(array))
    }
}

/// What a checkpoint was taken against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub path: String,
    pub format: Format,
    pub base: Base,
    pub k_max: u32,
}

impl InputDescriptor {
    pub fn new(path: &Path, format: Format, base: Base, k_max: u32) -> Result<Self> {
        let path = fs::canonicalize(path)?.display().to_string();
        Ok(InputDescriptor { path, format, base, k_max })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredCounts {
    pub k: u32,
    pub window_count: u64,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub input: InputDescriptor,
    pub byte_offset: u64,
    pub digits_consumed: u64,
    /// Chunk size the digest chain was built with.
    pub chunk_digits: u64,
    pub carries: Vec<CarryState>,
    pub counts: Vec<StoredCounts>,
    pub digest: String,
}

impl Checkpoint {
    pub fn capture(
        input: &InputDescriptor,
        counter: &StreamCounter,
        byte_offset: u64,
        chunk_digits: usize,
        digest: DigestChain,
    ) -> Self {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            input: input.clone(),
            byte_offset,
            digits_consumed: counter.digits_consumed(),
            chunk_digits: chunk_digits as u64,
            carries: counter.carries(),
            counts: counter
                .counts()
                .tables()
                .iter()
                .map(|t| StoredCounts { k: t.k(), window_count: t.window_count(), counts: t.counts().to_vec() })
                .collect(),
            digest: digest.to_hex(),
        }
    }

    /// Rebuilds the counter, checking every structural invariant.
    pub fn restore(&self, expected: &InputDescriptor) -> Result<StreamCounter> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {}", self.format_version)));
        }
        if &self.input != expected {
            return Err(Error::Checkpoint(format!(
                "checkpoint was taken for {:?}, this run is {:?}",
                self.input, expected
            )));
        }
        if self.chunk_digits < self.input.k_max as u64 {
            return Err(Error::Checkpoint(format!("invalid chunk size {}", self.chunk_digits)));
        }
        DigestChain::from_hex(&self.digest)?;
        let base = self.input.base;
        let tables = self
            .counts
            .iter()
            .map(|c| CountTable::from_counts(base, c.k, c.counts.clone(), c.window_count))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Checkpoint(format!("invalid counts: {e}")))?;
        let set = CountSet::from_tables(base, tables, self.digits_consumed)
            .map_err(|e| Error::Checkpoint(format!("invalid counts: {e}")))?;
        if set.k_max() != self.input.k_max {
            return Err(Error::Checkpoint(format!("{} tables for k_max {}", set.k_max(), self.input.k_max)));
        }

        let longest = self
            .carries
            .last()
            .filter(|c| self.carries.len() == self.input.k_max as usize && c.k() == self.input.k_max)
            .ok_or_else(|| Error::Checkpoint("carry list does not cover every k".into()))?
            .tail()
            .to_vec();
        let counter =
            StreamCounter::resume(set, longest).map_err(|e| Error::Checkpoint(format!("invalid carry: {e}")))?;
        if counter.carries() != self.carries {
            return Err(Error::Checkpoint("per-k carries are inconsistent".into()));
        }
        Ok(counter)
    }

    pub fn digest(&self) -> Result<DigestChain> {
        DigestChain::from_hex(&self.digest)
    }

    /// Reads a checkpoint; `Ok(None)` when the file does not exist.
    pub fn load(path: &Path) -> Result<Option<Self>> {
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| Error::Checkpoint(format!("corrupted checkpoint {}: {e}", path.display())))
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = temporary_path(path);
        {
            let mut file = fs::File::create(&tmp)?;
            serde_json::to_writer(&mut file, self)?;
            file.write_all(b"\n")?;
            file.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn temporary_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}
