//! Digit files: plain ASCII and the packed-nibble `PIDG` format.
//!
//! Packed layout (all integers little-endian):
//!
//! | offset | size | field                    |
//! |--------|------|--------------------------|
//! | 0      | 4    | magic `PIDG`             |
//! | 4      | 1    | version (1)              |
//! | 5      | 1    | base (10 or 16)          |
//! | 6      | 2    | reserved, zero           |
//! | 8      | 8    | digit count              |
//! | 16     | ...  | two digits per byte, earlier digit in the high nibble |
//!
//! An odd digit count leaves the final low nibble zero.

use std::fmt;
use std::fs::File;
use std::io::{ErrorKind, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digitgen::{ascii_digit_value, Base, DigitBlock};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ascii,
    Packed,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(Format::Ascii),
            "packed" => Ok(Format::Packed),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Ascii => "ascii",
            Format::Packed => "packed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackedHeader {
    pub base: Base,
    pub digit_count: u64,
}

impl PackedHeader {
    pub const MAGIC: [u8; 4] = *b"PIDG";
    pub const VERSION: u8 = 1;
    pub const LEN: usize = 16;

    pub fn encode(&self) -> [u8; Self::LEN] {
        let mut out = [0u8; Self::LEN];
        out[..4].copy_from_slice(&Self::MAGIC);
        out[4] = Self::VERSION;
        out[5] = self.base.get();
        out[8..].copy_from_slice(&self.digit_count.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < Self::LEN {
            return Err(Error::MalformedHeader(format!("{} header bytes, need {}", bytes.len(), Self::LEN)));
        }
        if bytes[..4] != Self::MAGIC {
            return Err(Error::MalformedHeader("bad magic".into()));
        }
        if bytes[4] != Self::VERSION {
            return Err(Error::MalformedHeader(format!("unsupported version {}", bytes[4])));
        }
        let base = Base::new_supported(bytes[5] as u32)
            .map_err(|_| Error::MalformedHeader(format!("unsupported base {}", bytes[5])))?;
        if bytes[6..8] != [0, 0] {
            return Err(Error::MalformedHeader("reserved bytes not zero".into()));
        }
        let digit_count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
        Ok(PackedHeader { base, digit_count })
    }
}

const READ_BUFFER: usize = 1 << 16;

/// Sequential reader over a digit file. Single consumer.
pub struct DigitStream {
    base: Base,
    format: Format,
    source: Box<dyn Read + Send>,
    buf: Vec<u8>,
    start: usize,
    eof: bool,
    byte_offset: u64,
    declared_length: Option<u64>,
    position: u64,
    /// Low nibble of a packed byte whose high nibble was already returned.
    pending_low: Option<u8>,
}

impl fmt::Debug for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DigitStream")
            .field("base", &self.base)
            .field("format", &self.format)
            .field("byte_offset", &self.byte_offset)
            .field("declared_length", &self.declared_length)
            .field("position", &self.position)
            .finish()
    }
}

/// Opens a digit file positioned at digit 0.
pub fn open_stream(path: impl AsRef<Path>, format: Format, base: Base) -> Result<DigitStream> {
    let file = File::open(path)?;
    DigitStream::from_reader(file, format, base)
}

/// Reads the next run of at most `max_digits` digits.
pub fn read_chunk(stream: &mut DigitStream, max_digits: usize) -> Result<DigitBlock> {
    stream.read_chunk(max_digits)
}

impl DigitStream {
    pub fn from_reader(source: impl Read + Send + 'static, format: Format, base: Base) -> Result<Self> {
        let base = Base::new_supported(base.get() as u32)?;
        let mut stream = DigitStream {
            base,
            format,
            source: Box::new(source),
            buf: Vec::with_capacity(READ_BUFFER),
            start: 0,
            eof: false,
            byte_offset: 0,
            declared_length: None,
            position: 0,
            pending_low: None,
        };
        match format {
            Format::Packed => {
                stream.ensure(PackedHeader::LEN)?;
                let header = PackedHeader::decode(stream.available())?;
                if header.base != base {
                    return Err(Error::BaseMismatch { expected: base.get(), found: header.base.get() });
                }
                stream.consume(PackedHeader::LEN);
                stream.declared_length = Some(header.digit_count);
            }
            Format::Ascii => stream.skip_integer_prefix()?,
        }
        Ok(stream)
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Digits returned so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Source bytes consumed so far, header included.
    pub fn byte_offset(&self) -> u64 {
        self.byte_offset
    }

    pub fn declared_length(&self) -> Option<u64> {
        self.declared_length
    }

    fn available(&self) -> &[u8] {
        &self.buf[self.start..]
    }

    fn consume(&mut self, n: usize) {
        self.start += n;
        self.byte_offset += n as u64;
    }

    /// Buffers at least `n` unread bytes unless the source ends first.
    fn ensure(&mut self, n: usize) -> Result<()> {
        while self.buf.len() - self.start < n && !self.eof {
            if self.start > 0 {
                self.buf.drain(..self.start);
                self.start = 0;
            }
            let old = self.buf.len();
            let want = READ_BUFFER.max(n);
            self.buf.resize(old + want, 0);
            let read = loop {
                match self.source.read(&mut self.buf[old..]) {
                    Ok(read) => break read,
                    Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                    Err(e) => {
                        self.buf.truncate(old);
                        return Err(e.into());
                    }
                }
            };
            self.buf.truncate(old + read);
            if read == 0 {
                self.eof = true;
            }
        }
        Ok(())
    }

    fn skip_integer_prefix(&mut self) -> Result<()> {
        loop {
            self.ensure(2)?;
            match self.available() {
                [first, ..] if is_space(*first) => self.consume(1),
                [b'3', b'.' | b',', ..] => {
                    self.consume(2);
                    return Ok(());
                }
                _ => return Ok(()),
            }
        }
    }

    pub fn read_chunk(&mut self, max_digits: usize) -> Result<DigitBlock> {
        if max_digits == 0 {
            return Err(Error::InvalidArgument("max_digits must be positive".into()));
        }
        let digits = match self.format {
            Format::Ascii => self.read_ascii(max_digits)?,
            Format::Packed => self.read_packed(max_digits)?,
        };
        self.position += digits.len() as u64;
        DigitBlock::new(self.base, digits)
    }

    fn read_ascii(&mut self, max_digits: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(max_digits.min(READ_BUFFER));
        let radix = self.base.get();
        while out.len() < max_digits {
            self.ensure(1)?;
            let avail = self.available();
            if avail.is_empty() {
                break;
            }
            let mut used = 0;
            for &byte in avail {
                if out.len() == max_digits {
                    break;
                }
                if !is_space(byte) {
                    match ascii_digit_value(byte) {
                        Some(value) if value < radix => out.push(value),
                        _ => {
                            return Err(Error::InvalidDigit { offset: self.byte_offset + used as u64, byte });
                        }
                    }
                }
                used += 1;
            }
            self.consume(used);
        }
        Ok(out)
    }

    fn read_packed(&mut self, max_digits: usize) -> Result<Vec<u8>> {
        let declared = self.declared_length.unwrap_or(0);
        let remaining = declared - self.position;
        let want = (max_digits as u64).min(remaining) as usize;
        let mut out = Vec::with_capacity(want);
        if want == 0 {
            return Ok(out);
        }
        let radix = self.base.get();
        if let Some(low) = self.pending_low.take() {
            out.push(low);
        }
        while out.len() < want {
            let bytes_needed = (want - out.len()).div_ceil(2);
            self.ensure(bytes_needed.min(READ_BUFFER))?;
            let avail = self.available();
            if avail.is_empty() {
                if out.is_empty() {
                    return Err(Error::Truncated { declared, available: self.position });
                }
                break;
            }
            let take = avail.len().min(bytes_needed);
            let mut used = 0;
            let mut pending = None;
            for &byte in &avail[..take] {
                let (high, low) = (byte >> 4, byte & 0x0F);
                let end = self.position + out.len() as u64;
                let check = |v: u8| if v < radix { Ok(v) } else { Err(()) };
                let offset = self.byte_offset + used as u64;
                out.push(check(high).map_err(|_| Error::InvalidDigit { offset, byte })?);
                used += 1;
                if end + 1 < declared {
                    let low = check(low).map_err(|_| Error::InvalidDigit { offset, byte })?;
                    if out.len() < want {
                        out.push(low);
                    } else {
                        pending = Some(low);
                    }
                }
            }
            self.consume(used);
            self.pending_low = pending;
        }
        Ok(out)
    }
}

fn is_space(byte: u8) -> bool {
    matches!(byte, b' ' | b'\t' | b'\r' | b'\n')
}

/// Writes blocks as a packed file. Returns the number of bytes written.
pub fn write_packed<W: Write>(base: Base, blocks: &[DigitBlock], mut sink: W) -> Result<u64> {
    let base = Base::new_supported(base.get() as u32)?;
    let mut count = 0u64;
    for block in blocks {
        if block.base() != base {
            return Err(Error::BaseMismatch { expected: base.get(), found: block.base().get() });
        }
        count += block.len() as u64;
    }
    sink.write_all(&PackedHeader { base, digit_count: count }.encode())?;

    let mut written = PackedHeader::LEN as u64;
    let mut out = Vec::with_capacity(READ_BUFFER);
    let mut high: Option<u8> = None;
    for &digit in blocks.iter().flat_map(|b| b.digits()) {
        match high.take() {
            None => high = Some(digit),
            Some(h) => {
                out.push(h << 4 | digit);
                if out.len() == READ_BUFFER {
                    sink.write_all(&out)?;
                    written += out.len() as u64;
                    out.clear();
                }
            }
        }
    }
    if let Some(h) = high {
        out.push(h << 4);
    }
    sink.write_all(&out)?;
    written += out.len() as u64;
    sink.flush()?;
    Ok(written)
}

/// Writes blocks as canonical upper-case ASCII with no prefix or separators.
pub fn write_ascii<W: Write>(blocks: &[DigitBlock], mut sink: W) -> Result<u64> {
    let mut written = 0u64;
    for block in blocks {
        let text = block.to_ascii();
        sink.write_all(text.as_bytes())?;
        written += text.len() as u64;
    }
    sink.flush()?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;

    fn ascii(text: &str, base: Base) -> DigitStream {
        DigitStream::from_reader(Cursor::new(text.as_bytes().to_vec()), Format::Ascii, base).unwrap()
    }

    fn drain(stream: &mut DigitStream, max: usize) -> Result<Vec<u8>> {
        let mut all = Vec::new();
        loop {
            let block = stream.read_chunk(max)?;
            if block.is_empty() {
                return Ok(all);
            }
            all.extend_from_slice(block.digits());
        }
    }

    #[test]
    fn ascii_prefix_is_skipped() {
        assert_eq!(drain(&mut ascii("3.14159", Base::DECIMAL), 100).unwrap(), [1, 4, 1, 5, 9]);
        assert_eq!(drain(&mut ascii("  3,14", Base::DECIMAL), 100).unwrap(), [1, 4]);
        assert_eq!(drain(&mut ascii("314", Base::DECIMAL), 100).unwrap(), [3, 1, 4]);
    }

    #[test]
    fn ascii_whitespace_is_ignored() {
        assert_eq!(drain(&mut ascii("1415 9\n26", Base::DECIMAL), 100).unwrap(), [1, 4, 1, 5, 9, 2, 6]);
        assert_eq!(drain(&mut ascii("\t24\r\n3f", Base::HEX), 3).unwrap(), [2, 4, 3, 15]);
    }

    #[test]
    fn ascii_invalid_digit() {
        let err = drain(&mut ascii("24G", Base::HEX), 100).unwrap_err();
        assert!(matches!(err, Error::InvalidDigit { offset: 2, byte: b'G' }), "{err:?}");
        let err = drain(&mut ascii("3.12A", Base::DECIMAL), 100).unwrap_err();
        assert!(matches!(err, Error::InvalidDigit { offset: 4, byte: b'A' }), "{err:?}");
    }

    #[test]
    fn chunking() {
        let mut stream = ascii("14159", Base::DECIMAL);
        assert_eq!(stream.read_chunk(3).unwrap().digits(), &[1, 4, 1]);
        assert_eq!(stream.read_chunk(3).unwrap().digits(), &[5, 9]);
        assert!(stream.read_chunk(3).unwrap().is_empty());
        assert_eq!(stream.position(), 5);

        let mut empty = ascii("", Base::DECIMAL);
        assert!(empty.read_chunk(100).unwrap().is_empty());
    }

    #[test]
    fn packed_examples() {
        let block = DigitBlock::from_ascii(Base::HEX, "243F").unwrap();
        let mut out = Vec::new();
        assert_eq!(write_packed(Base::HEX, &[block], &mut out).unwrap(), 18);
        assert_eq!(&out[..4], b"PIDG");
        assert_eq!(&out[4..16], &[1, 16, 0, 0, 4, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&out[16..], &[0x24, 0x3F]);

        let block = DigitBlock::new(Base::DECIMAL, vec![1, 4, 1, 5, 9]).unwrap();
        let mut out = Vec::new();
        write_packed(Base::DECIMAL, &[block], &mut out).unwrap();
        assert_eq!(out[5], 10);
        assert_eq!(out[8], 5);
        assert_eq!(&out[16..], &[0x14, 0x15, 0x90]);

        let mut out = Vec::new();
        assert_eq!(write_packed(Base::DECIMAL, &[], &mut out).unwrap(), 16);
        assert_eq!(PackedHeader::decode(&out).unwrap().digit_count, 0);
    }

    #[test]
    fn packed_truncation() {
        let mut bytes = PackedHeader { base: Base::DECIMAL, digit_count: 5 }.encode().to_vec();
        bytes.extend_from_slice(&[0x14, 0x15]);
        let mut stream = DigitStream::from_reader(Cursor::new(bytes), Format::Packed, Base::DECIMAL).unwrap();
        assert_eq!(stream.read_chunk(100).unwrap().digits(), &[1, 4, 1, 5]);
        let err = stream.read_chunk(100).unwrap_err();
        assert!(matches!(err, Error::Truncated { declared: 5, available: 4 }), "{err:?}");
    }

    #[test]
    fn packed_header_errors() {
        let good = PackedHeader { base: Base::HEX, digit_count: 0 }.encode();
        let open = |bytes: Vec<u8>, base| DigitStream::from_reader(Cursor::new(bytes), Format::Packed, base);

        assert!(matches!(open(good.to_vec(), Base::DECIMAL), Err(Error::BaseMismatch { expected: 10, found: 16 })));
        assert!(matches!(open(good[..10].to_vec(), Base::HEX), Err(Error::MalformedHeader(_))));

        let mut bad = good;
        bad[0] = b'X';
        assert!(matches!(open(bad.to_vec(), Base::HEX), Err(Error::MalformedHeader(_))));
        let mut bad = good;
        bad[4] = 2;
        assert!(matches!(open(bad.to_vec(), Base::HEX), Err(Error::MalformedHeader(_))));
        let mut bad = good;
        bad[5] = 8;
        assert!(matches!(open(bad.to_vec(), Base::HEX), Err(Error::MalformedHeader(_))));
        let mut bad = good;
        bad[7] = 1;
        assert!(matches!(open(bad.to_vec(), Base::HEX), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn packed_rejects_out_of_range_nibble() {
        let mut bytes = PackedHeader { base: Base::DECIMAL, digit_count: 2 }.encode().to_vec();
        bytes.push(0x1B);
        let mut stream = DigitStream::from_reader(Cursor::new(bytes), Format::Packed, Base::DECIMAL).unwrap();
        assert!(matches!(stream.read_chunk(2), Err(Error::InvalidDigit { offset: 16, byte: 0x1B })));
    }

    #[test]
    fn packed_odd_chunks_split_bytes() {
        let digits: Vec<u8> = (0..11).map(|i| (i * 7 % 16) as u8).collect();
        let block = DigitBlock::new(Base::HEX, digits.clone()).unwrap();
        let mut out = Vec::new();
        write_packed(Base::HEX, &[block], &mut out).unwrap();
        let mut stream = DigitStream::from_reader(Cursor::new(out), Format::Packed, Base::HEX).unwrap();
        assert_eq!(stream.declared_length(), Some(11));
        assert_eq!(drain(&mut stream, 3).unwrap(), digits);
        assert_eq!(stream.byte_offset(), 16 + 6);
    }

    #[test]
    fn write_ascii_is_upper_case() {
        let block = DigitBlock::new(Base::HEX, vec![2, 4, 3, 15, 6, 10]).unwrap();
        let mut out = Vec::new();
        write_ascii(&[block], &mut out).unwrap();
        assert_eq!(out, b"243F6A");
    }
}
