//! Digits of π in base 10 and base 16.
//!
//! Two independent sources are provided: a Chudnovsky binary-splitting
//! evaluation ([`gen_pi_decimal`], [`gen_pi_hex`]) that produces a prefix of
//! the expansion, and a BBP digit-extraction routine ([`bbp_hex_at`]) that
//! computes a short run of hexadecimal digits at an arbitrary position. The
//! integer part `3` is never included; every block holds fractional digits.

mod bbp;
mod chudnovsky;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bbp::{bbp_hex_at, MAX_BBP_POSITION, MAX_BBP_RUN};

/// Radix of a digit stream. Values 2 through 16 are representable; the
/// generators and file formats accept only 10 and 16.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Base(u8);

impl Base {
    pub const DECIMAL: Base = Base(10);
    pub const HEX: Base = Base(16);

    pub fn new(value: u32) -> Result<Self> {
        match value {
            2..=16 => Ok(Base(value as u8)),
            _ => Err(Error::InvalidBase(value)),
        }
    }

    /// Restricts to the two bases the digit files and generators support.
    pub fn new_supported(value: u32) -> Result<Self> {
        match value {
            10 | 16 => Ok(Base(value as u8)),
            _ => Err(Error::InvalidBase(value)),
        }
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u32> for Base {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Base::new(value)
    }
}

impl From<Base> for u32 {
    fn from(base: Base) -> u32 {
        base.0 as u32
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A contiguous run of digit values in one base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitBlock {
    base: Base,
    digits: Vec<u8>,
}

impl DigitBlock {
    pub fn new(base: Base, digits: Vec<u8>) -> Result<Self> {
        if let Some(&digit) = digits.iter().find(|&&d| d >= base.get()) {
            return Err(Error::DigitOutOfRange { digit, base: base.get() });
        }
        Ok(DigitBlock { base, digits })
    }

    pub fn empty(base: Base) -> Self {
        DigitBlock { base, digits: Vec::new() }
    }

    /// Parses a run of ASCII digit characters (either letter case).
    pub fn from_ascii(base: Base, text: &str) -> Result<Self> {
        let digits = text
            .bytes()
            .enumerate()
            .map(|(offset, byte)| {
                ascii_digit_value(byte)
                    .filter(|&v| v < base.get())
                    .ok_or(Error::InvalidDigit { offset: offset as u64, byte })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DigitBlock { base, digits })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Canonical upper-case ASCII rendering.
    pub fn to_ascii(&self) -> String {
        self.digits.iter().map(|&d| digit_char(d)).collect()
    }
}

pub(crate) fn ascii_digit_value(byte: u8) -> Option<u8> {
    match byte {
        b'0'..=b'9' => Some(byte - b'0'),
        b'A'..=b'F' => Some(byte - b'A' + 10),
        b'a'..=b'f' => Some(byte - b'a' + 10),
        _ => None,
    }
}

pub(crate) fn digit_char(value: u8) -> char {
    char::from(b"0123456789ABCDEF"[value as usize])
}

/// Limits for the prefix generators.
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_digits: u64,
}

pub const DEFAULT_MAX_DIGITS: u64 = 100_000_000;

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_digits: DEFAULT_MAX_DIGITS }
    }
}

/// First `n_digits` fractional decimal digits of π.
pub fn gen_pi_decimal(n_digits: u64) -> Result<DigitBlock> {
    gen_pi_decimal_with(n_digits, &GenConfig::default())
}

pub fn gen_pi_decimal_with(n_digits: u64, config: &GenConfig) -> Result<DigitBlock> {
    generate(Base::DECIMAL, n_digits, config)
}

/// First `n_digits` fractional hexadecimal digits of π.
pub fn gen_pi_hex(n_digits: u64) -> Result<DigitBlock> {
    gen_pi_hex_with(n_digits, &GenConfig::default())
}

pub fn gen_pi_hex_with(n_digits: u64, config: &GenConfig) -> Result<DigitBlock> {
    generate(Base::HEX, n_digits, config)
}

fn generate(base: Base, n_digits: u64, config: &GenConfig) -> Result<DigitBlock> {
    if n_digits > config.max_digits {
        return Err(Error::ResourceLimit { requested: n_digits, max: config.max_digits });
    }
    if n_digits == 0 {
        return Ok(DigitBlock::empty(base));
    }
    let digits = chudnovsky::fractional_digits(base, n_digits as usize)?;
    Ok(DigitBlock { base, digits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_prefix() {
        let block = gen_pi_decimal(20).unwrap();
        assert_eq!(block.digits(), &[1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4, 6]);
        assert_eq!(gen_pi_decimal(1).unwrap().digits(), &[1]);
        assert!(gen_pi_decimal(0).unwrap().is_empty());
    }

    #[test]
    fn hex_prefix() {
        let block = gen_pi_hex(10).unwrap();
        assert_eq!(block.to_ascii(), "243F6A8885");
        assert_eq!(gen_pi_hex(1).unwrap().digits(), &[2]);
        assert!(gen_pi_hex(0).unwrap().is_empty());
    }

    #[test]
    fn resource_limit() {
        let config = GenConfig { max_digits: 100 };
        assert!(matches!(
            gen_pi_decimal_with(101, &config),
            Err(Error::ResourceLimit { requested: 101, max: 100 })
        ));
        assert_eq!(gen_pi_hex_with(100, &config).unwrap().len(), 100);
    }

    #[test]
    fn prefixes_are_stable() {
        let long = gen_pi_decimal(500).unwrap();
        for n in [1, 2, 13, 14, 15, 29, 100, 499] {
            assert_eq!(gen_pi_decimal(n).unwrap().digits(), &long.digits()[..n as usize]);
        }
        let long = gen_pi_hex(400).unwrap();
        for n in [1, 3, 12, 40, 399] {
            assert_eq!(gen_pi_hex(n).unwrap().digits(), &long.digits()[..n as usize]);
        }
    }

    #[test]
    fn block_validation() {
        assert!(matches!(
            DigitBlock::new(Base::DECIMAL, vec![1, 10]),
            Err(Error::DigitOutOfRange { digit: 10, base: 10 })
        ));
        let block = DigitBlock::from_ascii(Base::HEX, "3fA0").unwrap();
        assert_eq!(block.digits(), &[3, 15, 10, 0]);
        assert_eq!(block.to_ascii(), "3FA0");
        assert!(matches!(
            DigitBlock::from_ascii(Base::DECIMAL, "12a"),
            Err(Error::InvalidDigit { offset: 2, byte: b'a' })
        ));
        assert!(Base::new(1).is_err());
        assert!(Base::new(17).is_err());
        assert!(Base::new_supported(7).is_err());
    }
}
