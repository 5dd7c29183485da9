//! Hexadecimal digit extraction with the Bailey–Borwein–Plouffe series.
//!
//! frac(16^d π) = frac(4·S(1) − 2·S(4) − S(5) − S(6)) with
//! S(j) = Σ_k 16^(d−k) / (8k + j). Terms with k ≤ d are reduced with modular
//! exponentiation; every term is accumulated as a 128-bit binary fraction, so
//! the sum wraps modulo one for free.

use super::{Base, DigitBlock};
use crate::error::{Error, Result};

/// Largest supported `position + count`.
pub const MAX_BBP_POSITION: u64 = 1_000_000_000_000;
/// Longest run returned by one extraction.
pub const MAX_BBP_RUN: u32 = 16;

/// Terms beyond k = d that still reach the 2^-128 ulp.
const TAIL_TERMS: u32 = 32;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow16_mod(mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = 16 % m;
    let mut acc = 1 % m;
    if m <= u32::MAX as u64 {
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
    } else {
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, m);
            }
            base = mul_mod(base, base, m);
            exp >>= 1;
        }
    }
    acc
}

/// floor(r · 2^128 / m) for r < m < 2^64.
fn fraction(r: u64, m: u64) -> u128 {
    let m = m as u128;
    let shifted = (r as u128) << 64;
    let hi = shifted / m;
    let lo = ((shifted % m) << 64) / m;
    (hi << 64) | lo
}

/// Σ_k 16^(d−k)/(8k+j) modulo one, each term truncated to 2^-128.
fn series(j: u64, d: u64) -> u128 {
    let mut acc = 0u128;
    for k in 0..=d {
        let m = 8 * k + j;
        acc = acc.wrapping_add(fraction(pow16_mod(d - k, m), m));
    }
    for e in 1..TAIL_TERMS {
        let m = (8 * (d + e as u64) + j) as u128;
        let term = (1u128 << (128 - 4 * e)) / m;
        if term == 0 {
            break;
        }
        acc = acc.wrapping_add(term);
    }
    acc
}

/// `count` hexadecimal digits of π starting at fractional position
/// `position` (0-based, so position 0 is the `2` in 3.243F...).
///
/// Fails with a precision error when the accumulated truncation error could
/// reach across a digit boundary inside the requested run.
pub fn bbp_hex_at(position: u64, count: u32) -> Result<DigitBlock> {
    if count == 0 || count > MAX_BBP_RUN {
        return Err(Error::InvalidArgument(format!("run length {count} outside 1..={MAX_BBP_RUN}")));
    }
    if position.checked_add(count as u64).is_none_or(|end| end > MAX_BBP_POSITION) {
        return Err(Error::InvalidArgument(format!(
            "position {position} + {count} beyond supported range {MAX_BBP_POSITION}"
        )));
    }

    let d = position;
    let value = series(1, d)
        .wrapping_mul(4)
        .wrapping_sub(series(4, d).wrapping_mul(2))
        .wrapping_sub(series(5, d))
        .wrapping_sub(series(6, d));

    // Each series underestimates by less than one ulp per term.
    let terms = d as u128 + 1 + TAIL_TERMS as u128;
    let bound = 8 * terms;
    let shift = 128 - 4 * count;
    let low = value.wrapping_sub(bound);
    let high = value.wrapping_add(bound);
    if low > value || high < value || low >> shift != value >> shift || high >> shift != value >> shift {
        return Err(Error::Precision(format!(
            "hex digits {position}..{} not certain at 128-bit working precision",
            position + count as u64
        )));
    }

    let digits = (0..count)
        .map(|i| ((value >> (124 - 4 * i)) & 0xF) as u8)
        .collect();
    DigitBlock::new(Base::HEX, digits)
}
