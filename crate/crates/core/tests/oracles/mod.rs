//! Reference implementations that share no code with the library paths they
//! check.

#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

/// arctan(1/x) · scale by the alternating Taylor series, truncated per term.
fn arctan_inv(x: u32, scale: &BigInt) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut power = scale / x; // scale / x^(2n+1)
    let mut sum = BigInt::zero();
    let mut n = 0u32;
    while !power.is_zero() {
        let term = &power / (2 * n + 1);
        if n.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        n += 1;
    }
    sum
}

/// First `n` fractional decimal digits of π from Machin's formula
/// π = 16·arctan(1/5) − 4·arctan(1/239).
pub fn machin_decimal(n: usize) -> Vec<u8> {
    let guard = 12;
    let scale = BigInt::from(10u32).pow((n + guard) as u32);
    let pi: BigInt = arctan_inv(5, &scale) * 16 - arctan_inv(239, &scale) * 4;
    let text = pi.to_string();
    assert!(text.starts_with('3'));
    text.bytes().skip(1).take(n).map(|b| b - b'0').collect()
}

/// Hex digits of the fraction 0.d1d2...dn (decimal), truncated to `m` digits.
pub fn decimal_fraction_to_hex(decimal: &[u8], m: usize) -> Vec<u8> {
    let mut numerator = BigInt::zero();
    for &d in decimal {
        numerator = numerator * 10 + d;
    }
    let denominator = BigInt::from(10u32).pow(decimal.len() as u32);
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        numerator *= 16;
        let digit = &numerator / &denominator;
        numerator -= &digit * &denominator;
        out.push(u8::try_from(digit).unwrap());
    }
    out
}

/// Overlapping k-gram tally keyed by the digit string itself.
pub fn brute_force_counts(digits: &[u8], k: usize) -> HashMap<Vec<u8>, u64> {
    let mut counts = HashMap::new();
    if digits.len() >= k {
        for window in digits.windows(k) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

/// Two-pass sample variance with divisor n − 1.
pub fn textbook_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

pub const PI_DECIMAL_20: [u8; 20] = [1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4, 6];
