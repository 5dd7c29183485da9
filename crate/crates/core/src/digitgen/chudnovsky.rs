//! Chudnovsky series evaluated by binary splitting.
//!
//! π = 426880 · √10005 · Q(0, n) / T(0, n), where for each term a ≥ 1
//!   p(a) = (6a − 5)(2a − 1)(6a − 1)
//!   q(a) = a³ · 640320³ / 24
//!   t(a) = (−1)^a · p(a) · (13591409 + 545140134 a)
//! and the ranges combine as P = Pl·Pr, Q = Ql·Qr, T = Tl·Qr + Pl·Tr.

use log::debug;
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Pow};

use super::Base;
use crate::error::{Error, Result};

const LINEAR_A: u64 = 13_591_409;
const LINEAR_B: u64 = 545_140_134;
const C3_OVER_24: u64 = 10_939_058_860_032_000;
const SQRT_RADICAND: u32 = 10_005;
const OUTER_FACTOR: u32 = 426_880;

const GUARD_DIGITS: usize = 10;
const EXTRA_TERMS: usize = 2;
/// Above this many digits the tail is recomputed with wider guards.
const SELF_CHECK_THRESHOLD: usize = 1_000_000;
const SELF_CHECK_GUARD: usize = 20;
const SELF_CHECK_TAIL: usize = 10;
/// Accumulated error of the truncated evaluation, in units of the last
/// working digit. Three truncations contribute at most one unit each.
const TAIL_SLACK: u32 = 16;

/// Below this many terms the recursion runs on the current thread.
const PARALLEL_CUTOFF: u64 = 4096;

/// Decimal digits contributed per series term: log10(640320³ / 1728).
pub(crate) fn digits_per_term() -> f64 {
    (640_320f64.powi(3) / 1728.0).log10()
}

struct Split {
    p: BigInt,
    q: BigInt,
    t: BigInt,
}

fn leaf(a: u64) -> Split {
    if a == 0 {
        return Split { p: BigInt::one(), q: BigInt::one(), t: BigInt::from(LINEAR_A) };
    }
    let a128 = a as u128;
    let p = BigInt::from((6 * a128 - 5) * (2 * a128 - 1) * (6 * a128 - 1));
    let q = BigInt::from(a128 * a128 * a128) * BigInt::from(C3_OVER_24);
    let linear = BigInt::from(LINEAR_A as u128 + LINEAR_B as u128 * a128);
    let mut t = &p * linear;
    if a % 2 == 1 {
        t = -t;
    }
    Split { p, q, t }
}

/// Terms a in [lo, hi).
fn split(lo: u64, hi: u64) -> Split {
    if hi - lo == 1 {
        return leaf(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (left, right) = if hi - lo > PARALLEL_CUTOFF {
        rayon::join(|| split(lo, mid), || split(mid, hi))
    } else {
        (split(lo, mid), split(mid, hi))
    };
    Split {
        t: &left.t * &right.q + &left.p * &right.t,
        p: left.p * right.p,
        q: left.q * right.q,
    }
}

/// Approximates floor(π · scale) using `terms` series terms.
fn pi_scaled(scale: &BigUint, terms: u64) -> BigUint {
    let Split { q, t, .. } = split(0, terms);
    let root = (scale * scale * SQRT_RADICAND).sqrt();
    let q = q.to_biguint().expect("Q is a product of positive factors");
    let (sign, t) = t.into_parts();
    debug_assert_eq!(sign, Sign::Plus);
    root * q * OUTER_FACTOR / t
}

/// Evaluates π to `n + guard` base digits and returns the digit string of the
/// truncated value (integer part first) or `None` when the guard digits are
/// too close to a digit boundary to trust the last requested digit.
fn evaluate(base: Base, n: usize, guard: usize) -> Option<String> {
    let width = n + guard;
    let radix = base.get() as u32;
    let scale = BigUint::from(radix).pow(width);
    let decimal_width = width as f64 * (radix as f64).log10();
    let terms = (decimal_width / digits_per_term()).ceil() as u64 + EXTRA_TERMS as u64;
    debug!("evaluating pi: base {radix}, {width} digits, {terms} terms");

    let value = pi_scaled(&scale, terms);
    let modulus = BigUint::from(radix).pow(guard);
    let tail = &value % &modulus;
    if tail < BigUint::from(TAIL_SLACK) || tail > &modulus - TAIL_SLACK {
        return None;
    }
    let text = value.to_str_radix(radix);
    debug_assert_eq!(text.len(), width + 1);
    Some(text)
}

fn evaluate_with_retry(base: Base, n: usize, mut guard: usize) -> Result<String> {
    for _ in 0..8 {
        if let Some(text) = evaluate(base, n, guard) {
            return Ok(text);
        }
        debug!("guard digits {guard} inconclusive, widening");
        guard *= 2;
    }
    Err(Error::Precision(format!("could not settle digit {n} with {guard} guard digits")))
}

pub(crate) fn fractional_digits(base: Base, n: usize) -> Result<Vec<u8>> {
    let text = evaluate_with_retry(base, n, GUARD_DIGITS)?;
    let requested = &text.as_bytes()[1..=n];

    if n > SELF_CHECK_THRESHOLD {
        let check = evaluate_with_retry(base, n, SELF_CHECK_GUARD)?;
        let range = 1 + n - SELF_CHECK_TAIL..=n;
        if text.as_bytes()[range.clone()] != check.as_bytes()[range] {
            return Err(Error::Precision(format!(
                "final {SELF_CHECK_TAIL} digits changed when recomputed with {SELF_CHECK_GUARD} guard digits"
            )));
        }
    }

    requested
        .iter()
        .map(|&c| {
            super::ascii_digit_value(c)
                .ok_or_else(|| Error::Precision(format!("unexpected digit character {:?}", c as char)))
        })
        .collect()
}
