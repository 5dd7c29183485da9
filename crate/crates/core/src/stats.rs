//! Binomial statistics of k-gram frequencies.
//!
//! Under the normality hypothesis each of the W windows of length k matches
//! a given sequence with probability p = b^-k, so its frequency has standard
//! deviation sqrt(p(1 − p)/W). Across the m = b^k sequences the frequencies
//! then have expected variance p(1 − p)/W, and the sample variance of m
//! normal draws carries a relative uncertainty of sqrt(2/(m − 1)).

use serde::{Deserialize, Serialize};

use crate::counter::{windows_for, CountTable};
use crate::digitgen::Base;
use crate::error::{Error, Result};

/// |z| above which a sequence is flagged.
pub const OUTLIER_SIGMA: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub base: Base,
    pub k: u32,
    pub window_count: u64,
    pub expected_freq: f64,
    pub freqs: Vec<f64>,
    pub zscores: Vec<f64>,
    pub sigma_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub base: Base,
    pub k: u32,
    pub window_count: u64,
    pub expected_var: f64,
    pub expected_var_unc: f64,
    pub observed_var: f64,
    pub deviation_sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub center: f64,
    pub one_sigma: f64,
    pub two_sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub index: usize,
    pub abs_z: f64,
    pub exceeds_4_sigma: bool,
}

fn sequence_count(base: Base, k: u32) -> Result<u64> {
    (base.get() as u64)
        .checked_pow(k)
        .filter(|_| k > 0)
        .ok_or_else(|| Error::Domain(format!("sequence length {k} out of range")))
}

fn windows(digit_count: u64, k: u32) -> Result<u64> {
    if k == 0 || digit_count < k as u64 {
        return Err(Error::Domain(format!("{digit_count} digits cannot hold a window of length {k}")));
    }
    Ok(windows_for(digit_count, k))
}

/// Per-sequence binomial standard deviation of a frequency.
fn binomial_sigma(p: f64, window_count: u64) -> f64 {
    (p * (1.0 - p) / window_count as f64).sqrt()
}

pub fn frequencies(table: &CountTable) -> Result<FrequencyReport> {
    let w = table.window_count();
    if w == 0 {
        return Err(Error::EmptyTable);
    }
    let m = table.counts().len() as f64;
    let p = 1.0 / m;
    let sigma_f = binomial_sigma(p, w);
    let freqs: Vec<f64> = table.counts().iter().map(|&c| c as f64 / w as f64).collect();
    let zscores = freqs.iter().map(|&f| (f - p) / sigma_f).collect();
    Ok(FrequencyReport {
        base: table.base(),
        k: table.k(),
        window_count: w,
        expected_freq: p,
        freqs,
        zscores,
        sigma_f,
    })
}

/// Expected variance of the b^k frequencies and its uncertainty for an
/// N-digit stream.
pub fn expected_variance(base: Base, k: u32, digit_count: u64) -> Result<(f64, f64)> {
    let w = windows(digit_count, k)?;
    let m = sequence_count(base, k)? as f64;
    let p = 1.0 / m;
    let var = p * (1.0 - p) / w as f64;
    Ok((var, var * (2.0 / (m - 1.0)).sqrt()))
}

/// Sample variance of the frequencies, divisor m − 1.
pub fn observed_variance(report: &FrequencyReport) -> Result<f64> {
    let m = report.freqs.len();
    if m < 2 {
        return Err(Error::Domain(format!("variance needs at least two sequences, have {m}")));
    }
    // Shifted by the first sample so identical frequencies give exactly zero.
    let shift = report.freqs[0];
    let (sum, sum_sq) = report.freqs.iter().fold((0.0, 0.0), |(s, sq), &f| {
        let d = f - shift;
        (s + d, sq + d * d)
    });
    Ok(((sum_sq - sum * sum / m as f64) / (m - 1) as f64).max(0.0))
}

/// Signed distance of the observed variance from its expectation, in units
/// of the expectation's uncertainty. Observed above expected is negative.
pub fn variance_deviation(expected_var: f64, expected_var_unc: f64, observed_var: f64) -> Result<f64> {
    if expected_var_unc.is_nan() || expected_var_unc <= 0.0 {
        return Err(Error::Domain(format!("uncertainty must be positive, got {expected_var_unc}")));
    }
    Ok((expected_var - observed_var) / expected_var_unc)
}

/// Sequence with the largest |z|; ties go to the lowest index.
pub fn max_abs_z(report: &FrequencyReport) -> Result<Outlier> {
    let (index, abs_z) = report
        .zscores
        .iter()
        .map(|z| z.abs())
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, z)| match best {
            Some((_, b)) if b >= z => best,
            _ => Some((i, z)),
        })
        .ok_or(Error::EmptyTable)?;
    Ok(Outlier { index, abs_z, exceeds_4_sigma: abs_z > OUTLIER_SIGMA })
}

pub fn sigma_bands(base: Base, k: u32, digit_count: u64) -> Result<BandSpec> {
    let w = windows(digit_count, k)?;
    let p = 1.0 / sequence_count(base, k)? as f64;
    let one_sigma = binomial_sigma(p, w);
    Ok(BandSpec { center: p, one_sigma, two_sigma: 2.0 * one_sigma })
}

/// Full variance-of-frequencies row for one counted table.
pub fn variance_row(report: &FrequencyReport) -> Result<VarianceRow> {
    let digit_count = report.window_count + report.k as u64 - 1;
    let (expected_var, expected_var_unc) = expected_variance(report.base, report.k, digit_count)?;
    let observed_var = observed_variance(report)?;
    Ok(VarianceRow {
        base: report.base,
        k: report.k,
        window_count: report.window_count,
        expected_var,
        expected_var_unc,
        observed_var,
        deviation_sigma: variance_deviation(expected_var, expected_var_unc, observed_var)?,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn table(base: Base, k: u32, counts: Vec<u64>) -> CountTable {
        let w = counts.iter().sum();
        CountTable::from_counts(base, k, counts, w).unwrap()
    }

    fn report_with(freqs: Vec<f64>, zscores: Vec<f64>) -> FrequencyReport {
        FrequencyReport {
            base: Base::DECIMAL,
            k: 1,
            window_count: 1,
            expected_freq: 0.1,
            freqs,
            zscores,
            sigma_f: 0.3,
        }
    }

    #[test]
    fn uniform_counts() {
        let r = frequencies(&table(Base::DECIMAL, 1, vec![1; 10])).unwrap();
        assert!(r.freqs.iter().all(|&f| f == 0.1));
        assert!(r.zscores.iter().all(|&z| z == 0.0));
        assert_eq!(observed_variance(&r).unwrap(), 0.0);
    }

    #[test]
    fn one_sigma_excess() {
        let mut counts = vec![10; 10];
        counts[0] = 13;
        counts[1] = 7;
        let r = frequencies(&table(Base::DECIMAL, 1, counts)).unwrap();
        assert_eq!(r.window_count, 100);
        assert_relative_eq!(r.sigma_f, 0.03, max_relative = 1e-12);
        assert_relative_eq!(r.freqs[0], 0.13);
        assert_relative_eq!(r.zscores[0], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn empty_table() {
        let t = CountTable::zero(Base::DECIMAL, 2).unwrap();
        assert!(matches!(frequencies(&t), Err(Error::EmptyTable)));
    }

    #[test]
    fn expected_variance_rows() {
        let (v, u) = expected_variance(Base::DECIMAL, 1, 22_459_157_718_361).unwrap();
        assert_relative_eq!(v, 4.007e-15, max_relative = 1e-3);
        assert_relative_eq!(u, 1.889e-15, max_relative = 1e-3);
        let (v, u) = expected_variance(Base::HEX, 3, 18_651_926_753_033).unwrap();
        assert_relative_eq!(v, 1.3086e-17, max_relative = 1e-4);
        assert_relative_eq!(u, 0.0289e-17, max_relative = 1e-3);
    }

    #[test]
    fn binary_symmetric_case() {
        let n = 1_000u64;
        let (v, u) = expected_variance(Base::new(2).unwrap(), 1, n).unwrap();
        assert_relative_eq!(v, 0.25 / n as f64, max_relative = 1e-15);
        assert_relative_eq!(u, 0.25 / n as f64 * 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn too_few_digits() {
        assert!(matches!(expected_variance(Base::DECIMAL, 3, 2), Err(Error::Domain(_))));
        assert!(matches!(sigma_bands(Base::DECIMAL, 1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn two_point_variance() {
        let r = report_with(vec![0.4, 0.6], vec![0.0, 0.0]);
        assert_relative_eq!(observed_variance(&r).unwrap(), 0.02, max_relative = 1e-12);
        assert!(matches!(observed_variance(&report_with(vec![1.0], vec![0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn deviation_sign() {
        let d = variance_deviation(4.0066e-15, 1.8888e-15, 5.0e-15).unwrap();
        assert!((d - -0.53).abs() < 0.005, "{d}");
        let d = variance_deviation(4.4481e-17, 1.9903e-18, 4.18e-17).unwrap();
        assert!((d - 1.35).abs() < 0.005, "{d}");
        assert_eq!(variance_deviation(3.0, 0.5, 3.0).unwrap(), 0.0);
        assert!(variance_deviation(1.0, 0.0, 1.0).is_err());
        assert!(variance_deviation(1.0, -1.0, 1.0).is_err());
        assert!(variance_deviation(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn outlier_scan() {
        let r = report_with(vec![0.1; 10], vec![0.0; 10]);
        assert_eq!(max_abs_z(&r).unwrap(), Outlier { index: 0, abs_z: 0.0, exceeds_4_sigma: false });

        let mut z = vec![0.5; 10];
        z[7] = 4.5;
        z[2] = -3.9;
        let r = report_with(vec![0.1; 10], z);
        assert_eq!(max_abs_z(&r).unwrap(), Outlier { index: 7, abs_z: 4.5, exceeds_4_sigma: true });

        let mut z = vec![0.0; 10];
        z[4] = -4.0;
        z[6] = 4.0;
        let out = max_abs_z(&report_with(vec![0.1; 10], z)).unwrap();
        assert_eq!((out.index, out.exceeds_4_sigma), (4, false));

        assert!(matches!(max_abs_z(&report_with(vec![], vec![])), Err(Error::EmptyTable)));
    }

    #[test]
    fn bands() {
        let b = sigma_bands(Base::DECIMAL, 1, 22_459_157_718_361).unwrap();
        assert_eq!(b.center, 0.1);
        assert_relative_eq!(b.one_sigma, 6.33e-8, max_relative = 1e-3);
        let b = sigma_bands(Base::HEX, 1, 16).unwrap();
        assert_eq!(b.center, 0.0625);
        assert_relative_eq!(b.one_sigma, (0.0625f64 * 0.9375 / 16.0).sqrt(), max_relative = 1e-15);
        assert!((b.one_sigma - 0.0605).abs() < 5e-5);
        assert_eq!(b.two_sigma, 2.0 * b.one_sigma);
    }

    #[test]
    fn row_from_report() {
        let r = frequencies(&table(Base::DECIMAL, 1, vec![12, 8, 10, 10, 10, 10, 10, 10, 10, 10])).unwrap();
        let row = variance_row(&r).unwrap();
        assert_eq!(row.window_count, 100);
        let (v, u) = expected_variance(Base::DECIMAL, 1, 100).unwrap();
        assert_eq!((row.expected_var, row.expected_var_unc), (v, u));
        assert_relative_eq!(row.observed_var, 2.0 * 0.02f64.powi(2) / 9.0, max_relative = 1e-12);
    }
}
