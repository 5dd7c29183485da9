//! Serialized results: the variance table, band plots, and run summaries.

mod svg;
mod table;

use serde::{Deserialize, Serialize};

use crate::counter::{sequence_digits, CountSet};
use crate::digitgen::{digit_char, Base};
use crate::error::Result;
use crate::stats::{self, FrequencyReport, VarianceRow};

pub use svg::render_band_plot;
pub use table::{emit_table, TableFormat, CSV_HEADER};

/// Extremes of the z-scores for one sequence length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDigest {
    pub k: u32,
    pub window_count: u64,
    pub min_z: f64,
    pub max_z: f64,
    pub max_abs_z_index: usize,
    pub max_abs_z_sequence: String,
    pub max_abs_z: f64,
    pub exceeds_4_sigma: bool,
}

impl FrequencyDigest {
    pub fn from_report(report: &FrequencyReport) -> Result<Self> {
        let outlier = stats::max_abs_z(report)?;
        let (min_z, max_z) = report
            .zscores
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &z| (lo.min(z), hi.max(z)));
        Ok(FrequencyDigest {
            k: report.k,
            window_count: report.window_count,
            min_z,
            max_z,
            max_abs_z_index: outlier.index,
            max_abs_z_sequence: sequence_label(report.base, report.k, outlier.index),
            max_abs_z: outlier.abs_z,
            exceeds_4_sigma: outlier.exceeds_4_sigma,
        })
    }
}

/// Digit string of a sequence index, e.g. `"07"` for index 7 at k = 2.
pub fn sequence_label(base: Base, k: u32, index: usize) -> String {
    sequence_digits(base, k, index).into_iter().map(digit_char).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub input: String,
    pub base: Base,
    pub total_digits: u64,
    pub frequencies: Vec<FrequencyDigest>,
    pub variance_rows: Vec<VarianceRow>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunSummary {
    pub fn any_outlier(&self) -> bool {
        self.frequencies.iter().any(|d| d.exceeds_4_sigma)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Frequencies and statistics for every table of a count set.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub reports: Vec<FrequencyReport>,
    pub rows: Vec<VarianceRow>,
    pub digests: Vec<FrequencyDigest>,
}

/// Computes per-k reports for every table that has windows.
pub fn analyze(set: &CountSet) -> Result<Analysis> {
    let mut analysis = Analysis { reports: Vec::new(), rows: Vec::new(), digests: Vec::new() };
    for table in set.tables().iter().filter(|t| t.window_count() > 0) {
        let report = stats::frequencies(table)?;
        analysis.rows.push(stats::variance_row(&report)?);
        analysis.digests.push(FrequencyDigest::from_report(&report)?);
        analysis.reports.push(report);
    }
    Ok(analysis)
}

impl Analysis {
    pub fn summary(&self, input: String, set: &CountSet, timestamp: String) -> RunSummary {
        RunSummary {
            input,
            base: set.base(),
            total_digits: set.total_digits(),
            frequencies: self.digests.clone(),
            variance_rows: self.rows.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }
}
