use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stats::VarianceRow;

pub const CSV_HEADER: &str = "base,k,window_count,expected_var,expected_var_unc,observed_var,deviation_sigma";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown table format {other:?}"))),
        }
    }
}

/// Six significant digits in scientific notation.
fn sci(value: f64) -> String {
    format!("{value:.5e}")
}

/// Renders variance rows as CSV or JSON. Output bytes depend only on the rows.
pub fn emit_table(rows: &[VarianceRow], format: TableFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("variance table needs at least one row".into()));
    }
    match format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    row.base,
                    row.k,
                    row.window_count,
                    sci(row.expected_var),
                    sci(row.expected_var_unc),
                    sci(row.observed_var),
                    sci(row.deviation_sigma),
                )
                .expect("writing to a String");
            }
            Ok(out)
        }
        TableFormat::Json => {
            let mut out = serde_json::to_string_pretty(rows)?;
            out.push('\n');
            Ok(out)
        }
    }
}
