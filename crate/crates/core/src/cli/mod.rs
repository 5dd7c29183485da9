//! Command-line front end: `gen`, `analyze`, and `spotcheck`.
//!
//! Exit codes: 0 success, 1 tool or usage error, 2 statistical finding
//! (a |z| above 4 in `analyze`, a digit mismatch in `spotcheck`).

pub mod checkpoint;
pub mod pipeline;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::digitgen::{self, bbp_hex_at, Base, DigitBlock, MAX_BBP_RUN};
use crate::digitio::{self, open_stream, Format};
use crate::error::{Error, Result};
use crate::report::{self, emit_table, render_band_plot, TableFormat};
use crate::stats::sigma_bands;
use pipeline::{run_count, CountJob, CountOutcome, CHECKPOINT_EVERY_DIGITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FINDING: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pidigits", version, about = "Digit statistics for pi")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate digits of pi into a file.
    Gen(GenArgs),
    /// Count k-grams in a digit file and write statistics.
    Analyze(AnalyzeArgs),
    /// Compare stored hex digits against BBP extraction.
    Spotcheck(SpotcheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Chudnovsky,
    Bbp,
}

fn parse_base(text: &str) -> std::result::Result<Base, String> {
    let value: u32 = text.parse().map_err(|_| format!("{text:?} is not a number"))?;
    Base::new_supported(value).map_err(|_| "base must be 10 or 16".to_string())
}

fn parse_format(text: &str) -> std::result::Result<Format, String> {
    text.parse().map_err(|_| "format must be ascii or packed".to_string())
}

/// Comma-separated list of 0-based digit positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positions(pub Vec<u64>);

fn parse_positions(text: &str) -> std::result::Result<Positions, String> {
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| format!("bad position {p:?}")))
        .collect::<std::result::Result<_, _>>()
        .map(Positions)
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub digits: u64,
    #[arg(long, value_parser = parse_base, default_value = "10")]
    pub base: Base,
    #[arg(long, value_enum, default_value = "chudnovsky")]
    pub algo: Algo,
    #[arg(long, value_parser = parse_format, default_value = "ascii")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_format, default_value = "ascii")]
    pub format: Format,
    #[arg(long, value_parser = parse_base, default_value = "10")]
    pub base: Base,
    #[arg(long, default_value_t = 3)]
    pub kmax: u32,
    #[arg(long, default_value_t = 1 << 20)]
    pub chunk_digits: usize,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, hide = true, default_value_t = CHECKPOINT_EVERY_DIGITS)]
    pub checkpoint_every_digits: u64,
    /// Stop after this many digits, leaving a checkpoint behind.
    #[arg(long, hide = true)]
    pub halt_after_digits: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SpotcheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_format, default_value = "ascii")]
    pub format: Format,
    #[arg(long, value_parser = parse_positions)]
    pub positions: Positions,
    #[arg(long, default_value_t = 8)]
    pub count: u32,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Spotcheck(args) => cmd_spotcheck(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

/// SHA-256 of the canonical digit values, one byte per digit.
pub fn digits_sha256(blocks: &[DigitBlock]) -> String {
    let mut hasher = Sha256::new();
    for block in blocks {
        hasher.update(block.digits());
    }
    hex::encode(hasher.finalize())
}

fn bbp_prefix(n_digits: u64) -> Result<DigitBlock> {
    let run = MAX_BBP_RUN as u64 / 2;
    let runs = (0..n_digits.div_ceil(run))
        .into_par_iter()
        .map(|i| {
            let start = i * run;
            bbp_hex_at(start, (run.min(n_digits - start)) as u32)
        })
        .collect::<Result<Vec<_>>>()?;
    DigitBlock::new(Base::HEX, runs.into_iter().flat_map(DigitBlock::into_digits).collect())
}

pub fn cmd_gen(args: &GenArgs) -> Result<i32> {
    let block = match (args.algo, args.base) {
        (Algo::Chudnovsky, b) if b == Base::DECIMAL => digitgen::gen_pi_decimal(args.digits)?,
        (Algo::Chudnovsky, _) => digitgen::gen_pi_hex(args.digits)?,
        (Algo::Bbp, b) if b == Base::HEX => {
            if args.digits > digitgen::DEFAULT_MAX_DIGITS {
                return Err(Error::ResourceLimit { requested: args.digits, max: digitgen::DEFAULT_MAX_DIGITS });
            }
            bbp_prefix(args.digits)?
        }
        (Algo::Bbp, _) => return Err(Error::InvalidArgument("bbp extraction produces base 16 only".into())),
    };
    let blocks = [block];
    let mut out = BufWriter::new(fs::File::create(&args.out)?);
    match args.format {
        Format::Ascii => digitio::write_ascii(&blocks, &mut out)?,
        Format::Packed => digitio::write_packed(args.base, &blocks, &mut out)?,
    };
    out.flush()?;
    println!("digits {}", args.digits);
    println!("sha256 {}", digits_sha256(&blocks));
    Ok(EXIT_OK)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32> {
    let job = CountJob {
        input: args.input.clone(),
        format: args.format,
        base: args.base,
        k_max: args.kmax,
        chunk_digits: args.chunk_digits,
        workers: args.workers,
        checkpoint: args.checkpoint.clone(),
        checkpoint_every_digits: args.checkpoint_every_digits,
        checkpoint_every: pipeline::CHECKPOINT_EVERY,
        halt_after_digits: args.halt_after_digits,
    };
    let set = match run_count(&job)? {
        CountOutcome::Complete(set) => set,
        CountOutcome::Halted { digits_consumed } => {
            println!("halted after {digits_consumed} digits");
            return Ok(EXIT_OK);
        }
    };

    let analysis = report::analyze(&set)?;
    if analysis.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    fs::create_dir_all(&args.out_dir)?;
    write_file(&args.out_dir.join("table.csv"), &emit_table(&analysis.rows, TableFormat::Csv)?)?;
    for report in &analysis.reports {
        let bands = sigma_bands(report.base, report.k, set.total_digits())?;
        let svg = render_band_plot(report, &bands)?;
        write_file(&args.out_dir.join(format!("freq_k{}.svg", report.k)), &svg)?;
    }
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let summary = analysis.summary(args.input.display().to_string(), &set, timestamp);
    write_file(&args.out_dir.join("summary.json"), &summary.to_json()?)?;

    if let Some(path) = &args.checkpoint {
        match fs::remove_file(path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
            _ => {}
        }
    }

    println!("digits {}", set.total_digits());
    for (row, digest) in analysis.rows.iter().zip(&analysis.digests) {
        println!(
            "k={} windows={} deviation={:+.2}σ max|z|={:.2} at {}",
            row.k, row.window_count, row.deviation_sigma, digest.max_abs_z, digest.max_abs_z_sequence
        );
    }
    info!("wrote results to {}", args.out_dir.display());
    if summary.any_outlier() {
        println!("a sequence frequency deviates by more than 4σ");
        return Ok(EXIT_FINDING);
    }
    Ok(EXIT_OK)
}

/// Digits `[p, p + count)` for each requested position, in request order.
fn stored_runs(path: &Path, format: Format, positions: &[u64], count: u32) -> Result<Vec<Vec<u8>>> {
    let mut stream = open_stream(path, format, Base::HEX)?;
    let mut runs: Vec<Vec<u8>> = vec![Vec::new(); positions.len()];
    let last_end = positions.iter().map(|&p| p + count as u64).max().unwrap_or(0);
    while stream.position() < last_end {
        let start = stream.position();
        let block = stream.read_chunk(1 << 16)?;
        if block.is_empty() {
            break;
        }
        let end = start + block.len() as u64;
        for (run, &p) in runs.iter_mut().zip(positions) {
            let lo = p.max(start);
            let hi = (p + count as u64).min(end);
            if lo < hi {
                run.extend_from_slice(&block.digits()[(lo - start) as usize..(hi - start) as usize]);
            }
        }
    }
    let available = stream.position();
    for (run, &p) in runs.iter().zip(positions) {
        if run.len() < count as usize {
            return Err(Error::InvalidArgument(format!(
                "position {p} with {count} digits runs past the end of the input ({available} digits)"
            )));
        }
    }
    Ok(runs)
}

pub fn cmd_spotcheck(args: &SpotcheckArgs) -> Result<i32> {
    let positions = &args.positions.0;
    if positions.is_empty() {
        return Err(Error::InvalidArgument("no positions given".into()));
    }
    let runs = stored_runs(&args.input, args.format, positions, args.count)?;
    let mut all_match = true;
    for (&position, stored) in positions.iter().zip(&runs) {
        let stored = DigitBlock::new(Base::HEX, stored.clone())?;
        let reference = bbp_hex_at(position, args.count)?;
        let verdict = if stored == reference { "match" } else { "MISMATCH" };
        all_match &= stored == reference;
        println!("position {position}: stored {} bbp {} {verdict}", stored.to_ascii(), reference.to_ascii());
    }
    Ok(if all_match { EXIT_OK } else { EXIT_FINDING })
}
