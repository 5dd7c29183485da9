//! Frequency scatter with binomial σ bands, written directly as SVG 1.1.
//!
//! Element classes are part of the output contract: `band-2sigma` and
//! `band-1sigma` rects, a `center` line, and one `marker` circle per
//! sequence in index order.

use std::fmt::Write as _;

use super::sequence_label;
use crate::error::{Error, Result};
use crate::stats::{BandSpec, FrequencyReport};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 100.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const ONE_SIGMA_FILL: &str = "#f4a3a3";
const TWO_SIGMA_FILL: &str = "#a9c7ee";

struct Frame {
    lo: f64,
    hi: f64,
    m: usize,
}

impl Frame {
    fn x(&self, index: usize) -> f64 {
        LEFT + (index as f64 + 0.5) / self.m as f64 * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, freq: f64) -> f64 {
        TOP + (self.hi - freq) / (self.hi - self.lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn px(v: f64) -> String {
    format!("{v:.3}")
}

/// Renders the frequencies of `report` with its σ bands.
pub fn render_band_plot(report: &FrequencyReport, bands: &BandSpec) -> Result<String> {
    let m = report.freqs.len();
    if m == 0 || m != report.zscores.len() {
        return Err(Error::ShapeMismatch("report has no frequencies".into()));
    }
    if !close(bands.center, report.expected_freq) || !close(bands.one_sigma, report.sigma_f) {
        return Err(Error::ShapeMismatch(format!(
            "bands (center {}, σ {}) do not belong to report (p {}, σ {})",
            bands.center, bands.one_sigma, report.expected_freq, report.sigma_f
        )));
    }

    let (fmin, fmax) = report.freqs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    let lo = fmin.min(bands.center - 3.0 * bands.one_sigma);
    let hi = fmax.max(bands.center + 3.0 * bands.one_sigma);
    let pad = 0.05 * (hi - lo);
    let frame = Frame { lo: lo - pad, hi: hi + pad, m };

    let mut svg = String::with_capacity(256 + 96 * m);
    let w = |svg: &mut String, s: std::fmt::Arguments| svg.write_fmt(s).expect("writing to a String");

    w(&mut svg, format_args!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    w(&mut svg, format_args!(
        "<title>Base {} sequences of length {}: {} windows</title>\n",
        report.base, report.k, report.window_count
    ));
    w(&mut svg, format_args!("<rect class=\"background\" x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"));

    let band_x = px(LEFT);
    let band_w = px(WIDTH - LEFT - RIGHT);
    for (class, half, fill) in [("band-2sigma", bands.two_sigma, TWO_SIGMA_FILL), ("band-1sigma", bands.one_sigma, ONE_SIGMA_FILL)] {
        let top = frame.y(bands.center + half);
        let bottom = frame.y(bands.center - half);
        w(&mut svg, format_args!(
            "<rect class=\"{class}\" x=\"{band_x}\" y=\"{}\" width=\"{band_w}\" height=\"{}\" fill=\"{fill}\"/>\n",
            px(top),
            px(bottom - top)
        ));
    }
    let cy = px(frame.y(bands.center));
    w(&mut svg, format_args!(
        "<line class=\"center\" x1=\"{band_x}\" y1=\"{cy}\" x2=\"{}\" y2=\"{cy}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        px(WIDTH - RIGHT)
    ));

    // Axes and labels.
    let bottom = HEIGHT - BOTTOM;
    w(&mut svg, format_args!(
        "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n\
         <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{bottom}\"/>\n\
         <line x1=\"{LEFT}\" y1=\"{bottom}\" x2=\"{}\" y2=\"{bottom}\"/>\n</g>\n",
        WIDTH - RIGHT
    ));
    w(&mut svg, format_args!("<g class=\"labels\" font-family=\"sans-serif\" font-size=\"11\">\n"));
    for sigmas in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let f = bands.center + sigmas * bands.one_sigma;
        w(&mut svg, format_args!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4e}</text>\n",
            px(LEFT - 6.0),
            px(frame.y(f) + 4.0),
            f
        ));
    }
    let ticks = m.min(16);
    for t in 0..ticks {
        let index = t * m / ticks;
        w(&mut svg, format_args!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(frame.x(index)),
            px(bottom + 16.0),
            sequence_label(report.base, report.k, index)
        ));
    }
    w(&mut svg, format_args!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">sequence</text>\n",
        px((LEFT + WIDTH - RIGHT) / 2.0),
        px(HEIGHT - 16.0)
    ));
    w(&mut svg, format_args!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">frequency</text>\n</g>\n",
        px((TOP + bottom) / 2.0),
        px((TOP + bottom) / 2.0)
    ));

    let radius = match m {
        0..=16 => 4.0,
        17..=256 => 2.5,
        _ => 1.2,
    };
    w(&mut svg, format_args!("<g class=\"markers\" fill=\"black\">\n"));
    for (index, &freq) in report.freqs.iter().enumerate() {
        w(&mut svg, format_args!(
            "<circle class=\"marker\" cx=\"{}\" cy=\"{}\" r=\"{radius}\" data-index=\"{index}\"/>\n",
            px(frame.x(index)),
            px(frame.y(freq))
        ));
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}
