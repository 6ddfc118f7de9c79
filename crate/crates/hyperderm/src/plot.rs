//! Minimal deterministic SVG line plots for spectra.
//!
//! Hand-rolled on purpose: the output is a test surface, so it must be
//! byte-stable across runs and machines. Everything is fixed-layout,
//! coordinates are printed with two decimals, and series colors come from
//! a fixed palette (line style varies once the palette wraps).

use std::path::Path;

use thiserror::Error;

use crate::fsio;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("series '{label}' has {wavelengths} wavelengths but {values} values")]
    MismatchedSeries {
        label: String,
        wavelengths: usize,
        values: usize,
    },
    #[error("series '{label}' has no points")]
    EmptySeries { label: String },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One labeled curve.
#[derive(Clone, Debug)]
pub struct PlotSeries {
    pub label: String,
    pub wavelengths: Vec<f64>,
    pub values: Vec<f64>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 64.0;
const PLOT_RIGHT: f64 = 640.0;
const PLOT_TOP: f64 = 40.0;
const PLOT_BOTTOM: f64 = 420.0;
/// The instrument's spectral range; the x-axis never rescales, so plots
/// from different runs are visually comparable.
const X_MIN_NM: f64 = 450.0;
const X_MAX_NM: f64 = 950.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn esc(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn stroke_for(i: usize) -> (&'static str, &'static str) {
    let color = PALETTE[i % PALETTE.len()];
    let dash = match i / PALETTE.len() {
        0 => "",
        1 => "6 3",
        _ => "2 2",
    };
    (color, dash)
}

/// Renders spectra as a fixed-size SVG: x-axis 450-950 nm, y-axis from
/// zero (or below, if any value is negative) to a tenth-rounded ceiling,
/// one polyline per series, legend labels equal to series labels.
pub fn spectra_svg(series: &[PlotSeries], title: &str) -> Result<String, PlotError> {
    for s in series {
        if s.wavelengths.len() != s.values.len() {
            return Err(PlotError::MismatchedSeries {
                label: s.label.clone(),
                wavelengths: s.wavelengths.len(),
                values: s.values.len(),
            });
        }
        if s.values.is_empty() {
            return Err(PlotError::EmptySeries {
                label: s.label.clone(),
            });
        }
    }

    let finite = series
        .iter()
        .flat_map(|s| s.values.iter())
        .copied()
        .filter(|v| v.is_finite());
    let mut y_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    for v in finite {
        y_max = y_max.max(v);
        y_min = y_min.min(v);
    }
    if !y_max.is_finite() {
        y_max = 1.0;
        y_min = 0.0;
    }
    // Round the ceiling up to a tenth so tick labels stay short; the floor
    // is zero unless data dips below it.
    let y_hi = ((y_max * 10.0).ceil() / 10.0).max(0.1);
    let y_lo = if y_min < 0.0 {
        (y_min * 10.0).floor() / 10.0
    } else {
        0.0
    };

    let x_of = |nm: f64| PLOT_LEFT + (nm - X_MIN_NM) / (X_MAX_NM - X_MIN_NM) * (PLOT_RIGHT - PLOT_LEFT);
    let y_of = |v: f64| PLOT_BOTTOM - (v - y_lo) / (y_hi - y_lo) * (PLOT_BOTTOM - PLOT_TOP);

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        esc(title)
    ));

    // Gridlines and ticks: x every 50 nm, y in quarters.
    let mut nm = X_MIN_NM;
    while nm <= X_MAX_NM {
        let x = x_of(nm);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{PLOT_TOP}\" x2=\"{x:.2}\" y2=\"{PLOT_BOTTOM}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{nm:.0}</text>\n",
            PLOT_BOTTOM + 16.0
        ));
        nm += 50.0;
    }
    for i in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{PLOT_LEFT}\" y1=\"{y:.2}\" x2=\"{PLOT_RIGHT}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{v:.2}</text>\n",
            PLOT_LEFT - 6.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{PLOT_LEFT}\" y=\"{PLOT_TOP}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">wavelength (nm)</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        PLOT_BOTTOM + 36.0
    ));

    for (i, s) in series.iter().enumerate() {
        let (color, dash) = stroke_for(i);
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let points: Vec<String> = s
            .wavelengths
            .iter()
            .zip(&s.values)
            .filter(|(nm, v)| nm.is_finite() && v.is_finite())
            .map(|(&nm, &v)| format!("{:.2},{:.2}", x_of(nm), y_of(v)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr} points=\"{}\"/>\n",
            points.join(" ")
        ));
    }

    // Legend, one row per series, to the right of the plot.
    for (i, s) in series.iter().enumerate() {
        let (color, dash) = stroke_for(i);
        let y = PLOT_TOP + 14.0 + 18.0 * i as f64;
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr}/>\n",
            PLOT_RIGHT + 12.0,
            PLOT_RIGHT + 36.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            PLOT_RIGHT + 42.0,
            y + 4.0,
            esc(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders and writes atomically.
pub fn write_spectra_svg(
    path: &Path,
    series: &[PlotSeries],
    title: &str,
) -> Result<(), PlotError> {
    let svg = spectra_svg(series, title)?;
    fsio::write_atomic(path, svg.as_bytes()).map_err(|source| PlotError::Io {
        path: path.display().to_string(),
        source,
    })
}
