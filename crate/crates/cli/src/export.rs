//! Spectrum and trajectory writers: JSON (full structure), CSV stick
//! lists, and a minimal SVG stick plot with inverted lines drawn
//! downward.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spinsim_core::geometry::BlochTrajectory;
use spinsim_core::spectrum::{Spectrum, Stick, Trace};

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported output format '{0}' (use .json, .csv or .svg)")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self, ExportError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(Self::Json),
            Some("csv") => Ok(Self::Csv),
            Some("svg") => Ok(Self::Svg),
            other => Err(ExportError::Format(other.unwrap_or("").into())),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StickFile {
    freq_hz: f64,
    absorptive: f64,
    dispersive: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceFile {
    freq_hz: Vec<f64>,
    absorptive: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpectrumFile {
    channel: String,
    linewidth_hz: f64,
    sticks: Vec<StickFile>,
    #[serde(default)]
    trace: Option<TraceFile>,
}

pub fn spectrum_to_json(spectrum: &Spectrum) -> Result<String, ExportError> {
    let file = SpectrumFile {
        channel: spectrum.channel.clone(),
        linewidth_hz: spectrum.linewidth_hz,
        sticks: spectrum
            .sticks
            .iter()
            .map(|s| StickFile {
                freq_hz: s.frequency_hz,
                absorptive: s.absorptive,
                dispersive: s.dispersive,
            })
            .collect(),
        trace: spectrum.trace.as_ref().map(|t| TraceFile {
            freq_hz: t.frequency_hz.clone(),
            absorptive: t.absorptive.clone(),
        }),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn spectrum_from_json(text: &str) -> Result<Spectrum, ExportError> {
    let file: SpectrumFile = serde_json::from_str(text)?;
    Ok(Spectrum {
        channel: file.channel,
        linewidth_hz: file.linewidth_hz,
        sticks: file
            .sticks
            .into_iter()
            .map(|s| Stick {
                frequency_hz: s.freq_hz,
                absorptive: s.absorptive,
                dispersive: s.dispersive,
            })
            .collect(),
        trace: file.trace.map(|t| Trace {
            frequency_hz: t.freq_hz,
            absorptive: t.absorptive,
        }),
    })
}

pub fn spectrum_to_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("freq_hz,abs,disp\n");
    for s in &spectrum.sticks {
        out.push_str(&format!("{},{},{}\n", s.frequency_hz, s.absorptive, s.dispersive));
    }
    out
}

/// Stick plot: absorptive amplitudes as vertical lines from the
/// baseline, negative (inverted) lines drawn downward.
pub fn spectrum_to_svg(spectrum: &Spectrum) -> String {
    let width = 800.0;
    let height = 400.0;
    let margin = 40.0;
    let baseline = height / 2.0;

    let fmax = spectrum
        .sticks
        .iter()
        .map(|s| s.frequency_hz.abs())
        .fold(1.0f64, f64::max)
        * 1.2;
    let amax = spectrum
        .sticks
        .iter()
        .map(|s| s.absorptive.abs().max(s.dispersive.abs()))
        .fold(1e-12f64, f64::max);

    let x_of = |f: f64| margin + (f + fmax) / (2.0 * fmax) * (width - 2.0 * margin);
    let y_of = |a: f64| baseline - a / amax * (height / 2.0 - margin);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{margin}\" y1=\"{baseline}\" x2=\"{}\" y2=\"{baseline}\" \
         stroke=\"#888\" stroke-width=\"1\"/>\n",
        width - margin
    ));
    if let Some(trace) = &spectrum.trace {
        let tmax = trace
            .absorptive
            .iter()
            .fold(1e-12f64, |a, &v| a.max(v.abs()));
        let pts: Vec<String> = trace
            .frequency_hz
            .iter()
            .zip(&trace.absorptive)
            .map(|(&f, &v)| format!("{:.2},{:.2}", x_of(f), baseline - v / tmax * (height / 2.0 - margin)))
            .collect();
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#bbb\" stroke-width=\"1\"/>\n",
            pts.join(" ")
        ));
    }
    for s in &spectrum.sticks {
        let x = x_of(s.frequency_hz);
        let class = if s.absorptive < 0.0 { "inverted" } else { "upright" };
        svg.push_str(&format!(
            "  <line class=\"{class}\" x1=\"{x:.2}\" y1=\"{baseline}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#1a4d8f\" stroke-width=\"2\"/>\n",
            y_of(s.absorptive)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#444\">{} / Hz</text>\n",
        width - margin - 60.0,
        baseline + 24.0,
        spectrum.channel
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Write a spectrum in the format implied by the file extension.
pub fn export_spectrum(spectrum: &Spectrum, path: &Path) -> Result<(), ExportError> {
    let format = Format::from_path(path)?;
    let body = match format {
        Format::Json => spectrum_to_json(spectrum)?,
        Format::Csv => spectrum_to_csv(spectrum),
        Format::Svg => spectrum_to_svg(spectrum),
    };
    write_file(path, &body)
}

pub fn trajectory_to_csv(traj: &BlochTrajectory) -> String {
    let mut out = String::from("time_s,x,y,z\n");
    for (t, v) in &traj.samples {
        out.push_str(&format!("{},{},{},{}\n", t, v[0], v[1], v[2]));
    }
    out
}

pub fn write_file(path: &Path, body: &str) -> Result<(), ExportError> {
    let mut f = std::fs::File::create(path).map_err(|source| ExportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(body.as_bytes()).map_err(|source| ExportError::Io {
        path: path.display().to_string(),
        source,
    })
}
