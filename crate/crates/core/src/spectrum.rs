//! Stick-spectrum synthesis from a density state.
//!
//! Detection follows the lowering-operator convention with receiver
//! phase 0 along +x: the coherence of an allowed transition `(r, s)`
//! contributes the complex amplitude `ρ_rs · μ_rs` at frequency
//! `E_s − E_r`.  The real part is the absorptive component, the
//! imaginary part the dispersive one, so an `I_x`-type coherence gives
//! a positive absorptive line and an `I_y`-type one a dispersive line.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::engine::DensityState;
use crate::system::SpinSystem;
use crate::{Error, Result};

/// One (possibly merged) spectral line.
#[derive(Debug, Clone, PartialEq)]
pub struct Stick {
    pub frequency_hz: f64,
    pub absorptive: f64,
    pub dispersive: f64,
}

impl Stick {
    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.absorptive, self.dispersive)
    }

    pub fn magnitude(&self) -> f64 {
        self.amplitude().norm()
    }
}

/// Lorentzian-broadened absorptive trace on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub frequency_hz: Vec<f64>,
    pub absorptive: Vec<f64>,
}

/// Stick list plus optional broadened trace for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub channel: String,
    pub linewidth_hz: f64,
    pub sticks: Vec<Stick>,
    pub trace: Option<Trace>,
}

/// Default full linewidth of the broadened trace.
pub const DEFAULT_LINEWIDTH_HZ: f64 = 10.0;

/// Grid points of the broadened trace.
pub const TRACE_POINTS: usize = 4096;

impl Spectrum {
    /// Normalize |absorptive| amplitudes to the smallest line that is
    /// not numerically zero.
    pub fn intensity_ratios(&self) -> Vec<f64> {
        let mags: Vec<f64> = self.sticks.iter().map(|s| s.absorptive.abs()).collect();
        let floor = 1e-9 * mags.iter().fold(0.0f64, |a, &b| a.max(b));
        let smallest = mags
            .iter()
            .copied()
            .filter(|&m| m > floor)
            .fold(f64::INFINITY, f64::min);
        if !smallest.is_finite() || smallest == 0.0 {
            return mags;
        }
        mags.iter().map(|m| m / smallest).collect()
    }

    /// Lines whose absorptive part dips below `-threshold` times the
    /// largest line magnitude.
    pub fn inverted_lines(&self, threshold: f64) -> Vec<usize> {
        let max_mag = self
            .sticks
            .iter()
            .map(Stick::magnitude)
            .fold(0.0f64, f64::max);
        self.sticks
            .iter()
            .enumerate()
            .filter(|(_, s)| s.absorptive < -threshold * max_mag)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn total_absorptive(&self) -> f64 {
        self.sticks.iter().map(|s| s.absorptive).sum()
    }
}

/// Synthesize the spectrum observed on `channel`, with receiver phase 0.
pub fn synthesize_spectrum(
    rho: &DensityState,
    system: &SpinSystem,
    channel: &str,
    linewidth_hz: f64,
) -> Result<Spectrum> {
    synthesize_spectrum_phased(rho, system, channel, linewidth_hz, 0.0)
}

/// Synthesize with an explicit receiver phase: every amplitude is
/// multiplied by `exp(-i·phase)`.
pub fn synthesize_spectrum_phased(
    rho: &DensityState,
    system: &SpinSystem,
    channel: &str,
    linewidth_hz: f64,
    receiver_phase: f64,
) -> Result<Spectrum> {
    let ch = system.channel_index(channel)?;
    if linewidth_hz.is_nan() || linewidth_hz <= 0.0 {
        return Err(Error::NonPositive("linewidth"));
    }
    let cat = &system.catalogs[ch];
    let rx = Complex64::cis(-receiver_phase);

    // merge degenerate transitions within each catalog group
    let mut sticks: Vec<Stick> = Vec::new();
    let mut group = usize::MAX;
    for t in &cat.entries {
        let amp = rho.matrix()[(t.r, t.s)] * t.moment.conj() * rx;
        if t.degeneracy_group == group {
            let last = sticks.last_mut().expect("group started");
            last.absorptive += amp.re;
            last.dispersive += amp.im;
        } else {
            group = t.degeneracy_group;
            sticks.push(Stick {
                frequency_hz: t.frequency_hz,
                absorptive: amp.re,
                dispersive: amp.im,
            });
        }
    }
    // drop merged lines with no intensity at all
    let peak = sticks
        .iter()
        .map(Stick::magnitude)
        .fold(0.0f64, f64::max);
    let keep = 1e-9 * peak.max(1e-300);
    sticks.retain(|s| s.magnitude() > keep);

    let trace = broadened_trace(&sticks, linewidth_hz);
    Ok(Spectrum {
        channel: channel.to_string(),
        linewidth_hz,
        sticks,
        trace,
    })
}

fn broadened_trace(sticks: &[Stick], linewidth_hz: f64) -> Option<Trace> {
    if sticks.is_empty() {
        return None;
    }
    let outermost = sticks
        .iter()
        .map(|s| s.frequency_hz.abs())
        .fold(0.0f64, f64::max);
    let span = (1.2 * outermost).max(50.0 * linewidth_hz);
    let half_width = linewidth_hz / 2.0;
    let n = TRACE_POINTS;
    let mut freqs = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let f = -span + 2.0 * span * (k as f64) / (n as f64 - 1.0);
        let mut v = 0.0;
        for s in sticks {
            let x = f - s.frequency_hz;
            v += s.absorptive * half_width / (core::f64::consts::PI * (x * x + half_width * half_width));
        }
        freqs.push(f);
        vals.push(v);
    }
    Some(Trace {
        frequency_hz: freqs,
        absorptive: vals,
    })
}

/// Trapezoid integral of the broadened trace.
pub fn trace_integral(trace: &Trace) -> f64 {
    let mut acc = 0.0;
    for w in trace.frequency_hz.windows(2).zip(trace.absorptive.windows(2)) {
        let (f, v) = w;
        acc += 0.5 * (v[0] + v[1]) * (f[1] - f[0]);
    }
    acc
}
