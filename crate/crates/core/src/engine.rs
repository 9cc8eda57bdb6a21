//! Pulse-sequence execution on deviation density matrices.
//!
//! All states live in the eigenbasis of the system Hamiltonian, where
//! free evolution is a pure phase map.  Hard pulses rotate a whole
//! channel; selective pulses address one transition plus everything
//! degenerate with it on the same channel (with the flip angle scaled
//! by the ratio of transition moments, which is how a nominal π pulse
//! on a strong line acts as a π/2 pulse on a degenerate weak one).
//! Selective pulses come in two models: an instantaneous rotation
//! followed by free evolution for the recorded pulse duration, or a
//! time-sliced Gaussian drive integrated against the full Hamiltonian.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::algebra::{mat_exp, subspace_rotation, ComplexMatrix, SubspacePair};
use crate::system::SpinSystem;
use crate::{Error, Result};

/// Basis a density matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Eigenbasis of the system Hamiltonian (the working basis).
    Eigen,
}

/// Hermitian deviation density matrix.
#[derive(Debug, Clone)]
pub struct DensityState {
    matrix: ComplexMatrix,
    basis: BasisTag,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_hermitian(1e-10 * matrix.max_abs().max(1.0)));
        Self {
            matrix,
            basis: BasisTag::Eigen,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Conjugate by a unitary: `ρ → UρU†`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self {
            matrix: self.matrix.sandwich(u),
            basis: self.basis,
        }
    }
}

/// Shaped-pulse model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseModel {
    Ideal,
    Gaussian,
}

/// One event of a pulse program.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseEvent {
    /// Non-selective rotation of a whole channel.
    HardPulse {
        channel: String,
        flip: f64,
        phase: f64,
    },
    /// Rotation of one transition (and its degenerate companions).
    SelectivePulse {
        transition: String,
        flip: f64,
        phase: f64,
        /// Physical pulse length in seconds; the ideal model applies
        /// the instantaneous rotation and then free-evolves for this
        /// long, the shaped model stretches the Gaussian envelope
        /// over it.
        duration: f64,
        model: PulseModel,
    },
    Delay {
        duration: f64,
    },
    GradientCrusher,
    /// Marks the point where the receiver opens on `channel`.
    AcquireMarker {
        channel: String,
    },
}

/// Ordered list of events.
pub type PulseSequence = Vec<PulseEvent>;

/// Execution configuration.
#[derive(Debug, Clone, Copy)]
pub struct ExecModel {
    /// Replace ideal selective pulses by time-sliced Gaussian pulses.
    pub shaped: bool,
    /// Time slices per shaped pulse (at least 64).
    pub slices: usize,
}

impl Default for ExecModel {
    fn default() -> Self {
        Self {
            shaped: false,
            slices: 256,
        }
    }
}

/// `ρ → UρU†` with `U = exp(-iθ·(cos(p)·F_x + sin(p)·F_y))` on one channel.
pub fn apply_hard_pulse(
    rho: &DensityState,
    system: &SpinSystem,
    channel: &str,
    flip: f64,
    phase: f64,
) -> Result<DensityState> {
    Ok(rho.evolve(&hard_pulse_unitary(system, channel, flip, phase)?))
}

pub fn hard_pulse_unitary(
    system: &SpinSystem,
    channel: &str,
    flip: f64,
    phase: f64,
) -> Result<ComplexMatrix> {
    if !flip.is_finite() || !phase.is_finite() {
        return Err(Error::NonFinite);
    }
    let ch = system.channel_index(channel)?;
    let gen = system
        .fx(ch)
        .scale(Complex64::new(libm::cos(phase), 0.0))
        .add_ref(&system.fy(ch).scale(Complex64::new(libm::sin(phase), 0.0)));
    mat_exp(&gen.scale(Complex64::new(0.0, -flip)))
}

/// Unitary of an ideal selective pulse: the nominal rotation on the
/// addressed pair, co-rotations on every degenerate companion of the
/// same channel with the flip angle scaled by its relative moment.
pub fn selective_pulse_unitary(
    system: &SpinSystem,
    transition: &str,
    flip: f64,
    phase: f64,
) -> Result<ComplexMatrix> {
    if !flip.is_finite() || !phase.is_finite() {
        return Err(Error::NonFinite);
    }
    let (ch, idx) = system.find_transition(transition)?;
    let cat = &system.catalogs[ch];
    let target = &cat.entries[idx];
    let target_moment = target.moment.norm();
    let dim = system.dim();
    let mut u = ComplexMatrix::identity(dim);
    for i in cat.degenerate_set(idx) {
        let t = &cat.entries[i];
        let pair = SubspacePair::new(t.r, t.s, dim)?;
        let scaled_flip = flip * t.moment.norm() / target_moment;
        let rot = subspace_rotation(dim, pair, scaled_flip, phase)?;
        u = rot.mul_ref(&u);
    }
    Ok(u)
}

/// Instantaneous selective rotation; no Hamiltonian evolution.
pub fn apply_selective_pulse_ideal(
    rho: &DensityState,
    system: &SpinSystem,
    transition: &str,
    flip: f64,
    phase: f64,
) -> Result<DensityState> {
    Ok(rho.evolve(&selective_pulse_unitary(system, transition, flip, phase)?))
}

/// Propagator of a Gaussian-envelope selective pulse of length
/// `duration`, integrated in `slices` midpoint steps against
/// `H_int + H_rf(t)`.
///
/// The envelope is truncated at ±3σ with σ = duration/6 and the peak
/// amplitude is calibrated so the flip angle on the addressed
/// transition equals `flip`.  The drive is a rotating field on the
/// transition's channel at the transition frequency.
pub fn shaped_pulse_unitary(
    system: &SpinSystem,
    transition: &str,
    flip: f64,
    phase: f64,
    duration: f64,
    slices: usize,
) -> Result<ComplexMatrix> {
    if slices < 64 {
        return Err(Error::TooFewSlices { slices, min: 64 });
    }
    if duration.is_nan() || duration <= 0.0 {
        return Err(Error::NonPositive("shaped pulse duration"));
    }
    if !flip.is_finite() || !phase.is_finite() {
        return Err(Error::NonFinite);
    }
    let (ch, idx) = system.find_transition(transition)?;
    let t = &system.catalogs[ch].entries[idx];
    let f_t = t.frequency_hz;
    let moment = t.moment.norm();

    let sigma = duration / 6.0;
    let center = duration / 2.0;
    let envelope = |time: f64| -> f64 {
        let x = (time - center) / sigma;
        libm::exp(-0.5 * x * x)
    };
    // midpoint quadrature of the envelope fixes the calibration
    let dt = duration / slices as f64;
    let mut area = 0.0;
    for k in 0..slices {
        area += envelope((k as f64 + 0.5) * dt) * dt;
    }
    if flip != 0.0 && area <= 0.0 {
        return Err(Error::NonPositive("pulse envelope area"));
    }
    let peak = if area > 0.0 { flip / (moment * area) } else { 0.0 };

    let h_int = system.scheme.hamiltonian_eigen();
    let fx = system.fx(ch);
    let fy = system.fy(ch);
    let mut u = ComplexMatrix::identity(system.dim());
    for k in 0..slices {
        let time = (k as f64 + 0.5) * dt;
        let amp = peak * envelope(time);
        // rotating field whose stationary part in the interaction
        // frame is the axis-`phase` rotation; at zero transition
        // frequency it reduces to the static hard-pulse field
        let ang = TAU * f_t * time - phase;
        let h_rf = fx
            .scale(Complex64::new(amp * libm::cos(ang), 0.0))
            .sub_ref(&fy.scale(Complex64::new(amp * libm::sin(ang), 0.0)));
        let h_slice = h_int.add_ref(&h_rf);
        let step = mat_exp(&h_slice.scale(Complex64::new(0.0, -dt)))?;
        u = step.mul_ref(&u);
    }
    Ok(u)
}

/// Time-sliced Gaussian selective pulse.
pub fn apply_selective_pulse_shaped(
    rho: &DensityState,
    system: &SpinSystem,
    transition: &str,
    flip: f64,
    phase: f64,
    duration: f64,
    slices: usize,
) -> Result<DensityState> {
    Ok(rho.evolve(&shaped_pulse_unitary(
        system, transition, flip, phase, duration, slices,
    )?))
}

/// Free evolution `ρ → e^{-iHt} ρ e^{+iHt}` in the eigenbasis, where it
/// is a phase map on the coherences; populations never move.
pub fn free_evolve(rho: &DensityState, system: &SpinSystem, t: f64) -> Result<DensityState> {
    if t < 0.0 {
        return Err(Error::NonPositive("evolution time"));
    }
    let energies = system.scheme.energies_hz();
    let dim = rho.dim();
    let mut out = rho.matrix().clone();
    for r in 0..dim {
        for c in 0..dim {
            if r != c {
                let phase = -TAU * (energies[r] - energies[c]) * t;
                out[(r, c)] *= Complex64::cis(phase);
            }
        }
    }
    Ok(DensityState::new(out))
}

/// Idealized pulsed-field-gradient crusher: every off-diagonal element
/// (all coherence orders) is destroyed, populations are kept.
pub fn apply_gradient_crusher(rho: &DensityState) -> DensityState {
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for k in 0..dim {
        out[(k, k)] = rho.matrix()[(k, k)];
    }
    DensityState::new(out)
}

/// The refocusing block `[delay τ, π pulse, delay τ]` on one channel.
pub fn spin_echo_block(channel: &str, tau: f64) -> PulseSequence {
    let mut seq = PulseSequence::new();
    if tau > 0.0 {
        seq.push(PulseEvent::Delay { duration: tau });
    }
    seq.push(PulseEvent::HardPulse {
        channel: channel.into(),
        flip: core::f64::consts::PI,
        phase: core::f64::consts::FRAC_PI_2,
    });
    if tau > 0.0 {
        seq.push(PulseEvent::Delay { duration: tau });
    }
    seq
}

/// Duration after which evolution under a splitting of `delta_hz`
/// completes `k` full turns: `k / Δ`.
pub fn refocusing_delay(delta_hz: f64, k: u32) -> Result<f64> {
    if delta_hz.is_nan() || delta_hz <= 0.0 {
        return Err(Error::NonPositive("splitting"));
    }
    if k == 0 {
        return Err(Error::NonPositive("turn count"));
    }
    Ok(k as f64 / delta_hz)
}

fn apply_event(
    rho: &DensityState,
    system: &SpinSystem,
    event: &PulseEvent,
    model: &ExecModel,
) -> Result<DensityState> {
    match event {
        PulseEvent::HardPulse {
            channel,
            flip,
            phase,
        } => apply_hard_pulse(rho, system, channel, *flip, *phase),
        PulseEvent::SelectivePulse {
            transition,
            flip,
            phase,
            duration,
            model: pulse_model,
        } => {
            let shaped = *pulse_model == PulseModel::Gaussian || (model.shaped && *duration > 0.0);
            if shaped {
                apply_selective_pulse_shaped(
                    rho, system, transition, *flip, *phase, *duration, model.slices,
                )
            } else {
                let after = apply_selective_pulse_ideal(rho, system, transition, *flip, *phase)?;
                if *duration > 0.0 {
                    free_evolve(&after, system, *duration)
                } else {
                    Ok(after)
                }
            }
        }
        PulseEvent::Delay { duration } => free_evolve(rho, system, *duration),
        PulseEvent::GradientCrusher => Ok(apply_gradient_crusher(rho)),
        PulseEvent::AcquireMarker { channel } => {
            system.channel_index(channel)?;
            Ok(rho.clone())
        }
    }
}

/// Left fold of the sequence over the initial state.  The first event
/// that cannot be executed aborts the run with its index.
pub fn run_sequence(
    rho0: &DensityState,
    seq: &PulseSequence,
    system: &SpinSystem,
    model: &ExecModel,
) -> Result<DensityState> {
    let mut rho = rho0.clone();
    for (index, event) in seq.iter().enumerate() {
        rho = apply_event(&rho, system, event, model).map_err(|e| Error::EventFailed {
            index,
            reason: Box::new(e),
        })?;
    }
    Ok(rho)
}

/// Run until (and including) the first acquire marker, returning the
/// state at that point and the acquired channel.  Falls back to the
/// full run when no marker is present.
pub fn run_until_acquire(
    rho0: &DensityState,
    seq: &PulseSequence,
    system: &SpinSystem,
    model: &ExecModel,
) -> Result<(DensityState, Option<String>)> {
    let mut rho = rho0.clone();
    for (index, event) in seq.iter().enumerate() {
        rho = apply_event(&rho, system, event, model).map_err(|e| Error::EventFailed {
            index,
            reason: Box::new(e),
        })?;
        if let PulseEvent::AcquireMarker { channel } = event {
            return Ok((rho, Some(channel.clone())));
        }
    }
    Ok((rho, None))
}

/// Total propagator of a sequence in the ideal model (crushers and
/// markers are rejected since they are not unitary maps).
pub fn sequence_unitary(seq: &PulseSequence, system: &SpinSystem) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(system.dim());
    for (index, event) in seq.iter().enumerate() {
        let step = match event {
            PulseEvent::HardPulse {
                channel,
                flip,
                phase,
            } => hard_pulse_unitary(system, channel, *flip, *phase),
            PulseEvent::SelectivePulse {
                transition,
                flip,
                phase,
                duration,
                ..
            } => selective_pulse_unitary(system, transition, *flip, *phase).map(|rot| {
                if *duration > 0.0 {
                    free_evolution_unitary(system, *duration).mul_ref(&rot)
                } else {
                    rot
                }
            }),
            PulseEvent::Delay { duration } => Ok(free_evolution_unitary(system, *duration)),
            PulseEvent::GradientCrusher | PulseEvent::AcquireMarker { .. } => Err(Error::BadOracle(
                "sequence contains a non-unitary event".into(),
            )),
        }
        .map_err(|e| Error::EventFailed {
            index,
            reason: Box::new(e),
        })?;
        u = step.mul_ref(&u);
    }
    Ok(u)
}

pub fn free_evolution_unitary(system: &SpinSystem, t: f64) -> ComplexMatrix {
    let phases: Vec<Complex64> = system
        .scheme
        .energies_hz()
        .iter()
        .map(|&e| Complex64::cis(-TAU * e * t))
        .collect();
    ComplexMatrix::from_diag(&phases)
}
