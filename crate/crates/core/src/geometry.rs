//! Bloch-sphere geometry of a two-level subspace: trajectories,
//! signed solid angles, and the split of an acquired phase into its
//! dynamical and geometric parts.
//!
//! The lower level `r` of a pair is the north pole.  Solid angles are
//! signed by the right-hand rule about the outward normal (a loop that
//! runs counterclockwise seen from outside the sphere has positive
//! area).  All phases are reported in `(-π, π]`; the identity
//! `geometric + dynamical ≡ total (mod 2π)` holds by construction.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::{mat_exp, ComplexMatrix, SubspacePair};
use crate::engine::{
    free_evolution_unitary, hard_pulse_unitary, selective_pulse_unitary, DensityState, PulseEvent,
    PulseSequence,
};
use crate::system::SpinSystem;
use crate::{Error, Result};

/// Bloch vector of the pair: `2·(Tr ρI_x, Tr ρI_y, Tr ρI_z)`, written
/// out against the pair's matrix elements.
pub fn bloch_vector(rho: &DensityState, pair: SubspacePair) -> [f64; 3] {
    let m = rho.matrix();
    let (r, s) = (pair.r, pair.s);
    let coherence = m[(r, s)];
    [
        2.0 * coherence.re,
        -2.0 * coherence.im,
        (m[(r, r)] - m[(s, s)]).re,
    ]
}

/// Sampled Bloch-sphere path of one subspace.
#[derive(Debug, Clone)]
pub struct BlochTrajectory {
    pub pair: SubspacePair,
    /// `(time, vector)` samples; instantaneous pulses advance the
    /// vector without advancing time.
    pub samples: Vec<(f64, [f64; 3])>,
}

impl BlochTrajectory {
    pub fn is_closed(&self, tol: f64) -> bool {
        match (self.samples.first(), self.samples.last()) {
            (Some((_, a)), Some((_, b))) => dist(a, b) <= tol,
            _ => false,
        }
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    libm::sqrt(
        (a[0] - b[0]) * (a[0] - b[0])
            + (a[1] - b[1]) * (a[1] - b[1])
            + (a[2] - b[2]) * (a[2] - b[2]),
    )
}

fn norm3(v: &[f64; 3]) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Record the trajectory of `pair` through a sequence, slicing every
/// pulse and delay into `steps_per_event` sub-steps (ideal pulses are
/// sliced in rotation angle so the path across the sphere is visible
/// even though they take no time).
pub fn record_trajectory(
    rho0: &DensityState,
    seq: &PulseSequence,
    system: &SpinSystem,
    pair: SubspacePair,
    steps_per_event: usize,
) -> Result<BlochTrajectory> {
    if steps_per_event < 8 {
        return Err(Error::NonPositive("steps_per_event (at least 8)"));
    }
    let mut rho = rho0.clone();
    let mut time = 0.0;
    let mut samples = vec![(time, bloch_vector(&rho, pair))];
    for event in seq {
        match event {
            PulseEvent::HardPulse {
                channel,
                flip,
                phase,
            } => {
                let step = hard_pulse_unitary(system, channel, flip / steps_per_event as f64, *phase)?;
                for _ in 0..steps_per_event {
                    rho = rho.evolve(&step);
                    samples.push((time, bloch_vector(&rho, pair)));
                }
            }
            PulseEvent::SelectivePulse {
                transition,
                flip,
                phase,
                duration,
                ..
            } => {
                let step =
                    selective_pulse_unitary(system, transition, flip / steps_per_event as f64, *phase)?;
                for _ in 0..steps_per_event {
                    rho = rho.evolve(&step);
                    samples.push((time, bloch_vector(&rho, pair)));
                }
                if *duration > 0.0 {
                    sample_delay(&mut rho, system, *duration, steps_per_event, &mut time, pair, &mut samples);
                }
            }
            PulseEvent::Delay { duration } => {
                sample_delay(&mut rho, system, *duration, steps_per_event, &mut time, pair, &mut samples);
            }
            PulseEvent::GradientCrusher => {
                rho = crate::engine::apply_gradient_crusher(&rho);
                samples.push((time, bloch_vector(&rho, pair)));
            }
            PulseEvent::AcquireMarker { .. } => {}
        }
    }
    Ok(BlochTrajectory { pair, samples })
}

#[allow(clippy::too_many_arguments)]
fn sample_delay(
    rho: &mut DensityState,
    system: &SpinSystem,
    duration: f64,
    steps: usize,
    time: &mut f64,
    pair: SubspacePair,
    samples: &mut Vec<(f64, [f64; 3])>,
) {
    let dt = duration / steps as f64;
    let step = free_evolution_unitary(system, dt);
    for _ in 0..steps {
        *rho = rho.evolve(&step);
        *time += dt;
        samples.push((*time, bloch_vector(rho, pair)));
    }
}

/// Signed solid angle of a closed loop of unit vectors.
///
/// The loop is fanned into spherical triangles against an apex taken
/// from the loop's own area vector; each triangle contributes its
/// signed excess via the tangent half-angle formula.  Long segments
/// are subdivided along great circles first.
pub fn solid_angle(traj: &BlochTrajectory) -> Result<f64> {
    let vs: Vec<[f64; 3]> = traj.samples.iter().map(|(_, v)| *v).collect();
    if vs.len() < 3 {
        return Err(Error::OpenLoop);
    }
    let mut worst = 0.0f64;
    for v in &vs {
        worst = worst.max((norm3(v) - 1.0).abs());
    }
    if worst > 1e-6 {
        return Err(Error::NotUnitLoop { worst });
    }
    if dist(&vs[0], &vs[vs.len() - 1]) > 1e-6 {
        return Err(Error::OpenLoop);
    }

    // drop duplicate consecutive points, close the loop
    let mut loop_pts: Vec<[f64; 3]> = Vec::with_capacity(vs.len());
    for v in vs {
        if loop_pts.last().map(|l| dist(l, &v) < 1e-12).unwrap_or(false) {
            continue;
        }
        loop_pts.push(v);
    }
    if loop_pts.len() >= 2 && dist(&loop_pts[0], loop_pts.last().unwrap()) < 1e-12 {
        loop_pts.pop();
    }
    if loop_pts.len() < 3 {
        return Ok(0.0);
    }

    // subdivide long edges so each triangle stays well conditioned
    let max_step = 0.35f64; // radians of arc
    let mut refined: Vec<[f64; 3]> = Vec::with_capacity(loop_pts.len() * 2);
    let m = loop_pts.len();
    for i in 0..m {
        let a = loop_pts[i];
        let b = loop_pts[(i + 1) % m];
        refined.push(a);
        let angle = libm::acos(dot(&a, &b).clamp(-1.0, 1.0));
        if angle > max_step {
            let pieces = libm::ceil(angle / max_step) as usize;
            for k in 1..pieces {
                let t = k as f64 / pieces as f64;
                // spherical interpolation along the great circle
                let sa = libm::sin((1.0 - t) * angle) / libm::sin(angle);
                let sb = libm::sin(t * angle) / libm::sin(angle);
                let mut p = [
                    sa * a[0] + sb * b[0],
                    sa * a[1] + sb * b[1],
                    sa * a[2] + sb * b[2],
                ];
                let n = norm3(&p);
                p = [p[0] / n, p[1] / n, p[2] / n];
                refined.push(p);
            }
        }
    }

    // orientation-aware apex: the loop's area vector
    let n = refined.len();
    let mut area_vec = [0.0f64; 3];
    for i in 0..n {
        let c = cross(&refined[i], &refined[(i + 1) % n]);
        area_vec[0] += c[0];
        area_vec[1] += c[1];
        area_vec[2] += c[2];
    }
    let apex = if norm3(&area_vec) > 1e-9 {
        let l = norm3(&area_vec);
        [area_vec[0] / l, area_vec[1] / l, area_vec[2] / l]
    } else {
        // zero-area loop: any apex reproduces the (zero) sum
        [0.0, 0.0, 1.0]
    };

    let mut total = 0.0;
    for i in 0..n {
        total += triangle_excess(&apex, &refined[i], &refined[(i + 1) % n]);
    }
    // The oriented area of a closed spherical curve is defined modulo
    // 4π (the two sides of the curve differ by the full sphere); report
    // the canonical representative in (-2π, 2π].  This keeps the value
    // invariant under rigid rotations and odd under reversal.
    let four_pi = 2.0 * core::f64::consts::TAU;
    let mut canon = total - four_pi * libm::round(total / four_pi);
    if canon <= -core::f64::consts::TAU {
        canon += four_pi;
    } else if canon > core::f64::consts::TAU {
        canon -= four_pi;
    }
    Ok(canon)
}

/// Signed spherical excess of the triangle `(a, b, c)`.
fn triangle_excess(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let triple = dot(a, &cross(b, c));
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * libm::atan2(triple, denom)
}

/// Output of [`phase_decompose`], all values wrapped to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    pub total: f64,
    pub dynamical: f64,
    pub geometric: f64,
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let tau = core::f64::consts::TAU;
    let mut y = x - tau * libm::round(x / tau);
    if y <= -core::f64::consts::PI {
        y += tau;
    }
    y
}

/// Split the phase acquired by the `|0⟩` pole component of `pair` over
/// an ideal-model sequence into dynamical and geometric parts.
///
/// The initial state must be a pure state inside the pair's span.  The
/// state is propagated at amplitude level under `h_eigen` (Hermitian,
/// in the eigenbasis, angular units) during delays and recorded pulse
/// durations, and under the system's pulse unitaries for pulses, which
/// take no time and therefore contribute nothing to the energy
/// integral.  `total` is the argument change of the `|r⟩` amplitude,
/// `dynamical` is `-∫⟨ψ|H|ψ⟩dt`, and `geometric` is their difference,
/// all reported modulo 2π.
pub fn phase_decompose(
    rho0: &DensityState,
    seq: &PulseSequence,
    system: &SpinSystem,
    pair: SubspacePair,
    h_eigen: &ComplexMatrix,
    steps_per_event: usize,
) -> Result<PhaseDecomposition> {
    if steps_per_event < 8 {
        return Err(Error::NonPositive("steps_per_event (at least 8)"));
    }
    let dim = rho0.dim();
    if h_eigen.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: h_eigen.dim(),
            right: dim,
        });
    }
    let psi0 = extract_pure_state(rho0, pair)?;

    let mut psi = psi0.clone();
    let mut dynamical_raw = 0.0f64;
    let energy = |psi: &[Complex64]| -> f64 {
        let mut acc = Complex64::ZERO;
        for r in 0..dim {
            let mut row = Complex64::ZERO;
            for c in 0..dim {
                row += h_eigen[(r, c)] * psi[c];
            }
            acc += psi[r].conj() * row;
        }
        acc.re
    };

    let evolve_for = |psi: &mut Vec<Complex64>, duration: f64, dynamical: &mut f64| -> Result<()> {
        if duration <= 0.0 {
            return Ok(());
        }
        let dt = duration / steps_per_event as f64;
        let step = mat_exp(&h_eigen.scale(Complex64::new(0.0, -dt)))?;
        for _ in 0..steps_per_event {
            let e0 = energy(psi);
            *psi = step.apply(psi);
            let e1 = energy(psi);
            *dynamical -= 0.5 * (e0 + e1) * dt;
        }
        Ok(())
    };

    for (index, event) in seq.iter().enumerate() {
        let fail = |e: Error| Error::EventFailed {
            index,
            reason: alloc::boxed::Box::new(e),
        };
        match event {
            PulseEvent::HardPulse {
                channel,
                flip,
                phase,
            } => {
                let u = hard_pulse_unitary(system, channel, *flip, *phase).map_err(fail)?;
                psi = u.apply(&psi);
            }
            PulseEvent::SelectivePulse {
                transition,
                flip,
                phase,
                duration,
                ..
            } => {
                let u = selective_pulse_unitary(system, transition, *flip, *phase).map_err(fail)?;
                psi = u.apply(&psi);
                evolve_for(&mut psi, *duration, &mut dynamical_raw).map_err(fail)?;
            }
            PulseEvent::Delay { duration } => {
                evolve_for(&mut psi, *duration, &mut dynamical_raw).map_err(fail)?;
            }
            PulseEvent::GradientCrusher => {
                return Err(fail(Error::BadOracle(
                    "phase decomposition requires a unitary sequence".into(),
                )))
            }
            PulseEvent::AcquireMarker { .. } => {}
        }
    }

    // total phase of the |0⟩ (north-pole) component; fall back to the
    // |1⟩ component with reversed sign when the pole is unoccupied
    let total_raw = if psi0[pair.r].norm() > 1e-6 && psi[pair.r].norm() > 1e-9 {
        (psi[pair.r] / psi0[pair.r]).arg()
    } else if psi0[pair.s].norm() > 1e-6 && psi[pair.s].norm() > 1e-9 {
        -(psi[pair.s] / psi0[pair.s]).arg()
    } else {
        return Err(Error::NotPureInSubspace);
    };

    let total = wrap_phase(total_raw);
    let dynamical = wrap_phase(dynamical_raw);
    let geometric = wrap_phase(total_raw - dynamical_raw);
    Ok(PhaseDecomposition {
        total,
        dynamical,
        geometric,
    })
}

/// Check that `rho` is (a multiple of) a pure state confined to the
/// pair's two levels and return the normalized state vector.
fn extract_pure_state(rho: &DensityState, pair: SubspacePair) -> Result<Vec<Complex64>> {
    let dim = rho.dim();
    let m = rho.matrix();
    let scale = m.max_abs().max(1e-300);
    for r in 0..dim {
        for c in 0..dim {
            let inside = (r == pair.r || r == pair.s) && (c == pair.r || c == pair.s);
            if !inside && m[(r, c)].norm() > 1e-9 * scale {
                return Err(Error::NotPureInSubspace);
            }
        }
    }
    let a = m[(pair.r, pair.r)].re;
    let d = m[(pair.s, pair.s)].re;
    let b = m[(pair.r, pair.s)];
    // rank-1 check: det ≈ 0 and trace > 0
    let trace = a + d;
    if trace <= 1e-12 * scale {
        return Err(Error::NotPureInSubspace);
    }
    let det = a * d - b.norm_sqr();
    if det.abs() > 1e-9 * scale * scale {
        return Err(Error::NotPureInSubspace);
    }
    // dominant eigenvector of the 2x2 block
    let mut psi = vec![Complex64::ZERO; dim];
    if a >= d {
        let n = libm::sqrt(a * a + b.norm_sqr());
        psi[pair.r] = Complex64::new(a / n, 0.0);
        psi[pair.s] = b.conj() * (1.0 / n);
    } else {
        let n = libm::sqrt(d * d + b.norm_sqr());
        psi[pair.r] = b * (1.0 / n);
        psi[pair.s] = Complex64::new(d / n, 0.0);
    }
    // normalize
    let nn = libm::sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
    for z in &mut psi {
        *z /= nn;
    }
    Ok(psi)
}
