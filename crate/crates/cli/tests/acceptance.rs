//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Every tolerance is pinned here, in code.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use spinsim_cli::sysfile::load_system;
use spinsim_core::algebra::{
    commutator, equal_up_to_global_phase, single_transition_op, subspace_rotation, Axis,
    ComplexMatrix, SubspacePair,
};
use spinsim_core::algorithms::{
    self, dj_expected_state, dj_run, geometric_phase_gate, parity_oracle, parity_run,
    selective_pulse_length, soss_sequence, DJClass, DJFunction, Parity, ParityString,
};
use spinsim_core::engine::{
    apply_hard_pulse, free_evolve, refocusing_delay, run_sequence, selective_pulse_unitary,
    shaped_pulse_unitary, free_evolution_unitary, ExecModel,
};
use spinsim_core::geometry::{phase_decompose, record_trajectory, solid_angle, wrap_phase};
use spinsim_core::spectrum::{synthesize_spectrum, Spectrum};
use spinsim_core::system::{presets, SpinSystem};
use spinsim_core::DensityState;

fn systems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn bundled(name: &str) -> SpinSystem {
    let spec = load_system(&systems_dir().join(name)).expect("bundled system file loads");
    SpinSystem::build(spec).expect("bundled system builds")
}

fn readout(sys: &SpinSystem, channel: &str, flip: f64) -> Spectrum {
    let rho = apply_hard_pulse(&sys.equilibrium(), sys, channel, flip, FRAC_PI_2).unwrap();
    synthesize_spectrum(&rho, sys, channel, 10.0).unwrap()
}

fn assert_ratio_pattern(spec: &Spectrum, pattern: &[f64], rel_tol: f64) {
    let ratios = spec.intensity_ratios();
    assert_eq!(ratios.len(), pattern.len(), "line count ({ratios:?})");
    let smallest = pattern.iter().copied().fold(f64::INFINITY, f64::min);
    for (r, p) in ratios.iter().zip(pattern) {
        let expect = p / smallest;
        assert!(
            (r - expect).abs() / expect <= rel_tol,
            "ratios {ratios:?} vs pattern {pattern:?}"
        );
    }
}

fn pole_state(sys: &SpinSystem, level: usize) -> DensityState {
    let mut m = ComplexMatrix::zeros(sys.dim());
    m[(level, level)] = Complex64::ONE;
    DensityState::new(m)
}

/// Operator algebra: the defining matrix entries, the pair-swap
/// symmetries and the cyclic commutators hold exactly, and both
/// connected-transition commutators hold for every level triple in
/// every dimension from 3 to 16.
#[test]
fn criterion_01_operator_algebra() {
    const TOL: f64 = 1e-12;
    for dim in 3..=16usize {
        for t in 0..dim {
            for r in (t + 1)..dim {
                // defining entries and z-trace
                let pair = SubspacePair::new(t, r, dim).unwrap();
                let x = single_transition_op(dim, pair, Axis::X).unwrap();
                let y = single_transition_op(dim, pair, Axis::Y).unwrap();
                let z = single_transition_op(dim, pair, Axis::Z).unwrap();
                assert_eq!(x[(t, r)], Complex64::new(0.5, 0.0));
                assert_eq!(y[(t, r)], Complex64::new(0.0, -0.5));
                assert_eq!(z[(t, t)], Complex64::new(0.5, 0.0));
                assert!(z.trace().norm() <= TOL);
                // cyclic algebra on the pair
                for (a, b, g) in [(&x, &y, &z), (&y, &z, &x), (&z, &x, &y)] {
                    let comm = commutator(a, b).unwrap();
                    assert!(comm.max_abs_diff(&g.scale(Complex64::I)) <= TOL);
                }
                // connected-transition commutators for all triples
                for s in (r + 1)..dim {
                    let x_tr = x.clone();
                    let y_tr = y.clone();
                    let x_ts =
                        single_transition_op(dim, SubspacePair::new(t, s, dim).unwrap(), Axis::X)
                            .unwrap();
                    let rs = SubspacePair::new(r, s, dim).unwrap();
                    let e1 = single_transition_op(dim, rs, Axis::Y)
                        .unwrap()
                        .scale(Complex64::new(0.0, 0.5));
                    let e2 = single_transition_op(dim, rs, Axis::X)
                        .unwrap()
                        .scale(Complex64::new(0.0, 0.5));
                    assert!(commutator(&x_tr, &x_ts).unwrap().max_abs_diff(&e1) <= TOL);
                    assert!(commutator(&y_tr, &x_ts).unwrap().max_abs_diff(&e2) <= TOL);
                }
            }
        }
    }
    println!("acceptance criterion 1 (operator algebra): PASS");
}

/// Geometric gate law: the two-π-pulse composition on any pair equals
/// the diagonal phase gate with e^{±iφ} on that pair, up to a global
/// phase, to 1e-10 in the ideal model.
#[test]
fn criterion_02_geometric_gate_law() {
    const TOL: f64 = 1e-10;
    for dim in [4usize, 6, 8, 16] {
        for r in 0..dim {
            for s in (r + 1)..dim {
                let pair = SubspacePair::new(r, s, dim).unwrap();
                for &phi in &[FRAC_PI_2, PI, 1.5 * PI, TAU] {
                    let u1 = subspace_rotation(dim, pair, PI, FRAC_PI_2).unwrap();
                    let u2 = subspace_rotation(dim, pair, PI, 1.5 * PI - phi).unwrap();
                    let composed = u2.mul_ref(&u1);
                    let mut target = ComplexMatrix::identity(dim);
                    target[(r, r)] = Complex64::cis(phi);
                    target[(s, s)] = Complex64::cis(-phi);
                    assert!(
                        equal_up_to_global_phase(&composed, &target, TOL).unwrap(),
                        "dim {dim} pair ({r},{s}) phi {phi}"
                    );
                }
            }
        }
    }
    println!("acceptance criterion 2 (geometric gate law): PASS");
}

/// Solid angle: the two-π-pulse loop from the pole subtends |Ω| = 2φ
/// within 1e-3 rad at 256 samples.  The oriented area of a closed
/// spherical loop is a mod-4π quantity and the library reports the
/// representative in (-2π, 2π], so 2φ is asserted modulo 4π; for
/// φ ≤ π (including the full great-circle case 2φ = 2π) the value is
/// literal.
#[test]
fn criterion_03_solid_angle() {
    let sys = SpinSystem::build(presets::ch3cn()).unwrap();
    let pair = SubspacePair::new(1, 2, sys.dim()).unwrap();
    for &phi in &[PI / 4.0, FRAC_PI_2, PI, 1.5 * PI] {
        let seq: spinsim_core::PulseSequence = vec![
            spinsim_core::PulseEvent::SelectivePulse {
                transition: "2".into(),
                flip: PI,
                phase: FRAC_PI_2,
                duration: 0.0,
                model: spinsim_core::engine::PulseModel::Ideal,
            },
            spinsim_core::PulseEvent::SelectivePulse {
                transition: "2".into(),
                flip: PI,
                phase: 1.5 * PI - phi,
                duration: 0.0,
                model: spinsim_core::engine::PulseModel::Ideal,
            },
        ];
        let traj = record_trajectory(&pole_state(&sys, 1), &seq, &sys, pair, 128).unwrap();
        assert!(traj.is_closed(1e-6));
        let omega = solid_angle(&traj).unwrap();
        let target = 2.0 * phi;
        let complement = 2.0 * TAU - target;
        let err = (omega.abs() - target)
            .abs()
            .min((omega.abs() - complement).abs());
        assert!(err <= 1e-3, "phi {phi}: |Ω| = {}", omega.abs());
        if phi <= PI {
            assert!((omega.abs() - target).abs() <= 1e-3, "phi {phi}");
        }
    }
    println!("acceptance criterion 3 (solid angle): PASS");
}

/// Equilibrium spectra of the bundled system files: line ratios within
/// 1% and splittings exact to numerical precision.
#[test]
fn criterion_04_equilibrium_spectra() {
    let ch3i = bundled("ch3i.json");
    let h = readout(&ch3i, "1H", FRAC_PI_2);
    assert_ratio_pattern(&h, &[1.0, 1.0, 2.0, 2.0, 1.0, 1.0], 0.01);
    let f = |s: &Spectrum, i: usize| s.sticks[i].frequency_hz;
    assert!((f(&h, 2) - f(&h, 0) - 3553.0).abs() < 1e-6);
    let c = readout(&ch3i, "13C", FRAC_PI_2);
    assert_ratio_pattern(&c, &[1.0, 3.0, 3.0, 1.0], 0.01);
    assert!((f(&c, 1) - f(&c, 0) - 2053.0).abs() < 1e-6);

    let ch3cn = bundled("ch3cn.json");
    let h = readout(&ch3cn, "1H", FRAC_PI_2);
    assert_ratio_pattern(&h, &[1.0, 2.0, 1.0], 0.01);
    assert!((f(&h, 1) - f(&h, 0) - 4968.0).abs() < 1e-6);

    let ch2fcn = bundled("ch2fcn.json");
    let h = readout(&ch2fcn, "1H", FRAC_PI_2);
    assert_ratio_pattern(&h, &[1.0, 1.0, 1.0, 1.0], 0.01);
    assert!((f(&h, 2) - f(&h, 0) - 5694.0).abs() < 1e-6);
    let fl = readout(&ch2fcn, "19F", FRAC_PI_2);
    assert_ratio_pattern(&fl, &[1.0, 2.0, 1.0], 0.01);
    assert!((f(&fl, 1) - f(&fl, 0) - 473.0).abs() < 1e-6);
    println!("acceptance criterion 4 (equilibrium spectra): PASS");
}

/// Post-SOSS small-angle ratios within 2%.
#[test]
fn criterion_05_soss() {
    let cases: [(&str, &str, &[f64]); 3] = [
        ("ch3i.json", "1H", &[3.0, 3.0, 4.0, 4.0, 3.0, 3.0]),
        ("ch3cn.json", "1H", &[3.0, 4.0, 3.0]),
        ("ch2fcn.json", "19F", &[1.0, 1.0, 1.0]),
    ];
    for (file, channel, pattern) in cases {
        let sys = bundled(file);
        let seq = soss_sequence(&sys).unwrap();
        let rho = run_sequence(&sys.equilibrium(), &seq, &sys, &ExecModel::default()).unwrap();
        let read = apply_hard_pulse(&rho, &sys, channel, 0.05, FRAC_PI_2).unwrap();
        let spec = synthesize_spectrum(&read, &sys, channel, 10.0).unwrap();
        assert_ratio_pattern(&spec, pattern, 0.02);
    }
    println!("acceptance criterion 5 (symmetric-state selection): PASS");
}

/// Refocusing: the full-turn durations k/Δ match the published pulse
/// lengths within 2%, and free evolution for those durations returns
/// every relevant coherence phase to a multiple of 2π within 0.15 rad.
/// For the carbon-proton system the heteronuclear term is carried by
/// the spin echo (criterion 7 and the engine echo test), so its
/// homonuclear part is what the delay must rephase.
#[test]
fn criterion_06_refocusing() {
    for (delta, k, published) in [
        (3553.0, 20u32, 5.65e-3),
        (4968.0, 26, 5.229e-3),
        (473.0, 6, 12.85e-3),
    ] {
        let t = refocusing_delay(delta, k).unwrap();
        assert!(
            (t - published).abs() / published < 0.02,
            "k/Δ = {t} vs published {published}"
        );
    }

    let phase_check = |sys: &SpinSystem, channel: &str, t: f64| {
        let rho = apply_hard_pulse(&sys.equilibrium(), sys, channel, FRAC_PI_2, FRAC_PI_2).unwrap();
        let evolved = free_evolve(&rho, sys, t).unwrap();
        let cat = sys.catalog(channel).unwrap();
        for tr in &cat.entries {
            let before = rho.matrix()[(tr.r, tr.s)];
            if before.norm() < 1e-9 {
                continue;
            }
            let after = evolved.matrix()[(tr.r, tr.s)];
            let dphi = (after / before).arg();
            assert!(
                dphi.abs() <= 0.15,
                "{channel} {}: residual {dphi}",
                tr.label
            );
        }
    };

    // carbon-proton system with the echoed heteronuclear term removed
    let mut spec = presets::ch3i();
    spec.hetero_couplings[0].d_hz = 0.0;
    let ch3i_homo = SpinSystem::build(spec).unwrap();
    phase_check(&ch3i_homo, "1H", refocusing_delay(3553.0, 20).unwrap());

    let ch3cn = bundled("ch3cn.json");
    phase_check(&ch3cn, "1H", refocusing_delay(4968.0, 26).unwrap());

    // fluorine coherences rephase under the heteronuclear coupling
    let ch2fcn = bundled("ch2fcn.json");
    phase_check(&ch2fcn, "19F", refocusing_delay(473.0, 6).unwrap());
    println!("acceptance criterion 6 (refocusing delays): PASS");
}

/// Dynamical-phase removal: over every refocused gate block used in
/// criteria 2 and 9 the decomposition reports |dynamical| ≤ 1e-3 rad,
/// and the geometric phase relative to the zero-φ block equals φ.
/// (The echo itself carries a fixed spinor phase — a half-integer spin
/// driven around a full great circle — which the baseline removes.)
#[test]
fn criterion_07_dynamical_phase_removal() {
    let check_gate = |sys: &SpinSystem, transition: &str, phi: f64| {
        let (ch, idx) = sys.find_transition(transition).unwrap();
        let t = &sys.catalogs[ch].entries[idx];
        let pair = SubspacePair::new(t.r, t.s, sys.dim()).unwrap();
        let h = sys.scheme.hamiltonian_eigen();
        let decompose = |phi: f64| {
            let seq = geometric_phase_gate(sys, transition, phi).unwrap();
            phase_decompose(&pole_state(sys, t.r), &seq, sys, pair, &h, 32).unwrap()
        };
        let out = decompose(phi);
        let baseline = decompose(0.0);
        assert!(
            out.dynamical.abs() <= 1e-3,
            "{transition} φ={phi}: dynamical {}",
            out.dynamical
        );
        assert!(baseline.dynamical.abs() <= 1e-3);
        assert!(
            wrap_phase(out.geometric - baseline.geometric - phi).abs() <= 1e-3,
            "{transition} φ={phi}: geometric {} (baseline {})",
            out.geometric,
            baseline.geometric
        );
    };

    // the four phase-shift gates of criterion 2
    let ch3i = bundled("ch3i.json");
    for &phi in &[FRAC_PI_2, PI, 1.5 * PI, TAU] {
        check_gate(&ch3i, "C1", phi);
    }
    // every phase gate appearing in the oracle decompositions of
    // criterion 9
    let ch2fcn = bundled("ch2fcn.json");
    let gates: [(&str, f64); 12] = [
        ("H2", -2.0 * PI / 3.0),
        ("H2", PI / 3.0),
        ("H2", PI),
        ("H3", PI / 6.0),
        ("H3", PI / 2.0),
        ("H4", -PI / 2.0),
        ("H4", PI / 2.0),
        ("H4", PI),
        ("F1", PI / 6.0),
        ("F1", PI / 2.0),
        ("F3", PI / 3.0),
        ("F3", PI),
    ];
    for (label, phi) in gates {
        check_gate(&ch2fcn, label, phi);
    }
    println!("acceptance criterion 7 (dynamical-phase removal): PASS");
}

/// Deutsch-Jozsa: f1 gives the √3 : 3 : √3 register pattern, all
/// positive, classified constant; f3, f5, f7 reach their predicted
/// final states with fidelity ≥ 0.999 and classify balanced; the even
/// functions equal their partners up to a global phase at 1e-12.
#[test]
fn criterion_08_deutsch_jozsa() {
    let out = dj_run(&DJFunction::new(1).unwrap()).unwrap();
    assert_eq!(out.classification, DJClass::Constant);
    let amps: Vec<f64> = out.line_report.iter().map(|l| l.absorptive).collect();
    let sqrt3 = 3.0f64.sqrt();
    let scale = amps[0] / sqrt3;
    for (a, e) in amps.iter().zip([sqrt3, 3.0, sqrt3]) {
        assert!(*a > 0.0);
        assert!((a / scale - e).abs() / e <= 0.02, "pattern {amps:?}");
    }

    let sys = SpinSystem::build(presets::ch3cn()).unwrap();
    for id in [3u8, 5, 7] {
        let f = DJFunction::new(id).unwrap();
        let out = dj_run(&f).unwrap();
        assert_eq!(out.classification, DJClass::Balanced, "f{id}");
        let expect = dj_expected_state(&sys, &f).unwrap();
        let overlap: Complex64 = out
            .manifold_state
            .iter()
            .zip(&expect)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(
            overlap.norm_sqr() >= 0.999,
            "f{id}: fidelity {}",
            overlap.norm_sqr()
        );
    }

    for (odd, even) in [(1u8, 2u8), (3, 4), (5, 6), (7, 8)] {
        let a = algorithms::u_fi(&DJFunction::new(odd).unwrap());
        let b = algorithms::u_fi(&DJFunction::new(even).unwrap());
        assert!(equal_up_to_global_phase(&a, &b, 1e-12).unwrap());
        // classification is exhaustive over all eight functions
        let fe = DJFunction::new(even).unwrap();
        assert_eq!(dj_run(&fe).unwrap().classification, fe.classify());
    }
    println!("acceptance criterion 8 (Deutsch-Jozsa): PASS");
}

/// Parity: all eight published oracles compile to pulse sequences
/// whose gate products match the diagonal targets up to a global phase
/// at 1e-8, and the inverted-fluorine-line count reproduces the
/// string's parity in every case.
#[test]
fn criterion_09_parity() {
    let sys = bundled("ch2fcn.json");
    let strings = [
        "000000", "010000", "000100", "000001", "000101", "010001", "010100", "010101",
    ];
    for s in strings {
        let x = ParityString::parse(s).unwrap();
        let (seq, target) = parity_oracle(&sys, &x).unwrap();
        let product = algorithms::oracle_product_on_manifold(&sys, &seq).unwrap();
        assert!(
            equal_up_to_global_phase(&product, &target, 1e-8).unwrap(),
            "oracle {s}"
        );
        let out = parity_run(&x).unwrap();
        assert_eq!(out.parity, x.parity(), "string {s}");
        let expected_parity = if x.popcount() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        };
        assert_eq!(out.parity, expected_parity);
    }
    println!("acceptance criterion 9 (parity algorithm): PASS");
}

/// Shaped-pulse validation: a Gaussian selective π pulse reaches
/// subspace fidelity ≥ 0.99 against the ideal pulse once
/// splitting × duration ≥ 20, and the fidelity is monotone over a
/// five-point scan of that product.
#[test]
fn criterion_10_shaped_pulses() {
    fn fidelity_at(product: f64, duration: f64, slices: usize) -> f64 {
        let mut spec = presets::ch3cn();
        spec.equivalent_group.d_homo_hz = product / duration / 3.0;
        let sys = SpinSystem::build(spec).unwrap();
        let u_shaped = shaped_pulse_unitary(&sys, "1", PI, FRAC_PI_2, duration, slices).unwrap();
        let undo = free_evolution_unitary(&sys, duration).dagger();
        let u_int = undo.mul_ref(&u_shaped);
        let u_ideal = selective_pulse_unitary(&sys, "1", PI, FRAC_PI_2).unwrap();
        let (_, idx) = sys.find_transition("1").unwrap();
        let t = &sys.catalogs[0].entries[idx];
        let mut overlap = Complex64::ZERO;
        let mut weight = 0.0;
        for &a in &[t.r, t.s] {
            for &b in &[t.r, t.s] {
                overlap += u_ideal[(a, b)].conj() * u_int[(a, b)];
                weight += u_int[(a, b)].norm_sqr();
            }
        }
        overlap.norm() / (2.0 * (weight / 2.0).sqrt())
    }

    let duration = 4.0e-3;
    let products = [2.0, 5.0, 10.0, 20.0, 40.0];
    let fids: Vec<f64> = products
        .iter()
        .map(|&p| fidelity_at(p, duration, 256 * ((p as usize / 10) + 1)))
        .collect();
    for w in fids.windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "not monotone: {fids:?}");
    }
    assert!(fids[3] >= 0.99, "fidelity at product 20: {}", fids[3]);
    assert!(fids[4] >= 0.99, "fidelity at product 40: {}", fids[4]);

    // the selective pulses of the bundled systems sit above threshold
    for file in ["ch3i.json", "ch3cn.json"] {
        let sys = bundled(file);
        let dur = selective_pulse_length(&sys).unwrap();
        let splitting = 3.0 * sys.spec.equivalent_group.d_homo_hz;
        assert!(splitting * dur >= 20.0, "{file}");
    }
    println!("acceptance criterion 10 (shaped-pulse validation): PASS");
}
