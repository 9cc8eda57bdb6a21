//! Command-line surface.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use spinsim_core::algebra::{equal_up_to_global_phase, ComplexMatrix, SubspacePair};
use spinsim_core::algorithms::{dj_run, parity_run, DJClass, DJFunction, Parity, ParityString};
use spinsim_core::engine::{run_until_acquire, sequence_unitary, ExecModel};
use spinsim_core::geometry::record_trajectory;
use spinsim_core::spectrum::synthesize_spectrum;
use spinsim_core::system::{SpinSystem, SpinSystemSpec};

use crate::export;
use crate::program::{parse_program, scan_system_path};
use crate::sysfile;

#[derive(Parser)]
#[command(
    name = "spinsim",
    about = "Simulate transition-selective pulse experiments on strongly dipolar-coupled spin systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pulse program and export the spectrum at the acquire point.
    Simulate(SimulateArgs),
    /// Run the two-qubit Deutsch-Jozsa algorithm on the bundled
    /// three-proton system.
    Dj(DjArgs),
    /// Run the qubit-qutrit parity algorithm on the bundled
    /// proton-fluorine system.
    Parity(ParityArgs),
    /// Compare a program's total propagator against a target unitary.
    VerifyGate(VerifyGateArgs),
    /// Record the Bloch trajectory of a level pair through a program.
    Trajectory(TrajectoryArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// System definition (JSON); may also come from the program's
    /// `system` line.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Pulse program.
    #[arg(long)]
    program: PathBuf,
    /// Output spectrum (.json, .csv or .svg).
    #[arg(long)]
    out: PathBuf,
    /// Lorentzian linewidth of the broadened trace, Hz.
    #[arg(long, default_value_t = 10.0)]
    lw: f64,
    /// Integrate selective pulses as time-sliced Gaussian pulses.
    #[arg(long)]
    shaped: bool,
}

#[derive(Args)]
struct DjArgs {
    /// Function f1..f8 (even functions share their partner's pulses up
    /// to a global phase).
    #[arg(long)]
    function: String,
    /// Optional spectrum output (.json, .csv or .svg).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParityArgs {
    /// Six-bit binary string, e.g. 010101.
    #[arg(long)]
    string: String,
    /// Optional spectrum output (.json, .csv or .svg).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyGateArgs {
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long)]
    program: PathBuf,
    /// Target unitary (JSON: {"rows": [[[re, im], ...], ...]}).
    #[arg(long)]
    target: PathBuf,
    /// Largest admissible entry deviation after global-phase alignment.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long)]
    program: PathBuf,
    /// Level pair "r,s" (1-based, as in the level diagrams).
    #[arg(long)]
    pair: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Samples per event.
    #[arg(long, default_value_t = 64)]
    steps: usize,
}

/// Entry point used by the binary and the tests.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Dj(args) => dj(args),
        Command::Parity(args) => parity(args),
        Command::VerifyGate(args) => verify_gate(args),
        Command::Trajectory(args) => trajectory(args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

/// Load the system from the explicit flag or the program's own
/// `system` line (resolved relative to the program file).
fn resolve_system(
    flag: &Option<PathBuf>,
    program_path: &Path,
    program_text: &str,
) -> Result<SpinSystemSpec, String> {
    if let Some(path) = flag {
        return sysfile::load_system(path).map_err(|e| e.to_string());
    }
    if let Some(declared) = scan_system_path(program_text) {
        let base = program_path.parent().unwrap_or(Path::new("."));
        let candidate = base.join(&declared);
        let path = if candidate.exists() {
            candidate
        } else {
            PathBuf::from(declared)
        };
        return sysfile::load_system(&path).map_err(|e| e.to_string());
    }
    Err("no system given: pass --system or add a `system <path>` line".into())
}

fn read_program(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_program_and_system(
    system_flag: &Option<PathBuf>,
    program_path: &Path,
) -> Result<(SpinSystem, crate::program::PulseProgram), String> {
    let text = read_program(program_path)?;
    let spec = resolve_system(system_flag, program_path, &text)?;
    let system = SpinSystem::build(spec).map_err(|e| e.to_string())?;
    let program = parse_program(&text, &system).map_err(|e| e.to_string())?;
    Ok((system, program))
}

fn simulate(args: SimulateArgs) -> Result<i32, String> {
    let (system, program) = load_program_and_system(&args.system, &args.program)?;
    let model = ExecModel {
        shaped: args.shaped,
        ..ExecModel::default()
    };
    let (rho, channel) = run_until_acquire(&system.equilibrium(), &program.sequence, &system, &model)
        .map_err(|e| e.to_string())?;
    let channel = channel.unwrap_or(program.acquire_channel);
    let spectrum =
        synthesize_spectrum(&rho, &system, &channel, args.lw).map_err(|e| e.to_string())?;
    export::export_spectrum(&spectrum, &args.out).map_err(|e| e.to_string())?;
    println!("channel {channel}: {} lines", spectrum.sticks.len());
    for s in &spectrum.sticks {
        println!("  {:>10.2} Hz   abs {:+.6}   disp {:+.6}", s.frequency_hz, s.absorptive, s.dispersive);
    }
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn dj(args: DjArgs) -> Result<i32, String> {
    let f = DJFunction::parse(&args.function).map_err(|e| e.to_string())?;
    let outcome = dj_run(&f).map_err(|e| e.to_string())?;
    match outcome.classification {
        DJClass::Constant => println!("constant"),
        DJClass::Balanced => println!("balanced"),
    }
    println!("line   freq/Hz      coherence ratio");
    for l in &outcome.line_report {
        println!(
            "{:<5} {:>10.1}   {:+.4} {}",
            l.label,
            l.frequency_hz,
            l.absorptive,
            if l.dispersive.abs() > 1e-6 {
                format!("({:+.4} dispersive)", l.dispersive)
            } else {
                String::new()
            }
        );
    }
    if let Some(out) = args.out {
        export::export_spectrum(&outcome.spectrum, &out).map_err(|e| e.to_string())?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

fn parity(args: ParityArgs) -> Result<i32, String> {
    let x = ParityString::parse(&args.string).map_err(|e| e.to_string())?;
    let outcome = parity_run(&x).map_err(|e| e.to_string())?;
    match outcome.parity {
        Parity::Even => println!("even"),
        Parity::Odd => println!("odd"),
    }
    println!(
        "inverted lines: {}",
        if outcome.inverted_labels.is_empty() {
            "none".to_string()
        } else {
            outcome.inverted_labels.join(" ")
        }
    );
    if let Some(out) = args.out {
        export::export_spectrum(&outcome.spectrum, &out).map_err(|e| e.to_string())?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

#[derive(Deserialize)]
struct TargetFile {
    rows: Vec<Vec<[f64; 2]>>,
}

fn load_target(path: &Path) -> Result<ComplexMatrix, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: TargetFile =
        serde_json::from_str(&text).map_err(|e| format!("invalid target matrix: {e}"))?;
    let dim = file.rows.len();
    let mut m = ComplexMatrix::zeros(dim);
    for (r, row) in file.rows.iter().enumerate() {
        if row.len() != dim {
            return Err("target matrix is not square".into());
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            m[(r, c)] = spinsim_core::algebra::complex(re, im);
        }
    }
    Ok(m)
}

fn verify_gate(args: VerifyGateArgs) -> Result<i32, String> {
    let (system, program) = load_program_and_system(&args.system, &args.program)?;
    let target = load_target(&args.target)?;
    // drop the acquire marker; the propagator covers the unitary part
    let unitary_events: spinsim_core::engine::PulseSequence = program
        .sequence
        .iter()
        .filter(|e| !matches!(e, spinsim_core::engine::PulseEvent::AcquireMarker { .. }))
        .cloned()
        .collect();
    let u = sequence_unitary(&unitary_events, &system).map_err(|e| e.to_string())?;
    if target.dim() != u.dim() {
        return Err(format!(
            "target is {}x{} but the system has dimension {}",
            target.dim(),
            target.dim(),
            u.dim()
        ));
    }
    let matches = equal_up_to_global_phase(&u, &target, args.tol).map_err(|e| e.to_string())?;
    if matches {
        println!("gate matches target (tol {})", args.tol);
        Ok(0)
    } else {
        println!("gate does NOT match target (tol {})", args.tol);
        Ok(1)
    }
}

fn trajectory(args: TrajectoryArgs) -> Result<i32, String> {
    let (system, program) = load_program_and_system(&args.system, &args.program)?;
    let (r, s) = parse_pair(&args.pair)?;
    // user-facing indices are 1-based
    let pair = SubspacePair::new(r - 1, s - 1, system.dim()).map_err(|e| e.to_string())?;
    let traj = record_trajectory(
        &system.equilibrium(),
        &program.sequence,
        &system,
        pair,
        args.steps.max(8),
    )
    .map_err(|e| e.to_string())?;
    export::write_file(&args.out, &export::trajectory_to_csv(&traj)).map_err(|e| e.to_string())?;
    println!("wrote {} samples to {}", traj.samples.len(), args.out.display());
    Ok(0)
}

fn parse_pair(text: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err("pair must look like r,s".into());
    }
    let r: usize = parts[0].trim().parse().map_err(|_| "bad pair index")?;
    let s: usize = parts[1].trim().parse().map_err(|_| "bad pair index")?;
    if r == 0 || s == 0 {
        return Err("pair indices are 1-based".into());
    }
    Ok((r, s))
}
