//! Line-oriented pulse-program grammar.
//!
//! ```text
//! # comments run to the end of the line
//! system <path>                              declare the system file
//! soss                                       symmetric-state selection
//! pps                                        pseudopure |00⟩ (triplet system)
//! pulse <channel> <angle_deg> <phase_deg>    hard pulse
//! selpulse <label> <angle_deg> <phase_deg> [dur <t>] [shaped]
//! delay <t>                                  free evolution
//! echo <channel> <tau>                       [τ − π − τ] block
//! crush                                      gradient crusher
//! gphase <label> <phi_deg>                   refocused phase-shift gate
//! djgate <f1|f3|f5|f7>                       function gate pulses
//! oracle <6-bit string>                      parity oracle pulses
//! acquire <channel>                          open the receiver
//! ```
//!
//! Durations accept `s`, `ms` and `us` suffixes; bare numbers are
//! seconds.  Transition labels are the catalog labels of the loaded
//! system (`h1`…`h6`, `C1`…`C4`, `1`…`5`, `H1`…`H4`, `F1`…`F3`).

use spinsim_core::algorithms::{
    geometric_phase_gate, parity_oracle, pps_sequence, selective_pulse_length, soss_sequence,
    DJFunction, ParityString,
};
use spinsim_core::engine::{spin_echo_block, PulseEvent, PulseModel, PulseSequence};
use spinsim_core::system::SpinSystem;

/// Parse failure with its source position.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// A parsed program: the resolved event list plus its source.
#[derive(Debug, Clone)]
pub struct PulseProgram {
    pub source: String,
    pub system_path: Option<String>,
    pub sequence: PulseSequence,
    pub acquire_channel: String,
}

/// Scan only for the `system <path>` declaration, so the caller can
/// load the system before the full parse resolves transition labels.
pub fn scan_system_path(text: &str) -> Option<String> {
    for line in text.lines() {
        let mut tokens = strip_comment(line).split_whitespace();
        if tokens.next() == Some("system") {
            if let Some(path) = tokens.next() {
                return Some(path.to_string());
            }
        }
    }
    None
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn parse_duration(token: &str, line: usize) -> Result<f64, ParseError> {
    let (number, scale) = if let Some(v) = token.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = token.strip_suffix("us") {
        (v, 1e-6)
    } else if let Some(v) = token.strip_suffix('s') {
        (v, 1.0)
    } else {
        (token, 1.0)
    };
    let value: f64 = number
        .parse()
        .map_err(|_| ParseError {
            line,
            message: format!("bad duration '{token}' (want a number with s/ms/us)"),
        })?;
    if !value.is_finite() || value < 0.0 {
        return err(line, format!("duration '{token}' must be finite and non-negative"));
    }
    Ok(value * scale)
}

fn parse_angle_deg(token: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    let deg: f64 = token.parse().map_err(|_| ParseError {
        line,
        message: format!("bad {what} '{token}' (degrees)"),
    })?;
    if !deg.is_finite() {
        return err(line, format!("{what} must be finite"));
    }
    Ok(deg.to_radians())
}

fn check_channel(system: &SpinSystem, name: &str, line: usize) -> Result<(), ParseError> {
    system.channel_index(name).map(|_| ()).map_err(|_| ParseError {
        line,
        message: format!("unknown channel '{name}'"),
    })
}

fn check_transition(system: &SpinSystem, label: &str, line: usize) -> Result<(), ParseError> {
    system.find_transition(label).map(|_| ()).map_err(|_| ParseError {
        line,
        message: format!("unresolvable transition label '{label}'"),
    })
}

/// Parse a program against a loaded system.  Composite statements
/// (`soss`, `pps`, `gphase`, `djgate`, `oracle`, `echo`) expand into
/// primitive events at parse time.
pub fn parse_program(text: &str, system: &SpinSystem) -> Result<PulseProgram, ParseError> {
    let mut sequence = PulseSequence::new();
    let mut system_path = None;
    let mut acquire_channel: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let args = &tokens[1..];
        match tokens[0] {
            "system" => {
                if args.len() != 1 {
                    return err(line_no, "usage: system <path>");
                }
                system_path = Some(args[0].to_string());
            }
            "soss" => {
                if !args.is_empty() {
                    return err(line_no, "soss takes no arguments");
                }
                let block = soss_sequence(system)
                    .map_err(|e| ParseError {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                sequence.extend(block);
            }
            "pps" => {
                if !args.is_empty() {
                    return err(line_no, "pps takes no arguments");
                }
                let block = pps_sequence(system).map_err(|e| ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
                sequence.extend(block);
            }
            "pulse" => {
                if args.len() != 3 {
                    return err(line_no, "usage: pulse <channel> <angle_deg> <phase_deg>");
                }
                check_channel(system, args[0], line_no)?;
                sequence.push(PulseEvent::HardPulse {
                    channel: args[0].into(),
                    flip: parse_angle_deg(args[1], line_no, "flip angle")?,
                    phase: parse_angle_deg(args[2], line_no, "phase")?,
                });
            }
            "selpulse" => {
                if args.len() < 3 {
                    return err(
                        line_no,
                        "usage: selpulse <label> <angle_deg> <phase_deg> [dur <t>] [shaped]",
                    );
                }
                check_transition(system, args[0], line_no)?;
                let flip = parse_angle_deg(args[1], line_no, "flip angle")?;
                let phase = parse_angle_deg(args[2], line_no, "phase")?;
                let mut duration = 0.0;
                let mut model = PulseModel::Ideal;
                let mut rest = &args[3..];
                while !rest.is_empty() {
                    match rest[0] {
                        "dur" => {
                            if rest.len() < 2 {
                                return err(line_no, "dur needs a duration");
                            }
                            duration = parse_duration(rest[1], line_no)?;
                            rest = &rest[2..];
                        }
                        "shaped" => {
                            model = PulseModel::Gaussian;
                            rest = &rest[1..];
                        }
                        other => {
                            return err(line_no, format!("unexpected token '{other}'"));
                        }
                    }
                }
                if model == PulseModel::Gaussian && duration == 0.0 {
                    // fall back to the published pulse length
                    duration = selective_pulse_length(system).map_err(|e| ParseError {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                }
                sequence.push(PulseEvent::SelectivePulse {
                    transition: args[0].into(),
                    flip,
                    phase,
                    duration,
                    model,
                });
            }
            "delay" => {
                if args.len() != 1 {
                    return err(line_no, "usage: delay <t>");
                }
                sequence.push(PulseEvent::Delay {
                    duration: parse_duration(args[0], line_no)?,
                });
            }
            "echo" => {
                if args.len() != 2 {
                    return err(line_no, "usage: echo <channel> <tau>");
                }
                check_channel(system, args[0], line_no)?;
                let tau = parse_duration(args[1], line_no)?;
                sequence.extend(spin_echo_block(args[0], tau));
            }
            "crush" => {
                if !args.is_empty() {
                    return err(line_no, "crush takes no arguments");
                }
                sequence.push(PulseEvent::GradientCrusher);
            }
            "gphase" => {
                if args.len() != 2 {
                    return err(line_no, "usage: gphase <label> <phi_deg>");
                }
                check_transition(system, args[0], line_no)?;
                let phi = parse_angle_deg(args[1], line_no, "phase shift")?;
                let block = geometric_phase_gate(system, args[0], phi).map_err(|e| ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
                sequence.extend(block);
            }
            "djgate" => {
                if args.len() != 1 {
                    return err(line_no, "usage: djgate <f1|f3|f5|f7>");
                }
                let f = DJFunction::parse(args[0]).map_err(|e| ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
                let dur = selective_pulse_length(system).map_err(|e| ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
                for label in f.gate_transitions() {
                    check_transition(system, label, line_no)?;
                    sequence.push(PulseEvent::SelectivePulse {
                        transition: (*label).into(),
                        flip: 2.0 * std::f64::consts::PI,
                        phase: std::f64::consts::FRAC_PI_2,
                        duration: dur,
                        model: PulseModel::Ideal,
                    });
                }
            }
            "oracle" => {
                if args.len() != 1 {
                    return err(line_no, "usage: oracle <6-bit string>");
                }
                let x = ParityString::parse(args[0]).map_err(|e| ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
                let (block, _) = parity_oracle(system, &x).map_err(|e| ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
                sequence.extend(block);
            }
            "acquire" => {
                if args.len() != 1 {
                    return err(line_no, "usage: acquire <channel>");
                }
                check_channel(system, args[0], line_no)?;
                acquire_channel = Some(args[0].to_string());
                sequence.push(PulseEvent::AcquireMarker {
                    channel: args[0].into(),
                });
            }
            other => {
                return err(line_no, format!("unknown keyword '{other}'"));
            }
        }
    }

    let Some(acquire_channel) = acquire_channel else {
        return err(text.lines().count().max(1), "no acquire statement");
    };
    Ok(PulseProgram {
        source: text.to_string(),
        system_path,
        sequence,
        acquire_channel,
    })
}

/// Canonical text of a resolved sequence: composite statements come
/// back out as their primitive events, so reparsing reproduces the
/// same event list.
pub fn pretty_print(program: &PulseProgram) -> String {
    let mut out = String::new();
    if let Some(path) = &program.system_path {
        out.push_str(&format!("system {path}\n"));
    }
    for event in &program.sequence {
        match event {
            PulseEvent::HardPulse {
                channel,
                flip,
                phase,
            } => {
                out.push_str(&format!(
                    "pulse {channel} {} {}\n",
                    flip.to_degrees(),
                    phase.to_degrees()
                ));
            }
            PulseEvent::SelectivePulse {
                transition,
                flip,
                phase,
                duration,
                model,
            } => {
                out.push_str(&format!(
                    "selpulse {transition} {} {}",
                    flip.to_degrees(),
                    phase.to_degrees()
                ));
                if *duration > 0.0 {
                    out.push_str(&format!(" dur {duration}s"));
                }
                if *model == PulseModel::Gaussian {
                    out.push_str(" shaped");
                }
                out.push('\n');
            }
            PulseEvent::Delay { duration } => {
                out.push_str(&format!("delay {duration}s\n"));
            }
            PulseEvent::GradientCrusher => out.push_str("crush\n"),
            PulseEvent::AcquireMarker { channel } => {
                out.push_str(&format!("acquire {channel}\n"));
            }
        }
    }
    out
}
