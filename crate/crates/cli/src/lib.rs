//! IO companion to `spinsim-core`: system-definition files, the
//! line-oriented pulse-program grammar, spectrum/trajectory export and
//! the command-line entry point.

pub mod cli;
pub mod export;
pub mod program;
pub mod sysfile;

pub use program::{parse_program, pretty_print, ParseError, PulseProgram};
pub use sysfile::{load_system, parse_system};
