//! Command-line front end: config documents, CSV/JSON outputs, run manifests.
//!
//! Exit codes: [`EXIT_OK`], [`EXIT_USAGE`], [`EXIT_IO`], [`EXIT_CAPACITY`],
//! [`EXIT_CONFIG`].

mod commands;
mod config;
mod output;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{
    cmd_ideal, cmd_mc, cmd_spectrum, execute, Cli, Command, CommandOutput, IdealArgs, McArgs,
    SpectrumArgs,
};
pub use config::{
    load_sweep, parse_sweep, ResolvedSweep, SweepFile, SweepPoint, DEFAULT_EPS0, SCHEMA_VERSION,
};
pub use output::{
    curve_points, read_csv_rows, read_json, write_csv_file, write_csv_rows, write_json, CurvePoint,
    McBundle, McRow, RunManifest, SticksFile,
};

use crate::Error;

pub const EXIT_OK: i32 = 0;
/// Bad arguments or values outside an operation's domain.
pub const EXIT_USAGE: i32 = 2;
/// Unreadable input or unwritable output.
pub const EXIT_IO: i32 = 3;
/// Lattice over the memory budget or enumeration over its limit.
pub const EXIT_CAPACITY: i32 = 4;
/// Malformed or invalid config document.
pub const EXIT_CONFIG: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => EXIT_USAGE,
        Error::Io { .. } | Error::Serialization(_) => EXIT_IO,
        Error::Sizing(_) | Error::Capacity(_) => EXIT_CAPACITY,
        Error::Config { .. } => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr, the summary to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", commands::display_path(f));
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
