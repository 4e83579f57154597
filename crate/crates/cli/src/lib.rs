//! Library side of the `mediatrix` command: scenario files, report rendering
//! and the commands themselves. `main.rs` only parses arguments and maps
//! outcomes to exit codes (0 success, 1 bad input, 2 violated bound).

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{
    cmd_demo_bmv, cmd_fuzz, cmd_locc_verify, cmd_run, Finished, FuzzArgs, LoccArgs,
    LoccGenerator, OutputOptions,
};
pub use error::CliError;
pub use report::Format;
