use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mediatrix::MediatorMode;
use mediatrix_cli::{
    cmd_demo_bmv, cmd_fuzz, cmd_locc_verify, cmd_run, CliError, Finished, Format, FuzzArgs,
    LoccArgs, LoccGenerator, OutputOptions,
};

#[derive(Parser)]
#[command(name = "mediatrix", version, about = "Entanglement mediation through classical and quantum mediators")]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// No summary line on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML file.
    Run { config: PathBuf },
    /// Random classical-mediator protocols; exits 2 if any ends entangled.
    Fuzz {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        da: usize,
        #[arg(long, default_value_t = 3)]
        dg: usize,
        #[arg(long, default_value_t = 2)]
        db: usize,
        #[arg(long, default_value_t = 6)]
        max_steps: usize,
    },
    /// Compile LOCC protocols to classical-mediator ones and compare channels.
    LoccVerify {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        #[arg(long, value_enum, default_value_t = LoccGenerator::Random)]
        generator: LoccGenerator,
    },
    /// Built-in scenarios.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// CNOT / CZ / CNOT through a qubit mediator.
    Bmv {
        #[arg(long, value_enum)]
        mode: Mode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Classical,
    Quantum,
}

fn dispatch(cli: &Cli) -> Result<Finished, CliError> {
    let out = OutputOptions {
        report: cli.report.clone(),
        format: cli.format,
    };
    match &cli.command {
        Command::Run { config } => cmd_run(config, &out),
        &Command::Fuzz { seed, count, da, dg, db, max_steps } => cmd_fuzz(
            &FuzzArgs { seed, count, da, dg, db, max_steps },
            &out,
        ),
        &Command::LoccVerify { seed, count, rounds, alphabet, generator } => cmd_locc_verify(
            &LoccArgs { seed, count, rounds, alphabet, generator },
            &out,
        ),
        Command::Demo { which: Demo::Bmv { mode } } => {
            let mode = match mode {
                Mode::Classical => MediatorMode::Classical,
                Mode::Quantum => MediatorMode::Quantum,
            };
            cmd_demo_bmv(mode, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own usage errors would exit 2, which is reserved for violations
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let started = Instant::now();
    let finished = match dispatch(&cli) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match finished.write() {
        Ok(Some(text)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(1);
        }
    }
    if !cli.quiet {
        eprintln!("{} ({} ms)", finished.message, started.elapsed().as_millis());
    }
    ExitCode::from(finished.exit_code() as u8)
}
