use std::path::{Path, PathBuf};

use mediatrix::locc::{identity_locc, random_locc};
use mediatrix::random::{self, derive_seed, rng_from_seed};
use mediatrix::{
    bmv_scenario, compile_to_mediator, fuzz_protocols, verify_equivalence, FuzzConfig,
    MediatorMode, Protocol, Trajectory,
};

use crate::config::{self, Scenario};
use crate::error::CliError;
use crate::report::{
    Format, FuzzReport, FuzzRow, FuzzSummary, LoccReport, LoccRow, LoccSummary, Report, RunReport,
    RunRow, RunSummary,
};

pub const MAX_COUNT: usize = 100_000;
pub const MAX_ROUNDS: usize = 3;
pub const MAX_ALPHABET: usize = 3;
/// Negativity and certificate bound shared by every check.
const BOUND: f64 = 1e-9;

/// Where a report goes; `None` fields fall back to the config, then to CSV on stdout.
#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub report: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A rendered report and whether it records a violation (exit status 2).
#[derive(Debug, Clone)]
pub struct Finished {
    pub rendered: String,
    pub path: Option<PathBuf>,
    pub violation: bool,
    /// One human-readable line for standard error.
    pub message: String,
}

impl Finished {
    fn new(report: &impl Report, out: &OutputOptions, violation: bool, message: String) -> Self {
        Finished {
            rendered: report.render(out.format.unwrap_or_default()),
            path: out.report.clone(),
            violation,
            message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.violation {
            2
        } else {
            0
        }
    }

    /// Writes the report to its file, or returns it for standard output.
    pub fn write(&self) -> std::io::Result<Option<&str>> {
        match &self.path {
            Some(p) => {
                std::fs::write(p, &self.rendered)?;
                Ok(None)
            }
            None => Ok(Some(&self.rendered)),
        }
    }
}

pub fn run_report(name: &str, seed: Option<u64>, protocol: &Protocol, traj: &Trajectory) -> RunReport {
    let dims = protocol.layout().dims();
    RunReport {
        name: name.to_string(),
        mediator_mode: traj.mode.as_str().to_string(),
        seed,
        layout: [dims[0], dims[1], dims[2]],
        rows: traj
            .records
            .iter()
            .map(|r| RunRow {
                step: r.step,
                negativity_ab: r.negativity_ab,
                negativity_a_gb: r.negativity_a_gb,
                negativity_ag_b: r.negativity_ag_b,
                ensemble_terms: r.ensemble.as_ref().map(|e| e.len()),
                certificate_residual: r.certificate_residual,
            })
            .collect(),
        summary: RunSummary {
            final_negativity_ab: traj.final_record().negativity_ab,
            theorem_pass: traj.theorem_pass(),
        },
    }
}

fn finish_run(name: &str, seed: Option<u64>, protocol: &Protocol, out: &OutputOptions) -> Result<Finished, CliError> {
    let traj = protocol.run()?;
    let report = run_report(name, seed, protocol, &traj);
    let violation = report.summary.theorem_pass == Some(false);
    let message = format!(
        "{name}: {} mediator, final negativity_AB = {:.3e}{}",
        traj.mode.as_str(),
        report.summary.final_negativity_ab,
        match report.summary.theorem_pass {
            Some(true) => ", theorem holds",
            Some(false) => ", THEOREM VIOLATED",
            None => "",
        }
    );
    Ok(Finished::new(&report, out, violation, message))
}

/// Runs the scenario in `config`. The command line overrides `[report]`.
pub fn cmd_run(config_path: &Path, out: &OutputOptions) -> Result<Finished, CliError> {
    let scenario: Scenario = config::load(config_path)?;
    let protocol = scenario.protocol()?;
    let from_file = scenario.report.clone().unwrap_or(config::ReportConfig {
        format: None,
        path: None,
    });
    let out = OutputOptions {
        report: out.report.clone().or(from_file.path),
        format: out.format.or(from_file.format),
    };
    finish_run(&scenario.name, scenario.seed, &protocol, &out)
}

pub fn cmd_demo_bmv(mode: MediatorMode, out: &OutputOptions) -> Result<Finished, CliError> {
    let name = format!("bmv-{}", mode.as_str());
    finish_run(&name, None, &bmv_scenario(mode), out)
}

#[derive(Debug, Clone, Copy)]
pub struct FuzzArgs {
    pub seed: u64,
    pub count: usize,
    pub da: usize,
    pub dg: usize,
    pub db: usize,
    pub max_steps: usize,
}

impl Default for FuzzArgs {
    fn default() -> Self {
        let d = FuzzConfig::default();
        FuzzArgs {
            seed: 0,
            count: d.count,
            da: d.da,
            dg: d.dg,
            db: d.db,
            max_steps: d.max_steps,
        }
    }
}

fn check_count(count: usize) -> Result<(), CliError> {
    if count > MAX_COUNT {
        return Err(CliError::Input(format!("count = {count} exceeds {MAX_COUNT}")));
    }
    Ok(())
}

/// Classical-mode campaign over random protocols.
pub fn cmd_fuzz(args: &FuzzArgs, out: &OutputOptions) -> Result<Finished, CliError> {
    check_count(args.count)?;
    let cfg = FuzzConfig {
        da: args.da,
        dg: args.dg,
        db: args.db,
        max_steps: args.max_steps,
        count: args.count,
        mode: MediatorMode::Classical,
        ..FuzzConfig::default()
    };
    let mut rows = Vec::with_capacity(args.count);
    for case in fuzz_protocols(args.seed, &cfg)? {
        let traj = case.protocol.run()?;
        let fin = traj.final_record();
        rows.push(FuzzRow {
            index: case.index,
            sub_seed: case.sub_seed,
            steps: traj.records.len() - 1,
            final_negativity_ab: fin.negativity_ab,
            max_negativity_ab: traj.max_negativity_ab(),
            max_certificate_residual: traj.max_certificate_residual(),
            max_ensemble_terms: traj.records.iter().filter_map(|r| r.ensemble.as_ref().map(|e| e.len())).max(),
            pass: fin.negativity_ab <= BOUND && traj.max_certificate_residual().is_some_and(|r| r <= BOUND),
        });
    }
    let max_of = |f: &dyn Fn(&FuzzRow) -> Option<f64>| rows.iter().filter_map(f).reduce(f64::max);
    let summary = FuzzSummary {
        count: rows.len(),
        max_final_negativity_ab: max_of(&|r| Some(r.final_negativity_ab)),
        max_certificate_residual: max_of(&|r| r.max_certificate_residual),
        violators: rows.iter().filter(|r| !r.pass).map(|r| r.sub_seed).collect(),
    };
    let violation = !summary.violators.is_empty();
    let message = format!(
        "fuzz: {} protocols, max final negativity_AB = {:.3e}, {} violators",
        summary.count,
        summary.max_final_negativity_ab.unwrap_or(0.0),
        summary.violators.len()
    );
    let report = FuzzReport {
        seed: args.seed,
        layout: [args.da, args.dg, args.db],
        max_steps: args.max_steps,
        rows,
        summary,
    };
    Ok(Finished::new(&report, out, violation, message))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum LoccGenerator {
    #[default]
    Random,
    /// Single identity arm in every round.
    Identity,
}

#[derive(Debug, Clone, Copy)]
pub struct LoccArgs {
    pub seed: u64,
    pub count: usize,
    pub rounds: usize,
    pub alphabet: usize,
    pub generator: LoccGenerator,
}

impl Default for LoccArgs {
    fn default() -> Self {
        LoccArgs {
            seed: 0,
            count: 50,
            rounds: 2,
            alphabet: 2,
            generator: LoccGenerator::Random,
        }
    }
}

/// Checks the compiled classical-mediator protocol against the direct LOCC
/// channel, and that it keeps a random product input separable.
pub fn cmd_locc_verify(args: &LoccArgs, out: &OutputOptions) -> Result<Finished, CliError> {
    check_count(args.count)?;
    if !(1..=MAX_ROUNDS).contains(&args.rounds) {
        return Err(mediatrix::Error::ConfigOutOfRange(format!(
            "rounds = {} must lie in 1..={MAX_ROUNDS}",
            args.rounds
        ))
        .into());
    }
    if !(1..=MAX_ALPHABET).contains(&args.alphabet) {
        return Err(mediatrix::Error::ConfigOutOfRange(format!(
            "alphabet = {} must lie in 1..={MAX_ALPHABET}",
            args.alphabet
        ))
        .into());
    }
    let mut rows = Vec::with_capacity(args.count);
    for index in 0..args.count {
        let sub_seed = derive_seed(args.seed, index as u64);
        let protocol = match args.generator {
            LoccGenerator::Random => random_locc(sub_seed, args.rounds, args.alphabet, 2, 2)?,
            LoccGenerator::Identity => identity_locc(2, 2, args.rounds, args.alphabet)?,
        };
        let eq = verify_equivalence(&protocol)?;
        let compiled = compile_to_mediator(&protocol, mediatrix::locc::DEFAULT_MEDIATOR_CAP)?;
        let mut rng = rng_from_seed(derive_seed(sub_seed, 1));
        let layout = compiled.layout().clone();
        let a = random::random_density(&mut rng, &layout.restrict(&[0]));
        let b = random::random_density(&mut rng, &layout.restrict(&[2]));
        let g = compiled.initial_mediator()?;
        let neg = compiled.with_initial(a, g, b)?.run()?.max_negativity_ab();
        rows.push(LoccRow {
            index,
            sub_seed,
            max_choi_deviation: eq.max_choi_deviation,
            product_negativity_ab: neg,
            pass: eq.pass && neg <= BOUND,
        });
    }
    let summary = LoccSummary {
        count: rows.len(),
        max_choi_deviation: rows.iter().map(|r| r.max_choi_deviation).reduce(f64::max),
        max_product_negativity_ab: rows.iter().map(|r| r.product_negativity_ab).reduce(f64::max),
        failures: rows.iter().filter(|r| !r.pass).map(|r| r.sub_seed).collect(),
    };
    let violation = !summary.failures.is_empty();
    let message = format!(
        "locc-verify: {} protocols, max Choi deviation = {:.3e}, {} failures",
        summary.count,
        summary.max_choi_deviation.unwrap_or(0.0),
        summary.failures.len()
    );
    let report = LoccReport {
        seed: args.seed,
        generator: match args.generator {
            LoccGenerator::Random => "random".into(),
            LoccGenerator::Identity => "identity".into(),
        },
        rounds: args.rounds,
        alphabet: args.alphabet,
        rows,
        summary,
    };
    Ok(Finished::new(&report, out, violation, message))
}
