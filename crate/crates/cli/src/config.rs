//! Scenario files.
//!
//! ```toml
//! name = "bmv-quantum"
//! mediator_mode = "quantum"   # or "classical"
//! seed = 7                    # required by the random generator
//! steps = "bmv"               # or a [steps] table, see below
//!
//! [layout]                    # optional for "bmv", which is fixed at 2/2/2
//! da = 2
//! dg = 2
//! db = 2
//!
//! [report]                    # optional; command-line flags take precedence
//! format = "json"
//! path = "bmv.json"
//! ```
//!
//! A `[steps]` table either draws `count` random steps (`generator = "random"`)
//! or lists them (`generator = "explicit"`) as `[[steps.step]]` entries with a
//! `side` (`"left"` acts on `A,G`, `"right"` on `G,B`), a `kraus` list for the
//! interaction and an optional `bystander` Kraus list (identity when absent).
//! A matrix is a list of rows, an entry a `[re, im]` pair. With
//! `classicalize = true` explicit interactions are pinch-sandwiched before use;
//! otherwise a classical-mode step that does not commute with dephasing on `G`
//! is rejected.

use std::path::{Path, PathBuf};

use mediatrix::linalg::{c, CMatrix};
use mediatrix::{
    bmv_scenario, g_classicalize, random_protocol, Channel, DensityState, MediatorMode, Protocol,
    Side, StepChannel, SystemLayout,
};
use serde::Deserialize;

use crate::error::CliError;
use crate::report::Format;

pub const MAX_DA: usize = 8;
pub const MAX_DG: usize = 16;
pub const MAX_DB: usize = 8;
pub const MAX_STEPS: usize = 64;
/// Product `dA·dG·dB` above which full-step channels stop fitting in memory comfortably.
pub const MAX_TOTAL_DIM: usize = 64;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub mediator_mode: String,
    pub seed: Option<u64>,
    pub layout: Option<LayoutConfig>,
    steps: toml::Value,
    pub report: Option<ReportConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub da: usize,
    pub dg: usize,
    pub db: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepTable {
    generator: Generator,
    count: Option<usize>,
    #[serde(default)]
    classicalize: bool,
    #[serde(default)]
    step: Vec<ExplicitStep>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Generator {
    Random,
    Explicit,
}

type KrausData = Vec<Vec<Vec<[f64; 2]>>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitStep {
    side: StepSide,
    kraus: KrausData,
    bystander: Option<KrausData>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum StepSide {
    Left,
    Right,
}

/// What the `steps` key resolved to.
#[derive(Debug, Clone)]
pub enum Steps {
    Bmv,
    Random { count: usize },
    Explicit { classicalize: bool, steps: Vec<ExplicitSpec> },
}

#[derive(Debug, Clone)]
pub struct ExplicitSpec {
    side: Side,
    kraus: Vec<CMatrix>,
    bystander: Option<Vec<CMatrix>>,
}

/// A parsed and schema-checked scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub mode: MediatorMode,
    pub seed: Option<u64>,
    pub dims: (usize, usize, usize),
    pub steps: Steps,
    pub report: Option<ReportConfig>,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let raw: ScenarioConfig =
        toml::from_str(text).map_err(|e| CliError::Input(format!("config parse error: {e}")))?;
    raw.check()
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Input(format!("schema violation: {}", msg.into()))
}

impl ScenarioConfig {
    fn check(self) -> Result<Scenario, CliError> {
        let mode: MediatorMode = self
            .mediator_mode
            .parse()
            .map_err(|_| schema(format!("mediator_mode must be classical or quantum, got {:?}", self.mediator_mode)))?;
        let steps = match &self.steps {
            toml::Value::String(s) if s == "bmv" => Steps::Bmv,
            toml::Value::String(s) => return Err(schema(format!("unknown step preset {s:?}"))),
            toml::Value::Table(_) => {
                let table = StepTable::deserialize(self.steps.clone())
                    .map_err(|e| schema(format!("in [steps]: {e}")))?;
                table.resolve()?
            }
            _ => return Err(schema("steps must be \"bmv\" or a table")),
        };
        let dims = match (&steps, self.layout) {
            (Steps::Bmv, None) => (2, 2, 2),
            (Steps::Bmv, Some(l)) if (l.da, l.dg, l.db) == (2, 2, 2) => (2, 2, 2),
            (Steps::Bmv, Some(_)) => return Err(schema("the bmv preset runs on da = dg = db = 2")),
            (_, None) => return Err(schema("missing [layout]")),
            (_, Some(l)) => (l.da, l.dg, l.db),
        };
        check_dims(dims)?;
        if matches!(steps, Steps::Random { .. }) && self.seed.is_none() {
            return Err(schema("the random generator needs a seed"));
        }
        Ok(Scenario {
            name: self.name,
            mode,
            seed: self.seed,
            dims,
            steps,
            report: self.report,
        })
    }
}

pub fn check_dims((da, dg, db): (usize, usize, usize)) -> Result<(), CliError> {
    for (name, v, cap) in [("da", da, MAX_DA), ("dg", dg, MAX_DG), ("db", db, MAX_DB)] {
        if v == 0 || v > cap {
            return Err(CliError::Input(format!("{name} = {v} must lie in 1..={cap}")));
        }
    }
    if da * dg * db > MAX_TOTAL_DIM {
        return Err(CliError::Input(format!(
            "da·dg·db = {} exceeds the supported total dimension {MAX_TOTAL_DIM}",
            da * dg * db
        )));
    }
    Ok(())
}

impl StepTable {
    fn resolve(self) -> Result<Steps, CliError> {
        match self.generator {
            Generator::Random => {
                if !self.step.is_empty() || self.classicalize {
                    return Err(schema("the random generator takes only count"));
                }
                let count = self.count.ok_or_else(|| schema("the random generator needs count"))?;
                if count > MAX_STEPS {
                    return Err(schema(format!("count = {count} exceeds {MAX_STEPS}")));
                }
                Ok(Steps::Random { count })
            }
            Generator::Explicit => {
                if self.count.is_some_and(|n| n != self.step.len()) {
                    return Err(schema("count disagrees with the number of [[steps.step]] entries"));
                }
                let steps = self
                    .step
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let kraus = matrices(&s.kraus).map_err(|e| schema(format!("step {i} kraus: {e}")))?;
                        let bystander = s
                            .bystander
                            .as_ref()
                            .map(|b| matrices(b).map_err(|e| schema(format!("step {i} bystander: {e}"))))
                            .transpose()?;
                        let side = match s.side {
                            StepSide::Left => Side::Left,
                            StepSide::Right => Side::Right,
                        };
                        Ok(ExplicitSpec { side, kraus, bystander })
                    })
                    .collect::<Result<_, CliError>>()?;
                Ok(Steps::Explicit {
                    classicalize: self.classicalize,
                    steps,
                })
            }
        }
    }
}

fn matrices(data: &KrausData) -> Result<Vec<CMatrix>, String> {
    data.iter()
        .map(|rows| {
            let n = rows.len();
            let m = rows.first().map_or(0, Vec::len);
            if n == 0 || rows.iter().any(|r| r.len() != m) {
                return Err("ragged or empty matrix".to_string());
            }
            Ok(CMatrix::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
        })
        .collect()
}

impl Scenario {
    /// Builds the protocol. Failures here are input errors.
    pub fn protocol(&self) -> Result<Protocol, CliError> {
        match &self.steps {
            Steps::Bmv => Ok(bmv_scenario(self.mode)),
            Steps::Random { count } => {
                let seed = self.seed.expect("checked when parsing");
                Ok(random_protocol(seed, self.dims, *count, self.mode)?)
            }
            Steps::Explicit { classicalize, steps } => self.explicit(*classicalize, steps),
        }
    }

    fn explicit(&self, classicalize: bool, specs: &[ExplicitSpec]) -> Result<Protocol, CliError> {
        let (da, dg, db) = self.dims;
        let layout = SystemLayout::tripartite(da, dg, db, true)?;
        let mut steps = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let (int_legs, by_leg): (&[usize], &[usize]) = match spec.side {
                Side::Left => (&[0, 1], &[2]),
                Side::Right => (&[1, 2], &[0]),
            };
            let int_layout = layout.restrict(int_legs);
            let by_layout = layout.restrict(by_leg);
            let mut interaction = Channel::from_kraus(spec.kraus.clone(), int_layout.clone(), int_layout)
                .map_err(|e| CliError::Input(format!("step {i} interaction: {e}")))?;
            if classicalize && self.mode == MediatorMode::Classical {
                interaction = g_classicalize(&interaction)?;
            }
            let bystander = match &spec.bystander {
                Some(k) => Channel::from_kraus(k.clone(), by_layout.clone(), by_layout)
                    .map_err(|e| CliError::Input(format!("step {i} bystander: {e}")))?,
                None => Channel::identity(by_layout),
            };
            steps.push(StepChannel::new(spec.side, interaction, bystander)?);
        }
        let [a, g, b] = [0, 1, 2].map(|k| DensityState::basis(layout.subsystems()[k].clone(), 0));
        Ok(Protocol::new(layout, a?, g?, b?, steps, self.mode)?)
    }
}
