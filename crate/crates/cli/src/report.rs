//! Report rendering.
//!
//! Every float is printed as `{:.16e}` (17 significant digits) in both
//! formats, so a report is a pure function of its inputs. CSV files start
//! with a `# mediatrix-report-v1 <kind>` line, then a `#` metadata line, the
//! column header and the rows; summary fields follow as a trailing `#` line.
//! Missing values are empty CSV cells and JSON `null`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

pub const CSV_VERSION_LINE: &str = "# mediatrix-report-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        RawValue::from_string(sci(*x))
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    } else {
        s.serialize_none()
    }
}

fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

fn cell_f64(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(sci).unwrap_or_default()
}

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// A finished report in both renderings.
pub trait Report: Serialize {
    fn kind(&self) -> &'static str;
    fn meta(&self) -> Vec<(&'static str, String)>;
    fn header(&self) -> &'static [&'static str];
    fn rows(&self) -> Vec<Vec<String>>;
    fn summary(&self) -> Vec<(&'static str, String)>;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
        }
    }

    fn csv(&self) -> String {
        let pairs = |kv: Vec<(&str, String)>| {
            kv.into_iter()
                .map(|(k, v)| format!("{k}={}", v.replace(['\n', '\r', ','], " ")))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        let _ = writeln!(out, "{CSV_VERSION_LINE} {}", self.kind());
        let _ = writeln!(out, "# {}", pairs(self.meta()));
        let _ = writeln!(out, "{}", self.header().join(","));
        for row in self.rows() {
            let _ = writeln!(out, "{}", row.join(","));
        }
        let _ = writeln!(out, "# summary: {}", pairs(self.summary()));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub step: usize,
    #[serde(rename = "negativity_AB", serialize_with = "ser_f64")]
    pub negativity_ab: f64,
    #[serde(rename = "negativity_A_GB", serialize_with = "ser_f64")]
    pub negativity_a_gb: f64,
    #[serde(rename = "negativity_AG_B", serialize_with = "ser_f64")]
    pub negativity_ag_b: f64,
    pub ensemble_terms: Option<usize>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub certificate_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    #[serde(rename = "final_negativity_AB", serialize_with = "ser_f64")]
    pub final_negativity_ab: f64,
    /// `null` in quantum mode.
    pub theorem_pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub mediator_mode: String,
    pub seed: Option<u64>,
    pub layout: [usize; 3],
    pub rows: Vec<RunRow>,
    pub summary: RunSummary,
}

impl Report for RunReport {
    fn kind(&self) -> &'static str {
        "run"
    }

    fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("name", self.name.clone()),
            ("mediator_mode", self.mediator_mode.clone()),
            ("seed", cell(self.seed)),
            ("layout", format!("{}x{}x{}", self.layout[0], self.layout[1], self.layout[2])),
        ]
    }

    fn header(&self) -> &'static [&'static str] {
        &[
            "step",
            "negativity_AB",
            "negativity_A_GB",
            "negativity_AG_B",
            "ensemble_terms",
            "certificate_residual",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.step.to_string(),
                    sci(r.negativity_ab),
                    sci(r.negativity_a_gb),
                    sci(r.negativity_ag_b),
                    cell(r.ensemble_terms),
                    cell_f64(r.certificate_residual),
                ]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(&'static str, String)> {
        vec![
            ("final_negativity_AB", sci(self.summary.final_negativity_ab)),
            ("theorem_pass", cell(self.summary.theorem_pass)),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzRow {
    pub index: usize,
    pub sub_seed: u64,
    pub steps: usize,
    #[serde(rename = "final_negativity_AB", serialize_with = "ser_f64")]
    pub final_negativity_ab: f64,
    #[serde(rename = "max_negativity_AB", serialize_with = "ser_f64")]
    pub max_negativity_ab: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub max_certificate_residual: Option<f64>,
    pub max_ensemble_terms: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzSummary {
    pub count: usize,
    #[serde(rename = "max_final_negativity_AB", serialize_with = "ser_opt_f64")]
    pub max_final_negativity_ab: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub max_certificate_residual: Option<f64>,
    /// Sub-seeds of the protocols that broke the bound.
    pub violators: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub layout: [usize; 3],
    pub max_steps: usize,
    pub rows: Vec<FuzzRow>,
    pub summary: FuzzSummary,
}

impl Report for FuzzReport {
    fn kind(&self) -> &'static str {
        "fuzz"
    }

    fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("seed", self.seed.to_string()),
            ("layout", format!("{}x{}x{}", self.layout[0], self.layout[1], self.layout[2])),
            ("max_steps", self.max_steps.to_string()),
        ]
    }

    fn header(&self) -> &'static [&'static str] {
        &[
            "index",
            "sub_seed",
            "steps",
            "final_negativity_AB",
            "max_negativity_AB",
            "max_certificate_residual",
            "max_ensemble_terms",
            "pass",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.index.to_string(),
                    r.sub_seed.to_string(),
                    r.steps.to_string(),
                    sci(r.final_negativity_ab),
                    sci(r.max_negativity_ab),
                    cell_f64(r.max_certificate_residual),
                    cell(r.max_ensemble_terms),
                    r.pass.to_string(),
                ]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(&'static str, String)> {
        let s = &self.summary;
        vec![
            ("count", s.count.to_string()),
            ("max_final_negativity_AB", cell_f64(s.max_final_negativity_ab)),
            ("max_certificate_residual", cell_f64(s.max_certificate_residual)),
            (
                "violators",
                s.violators.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
            ),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoccRow {
    pub index: usize,
    pub sub_seed: u64,
    #[serde(serialize_with = "ser_f64")]
    pub max_choi_deviation: f64,
    /// A|B negativity of the compiled protocol run on a random product input.
    #[serde(rename = "product_negativity_AB", serialize_with = "ser_f64")]
    pub product_negativity_ab: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoccSummary {
    pub count: usize,
    #[serde(serialize_with = "ser_opt_f64")]
    pub max_choi_deviation: Option<f64>,
    #[serde(rename = "max_product_negativity_AB", serialize_with = "ser_opt_f64")]
    pub max_product_negativity_ab: Option<f64>,
    pub failures: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoccReport {
    pub seed: u64,
    pub generator: String,
    pub rounds: usize,
    pub alphabet: usize,
    pub rows: Vec<LoccRow>,
    pub summary: LoccSummary,
}

impl Report for LoccReport {
    fn kind(&self) -> &'static str {
        "locc-verify"
    }

    fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("seed", self.seed.to_string()),
            ("generator", self.generator.clone()),
            ("rounds", self.rounds.to_string()),
            ("alphabet", self.alphabet.to_string()),
        ]
    }

    fn header(&self) -> &'static [&'static str] {
        &["index", "sub_seed", "max_choi_deviation", "product_negativity_AB", "pass"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.index.to_string(),
                    r.sub_seed.to_string(),
                    sci(r.max_choi_deviation),
                    sci(r.product_negativity_ab),
                    r.pass.to_string(),
                ]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(&'static str, String)> {
        let s = &self.summary;
        vec![
            ("count", s.count.to_string()),
            ("max_choi_deviation", cell_f64(s.max_choi_deviation)),
            ("max_product_negativity_AB", cell_f64(s.max_product_negativity_ab)),
            (
                "failures",
                s.failures.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
            ),
        ]
    }
}
