//! Experiment runner: configuration, reports and their CSV/JSON outputs.

mod descriptors;
mod experiments;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexfloat::hex_mirror;

pub use descriptors::{
    parse_body, parse_profile, BodySpec, BuiltBody, Exponent, InfName, ProfileSpec, RadiusSpec, BODY_CATALOG,
    PROFILE_CATALOG,
};
pub use experiments::{radial_moment, scale_moment, JOINT_CATALOG};

/// Smallest draw count accepted by sampling experiments.
pub const MIN_COUNT: usize = 10_000;

pub const WORKERS_ENV: &str = "KLSLAB_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VerifyRadial,
    VerifyDecomposition,
    VerifyScaleIdentity,
    KlsTable,
    RevolutionSuite,
    MultiblockSuite,
    BoundsComparison,
    ConditionCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::VerifyRadial,
        Self::VerifyDecomposition,
        Self::VerifyScaleIdentity,
        Self::KlsTable,
        Self::RevolutionSuite,
        Self::MultiblockSuite,
        Self::BoundsComparison,
        Self::ConditionCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyRadial => "verify-radial",
            Self::VerifyDecomposition => "verify-decomposition",
            Self::VerifyScaleIdentity => "verify-scale-identity",
            Self::KlsTable => "kls-table",
            Self::RevolutionSuite => "revolution-suite",
            Self::MultiblockSuite => "multiblock-suite",
            Self::BoundsComparison => "bounds-comparison",
            Self::ConditionCheck => "condition-check",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Descriptor(format!("unknown experiment `{s}`")))
    }

    fn samples(self) -> bool {
        self != Self::ConditionCheck
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    #[serde(default = "default_ratio_gate")]
    pub ratio_gate: f64,
    #[serde(default = "default_se_gate")]
    pub se_gate: f64,
}

fn default_ratio_gate() -> f64 {
    10.0
}

fn default_se_gate() -> f64 {
    4.0
}

impl Default for Gates {
    fn default() -> Self {
        Self { ratio_gate: default_ratio_gate(), se_gate: default_se_gate() }
    }
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Empty means the experiment's default catalog.
    #[serde(default)]
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub profiles: Vec<ProfileSpec>,
    #[serde(default)]
    pub dims: Vec<usize>,
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub gates: Gates,
    /// Grid size per axis for `condition-check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, count: usize, seed: u64) -> Self {
        Self {
            experiment,
            bodies: Vec::new(),
            profiles: Vec::new(),
            dims: Vec::new(),
            count,
            seed,
            workers: 1,
            output_path: None,
            gates: Gates::default(),
            grid: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Descriptor(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.samples() && self.count < MIN_COUNT {
            return Err(Error::InvalidParameter(format!(
                "count {} is below the minimum {MIN_COUNT} for {}",
                self.count, self.experiment
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        if !(self.gates.ratio_gate > 0.0 && self.gates.se_gate > 0.0) {
            return Err(Error::InvalidParameter("gates must be positive".into()));
        }
        for p in &self.profiles {
            p.build()?;
        }
        Ok(())
    }

    /// Worker count after the `KLSLAB_WORKERS` override.
    pub fn effective_workers(&self) -> Result<usize> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|w| *w > 0)
                .ok_or_else(|| Error::InvalidParameter(format!("{WORKERS_ENV}={v} is not a positive integer"))),
            Err(_) => Ok(self.workers),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Tabulated, not gated.
    Info,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok { Self::Pass } else { Self::Fail }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Info => "info",
        }
    }
}

/// One named measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub body: String,
    pub profile: String,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub quantity: String,
    pub value: f64,
    /// Absent for statistics that are already in standard-error units.
    pub se: Option<f64>,
    pub expected: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: Verdict,
}

/// Row of the KLS-ratio table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlsRow {
    pub body: String,
    pub profile: String,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub lower_bound: f64,
    pub se: f64,
    pub kls_ratio: f64,
    pub argmax_function: String,
    pub sum_var_bound: f64,
    pub bobkov_bound: f64,
    pub argmax_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub workers: usize,
    pub wall_time_s: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub rows: Vec<Row>,
    pub kls_table: Vec<KlsRow>,
    /// Structured diagnostics (isotropy, block ratios, condition reports).
    pub details: Vec<serde_json::Value>,
    pub metadata: Metadata,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }
}

/// Run an experiment on a rayon pool of the configured size.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let workers = config.effective_workers()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let start = Instant::now();
    let out = pool.install(|| experiments::dispatch(config))?;
    Ok(ExperimentReport {
        experiment: config.experiment,
        rows: out.rows,
        kls_table: out.kls_table,
        details: out.details,
        metadata: Metadata {
            config: config.clone(),
            workers,
            wall_time_s: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `report.csv`: one line per row.
pub fn write_report_csv<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "experiment", "body", "profile", "n", "count", "seed", "quantity", "value", "se", "expected", "threshold",
        "verdict",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.experiment.clone(),
            r.body.clone(),
            r.profile.clone(),
            r.n.to_string(),
            r.count.to_string(),
            r.seed.to_string(),
            r.quantity.clone(),
            r.value.to_string(),
            opt(r.se),
            opt(r.expected),
            opt(r.threshold),
            r.verdict.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_kls_csv<W: Write>(rows: &[KlsRow], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "body", "profile", "n", "count", "seed", "lower_bound", "se", "kls_ratio", "argmax_function", "sum_var_bound",
        "bobkov_bound", "argmax_class",
    ])?;
    for r in rows {
        w.write_record([
            r.body.clone(),
            r.profile.clone(),
            r.n.to_string(),
            r.count.to_string(),
            r.seed.to_string(),
            r.lower_bound.to_string(),
            r.se.to_string(),
            r.kls_ratio.to_string(),
            r.argmax_function.clone(),
            r.sum_var_bound.to_string(),
            r.bobkov_bound.to_string(),
            r.argmax_class.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format plot data: `experiment, series, x, y, se` with `x = n` and
/// `series = body/profile/quantity`.
pub fn emit_plotdata<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["experiment", "series", "x", "y", "se"])?;
    for r in &report.rows {
        w.write_record([
            r.experiment.clone(),
            format!("{}/{}/{}", r.body, r.profile, r.quantity),
            r.n.to_string(),
            r.value.to_string(),
            opt(r.se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// JSON mirror of the report with a hex copy of every float.
pub fn report_json(report: &ExperimentReport) -> Result<serde_json::Value> {
    let dec = serde_json::to_value(report)?;
    Ok(serde_json::json!({ "report": dec, "hex": hex_mirror(&dec) }))
}

/// Write `report.csv`, `report.json`, `plotdata.csv` and (for the KLS table)
/// `kls_table.csv` into `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_report_csv(report, fs::File::create(dir.join("report.csv"))?)?;
    emit_plotdata(report, fs::File::create(dir.join("plotdata.csv"))?)?;
    if report.experiment == ExperimentKind::KlsTable || !report.kls_table.is_empty() {
        write_kls_csv(&report.kls_table, fs::File::create(dir.join("kls_table.csv"))?)?;
    }
    let json = serde_json::to_string_pretty(&report_json(report)?)?;
    fs::write(dir.join("report.json"), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_validation() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "kls-table", "bodies": [{"family": "lp", "p": 2}], "profiles": [{"family": "exponential"}],
                "dims": [2, 3], "count": 20000, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.gates, Gates { ratio_gate: 10.0, se_gate: 4.0 });
        assert_eq!(cfg.workers, 1);
        let low = r#"{"experiment": "verify-decomposition", "count": 9999, "seed": 1}"#;
        assert!(matches!(ExperimentConfig::from_json(low), Err(Error::InvalidParameter(_))));
        assert!(ExperimentConfig::from_json(r#"{"experiment": "nope", "count": 1, "seed": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "condition-check", "count": 0, "seed": 1}"#).is_ok());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "kls-table", "count": 20000, "seed": 1, "extra": 2}"#).is_err());
    }

    #[test]
    fn empty_report_plotdata_is_header_only() {
        let cfg = ExperimentConfig::new(ExperimentKind::ConditionCheck, 0, 0);
        let report = ExperimentReport {
            experiment: cfg.experiment,
            rows: vec![],
            kls_table: vec![],
            details: vec![],
            metadata: Metadata { config: cfg, workers: 1, wall_time_s: 0.0, version: "0".into() },
        };
        let mut out = Vec::new();
        emit_plotdata(&report, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "experiment,series,x,y,se\n");
        assert!(report.passed());
    }

    #[test]
    fn experiment_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::parse(k.name()).unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }
}
