//! Verification harness for the `toysht` library.
//!
//! A [`CheckSpec`] names one registered check together with its parameters
//! and seed; [`run`] turns it into a [`Report`], and [`run_suite`] runs a
//! list of specs and folds their verdicts into an exit code. Fail reports
//! carry a [`Witness`] that [`replay`] re-executes.

pub mod acceptance;
mod checks;
mod params;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use checks::CHECKS;
pub use params::Params;

/// Embedded in every report.
pub const SCHEMA_VERSION: &str = "toysht-report/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },
    #[error("cannot parse config: {0}")]
    ConfigParse(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize reports: {0}")]
    Serialize(String),
}

/// One check invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
}

impl CheckSpec {
    pub fn new(name: &str, seed: u64) -> CheckSpec {
        CheckSpec { name: name.to_string(), params: Params::default(), seed }
    }

    /// Builder-style parameter assignment.
    pub fn with(mut self, key: &str, value: impl Into<Value>) -> CheckSpec {
        self.params.insert(key, value.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Probabilistic,
}

/// Everything needed to reproduce a failure: the spec that produced it and
/// the first counterexample it reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub spec: CheckSpec,
    pub counterexample: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub name: String,
    pub params: Params,
    pub verdict: Verdict,
    pub mode: Mode,
    pub counters: BTreeMap<String, u64>,
    pub elapsed_ms: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Set when the check aborted, e.g. on an exhausted enumeration budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Knobs that apply to a whole run rather than a single check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for running specs concurrently; 0 picks a default.
    pub jobs: usize,
    /// Report `elapsed_ms = 0` so documents are byte-stable.
    pub no_timing: bool,
}

/// Runs a single check. Parameter errors are returned; failures of the
/// check itself, including exhausted budgets, become fail reports.
pub fn run(spec: &CheckSpec) -> Result<Report, CliError> {
    run_with(spec, RunOptions::default())
}

pub fn run_with(spec: &CheckSpec, opts: RunOptions) -> Result<Report, CliError> {
    let check = checks::lookup(&spec.name)?;
    checks::validate(check, &spec.params)?;
    let negate = spec.params.get_bool("selftest_negate", false)?;
    let start = Instant::now();
    let result = (check.run)(&spec.params, spec.seed);
    let elapsed_ms = if opts.no_timing { 0 } else { start.elapsed().as_millis() as u64 };
    let mut report = Report {
        schema: SCHEMA_VERSION.to_string(),
        name: spec.name.clone(),
        params: spec.params.clone(),
        verdict: Verdict::Pass,
        mode: check.mode,
        counters: BTreeMap::new(),
        elapsed_ms,
        seed: spec.seed,
        witness: None,
        error: None,
    };
    match result {
        Err(checks::CheckError::Param(e)) => return Err(e),
        Err(e) => {
            report.verdict = Verdict::Fail;
            report.error = Some(e.to_string());
            report.witness = Some(Witness { spec: spec.clone(), counterexample: Value::String(e.to_string()) });
        }
        Ok(outcome) => {
            report.mode = outcome.mode;
            report.counters = outcome.counters;
            report.verdict = if !outcome.counterexamples.is_empty() {
                Verdict::Fail
            } else if outcome.scanned == 0 {
                Verdict::Vacuous
            } else {
                Verdict::Pass
            };
            if let Some(first) = outcome.counterexamples.into_iter().next() {
                report.witness = Some(Witness { spec: spec.clone(), counterexample: first });
            }
        }
    }
    if negate {
        negate_report(&mut report, spec);
    }
    Ok(report)
}

/// Harness self-test: a pass becomes a fail whose witness is the evidence
/// that made it pass, and a fail becomes a pass.
fn negate_report(report: &mut Report, spec: &CheckSpec) {
    match report.verdict {
        Verdict::Pass => {
            report.verdict = Verdict::Fail;
            let evidence = serde_json::json!({ "negated": "pass", "counters": report.counters });
            report.witness = Some(Witness { spec: spec.clone(), counterexample: evidence });
        }
        Verdict::Fail => {
            report.verdict = Verdict::Pass;
            report.witness = None;
            report.error = None;
        }
        Verdict::Vacuous => {}
    }
}

/// Re-runs the witness's spec; true iff it fails again with the same
/// counterexample.
pub fn replay(witness: &Witness) -> Result<bool, CliError> {
    let report = run_with(&witness.spec, RunOptions { no_timing: true, ..Default::default() })?;
    Ok(report.verdict == Verdict::Fail
        && report.witness.as_ref().map(|w| &w.counterexample) == Some(&witness.counterexample))
}

/// Reports for every spec, in spec order, and the exit code: 0 iff no
/// report failed.
pub fn run_suite(specs: &[CheckSpec], opts: RunOptions) -> Result<(Vec<Report>, i32), CliError> {
    let work = || specs.par_iter().map(|s| run_with(s, opts)).collect::<Result<Vec<_>, _>>();
    let reports = if opts.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| CliError::ConfigParse(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };
    let code = if reports.iter().any(|r| r.verdict == Verdict::Fail) { 1 } else { 0 };
    Ok((reports, code))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    /// Seed for checks that do not set their own.
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    check: Vec<ConfigCheck>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigCheck {
    name: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    params: BTreeMap<String, toml::Value>,
}

/// Parses a TOML suite: an optional top-level `seed` and a list of
/// `[[check]]` tables with `name`, optional `seed` and a `params` table.
pub fn parse_config(text: &str, default_seed: u64) -> Result<Vec<CheckSpec>, CliError> {
    let cfg: ConfigFile = toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
    let base = cfg.seed.unwrap_or(default_seed);
    cfg.check
        .into_iter()
        .map(|c| {
            let mut params = Params::default();
            for (k, v) in c.params {
                let v = serde_json::to_value(v).map_err(|e| CliError::ConfigParse(e.to_string()))?;
                params.insert(&k, v);
            }
            Ok(CheckSpec { name: c.name, params, seed: c.seed.unwrap_or(base) })
        })
        .collect()
}

pub fn load_config(path: &Path, default_seed: u64) -> Result<Vec<CheckSpec>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_config(&text, default_seed)
}

/// The suite document: a pretty-printed JSON array of reports.
pub fn to_json(reports: &[Report]) -> Result<String, CliError> {
    serde_json::to_string_pretty(reports).map_err(|e| CliError::Serialize(e.to_string()))
}

/// One row per report; params and counters are embedded as JSON objects.
pub fn to_csv(reports: &[Report]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(["schema", "name", "verdict", "mode", "elapsed_ms", "seed", "params", "counters"]).map_err(ser)?;
    for r in reports {
        let verdict = serde_json::to_value(r.verdict).map_err(|e| CliError::Serialize(e.to_string()))?;
        let mode = serde_json::to_value(r.mode).map_err(|e| CliError::Serialize(e.to_string()))?;
        w.write_record([
            r.schema.clone(),
            r.name.clone(),
            verdict.as_str().unwrap_or_default().to_string(),
            mode.as_str().unwrap_or_default().to_string(),
            r.elapsed_ms.to_string(),
            r.seed.to_string(),
            serde_json::to_string(&r.params).map_err(|e| CliError::Serialize(e.to_string()))?,
            serde_json::to_string(&r.counters).map_err(|e| CliError::Serialize(e.to_string()))?,
        ])
        .map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}
