use crate::error::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "in")]
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub relation: Relation,
    /// One bound for `<=`/`>=`, two for `in`.
    pub limit: Vec<f64>,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), passed: value <= limit, value, relation: Relation::AtMost, limit: vec![limit] }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), passed: value >= limit, value, relation: Relation::AtLeast, limit: vec![limit] }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), passed: lo <= value && value <= hi, value, relation: Relation::Within, limit: vec![lo, hi] }
    }
}

/// One experiment result. Contains no wall-clock data, so equal configs give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub provenance: String,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

impl RunRecord {
    pub fn new<C: Serialize>(experiment: &str, config: &C, checks: Vec<Check>, data: serde_json::Value) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(RunRecord { experiment: experiment.into(), provenance: provenance(&config)?, config, checks, data })
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", self.experiment, c.name)).collect()
    }

    pub fn to_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// sha256 of the key-sorted JSON form of a config.
pub fn provenance(config: &serde_json::Value) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub provenance: String,
    pub experiment: String,
    pub finished_unix: f64,
    pub elapsed_seconds: f64,
}

impl RunSidecar {
    pub fn now(record: &RunRecord, elapsed_seconds: f64) -> Self {
        let finished_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        RunSidecar { provenance: record.provenance.clone(), experiment: record.experiment.clone(), finished_unix, elapsed_seconds }
    }
}

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SIDECAR_FILE: &str = "records.times.jsonl";

/// Append a record to `dir/records.jsonl` and its timing to the sidecar.
pub fn append_record(dir: &Path, record: &RunRecord, sidecar: &RunSidecar) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(RECORDS_FILE);
    let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
    writeln!(f, "{}", record.to_line()?)?;
    let mut s = OpenOptions::new().create(true).append(true).open(dir.join(SIDECAR_FILE))?;
    writeln!(s, "{}", serde_json::to_string(sidecar)?)?;
    Ok(path)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub records: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl ReportSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Write `summary.csv` and `report.json` under `dir`.
pub fn emit_report(records: &[RunRecord], dir: &Path) -> Result<ReportSummary> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("experiment,provenance,check,passed,value,relation,limit\n");
    let mut failures = Vec::new();
    let mut checks = 0;
    for r in records {
        for c in &r.checks {
            checks += 1;
            let rel = serde_json::to_value(c.relation)?;
            let limit: Vec<String> = c.limit.iter().map(|x| format!("{x:e}")).collect();
            csv.push_str(&format!(
                "{},{},{},{},{:e},{},{}\n",
                r.experiment,
                &r.provenance[..12],
                c.name,
                c.passed,
                c.value,
                rel.as_str().unwrap_or(""),
                limit.join(";")
            ));
        }
        failures.extend(r.failures());
    }
    fs::write(dir.join("summary.csv"), csv)?;
    let summary = ReportSummary { records: records.len(), checks, failures };
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}
