mod settings;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use settings::SettingsError;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use wgnls::experiments::*;
use wgnls::fields::write_snapshot;

#[derive(Parser)]
#[command(name = "wgnls", version, about = "Quasi-resonant NLS experiments on waveguide manifolds")]
struct Cli {
    /// TOML config; repeat to run one job per file.
    #[arg(short, long, global = true)]
    config: Vec<PathBuf>,

    /// Override a config key, e.g. `--set run.t_end=5`.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output root for records and artifacts.
    #[arg(short, long, env = "WGNLS_OUT", default_value = "wgnls-out", global = true)]
    out: PathBuf,

    /// Print the resolved config and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Gap profile, fitted law and box bounds for a theta vector.
    ProfileTheta,
    /// Resonant or quasi-resonant quartet list.
    EnumResonances,
    /// Smallest nonzero levels and emptiness below the box bound.
    MinGap,
    /// Integrate the truncated or gauged system.
    Simulate,
    /// Conservation, no-cascade and claim-identity battery.
    VerifyInvariants,
    /// Decay of the stationary-phase error.
    StationaryPhase,
    /// Decay of the full-minus-limit trilinear gap.
    PiVsR,
    /// Full split-step solution against the windowed effective flow.
    CompareEffective,
    /// Threshold and box-radius schedule.
    Schedule,
    /// Summarise every record under the output root.
    Report,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Settings(#[from] SettingsError),
    #[error(transparent)]
    Run(#[from] wgnls::Error),
    #[error("cannot serialise config: {0}")]
    Toml(#[from] toml::ser::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use wgnls::Error as E;
        match self {
            CliError::Run(E::Aliasing { .. } | E::StepUnderflow { .. } | E::NonFinite { .. } | E::AmplitudeTooLarge(_)) => 3,
            _ => 2,
        }
    }
}

struct Artifact {
    name: String,
    bytes: Vec<u8>,
}

struct Outcome {
    record: RunRecord,
    artifacts: Vec<Artifact>,
}

impl Outcome {
    fn bare(record: RunRecord) -> Self {
        Outcome { record, artifacts: Vec::new() }
    }
}

fn load<C: Serialize + DeserializeOwned + Default>(cli: &Cli, file: Option<&Path>) -> Result<C, CliError> {
    let table = file.map(settings::read_file).transpose()?;
    Ok(settings::resolve(table, &cli.overrides)?)
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s.into_bytes()
}

fn short(record: &RunRecord) -> &str {
    &record.provenance[..12]
}

fn run_job(cli: &Cli, cmd: Command, file: Option<&Path>) -> Result<Outcome, CliError> {
    macro_rules! config {
        ($t:ty) => {{
            let cfg: $t = load(cli, file)?;
            if cli.print_config {
                print!("{}", toml::to_string(&cfg)?);
                return Ok(Outcome::bare(RunRecord::new("print-config", &cfg, Vec::new(), serde_json::Value::Null)?));
            }
            cfg
        }};
    }
    let outcome = match cmd {
        Command::ProfileTheta => Outcome::bare(run_profile(&config!(ProfileConfig))?),
        Command::EnumResonances => {
            let (record, list) = run_enum(&config!(EnumConfig))?;
            let mut bytes = Vec::new();
            list.write_jsonl(&mut bytes)?;
            let name = format!("quartets-{}.jsonl", short(&record));
            Outcome { record, artifacts: vec![Artifact { name, bytes }] }
        }
        Command::MinGap => Outcome::bare(run_min_gap(&config!(MinGapConfig))?),
        Command::Simulate => {
            let (record, sim) = run_simulate(&config!(SimulateConfig))?;
            let tag = short(&record).to_string();
            let tr = &sim.trajectory;
            let mut lines = String::new();
            for (i, t) in tr.times.iter().enumerate() {
                let line = serde_json::json!({ "t": t, "norms": tr.reports[i], "support_radius": tr.support_radius[i] });
                let _ = writeln!(lines, "{line}");
            }
            let mut artifacts = vec![Artifact { name: format!("trajectory-{tag}.jsonl"), bytes: lines.into_bytes() }];
            let dir = cli.out.join(format!("snapshots-{tag}"));
            if !tr.states.is_empty() || tr.final_state.is_some() {
                fs::create_dir_all(&dir).map_err(wgnls::Error::from)?;
            }
            for (i, state) in tr.states.iter().enumerate() {
                write_snapshot(&dir.join(format!("state-{i:04}.wgsf")), state, serde_json::json!({ "t": tr.times[i] }))?;
            }
            if let Some(last) = &tr.final_state {
                write_snapshot(&dir.join("final.wgsf"), last, serde_json::json!({ "t": tr.times.last() }))?;
            }
            artifacts.retain(|a| !a.bytes.is_empty());
            Outcome { record, artifacts }
        }
        Command::VerifyInvariants => Outcome::bare(run_conservation_suite(&config!(SuiteConfig))?),
        Command::StationaryPhase => {
            let (record, probe) = run_stationary(&config!(StationaryConfig))?;
            let bytes = csv("s,error,normalized", probe.results.iter().map(|r| format!("{:e},{:e},{:e}", r.s, r.error, r.normalized)));
            let name = format!("stationary-phase-{}.csv", short(&record));
            Outcome { record, artifacts: vec![Artifact { name, bytes }] }
        }
        Command::PiVsR => Outcome::bare(run_pi_vs_r(&config!(PiVsRConfig))?),
        Command::CompareEffective => {
            let record = run_compare_effective(&config!(CompareConfig))?;
            let mut rows = Vec::new();
            for run in ["nonlinear", "linear"] {
                for w in record.data[run]["windows"].as_array().into_iter().flatten() {
                    let times = w["times"].as_array().cloned().unwrap_or_default();
                    for (i, t) in times.iter().enumerate() {
                        rows.push(format!("{run},{},{},{},{}", w["n"], t, w["residual_h"][i], w["residual_z"][i]));
                    }
                }
            }
            let name = format!("residuals-{}.csv", short(&record));
            Outcome { artifacts: vec![Artifact { name, bytes: csv("run,n,t,residual_h,residual_z", rows) }], record }
        }
        Command::Schedule => {
            let (record, s) = run_schedule(&config!(ScheduleConfig))?;
            let bytes = csv(
                "n,m,k,window_lo,window_hi",
                s.entries.iter().map(|e| format!("{},{:e},{:e},{},{}", e.n, e.m, e.k, e.window.0, e.window.1)),
            );
            let name = format!("schedule-{}.csv", short(&record));
            Outcome { record, artifacts: vec![Artifact { name, bytes }] }
        }
        Command::Report => unreachable!("report is not a job"),
    };
    Ok(outcome)
}

fn print_checks(record: &RunRecord) {
    for c in &record.checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Within => "in",
        };
        let limit: Vec<String> = c.limit.iter().map(|x| format!("{x:e}")).collect();
        println!("  {} {}: {:e} {rel} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, limit.join(".."));
    }
}

fn report(cli: &Cli) -> Result<bool, CliError> {
    let records = read_records(&cli.out.join(RECORDS_FILE))?;
    let summary = emit_report(&records, &cli.out)?;
    println!("{} records, {} checks, {} failures", summary.records, summary.checks, summary.failures.len());
    for f in &summary.failures {
        println!("  FAIL {f}");
    }
    Ok(summary.passed())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Command::Report = cli.command {
        return report(cli);
    }
    let files: Vec<Option<&Path>> = if cli.config.is_empty() { vec![None] } else { cli.config.iter().map(|p| Some(p.as_path())).collect() };
    let mut all_passed = true;
    for file in files {
        let start = Instant::now();
        let Outcome { record, artifacts } = run_job(cli, cli.command, file)?;
        if cli.print_config {
            continue;
        }
        let elapsed = start.elapsed().as_secs_f64();
        append_record(&cli.out, &record, &RunSidecar::now(&record, elapsed))?;
        for a in artifacts {
            fs::write(cli.out.join(&a.name), a.bytes).map_err(wgnls::Error::from)?;
        }
        println!("{} [{}] {} in {elapsed:.2}s", record.experiment, short(&record), if record.passed() { "PASS" } else { "FAIL" });
        print_checks(&record);
        all_passed &= record.passed();
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
