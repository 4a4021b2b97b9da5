//! Experiment configurations, runners and run records.

mod compare;
mod config;
mod probes;
mod record;
mod schedule;
mod suite;

pub use compare::{compare_effective, run_compare_effective, CompareConfig, CompareReport, WindowResult};
pub use config::{sqrt_prime, DataSpec, ThresholdSpec, XiSpec};
pub use probes::{
    pi_vs_r_fields, run_enum, run_min_gap, run_pi_vs_r, run_profile, run_schedule, run_stationary, schedule_checks, EnumConfig,
    MinGapConfig, PiVsRConfig, ProfileConfig, QuasiSpec, ScheduleConfig, StationaryConfig,
};
pub use record::{
    append_record, emit_report, provenance, read_records, Check, Relation, ReportSummary, RunRecord, RunSidecar, RECORDS_FILE,
    SIDECAR_FILE,
};
pub use schedule::{build_schedule, schedule_from_law, Schedule, ScheduleEntry, MAX_DELTA};
pub use suite::{
    claim_battery, run_conservation_suite, run_simulate, simulate, ClaimBattery, ClaimResult, NegativeControl, SimulateConfig,
    Simulation, SuiteConfig,
};
