//! Monte-Carlo BER harness: configuration, deterministic trial execution,
//! decoder cross-checks and CSV output.

pub mod config;
pub mod curve;
pub mod exec;
pub mod sim;

pub use config::{
    parse_snr_spec, resolve, snr_range, AntennaMode, ChannelMode, ConfigFile, Modulation,
    PhysicalParams, SimConfig,
};
pub use curve::{
    estimate_diversity_slope, is_monotone, monotonicity_violations, read_csv, write_csv, BerCurve,
    BerPoint, CSV_HEADER,
};
pub use exec::Execution;
pub use sim::{
    run_ber, run_ber_with, run_scenario, verify_decoders, verify_decoders_with, Scenario,
    VerifyReport,
};
