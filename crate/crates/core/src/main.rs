use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reconfig_stbc::antenna::{gain_cost, gain_stationary_points, optimize_gain, upper_gain};
use reconfig_stbc::encoder::{check_admissible, describe_rotation, min_cgd, RotationAngles};
use reconfig_stbc::harness::{
    parse_snr_spec, resolve, run_scenario, verify_decoders, write_csv, ChannelMode, ConfigFile,
    Execution, Scenario, SimConfig,
};
use reconfig_stbc::Error;

#[derive(Parser)]
#[command(
    name = "reconfig-stbc",
    version,
    about = "Rate-2 rotated STBC for 2x2 reconfigurable-antenna MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rotation design, minimum coding-gain distance table and antenna-gain optimum
    Design(DesignArgs),
    /// Run all three decoders on the same noisy blocks and compare decisions
    Verify(VerifyArgs),
    /// BER sweep written as CSV
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// SNR grid in dB, a:b:step
    #[arg(long, value_name = "A:B:STEP")]
    snr: Option<String>,
    /// Modulation: bpsk, qpsk, 8psk, 16qam
    #[arg(long = "mod", value_name = "MOD")]
    modulation: Option<String>,
    /// Decoder: cond, pair, exhaustive
    #[arg(long, value_name = "NAME")]
    decoder: Option<String>,
    /// Channel mode: normalized, physical
    #[arg(long, value_name = "MODE")]
    channel: Option<String>,
    /// Explicit first rotation angle in radians instead of the designed one
    #[arg(long, value_name = "RAD")]
    theta1: Option<f64>,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    common: Common,
    /// Channel ratio k for the antenna-gain optimum
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    k: f64,
    /// 3-dB beamwidth in radians (defaults to the configured value)
    #[arg(long, value_name = "RAD")]
    beamwidth: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Number of blocks
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Maximum blocks per SNR point
    #[arg(long)]
    trials: Option<u64>,
    /// Bit errors after which an SNR point stops
    #[arg(long)]
    target_errors: Option<u64>,
}

/// Exit status for a failed run.
enum Failure {
    Usage(String),
    Rejected(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Capacity(_) => {
                Failure::Usage(e.to_string())
            }
            Error::DesignRejected { .. } => Failure::Rejected(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn resolve_common(c: &Common) -> Result<SimConfig, Error> {
    // An unreadable config file is a configuration problem, not a runtime one.
    let file = c
        .config
        .as_deref()
        .map(ConfigFile::load)
        .transpose()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mode = c
        .channel
        .as_deref()
        .map(str::parse::<ChannelMode>)
        .transpose()?;
    let mut cfg = resolve(file.as_ref(), mode)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = &c.snr {
        cfg.snr_db = parse_snr_spec(s)?;
    }
    if let Some(m) = &c.modulation {
        cfg.modulation = m.parse()?;
    }
    if let Some(d) = &c.decoder {
        cfg.decoder = d.parse()?;
    }
    if c.theta1.is_some() {
        cfg.theta1 = c.theta1;
    }
    Ok(cfg)
}

fn announce(cfg: &SimConfig) {
    println!("config_hash: {}  seed: {}", cfg.config_hash(), cfg.seed);
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn design(args: &DesignArgs) -> Result<(), Failure> {
    let mut cfg = resolve_common(&args.common)?;
    if let Some(b) = args.beamwidth {
        cfg.beamwidth = b;
    }
    cfg.validate()?;
    announce(&cfg);
    let c = cfg.constellation();
    let d = match cfg.theta1 {
        Some(t) => describe_rotation(&c, t)?,
        None => reconfig_stbc::encoder::design_rotation(&c)?,
    };
    let mut out = String::new();
    let _ = writeln!(out, "modulation: {}", cfg.modulation);
    let _ = writeln!(
        out,
        "theta1: {:.6} deg ({:.9} rad)",
        d.theta1.to_degrees(),
        d.theta1
    );
    let _ = writeln!(out, "min_cgd: {:.9}", d.min_cgd);
    let _ = writeln!(out, "injectivity margin: {:.9}", d.injectivity_margin);
    let _ = writeln!(out, "min_cgd by theta1:");
    let mut angles: Vec<f64> = (0..=4)
        .map(|i| i as f64 * std::f64::consts::FRAC_PI_8)
        .collect();
    angles.push(d.theta1);
    angles.sort_by(f64::total_cmp);
    for t in angles {
        let v = min_cgd(&c, &RotationAngles::complementary(t))?;
        let _ = writeln!(out, "  {:>10.4} deg  {:.9}", t.to_degrees(), v);
    }

    let b = cfg.beamwidth;
    let _ = writeln!(
        out,
        "antenna gain (k = {}, beamwidth = {:.6} rad, g_up = {:.6}):",
        args.k,
        b,
        upper_gain(b)
    );
    match gain_stationary_points(args.k, b) {
        Ok(sp) => {
            for p in sp.iter() {
                let _ = writeln!(
                    out,
                    "  stationary g = {:.6}  F = {:.6e}  F'' = {:.6e}  {:?}",
                    p.gain,
                    gain_cost(p.gain, args.k, b),
                    p.second_derivative,
                    p.curvature
                );
            }
        }
        Err(e) => {
            let _ = writeln!(out, "  stationary points: {e}");
        }
    }
    let g = optimize_gain(args.k, b)?;
    let _ = writeln!(
        out,
        "  optimum g = {:.6}  F = {:.6e}",
        g,
        gain_cost(g, args.k, b)
    );
    print!("{out}");
    if let Some(path) = &args.common.out {
        write_text(path, &out)?;
    }
    check_admissible(&c, &d.rotation)?;
    println!(
        "design: theta1 = {:.4} deg, min_cgd = {:.6}, margin = {:.6}",
        d.theta1.to_degrees(),
        d.min_cgd,
        d.injectivity_margin
    );
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let cfg = resolve_common(&args.common)?;
    announce(&cfg);
    let r = verify_decoders(&cfg, args.trials)?;
    let mut out = String::new();
    let _ = writeln!(out, "trials: {}", r.trials);
    let _ = writeln!(out, "mismatches: {}", r.mismatches);
    let _ = writeln!(out, "  conditional vs pair: {}", r.conditional_vs_pair);
    let _ = writeln!(out, "  exhaustive vs pair: {}", r.exhaustive_vs_pair);
    let _ = writeln!(
        out,
        "counts (exhaustive, pair, conditional): ({}, {}, {})",
        r.mean_cost.0, r.mean_cost.1, r.mean_cost.2
    );
    print!("{out}");
    if let Some(path) = &args.common.out {
        write_text(path, &out)?;
    }
    if r.mismatches > 0 {
        return Err(Failure::Runtime(format!(
            "{} of {} blocks decoded differently",
            r.mismatches, r.trials
        )));
    }
    println!("verify: all decoders agree on {} blocks", r.trials);
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut cfg = resolve_common(&args.common)?;
    if let Some(t) = args.trials {
        cfg.max_trials = t;
    }
    if let Some(t) = args.target_errors {
        cfg.target_errors = t;
    }
    announce(&cfg);
    let scenario = Scenario::new(&cfg)?;
    let curve = run_scenario(&scenario, Execution::default())?;
    for p in &curve.points {
        println!(
            "  {:>6} dB  ber {:.3e}  errors {:>7}  trials {:>9}",
            p.snr_db, p.ber, p.bit_errors, p.trials
        );
    }
    let path = args
        .common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("ber.csv"));
    write_csv(&curve, &path)?;
    println!(
        "simulate: {} points, theta1 = {:.4} deg, wrote {}",
        curve.points.len(),
        scenario.rotation.theta1.to_degrees(),
        path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => design(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
