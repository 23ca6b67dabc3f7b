//! Simulation configuration, presets, TOML file schema and the config hash.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{db_to_linear, PhaseNoiseParams, RicianParams, ShadowScale};
use crate::constellation::Constellation;
use crate::decoder::Detector;
use crate::error::{Error, Result};
use crate::numerics::{Complex, Mat2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Modulation {
    #[serde(rename = "bpsk")]
    Bpsk,
    #[default]
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "8psk")]
    Psk8,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Modulation {
    pub fn constellation(&self) -> Constellation {
        match self {
            Modulation::Bpsk => Constellation::psk(2),
            Modulation::Qpsk => Constellation::psk(4),
            Modulation::Psk8 => Constellation::psk(8),
            Modulation::Qam16 => Constellation::qam(16),
        }
        .expect("supported order")
    }

    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Psk8 => "8psk",
            Modulation::Qam16 => "16qam",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// Unit-power Rician fading, no path loss or shadowing.
    #[default]
    Normalized,
    /// Path loss, log-normal shadowing and Rician fading.
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AntennaMode {
    /// All gains one.
    #[default]
    Unit,
    /// Per-block symmetric gains from the gain-cost optimizer.
    Optimized,
}

macro_rules! display_from_str {
    ($t:ty, $name:literal, [$($s:literal => $v:expr),+ $(,)?]) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($s => Ok($v),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", $name, " '{}'; expected one of: {}"),
                        other,
                        [$($s),+].join(", ")
                    ))),
                }
            }
        }
    };
}

display_from_str!(Modulation, "modulation", [
    "bpsk" => Modulation::Bpsk,
    "qpsk" => Modulation::Qpsk,
    "8psk" => Modulation::Psk8,
    "16qam" => Modulation::Qam16,
]);
display_from_str!(ChannelMode, "channel mode", [
    "normalized" => ChannelMode::Normalized,
    "physical" => ChannelMode::Physical,
]);
display_from_str!(AntennaMode, "antenna mode", [
    "unit" => AntennaMode::Unit,
    "optimized" => AntennaMode::Optimized,
]);
display_from_str!(Detector, "decoder", [
    "cond" => Detector::Conditional,
    "conditional" => Detector::Conditional,
    "pair" => Detector::Pair,
    "exhaustive" => Detector::Exhaustive,
]);

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelMode::Normalized => "normalized",
            ChannelMode::Physical => "physical",
        })
    }
}

/// Path-loss and shadowing parameters (physical mode only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub carrier_hz: f64,
    pub ref_distance_m: f64,
    pub distance_m: f64,
    pub pathloss_exponent: f64,
    pub shadow_mu: f64,
    pub shadow_sigma: f64,
    pub shadow_scale: ShadowScale,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        let p = RicianParams::physical_preset();
        PhysicalParams {
            carrier_hz: p.carrier_hz,
            ref_distance_m: p.ref_distance_m,
            distance_m: p.distance_m,
            pathloss_exponent: p.pathloss_exponent,
            shadow_mu: p.shadow_mu,
            shadow_sigma: p.shadow_sigma,
            shadow_scale: p.shadow_scale,
        }
    }
}

/// Fully resolved simulation settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub modulation: Modulation,
    pub decoder: Detector,
    pub channel: ChannelMode,
    /// Explicit first rotation angle in radians; designed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    /// Transmit power per antenna.
    pub power: f64,
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    pub target_errors: u64,
    /// Linear Rician factor; 0 is Rayleigh.
    pub k_factor: f64,
    pub antenna: AntennaMode,
    pub beamwidth: f64,
    pub physical: PhysicalParams,
    pub phase_noise: PhaseNoiseParams,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TARGET_ERRORS: u64 = 400;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;

impl SimConfig {
    /// Starting point for a channel mode before file and flag overrides.
    pub fn preset(mode: ChannelMode) -> Self {
        let base = SimConfig {
            seed: DEFAULT_SEED,
            modulation: Modulation::Qpsk,
            decoder: Detector::Conditional,
            channel: mode,
            theta1: None,
            power: 1.0,
            snr_db: snr_range(0.0, 24.0, 2.0).expect("valid grid"),
            max_trials: DEFAULT_MAX_TRIALS,
            target_errors: DEFAULT_TARGET_ERRORS,
            k_factor: 0.0,
            antenna: AntennaMode::Unit,
            beamwidth: std::f64::consts::FRAC_PI_4,
            physical: PhysicalParams::default(),
            phase_noise: PhaseNoiseParams::none(),
        };
        match mode {
            ChannelMode::Normalized => base,
            ChannelMode::Physical => SimConfig {
                k_factor: db_to_linear(5.0),
                antenna: AntennaMode::Optimized,
                phase_noise: PhaseNoiseParams::physical_preset(),
                ..base
            },
        }
    }

    pub fn constellation(&self) -> Constellation {
        self.modulation.constellation()
    }

    /// Fading model for this configuration. Normalized mode keeps only the
    /// Rician factor (unit path gain, no shadowing).
    pub fn rician(&self) -> RicianParams {
        let p = &self.physical;
        RicianParams {
            carrier_hz: p.carrier_hz,
            ref_distance_m: p.ref_distance_m,
            distance_m: p.distance_m,
            pathloss_exponent: p.pathloss_exponent,
            shadow_mu: p.shadow_mu,
            shadow_sigma: p.shadow_sigma,
            shadow_scale: p.shadow_scale,
            k_factor: self.k_factor,
            los: Mat2::filled(Complex::new(1.0, 0.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.snr_db.is_empty() {
            return bad("SNR grid is empty".into());
        }
        if self
            .snr_db
            .iter()
            .any(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return bad("SNR values must be numbers (+inf allowed)".into());
        }
        if self.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("SNR grid must be strictly increasing".into());
        }
        if self.max_trials < 1 {
            return bad("max_trials must be >= 1".into());
        }
        if self.target_errors < 1 {
            return bad("target_errors must be >= 1".into());
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return bad(format!("power must be > 0, got {}", self.power));
        }
        if let Some(t) = self.theta1 {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&t) {
                return bad(format!("theta1 must lie in [0, pi/2], got {t}"));
            }
        }
        if !(self.beamwidth > 0.0 && self.beamwidth < std::f64::consts::TAU) {
            return bad(format!(
                "beamwidth must lie in (0, 2pi), got {}",
                self.beamwidth
            ));
        }
        self.rician()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.phase_noise
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.decoder == Detector::Exhaustive && self.modulation == Modulation::Qam16 {
            return bad("exhaustive decoding of 16qam exceeds the 1e6 search cap".into());
        }
        Ok(())
    }

    /// Canonical TOML text of the configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical TOML of every
    /// field except the seed.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.seed = 0;
        let digest = Sha256::digest(c.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Inclusive grid `a, a+step, …, ≤ b`.
pub fn snr_range(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || !(step > 0.0) || b < a {
        return Err(Error::Config(format!("bad SNR range {a}:{b}:{step}")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize + 1;
    if n > 10_000 {
        return Err(Error::Config(format!(
            "SNR range {a}:{b}:{step} has too many points"
        )));
    }
    Ok((0..n).map(|i| a + i as f64 * step).collect())
}

/// Parses `a:b:step` (or a single value).
pub fn parse_snr_spec(s: &str) -> Result<Vec<f64>> {
    let nums: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad SNR spec '{s}', expected a:b:step")))?;
    match nums.as_slice() {
        [a] if !a.is_nan() => Ok(vec![*a]),
        [a, b, step] => snr_range(*a, *b, *step),
        _ => Err(Error::Config(format!(
            "bad SNR spec '{s}', expected a:b:step"
        ))),
    }
}

/// Partial configuration as written in a TOML file; absent keys keep the
/// preset value.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub modulation: Option<Modulation>,
    pub decoder: Option<Detector>,
    pub channel: Option<ChannelMode>,
    pub theta1: Option<f64>,
    pub power: Option<f64>,
    pub snr_db: Option<Vec<f64>>,
    /// Alternative to `snr_db`: `"a:b:step"`.
    pub snr: Option<String>,
    pub max_trials: Option<u64>,
    pub target_errors: Option<u64>,
    pub k_factor: Option<f64>,
    pub k_factor_db: Option<f64>,
    pub antenna: Option<AntennaMode>,
    pub beamwidth: Option<f64>,
    pub physical: Option<PhysicalFile>,
    pub phase_noise: Option<PhaseNoiseFile>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalFile {
    pub carrier_hz: Option<f64>,
    pub ref_distance_m: Option<f64>,
    pub distance_m: Option<f64>,
    pub pathloss_exponent: Option<f64>,
    pub shadow_mu: Option<f64>,
    pub shadow_sigma: Option<f64>,
    pub shadow_scale: Option<ShadowScale>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseNoiseFile {
    pub var_tx: Option<f64>,
    pub var_rx: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&self, cfg: &mut SimConfig) -> Result<()> {
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.modulation, self.modulation);
        set(&mut cfg.decoder, self.decoder);
        set(&mut cfg.channel, self.channel);
        if self.theta1.is_some() {
            cfg.theta1 = self.theta1;
        }
        set(&mut cfg.power, self.power);
        match (&self.snr_db, &self.snr) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either snr_db or snr, not both".into()))
            }
            (Some(v), None) => cfg.snr_db = v.clone(),
            (None, Some(s)) => cfg.snr_db = parse_snr_spec(s)?,
            (None, None) => {}
        }
        set(&mut cfg.max_trials, self.max_trials);
        set(&mut cfg.target_errors, self.target_errors);
        match (self.k_factor, self.k_factor_db) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either k_factor or k_factor_db, not both".into(),
                ))
            }
            (Some(k), None) => cfg.k_factor = k,
            (None, Some(db)) => cfg.k_factor = db_to_linear(db),
            (None, None) => {}
        }
        set(&mut cfg.antenna, self.antenna);
        set(&mut cfg.beamwidth, self.beamwidth);
        if let Some(p) = &self.physical {
            let q = &mut cfg.physical;
            set(&mut q.carrier_hz, p.carrier_hz);
            set(&mut q.ref_distance_m, p.ref_distance_m);
            set(&mut q.distance_m, p.distance_m);
            set(&mut q.pathloss_exponent, p.pathloss_exponent);
            set(&mut q.shadow_mu, p.shadow_mu);
            set(&mut q.shadow_sigma, p.shadow_sigma);
            set(&mut q.shadow_scale, p.shadow_scale);
        }
        if let Some(p) = &self.phase_noise {
            set(&mut cfg.phase_noise.var_tx, p.var_tx);
            set(&mut cfg.phase_noise.var_rx, p.var_rx);
        }
        Ok(())
    }
}

/// Preset for the file's (or the overriding) channel mode, then the file.
pub fn resolve(file: Option<&ConfigFile>, mode_override: Option<ChannelMode>) -> Result<SimConfig> {
    let mode = mode_override
        .or(file.and_then(|f| f.channel))
        .unwrap_or_default();
    let mut cfg = SimConfig::preset(mode);
    if let Some(f) = file {
        f.apply(&mut cfg)?;
    }
    cfg.channel = mode;
    Ok(cfg)
}
