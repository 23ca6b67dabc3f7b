//! Monte-Carlo BER engine and decoder cross-checks.
//!
//! Every trial draws from its own random streams, keyed by
//! `(seed, purpose, snr index, trial index)`. Symbols, channel, noise and
//! phase noise use separate purposes, so two configurations that differ only
//! in the phase-noise setting see the same channels, symbols and noise.

use crate::antenna::{optimize_antenna, AntennaConfig};
use crate::channel::{
    apply_awgn_block, apply_phase_noise, propagate, sample_fading, sample_rician,
    ChannelRealization, PhaseTrack,
};
use crate::constellation::Constellation;
use crate::decoder::{Detector, ReceivedBlock};
use crate::encoder::{check_admissible, encode_raw, optimal_theta1, precode, RotationAngles};
use crate::error::{Error, Result};
use crate::numerics::{Mat2, RngStream};

use super::config::{AntennaMode, ChannelMode, SimConfig};
use super::curve::{BerCurve, BerPoint};
use super::exec::{Execution, CHUNK};

/// Number of receive antennas.
pub const RX_ANTENNAS: f64 = 2.0;
/// Draws used to estimate `E‖Ψ‖²_F` when no closed form applies.
pub const CALIBRATION_DRAWS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Symbols = 1,
    Channel = 2,
    Noise = 3,
    PhaseNoise = 4,
    Calibration = 5,
}

/// `purpose << 56 | snr_index << 40 | trial`.
pub fn stream_id(purpose: Purpose, snr_index: usize, trial: u64) -> u64 {
    debug_assert!(snr_index < 1 << 16 && trial < 1 << 40);
    (purpose as u64) << 56 | (snr_index as u64) << 40 | trial
}

/// One simulated block.
#[derive(Clone, Copy, Debug)]
pub struct Instance {
    pub indices: [usize; 4],
    pub channel: ChannelRealization,
    pub received: ReceivedBlock,
}

/// A validated configuration with everything that is fixed across trials.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub cfg: SimConfig,
    pub constellation: Constellation,
    pub rotation: RotationAngles,
    pub injectivity_margin: f64,
    /// `E‖Ψ‖²_F` used by the SNR convention.
    pub mean_psi_energy: f64,
    pub config_hash: String,
}

impl Scenario {
    /// Validates, designs (or checks) the rotation and calibrates the SNR
    /// reference. Rejects rotations that merge distinct symbol pairs.
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let constellation = cfg.constellation();
        let theta1 = match cfg.theta1 {
            Some(t) => t,
            None => optimal_theta1(&constellation)?,
        };
        let rotation = RotationAngles::complementary(theta1);
        let injectivity_margin = check_admissible(&constellation, &rotation)?;
        let mut s = Scenario {
            cfg: cfg.clone(),
            constellation,
            rotation,
            injectivity_margin,
            mean_psi_energy: 0.0,
            config_hash: cfg.config_hash(),
        };
        s.mean_psi_energy = s.calibrate()?;
        Ok(s)
    }

    fn calibrate(&self) -> Result<f64> {
        if self.cfg.channel == ChannelMode::Normalized && self.cfg.antenna == AntennaMode::Unit {
            // Unit-power fading entries times unit gains.
            return Ok(4.0);
        }
        let mut acc = 0.0;
        for i in 0..CALIBRATION_DRAWS {
            let mut rng =
                RngStream::new(self.cfg.seed, stream_id(Purpose::Calibration, 0, i as u64));
            acc += self.draw_channel(&mut rng)?.psi.frobenius_norm_sqr();
        }
        let mean = acc / CALIBRATION_DRAWS as f64;
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean channel energy is {mean}"
            )));
        }
        Ok(mean)
    }

    fn draw_channel(&self, rng: &mut RngStream) -> Result<ChannelRealization> {
        let h = match self.cfg.channel {
            ChannelMode::Normalized => {
                let p = self.cfg.rician();
                sample_fading(p.k_factor, &p.los, rng)
            }
            ChannelMode::Physical => sample_rician(&self.cfg.rician(), rng)?,
        };
        let antenna = match self.cfg.antenna {
            AntennaMode::Unit => AntennaConfig::unit(self.cfg.beamwidth),
            AntennaMode::Optimized => optimize_antenna(&h, self.cfg.beamwidth)?.config,
        };
        Ok(ChannelRealization::new(h, antenna.gain_matrix()))
    }

    /// `N0 = P·E‖Ψ‖²_F / (N_r·snr)`; zero at `+inf` dB.
    pub fn noise_density(&self, snr_db: f64) -> f64 {
        if snr_db == f64::INFINITY {
            return 0.0;
        }
        let snr = 10f64.powf(snr_db / 10.0);
        self.cfg.power * self.mean_psi_energy / (RX_ANTENNAS * snr)
    }

    pub fn bits_per_block(&self) -> u64 {
        4 * self.constellation.bits_per_symbol() as u64
    }

    /// Draws, encodes and transmits one block.
    pub fn instance(&self, snr_index: usize, trial: u64, n0: f64) -> Result<Instance> {
        let seed = self.cfg.seed;
        let mut sym_rng = RngStream::new(seed, stream_id(Purpose::Symbols, snr_index, trial));
        let mut ch_rng = RngStream::new(seed, stream_id(Purpose::Channel, snr_index, trial));
        let mut noise_rng = RngStream::new(seed, stream_id(Purpose::Noise, snr_index, trial));

        let m = self.constellation.order();
        let indices: [usize; 4] = std::array::from_fn(|_| sym_rng.index(m));
        let symbols = indices.map(|i| self.constellation.point(i));
        let channel = self.draw_channel(&mut ch_rng)?;
        let cw = precode(
            &encode_raw(&symbols, &self.rotation, self.cfg.power)?,
            &channel.psi,
        )?;
        let clean = if self.cfg.phase_noise.is_active() {
            let mut pn_rng = RngStream::new(seed, stream_id(Purpose::PhaseNoise, snr_index, trial));
            let track = PhaseTrack::sample(&self.cfg.phase_noise, &mut pn_rng)?;
            apply_phase_noise(&cw.samples, &channel.psi, &track)
        } else {
            propagate(&cw.samples, &channel.psi)
        };
        let y: Mat2 = apply_awgn_block(&clean, n0, &mut noise_rng)?;
        Ok(Instance {
            indices,
            channel,
            received: ReceivedBlock::new(y),
        })
    }

    /// Bit errors of one block under `detector`.
    pub fn trial_errors(
        &self,
        detector: Detector,
        snr_index: usize,
        trial: u64,
        n0: f64,
    ) -> Result<u32> {
        let inst = self.instance(snr_index, trial, n0)?;
        let det = detector.detect(
            &inst.received,
            &inst.channel,
            &self.rotation,
            self.cfg.power,
            &self.constellation,
        )?;
        Ok(inst
            .indices
            .iter()
            .zip(det.indices)
            .map(|(&a, b)| (a ^ b).count_ones())
            .sum())
    }
}

/// [`run_ber_with`] using the default execution strategy.
pub fn run_ber(cfg: &SimConfig) -> Result<BerCurve> {
    run_ber_with(cfg, Execution::default())
}

/// Simulates every SNR point until `target_errors` bit errors or
/// `max_trials` blocks, whichever comes first. The stop is decided in trial
/// order, so the counters do not depend on `exec` or the thread count.
pub fn run_ber_with(cfg: &SimConfig, exec: Execution) -> Result<BerCurve> {
    let scenario = Scenario::new(cfg)?;
    run_scenario(&scenario, exec)
}

pub fn run_scenario(scenario: &Scenario, exec: Execution) -> Result<BerCurve> {
    let cfg = &scenario.cfg;
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (k, &snr_db) in cfg.snr_db.iter().enumerate() {
        let n0 = scenario.noise_density(snr_db);
        let (mut trials, mut errors) = (0u64, 0u64);
        'chunks: while trials < cfg.max_trials {
            let start = trials;
            let len = (cfg.max_trials - start).min(CHUNK as u64) as usize;
            let batch = exec.map(0..len, |i| {
                scenario.trial_errors(cfg.decoder, k, start + i as u64, n0)
            });
            for e in batch {
                errors += e? as u64;
                trials += 1;
                if errors >= cfg.target_errors {
                    break 'chunks;
                }
            }
        }
        let bits = trials * scenario.bits_per_block();
        points.push(BerPoint {
            snr_db,
            ber: errors as f64 / bits as f64,
            bit_errors: errors,
            bits,
            trials,
        });
    }
    Ok(BerCurve {
        points,
        seed: cfg.seed,
        config_hash: scenario.config_hash.clone(),
    })
}

/// Outcome of running all three detectors on the same blocks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub trials: u64,
    /// Blocks on which the three decisions are not all equal.
    pub mismatches: u64,
    pub conditional_vs_pair: u64,
    pub exhaustive_vs_pair: u64,
    /// Mean metric evaluations per block for (exhaustive, pair, conditional).
    pub mean_cost: (f64, f64, f64),
    /// Blocks where the pair decision differs from the transmitted symbols.
    pub pair_symbol_errors: u64,
}

/// Decodes `trials` blocks with every detector. Trials cycle through the
/// configured SNR grid.
pub fn verify_decoders(cfg: &SimConfig, trials: u64) -> Result<VerifyReport> {
    verify_decoders_with(cfg, trials, Execution::default())
}

pub fn verify_decoders_with(cfg: &SimConfig, trials: u64, exec: Execution) -> Result<VerifyReport> {
    let mut cfg = cfg.clone();
    cfg.decoder = Detector::Exhaustive;
    let scenario = Scenario::new(&cfg)?;
    let n0: Vec<f64> = cfg
        .snr_db
        .iter()
        .map(|&s| scenario.noise_density(s))
        .collect();
    let grid = n0.len() as u64;

    let mut report = VerifyReport {
        trials,
        ..Default::default()
    };
    let mut costs = [0u64; 3];
    let mut done = 0u64;
    while done < trials {
        let start = done;
        let len = (trials - start).min(CHUNK as u64) as usize;
        let batch = exec.map(0..len, |i| -> Result<_> {
            let t = start + i as u64;
            let k = (t % grid) as usize;
            let inst = scenario.instance(k, t / grid, n0[k])?;
            let mut out = [([0usize; 4], 0u64); 3];
            for (slot, det) in Detector::ALL.iter().enumerate() {
                let d = det.detect(
                    &inst.received,
                    &inst.channel,
                    &scenario.rotation,
                    cfg.power,
                    &scenario.constellation,
                )?;
                out[slot] = (d.indices, d.cost_evaluations);
            }
            Ok((inst.indices, out))
        });
        for r in batch {
            let (sent, [ex, pair, cond]) = r?;
            costs[0] += ex.1;
            costs[1] += pair.1;
            costs[2] += cond.1;
            let cp = cond.0 != pair.0;
            let ep = ex.0 != pair.0;
            report.conditional_vs_pair += cp as u64;
            report.exhaustive_vs_pair += ep as u64;
            report.mismatches += (cp || ep) as u64;
            report.pair_symbol_errors += (pair.0 != sent) as u64;
            done += 1;
        }
    }
    let n = trials.max(1) as f64;
    report.mean_cost = (
        costs[0] as f64 / n,
        costs[1] as f64 / n,
        costs[2] as f64 / n,
    );
    Ok(report)
}
