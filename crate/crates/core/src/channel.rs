//! Channel realizations: Rician fading with path loss and log-normal
//! shadowing, Wiener oscillator phase noise, and AWGN.
//!
//! Channel matrices use the `[tx][rx]` layout: entry `(j, i)` couples
//! transmit antenna `j` to receive antenna `i`, so a block of transmitted
//! samples `X` (rows = time slots, columns = transmit antennas) arrives as
//! `Y = X·Ψ`.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::antenna::build_psi;
use crate::error::{invalid, Result};
use crate::numerics::{sample_cgauss, sample_lognormal, sample_normal, Complex, Mat2, RngStream};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Units in which the shadowing parameters `mu_s`, `sigma_s` are given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShadowScale {
    /// `10·log10(s) ~ Normal(mu_s, sigma_s²)`.
    #[default]
    Db,
    /// `ln(s) ~ Normal(mu_s, sigma_s²)`.
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicianParams {
    pub carrier_hz: f64,
    pub ref_distance_m: f64,
    pub distance_m: f64,
    pub pathloss_exponent: f64,
    pub shadow_mu: f64,
    pub shadow_sigma: f64,
    pub shadow_scale: ShadowScale,
    /// Linear Rician factor (LoS power over scattered power).
    pub k_factor: f64,
    /// Deterministic line-of-sight component, unit-modulus entries.
    pub los: Mat2,
}

impl RicianParams {
    /// 60 GHz, 25 m link, exponent 4, 9 dB shadowing, K = 5 dB.
    pub fn physical_preset() -> Self {
        RicianParams {
            carrier_hz: 60e9,
            ref_distance_m: 1.0,
            distance_m: 25.0,
            pathloss_exponent: 4.0,
            shadow_mu: 0.0,
            shadow_sigma: 9.0,
            shadow_scale: ShadowScale::Db,
            k_factor: db_to_linear(5.0),
            los: Mat2::filled(Complex::new(1.0, 0.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("carrier frequency", self.carrier_hz),
            ("reference distance", self.ref_distance_m),
            ("distance", self.distance_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.pathloss_exponent >= 0.0) {
            return Err(invalid(format!(
                "path-loss exponent must be >= 0, got {}",
                self.pathloss_exponent
            )));
        }
        if !(self.k_factor >= 0.0) {
            return Err(invalid(format!(
                "Rician factor must be >= 0, got {}",
                self.k_factor
            )));
        }
        if !(self.shadow_sigma >= 0.0) || !self.shadow_mu.is_finite() {
            return Err(invalid(
                "shadowing parameters must be finite with sigma >= 0",
            ));
        }
        if self.los.entries().any(|z| (z.norm() - 1.0).abs() > 1e-9) {
            return Err(invalid("line-of-sight entries must have unit modulus"));
        }
        Ok(())
    }

    fn shadow_ln_params(&self) -> (f64, f64) {
        match self.shadow_scale {
            ShadowScale::Db => (
                self.shadow_mu * LN_10 / 10.0,
                self.shadow_sigma * LN_10 / 10.0,
            ),
            ShadowScale::Natural => (self.shadow_mu, self.shadow_sigma),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Free-space reference gain `(λ / 4π d₀)²`.
pub fn reference_gain(carrier_hz: f64, ref_distance_m: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    (wavelength / (4.0 * PI * ref_distance_m)).powi(2)
}

/// Linear power scale `K(f_c)/s · (d₀/d)^γ` for shadowing draw `s`.
pub fn pathloss_scale(p: &RicianParams, shadowing: f64) -> Result<f64> {
    if !(shadowing > 0.0) {
        return Err(invalid(format!(
            "shadowing factor must be > 0, got {shadowing}"
        )));
    }
    Ok(reference_gain(p.carrier_hz, p.ref_distance_m) / shadowing
        * (p.ref_distance_m / p.distance_m).powf(p.pathloss_exponent))
}

/// Unit-power Rician fading: `√(K/(K+1))·los + √(1/(K+1))·n`, `n ~ CN(0, 1)`.
pub fn sample_fading(k_factor: f64, los: &Mat2, rng: &mut RngStream) -> Mat2 {
    let w_los = (k_factor / (k_factor + 1.0)).sqrt();
    let w_nlos = (1.0 / (k_factor + 1.0)).sqrt();
    let mut h = Mat2::zero();
    for r in 0..2 {
        for c in 0..2 {
            let n = sample_cgauss(rng, 1.0).expect("unit variance");
            h[(r, c)] = los[(r, c)] * w_los + n * w_nlos;
        }
    }
    h
}

pub fn sample_shadowing(p: &RicianParams, rng: &mut RngStream) -> Result<f64> {
    let (mu, sigma) = p.shadow_ln_params();
    sample_lognormal(rng, mu, sigma)
}

/// Full physical draw: one shadowing value per realization, then fading
/// scaled by the path loss.
pub fn sample_rician(p: &RicianParams, rng: &mut RngStream) -> Result<Mat2> {
    let s = sample_shadowing(p, rng)?;
    let scale = pathloss_scale(p, s)?;
    Ok(sample_fading(p.k_factor, &p.los, rng).scale(scale.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseNoiseParams {
    /// Per-slot increment variance at each transmit oscillator, rad².
    pub var_tx: f64,
    /// Per-slot increment variance at each receive oscillator, rad².
    pub var_rx: f64,
}

impl PhaseNoiseParams {
    pub fn none() -> Self {
        PhaseNoiseParams::default()
    }

    /// 3e-3 rad² at both ends.
    pub fn physical_preset() -> Self {
        PhaseNoiseParams {
            var_tx: 3e-3,
            var_rx: 3e-3,
        }
    }

    pub fn is_active(&self) -> bool {
        self.var_tx > 0.0 || self.var_rx > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.var_tx >= 0.0 && self.var_rx >= 0.0) {
            return Err(invalid("phase-noise variances must be >= 0"));
        }
        Ok(())
    }
}

/// One Wiener step, `θ(n) = θ(n−1) + Δ`, `Δ ~ Normal(0, var)`.
pub fn phase_noise_step(theta_prev: f64, var: f64, rng: &mut RngStream) -> Result<f64> {
    if !(var >= 0.0) {
        return Err(invalid(format!(
            "phase-noise variance must be >= 0, got {var}"
        )));
    }
    Ok(theta_prev + sample_normal(rng, 0.0, var.sqrt())?)
}

/// Oscillator phases over one two-slot block, `[slot][antenna]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PhaseTrack {
    pub tx: [[f64; 2]; 2],
    pub rx: [[f64; 2]; 2],
}

impl PhaseTrack {
    /// Each oscillator starts at `θ(0) = 0` and takes one step per slot.
    pub fn sample(params: &PhaseNoiseParams, rng: &mut RngStream) -> Result<Self> {
        params.validate()?;
        let mut track = PhaseTrack::default();
        for ant in 0..2 {
            let mut t = 0.0;
            let mut r = 0.0;
            for slot in 0..2 {
                t = phase_noise_step(t, params.var_tx, rng)?;
                r = phase_noise_step(r, params.var_rx, rng)?;
                track.tx[slot][ant] = t;
                track.rx[slot][ant] = r;
            }
        }
        Ok(track)
    }
}

/// Noiseless received block with oscillator rotations:
/// `y_i(n) = Σ_j e^{jθ_i^r(n)} Ψ(j,i) e^{jθ_j^t(n)} X(n,j)`.
pub fn apply_phase_noise(samples: &Mat2, psi: &Mat2, phases: &PhaseTrack) -> Mat2 {
    let mut y = Mat2::zero();
    for n in 0..2 {
        for i in 0..2 {
            let mut acc = Complex::new(0.0, 0.0);
            for j in 0..2 {
                let rot = Complex::from_polar(1.0, phases.rx[n][i] + phases.tx[n][j]);
                acc += rot * psi[(j, i)] * samples[(n, j)];
            }
            y[(n, i)] = acc;
        }
    }
    y
}

/// Noiseless received block without phase noise, `Y = X·Ψ`.
pub fn propagate(samples: &Mat2, psi: &Mat2) -> Mat2 {
    *samples * *psi
}

/// Adds i.i.d. `CN(0, n0)` to every sample.
pub fn apply_awgn(samples: &mut [Complex], n0: f64, rng: &mut RngStream) -> Result<()> {
    if !(n0 >= 0.0) {
        return Err(invalid(format!("noise density must be >= 0, got {n0}")));
    }
    if n0 == 0.0 {
        return Ok(());
    }
    for s in samples {
        *s += sample_cgauss(rng, n0)?;
    }
    Ok(())
}

pub fn apply_awgn_block(y: &Mat2, n0: f64, rng: &mut RngStream) -> Result<Mat2> {
    let mut out = *y;
    apply_awgn(out.0.as_flattened_mut(), n0, rng)?;
    Ok(out)
}

/// Fading, antenna gains, and their product for one block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: Mat2,
    pub g: Mat2,
    pub psi: Mat2,
    pub psi_norm: f64,
}

impl ChannelRealization {
    pub fn new(h: Mat2, g: Mat2) -> Self {
        let psi = build_psi(&h, &g);
        ChannelRealization {
            h,
            g,
            psi,
            psi_norm: psi.frobenius_norm(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RicianParams {
        RicianParams::physical_preset()
    }

    #[test]
    fn preset_is_valid() {
        params().validate().unwrap();
        assert!((params().k_factor - 3.1623).abs() < 1e-4);
    }

    #[test]
    fn pathloss_reference_distance() {
        let mut p = params();
        p.distance_m = p.ref_distance_m;
        let k = reference_gain(p.carrier_hz, p.ref_distance_m);
        assert!((pathloss_scale(&p, 1.0).unwrap() - k).abs() < 1e-22);
        // (0.004997 / 12.566)^2
        assert!((k - 1.58e-7).abs() < 0.01e-7, "{k}");
        let direct = (SPEED_OF_LIGHT / 60e9 / (4.0 * PI)).powi(2);
        assert!((k - direct).abs() < 1e-20);
    }

    #[test]
    fn pathloss_power_law() {
        let p = params();
        let a = pathloss_scale(&p, 2.0).unwrap();
        let mut q = p;
        q.distance_m *= 2.0;
        let b = pathloss_scale(&q, 2.0).unwrap();
        assert!((a / b - 16.0).abs() < 1e-9);
        assert!(pathloss_scale(&p, 0.0).is_err());
        assert!(pathloss_scale(&p, -1.0).is_err());
    }

    #[test]
    fn strong_los_limit() {
        let mut p = params();
        p.k_factor = 1e12;
        p.shadow_sigma = 0.0;
        let los = Mat2::new(
            Complex::from_polar(1.0, 0.3),
            Complex::from_polar(1.0, -1.0),
            Complex::from_polar(1.0, 2.0),
            Complex::new(1.0, 0.0),
        );
        p.los = los;
        let mut rng = RngStream::new(4, 4);
        let h = sample_rician(&p, &mut rng).unwrap();
        let scale = pathloss_scale(&p, 1.0).unwrap().sqrt();
        for r in 0..2 {
            for c in 0..2 {
                let expect = los[(r, c)] * scale;
                assert!((h[(r, c)] - expect).norm() / expect.norm() < 1e-5);
            }
        }
    }

    #[test]
    fn normalized_rayleigh_power() {
        let mut rng = RngStream::new(10, 0);
        let los = Mat2::filled(Complex::new(1.0, 0.0));
        let n = 250_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_fading(0.0, &los, &mut rng).frobenius_norm_sqr();
        }
        let per_entry = acc / (4 * n) as f64;
        assert!((per_entry - 1.0).abs() < 0.01, "{per_entry}");
    }

    #[test]
    fn los_power_split() {
        // K = 5 dB: deterministic share K/(K+1).
        let k = db_to_linear(5.0);
        assert!((k / (k + 1.0) - 0.7597).abs() < 1e-4);
        let los = Mat2::filled(Complex::new(1.0, 0.0));
        let mut rng = RngStream::new(12, 0);
        let n = 200_000;
        let (mut mean, mut power) = (Complex::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let h = sample_fading(k, &los, &mut rng);
            mean += h[(0, 0)];
            power += h[(0, 0)].norm_sqr();
        }
        let mean = mean / n as f64;
        assert!((mean.norm_sqr() - k / (k + 1.0)).abs() < 0.01);
        assert!((power / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn rician_is_deterministic() {
        let p = params();
        let a = sample_rician(&p, &mut RngStream::new(5, 77)).unwrap();
        let b = sample_rician(&p, &mut RngStream::new(5, 77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_noise_zero_variance() {
        let mut rng = RngStream::new(1, 2);
        assert_eq!(phase_noise_step(0.25, 0.0, &mut rng).unwrap(), 0.25);
        assert!(phase_noise_step(0.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn phase_noise_variance_grows_linearly() {
        let var = 3e-3;
        let paths = 100_000;
        for steps in [1usize, 4, 10] {
            let mut rng = RngStream::new(21, steps as u64);
            let mut acc = 0.0;
            for _ in 0..paths {
                let mut th = 0.0;
                for _ in 0..steps {
                    th = phase_noise_step(th, var, &mut rng).unwrap();
                }
                acc += th * th;
            }
            let v = acc / paths as f64;
            let expect = steps as f64 * var;
            assert!(
                (v - expect).abs() < 0.05 * expect,
                "steps={steps}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn phase_track_starts_at_zero() {
        let mut rng = RngStream::new(3, 3);
        let t = PhaseTrack::sample(&PhaseNoiseParams::none(), &mut rng).unwrap();
        assert_eq!(t, PhaseTrack::default());
    }

    fn random_mat(rng: &mut RngStream) -> Mat2 {
        let mut m = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                m[(r, c)] = sample_cgauss(rng, 1.0).unwrap();
            }
        }
        m
    }

    #[test]
    fn phase_rotation_examples() {
        let mut rng = RngStream::new(30, 0);
        let x = random_mat(&mut rng);
        let psi = random_mat(&mut rng);
        let y0 = apply_phase_noise(&x, &psi, &PhaseTrack::default());
        assert!((y0 - propagate(&x, &psi)).max_abs() < 1e-14);

        let flip = PhaseTrack {
            tx: [[PI; 2]; 2],
            rx: [[0.0; 2]; 2],
        };
        let y1 = apply_phase_noise(&x, &psi, &flip);
        assert!((y1 + y0).max_abs() < 1e-14);

        // Per-path modulus is untouched.
        let t = PhaseTrack::sample(
            &PhaseNoiseParams {
                var_tx: 0.5,
                var_rx: 0.5,
            },
            &mut rng,
        )
        .unwrap();
        for n in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let rot = Complex::from_polar(1.0, t.rx[n][i] + t.tx[n][j]);
                    let term = rot * psi[(j, i)] * x[(n, j)];
                    assert!((term.norm() - (psi[(j, i)] * x[(n, j)]).norm()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn awgn_examples() {
        let mut rng = RngStream::new(6, 6);
        let y = random_mat(&mut rng);
        assert_eq!(apply_awgn_block(&y, 0.0, &mut rng).unwrap(), y);
        assert!(apply_awgn_block(&y, -1.0, &mut rng).is_err());

        let n = 1_000_000;
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        apply_awgn(&mut buf, 1.0, &mut rng).unwrap();
        let p = buf.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((p - 1.0).abs() < 0.01, "{p}");

        let a = apply_awgn_block(&y, 0.3, &mut RngStream::new(9, 1)).unwrap();
        let b = apply_awgn_block(&y, 0.3, &mut RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn realization_invariants() {
        let mut rng = RngStream::new(2, 2);
        let h = random_mat(&mut rng);
        let g = Mat2::from_real([[1.5, 0.5], [0.5, 1.5]]);
        let ch = ChannelRealization::new(h, g);
        assert_eq!(ch.psi, h.hadamard(&g));
        assert!((ch.psi_norm - ch.psi.frobenius_norm()).abs() < 1e-12);
    }
}
