//! Detectors for the rotated Alamouti block.
//!
//! Combining the two slots gives `r₁ = g·(s₁α₁ − s₂*β₁)` and
//! `r₂ = g·(s₃α₂ − s₄*β₂)` plus noise, with `g = √(P/2)·‖Ψ‖_F`, so each
//! symbol pair can be detected on its own. The conditional detector goes one
//! step further: for each candidate of the second symbol, the first one is a
//! plain slicer decision, so a pair costs `M` metric evaluations instead of
//! `M²`.
//!
//! All detectors break ties toward the lexicographically smallest index
//! tuple.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::constellation::Constellation;
use crate::encoder::{combine_pair, RotationAngles};
use crate::error::{invalid, Error, Result};
use crate::numerics::{Complex, Mat2};

/// Upper bound on `M⁴` for the joint search.
pub const EXHAUSTIVE_CAP: usize = 1_000_000;

/// Received samples, row `n` = slot, column `i` = receive antenna.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceivedBlock {
    pub y: Mat2,
}

impl ReceivedBlock {
    pub fn new(y: Mat2) -> Self {
        ReceivedBlock { y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionResult {
    pub indices: [usize; 4],
    pub metric: f64,
    pub cost_evaluations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDecision {
    pub a: usize,
    pub b: usize,
    pub metric: f64,
    pub cost_evaluations: u64,
}

/// `r₁ = (y₁(1) + y₂*(2))/√2`, `r₂ = (y₂(1) − y₁*(2))/√2`.
pub fn combine(rb: &ReceivedBlock) -> (Complex, Complex) {
    let y = &rb.y;
    (
        (y[(0, 0)] + y[(1, 1)].conj()) * FRAC_1_SQRT_2,
        (y[(0, 1)] - y[(1, 0)].conj()) * FRAC_1_SQRT_2,
    )
}

fn pair_gain(psi_norm: f64, power: f64) -> Result<f64> {
    if !(psi_norm > 0.0) || !psi_norm.is_finite() {
        return Err(Error::SingularChannel);
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(invalid(format!("power must be > 0, got {power}")));
    }
    Ok((power / 2.0).sqrt() * psi_norm)
}

/// `|r − g·(s_a·α − s_b*·β)|²`, the metric shared by both pair detectors.
#[inline]
pub fn pair_metric(r: Complex, gain: f64, sa: Complex, sb: Complex, alpha: f64, beta: f64) -> f64 {
    (r - combine_pair(sa, sb, alpha, beta) * gain).norm_sqr()
}

/// Joint search over all `M²` pairs.
pub fn pair_ml(
    r: Complex,
    psi_norm: f64,
    power: f64,
    alpha: f64,
    beta: f64,
    c: &Constellation,
) -> Result<PairDecision> {
    let gain = pair_gain(psi_norm, power)?;
    let pts = c.points();
    let mut best = PairDecision {
        a: 0,
        b: 0,
        metric: f64::INFINITY,
        cost_evaluations: 0,
    };
    for (a, &sa) in pts.iter().enumerate() {
        for (b, &sb) in pts.iter().enumerate() {
            let m = pair_metric(r, gain, sa, sb, alpha, beta);
            best.cost_evaluations += 1;
            // Strict comparison in (a, b) order keeps the lexicographic tie rule.
            if m < best.metric {
                best.a = a;
                best.b = b;
                best.metric = m;
            }
        }
    }
    Ok(best)
}

/// Conditional detection: `M` slicer calls and `M` metric evaluations.
///
/// For candidate `s_b^m`, `r̃ = r + g·s_b^{m*}·β` and the best first symbol is
/// `slice(r̃ / (g·α))`. The final comparison uses the pair metric on the
/// original `r`.
pub fn conditional_ml(
    r: Complex,
    psi_norm: f64,
    power: f64,
    alpha: f64,
    beta: f64,
    c: &Constellation,
) -> Result<PairDecision> {
    let gain = pair_gain(psi_norm, power)?;
    if !(alpha > 0.0) {
        return Err(Error::DegenerateRotation(format!(
            "conditional detection needs alpha > 0, got {alpha}"
        )));
    }
    let pts = c.points();
    let scale = 1.0 / (gain * alpha);
    let mut best = PairDecision {
        a: usize::MAX,
        b: 0,
        metric: f64::INFINITY,
        cost_evaluations: 0,
    };
    for (b, &sb) in pts.iter().enumerate() {
        let r_tilde = r + sb.conj() * (gain * beta);
        let a = c.slice(r_tilde * scale);
        let m = pair_metric(r, gain, pts[a], sb, alpha, beta);
        best.cost_evaluations += 1;
        if m < best.metric || (m == best.metric && a < best.a) {
            best.a = a;
            best.b = b;
            best.metric = m;
        }
    }
    Ok(best)
}

/// Joint search over all `M⁴` quadruplets minimizing `‖Y − X(s)·K‖²_F`,
/// `K = √P·ΨᴴΨ/‖Ψ‖_F`, which is the noiseless received block for the unit
/// codeword `X(s) = [[a, b], [−b*, a*]]`.
pub fn exhaustive_ml(
    rb: &ReceivedBlock,
    chan: &ChannelRealization,
    rot: &RotationAngles,
    power: f64,
    c: &Constellation,
) -> Result<DetectionResult> {
    let m = c.order();
    if m.checked_pow(4).is_none_or(|n| n > EXHAUSTIVE_CAP) {
        return Err(Error::Capacity(format!(
            "exhaustive search needs M^4 <= {EXHAUSTIVE_CAP}, got M = {m}"
        )));
    }
    if !(chan.psi_norm > 0.0) {
        return Err(Error::SingularChannel);
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(invalid(format!("power must be > 0, got {power}")));
    }
    let k = (chan.psi.conj_transpose() * chan.psi).scale(power.sqrt() / chan.psi_norm);
    let pts = c.points();
    let firsts: Vec<Complex> = pts
        .iter()
        .flat_map(|&s1| {
            pts.iter()
                .map(move |&s2| combine_pair(s1, s2, rot.alpha1, rot.beta1))
        })
        .collect();
    let seconds: Vec<Complex> = pts
        .iter()
        .flat_map(|&s3| {
            pts.iter()
                .map(move |&s4| combine_pair(s3, s4, rot.alpha2, rot.beta2))
        })
        .collect();
    let y = &rb.y;
    let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
    for (i, &a) in firsts.iter().enumerate() {
        // a-dependent parts of each received sample.
        let ua = [
            a * k[(0, 0)],
            a * k[(0, 1)],
            a.conj() * k[(1, 0)],
            a.conj() * k[(1, 1)],
        ];
        for (j, &b) in seconds.iter().enumerate() {
            let bc = b.conj();
            let e00 = y[(0, 0)] - ua[0] - b * k[(1, 0)];
            let e01 = y[(0, 1)] - ua[1] - b * k[(1, 1)];
            let e10 = y[(1, 0)] + bc * k[(0, 0)] - ua[2];
            let e11 = y[(1, 1)] + bc * k[(0, 1)] - ua[3];
            let d = e00.norm_sqr() + e01.norm_sqr() + e10.norm_sqr() + e11.norm_sqr();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    Ok(DetectionResult {
        indices: [best.0 / m, best.0 % m, best.1 / m, best.1 % m],
        metric: best.2,
        cost_evaluations: (m * m * m * m) as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    #[default]
    #[serde(alias = "cond")]
    Conditional,
    Pair,
    Exhaustive,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Exhaustive, Detector::Pair, Detector::Conditional];

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Conditional => "conditional",
            Detector::Pair => "pair",
            Detector::Exhaustive => "exhaustive",
        }
    }

    pub fn detect(
        &self,
        rb: &ReceivedBlock,
        chan: &ChannelRealization,
        rot: &RotationAngles,
        power: f64,
        c: &Constellation,
    ) -> Result<DetectionResult> {
        let pair_fn = match self {
            Detector::Exhaustive => return exhaustive_ml(rb, chan, rot, power, c),
            Detector::Pair => pair_ml,
            Detector::Conditional => conditional_ml,
        };
        let (r1, r2) = combine(rb);
        let p1 = pair_fn(r1, chan.psi_norm, power, rot.alpha1, rot.beta1, c)?;
        let p2 = pair_fn(r2, chan.psi_norm, power, rot.alpha2, rot.beta2, c)?;
        Ok(DetectionResult {
            indices: [p1.a, p1.b, p2.a, p2.b],
            metric: p1.metric + p2.metric,
            cost_evaluations: p1.cost_evaluations + p2.cost_evaluations,
        })
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
