//! Codeword construction and the coding-gain algebra behind it.
//!
//! Four symbols are folded into two rotated combinations
//!
//! ```text
//! a = s₁·α₁ − s₂*·β₁        b = s₃·α₂ − s₄*·β₂
//! ```
//!
//! (`α = sin θ`, `β = cos θ`), which are then sent in an Alamouti pattern
//! `√P·[[a, b], [−b*, a*]]`. Precoding right-multiplies by `Ψᴴ/‖Ψ‖_F`.

pub mod design;

use crate::error::{invalid, Error, Result};
use crate::numerics::{Complex, Mat2};

pub use design::{
    check_admissible, closed_form_theta1, coding_gain_expr, describe_rotation, design_rotation,
    min_cgd, optimal_theta1, optimal_theta1_for_points, stationary_theta1, validate_injectivity,
    RotationDesign,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

impl RotationAngles {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        RotationAngles {
            theta1,
            theta2,
            alpha1: theta1.sin(),
            beta1: theta1.cos(),
            alpha2: theta2.sin(),
            beta2: theta2.cos(),
        }
    }

    /// `θ₂ = π/2 − θ₁`, so `α₂ = β₁` and `β₂ = α₁` exactly.
    pub fn complementary(theta1: f64) -> Self {
        let (alpha1, beta1) = theta1.sin_cos();
        RotationAngles {
            theta1,
            theta2: std::f64::consts::FRAC_PI_2 - theta1,
            alpha1,
            beta1,
            alpha2: beta1,
            beta2: alpha1,
        }
    }

    pub fn first_pair(&self) -> (f64, f64) {
        (self.alpha1, self.beta1)
    }

    pub fn second_pair(&self) -> (f64, f64) {
        (self.alpha2, self.beta2)
    }
}

/// `x·α − y*·β`, the rotated combination carried by one Alamouti slot.
#[inline]
pub fn combine_pair(x: Complex, y: Complex, alpha: f64, beta: f64) -> Complex {
    x * alpha - y.conj() * beta
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Codeword {
    /// Row `n` = time slot, column `j` = transmit antenna.
    pub samples: Mat2,
    /// Transmit power per antenna.
    pub power: f64,
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(invalid(format!("power must be > 0, got {power}")));
    }
    Ok(())
}

fn alamouti(a: Complex, b: Complex, power: f64) -> Mat2 {
    Mat2::new(a, b, -b.conj(), a.conj()).scale(power.sqrt())
}

pub fn encode_raw(s: &[Complex; 4], rot: &RotationAngles, power: f64) -> Result<Codeword> {
    check_power(power)?;
    let a = combine_pair(s[0], s[1], rot.alpha1, rot.beta1);
    let b = combine_pair(s[2], s[3], rot.alpha2, rot.beta2);
    Ok(Codeword {
        samples: alamouti(a, b, power),
        power,
    })
}

/// `𝒞 = C·Ψᴴ / ‖Ψ‖_F`.
pub fn precode(c: &Codeword, psi: &Mat2) -> Result<Codeword> {
    let norm = psi.frobenius_norm();
    if !(norm > 0.0) {
        return Err(Error::SingularChannel);
    }
    Ok(Codeword {
        samples: (c.samples * psi.conj_transpose()).scale(1.0 / norm),
        power: c.power,
    })
}

/// Classical rate-1 Alamouti block `√P·[[s₁, s₂], [−s₂*, s₁*]]`.
pub fn encode_alamouti(s: &[Complex; 2], power: f64) -> Result<Codeword> {
    check_power(power)?;
    Ok(Codeword {
        samples: alamouti(s[0], s[1], power),
        power,
    })
}

/// Symbol differences `dᵢ = sᵢ − uᵢ` between two codewords.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DifferenceSet {
    pub d: [Complex; 4],
}

impl DifferenceSet {
    pub fn new(d: [Complex; 4]) -> Self {
        DifferenceSet { d }
    }

    pub fn between(s: &[Complex; 4], u: &[Complex; 4]) -> Self {
        DifferenceSet {
            d: [s[0] - u[0], s[1] - u[1], s[2] - u[2], s[3] - u[3]],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|z| *z == Complex::new(0.0, 0.0))
    }
}

/// `(D, D′) = (d₁α₁ − d₂*β₁, d₃α₂ − d₄*β₂)`.
pub fn diff_metrics(d: &DifferenceSet, rot: &RotationAngles) -> (Complex, Complex) {
    (
        combine_pair(d.d[0], d.d[1], rot.alpha1, rot.beta1),
        combine_pair(d.d[2], d.d[3], rot.alpha2, rot.beta2),
    )
}

/// `det[(𝒞−𝒰)ᴴ(𝒞−𝒰)]`, evaluated directly.
pub fn det_difference(c: &Codeword, u: &Codeword) -> f64 {
    let e = c.samples - u.samples;
    (e.conj_transpose() * e).det().re
}

/// Factored form of [`det_difference`] for precoded codewords:
/// `P²·(|D|²+|D′|²)²·|det Ψ|² / ‖Ψ‖_F⁴`.
///
/// `|det Ψ|² = |h₁,₁g₁(φ₁)h₂,₂g₂(φ₂) − h₁,₂g₂(φ₁)h₂,₁g₁(φ₂)|²` is the channel
/// factor; the `P²/‖Ψ‖_F⁴` scale comes from the precoder normalization.
pub fn det_difference_factored(
    d: &DifferenceSet,
    rot: &RotationAngles,
    power: f64,
    psi: &Mat2,
) -> f64 {
    let (dd, dp) = diff_metrics(d, rot);
    let sym = dd.norm_sqr() + dp.norm_sqr();
    let norm2 = psi.frobenius_norm_sqr();
    power * power * sym * sym * psi.det().norm_sqr() / (norm2 * norm2)
}
