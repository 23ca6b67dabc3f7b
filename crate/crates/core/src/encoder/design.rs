//! Rotation-angle design: minimum coding-gain distance and its maximization
//! over `θ₁ ∈ [0, π/2]` with `θ₂ = π/2 − θ₁`.
//!
//! For a fixed difference set the objective is
//! `f(θ) = A·sin²θ + B·cos²θ − C·sin 2θ` with `A = |d₁|²+|d₄|²`,
//! `B = |d₂|²+|d₃|²`, `C = Re{d₁d₂} + Re{d₃d₄}`. Because `D` only involves
//! `(d₁, d₂)` and `D′` only `(d₃, d₄)`, the minimum over all nonzero
//! difference sets is reached with one of the two pairs zero, so the search
//! runs over single-pair "terms" instead of full 4-tuples.

use std::f64::consts::FRAC_PI_2;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::numerics::{Complex, ZERO};

use super::{combine_pair, DifferenceSet, RotationAngles};

/// Largest constellation accepted by the enumerating design routines.
pub const MAX_DESIGN_ORDER: usize = 16;

const GRID_POINTS: usize = 2049;
/// Relative slack for "equally good" designs; ties go to the smaller angle.
const TIE_TOL: f64 = 1e-12;
/// Margins at or below this are treated as a collapse of distinct symbols.
pub const INJECTIVITY_TOL: f64 = 1e-9;

fn check_order(c: &Constellation) -> Result<()> {
    if c.order() > MAX_DESIGN_ORDER {
        return Err(Error::Capacity(format!(
            "design enumeration limited to M <= {MAX_DESIGN_ORDER}, got M = {}",
            c.order()
        )));
    }
    Ok(())
}

/// `f(θ)` for one difference set.
pub fn coding_gain_expr(d: &DifferenceSet, theta1: f64) -> f64 {
    let (a, b, c) = objective_coeffs(d);
    eval(a, b, c, theta1)
}

fn objective_coeffs(d: &DifferenceSet) -> (f64, f64, f64) {
    let [d1, d2, d3, d4] = d.d;
    (
        d1.norm_sqr() + d4.norm_sqr(),
        d2.norm_sqr() + d3.norm_sqr(),
        (d1 * d2).re + (d3 * d4).re,
    )
}

#[inline]
fn eval(a: f64, b: f64, c: f64, theta: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    a * s * s + b * co * co - c * (2.0 * theta).sin()
}

/// The printed closed form
/// `tan θ = √((B² − 2X)/(A² − 2X))`, `X = C² − AB/2`.
///
/// `None` when the ratio is negative, undefined or not finite.
pub fn closed_form_theta1(d: &DifferenceSet) -> Option<f64> {
    let (a, b, c) = objective_coeffs(d);
    let x = c * c - 0.5 * a * b;
    let num = b * b - 2.0 * x;
    let den = a * a - 2.0 * x;
    let ratio = num / den;
    if !ratio.is_finite() || ratio < 0.0 {
        return None;
    }
    Some(ratio.sqrt().atan())
}

/// Maximizer of `f` over `[0, π/2]`, from `f′ = 0 ⇔ tan 2θ = 2C/(A − B)`.
///
/// Writing `f = (A+B)/2 + R·cos(2θ − φ)`, the peak sits at `2θ = φ` when
/// that lies in `[0, π]`, otherwise at the nearer endpoint. Constant `f`
/// returns 0.
pub fn stationary_theta1(d: &DifferenceSet) -> f64 {
    let (a, b, c) = objective_coeffs(d);
    peak_of(a, b, c)
}

fn peak_of(a: f64, b: f64, c: f64) -> f64 {
    let x = 0.5 * (b - a);
    let y = -c;
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    let phi = y.atan2(x);
    if phi >= 0.0 {
        0.5 * phi
    } else if eval(a, b, c, 0.0) >= eval(a, b, c, FRAC_PI_2) {
        0.0
    } else {
        FRAC_PI_2
    }
}

/// All differences between pairs of constellation points, nonzero pair
/// differences only, in a canonical order.
fn pair_differences(points: &[Complex]) -> Vec<(Complex, Complex)> {
    let mut deltas: Vec<Complex> = Vec::with_capacity(points.len() * points.len());
    for p in points {
        for q in points {
            deltas.push(p - q);
        }
    }
    sort_dedup(&mut deltas);
    let mut out = Vec::with_capacity(deltas.len() * deltas.len());
    for &x in &deltas {
        for &y in &deltas {
            if x != ZERO || y != ZERO {
                out.push((x, y));
            }
        }
    }
    out
}

fn sort_dedup(v: &mut Vec<Complex>) {
    v.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    v.dedup();
}

/// `min over nonzero (x, y) of |x·α − y*·β|²`.
fn min_pair_metric(diffs: &[(Complex, Complex)], alpha: f64, beta: f64) -> f64 {
    diffs
        .iter()
        .map(|&(x, y)| combine_pair(x, y, alpha, beta).norm_sqr())
        .fold(f64::INFINITY, f64::min)
}

/// Minimum over distinct 4-symbol tuples of `(|D|² + |D′|²)²`.
pub fn min_cgd(c: &Constellation, rot: &RotationAngles) -> Result<f64> {
    check_order(c)?;
    let diffs = pair_differences(c.points());
    let m = min_pair_metric(&diffs, rot.alpha1, rot.beta1)
        .min(min_pair_metric(&diffs, rot.alpha2, rot.beta2));
    Ok(m * m)
}

/// Smallest `|s_a·α − s_b*·β − (u_a·α − u_b*·β)|` over distinct symbol pairs,
/// taken over both rotation pairs. Zero means two different pairs produce
/// the same combined value and cannot be told apart.
pub fn validate_injectivity(c: &Constellation, rot: &RotationAngles) -> Result<f64> {
    check_order(c)?;
    let diffs = pair_differences(c.points());
    let m = min_pair_metric(&diffs, rot.alpha1, rot.beta1)
        .min(min_pair_metric(&diffs, rot.alpha2, rot.beta2));
    Ok(m.sqrt())
}

/// Rejects rotations whose injectivity margin is (numerically) zero.
pub fn check_admissible(c: &Constellation, rot: &RotationAngles) -> Result<f64> {
    let margin = validate_injectivity(c, rot)?;
    if margin <= INJECTIVITY_TOL {
        return Err(Error::DesignRejected { margin });
    }
    Ok(margin)
}

/// One sinusoidal piece `A·sin²θ + B·cos²θ − C·sin 2θ` of the design
/// objective, with the difference set that produced it.
#[derive(Clone, Copy, Debug)]
struct Term {
    a: f64,
    b: f64,
    c: f64,
    d: DifferenceSet,
}

impl Term {
    fn at(&self, theta: f64) -> f64 {
        eval(self.a, self.b, self.c, theta)
    }

    fn amplitude(&self) -> f64 {
        (0.25 * (self.b - self.a).powi(2) + self.c * self.c).sqrt()
    }
}

fn build_terms(points: &[Complex]) -> Vec<Term> {
    let diffs = pair_differences(points);
    let mut terms: Vec<Term> = Vec::with_capacity(2 * diffs.len());
    for &(x, y) in &diffs {
        // First pair (d₁, d₂) = (x, y); second pair (d₃, d₄) = (x, y).
        for d in [[x, y, ZERO, ZERO], [ZERO, ZERO, x, y]] {
            let d = DifferenceSet::new(d);
            let (a, b, c) = objective_coeffs(&d);
            terms.push(Term { a, b, c, d });
        }
    }
    terms.sort_by(|p, q| {
        p.a.total_cmp(&q.a)
            .then(p.b.total_cmp(&q.b))
            .then(p.c.total_cmp(&q.c))
    });
    terms.dedup_by(|p, q| p.a == q.a && p.b == q.b && p.c == q.c);
    terms
}

fn objective(terms: &[Term], theta: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.at(theta))
        .fold(f64::INFINITY, f64::min)
}

/// Angles in `[lo, hi]` where two terms are equal.
fn crossings(p: &Term, q: &Term, lo: f64, hi: f64, out: &mut Vec<f64>) {
    // (Δa)sin² + (Δb)cos² − (Δc)sin2θ = m + x·cos2θ + y·sin2θ
    let (da, db, dc) = (p.a - q.a, p.b - q.b, p.c - q.c);
    let m = 0.5 * (da + db);
    let x = 0.5 * (db - da);
    let y = -dc;
    let r = x.hypot(y);
    if r == 0.0 || m.abs() > r {
        return;
    }
    let phi = y.atan2(x);
    let delta = (-m / r).clamp(-1.0, 1.0).acos();
    for base in [phi + delta, phi - delta] {
        for k in -2..=2 {
            let theta = 0.5 * (base + k as f64 * std::f64::consts::TAU);
            if theta >= lo && theta <= hi {
                out.push(theta);
            }
        }
    }
}

fn golden_max(terms: &[Term], mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(terms, x1);
    let mut f2 = objective(terms, x2);
    for _ in 0..80 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(terms, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(terms, x2);
        }
    }
    0.5 * (lo + hi)
}

/// Result of the rotation design for one constellation.
#[derive(Clone, Debug)]
pub struct RotationDesign {
    pub theta1: f64,
    pub rotation: RotationAngles,
    /// `(min |D|²)²` at `theta1`.
    pub min_cgd: f64,
    pub injectivity_margin: f64,
    /// Difference sets attaining the minimum at `theta1`.
    pub active: Vec<DifferenceSet>,
}

/// Maximin rotation for a constellation given as its point list.
///
/// A uniform grid locates every near-optimal region; each is refined by a
/// golden-section search and certified against exact candidates (term
/// crossings, per-term peaks, the printed closed form on the active sets).
pub fn optimal_theta1_for_points(points: &[Complex]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    if points.len() > MAX_DESIGN_ORDER {
        return Err(Error::Capacity(format!(
            "design enumeration limited to M <= {MAX_DESIGN_ORDER}, got M = {}",
            points.len()
        )));
    }
    let terms = build_terms(points);
    let step = FRAC_PI_2 / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| objective(&terms, i as f64 * step))
        .collect();
    let best_grid = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_amp = terms.iter().map(Term::amplitude).fold(0.0, f64::max);
    // Over one grid step no term moves by more than 2R·step.
    let slack = 4.0 * max_amp * step;

    let mut best = (f64::NEG_INFINITY, 0.0);
    let consider = |theta: f64, best: &mut (f64, f64)| {
        let v = objective(&terms, theta);
        let better = v > best.0 * (1.0 + TIE_TOL) + TIE_TOL
            || (v >= best.0 * (1.0 - TIE_TOL) - TIE_TOL && theta < best.1);
        if better && v.is_finite() {
            *best = (v.max(best.0), theta);
        }
    };

    for (i, &g) in grid.iter().enumerate() {
        if g + slack < best_grid {
            continue;
        }
        let lo = (i as f64 - 1.0).max(0.0) * step;
        let hi = ((i + 1) as f64 * step).min(FRAC_PI_2);
        let mid = i as f64 * step;
        consider(mid, &mut best);
        consider(golden_max(&terms, lo, hi), &mut best);

        let near: Vec<&Term> = terms.iter().filter(|t| t.at(mid) <= g + slack).collect();
        let mut cands = Vec::new();
        for (k, p) in near.iter().enumerate() {
            let peak = peak_of(p.a, p.b, p.c);
            if peak >= lo && peak <= hi {
                cands.push(peak);
            }
            if let Some(t) = closed_form_theta1(&p.d) {
                if t >= lo && t <= hi {
                    cands.push(t);
                }
            }
            for q in &near[k + 1..] {
                crossings(p, q, lo, hi, &mut cands);
            }
        }
        for t in cands {
            consider(t, &mut best);
        }
    }
    Ok(best.1)
}

/// Maximin `θ₁` for a constellation.
pub fn optimal_theta1(c: &Constellation) -> Result<f64> {
    check_order(c)?;
    optimal_theta1_for_points(c.points())
}

/// Runs [`optimal_theta1`] and collects the figures of merit at the optimum.
pub fn design_rotation(c: &Constellation) -> Result<RotationDesign> {
    let theta1 = optimal_theta1(c)?;
    describe_rotation(c, theta1)
}

/// Figures of merit for an arbitrary complementary rotation.
pub fn describe_rotation(c: &Constellation, theta1: f64) -> Result<RotationDesign> {
    check_order(c)?;
    let rotation = RotationAngles::complementary(theta1);
    let terms = build_terms(c.points());
    let value = objective(&terms, theta1);
    let active = terms
        .iter()
        .filter(|t| t.at(theta1) <= value * (1.0 + 1e-9) + 1e-15)
        .map(|t| t.d)
        .collect();
    Ok(RotationDesign {
        theta1,
        rotation,
        min_cgd: min_cgd(c, &rotation)?,
        injectivity_margin: validate_injectivity(c, &rotation)?,
        active,
    })
}
