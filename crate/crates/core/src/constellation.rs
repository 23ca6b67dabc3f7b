//! Gray-labelled PSK and square QAM signal sets.
//!
//! Point `i` of a constellation carries the bit label whose binary value is
//! `i` (most significant bit first), so bit errors between two indices are
//! `(a ^ b).count_ones()`.
//!
//! Conventions, frozen by the tests below:
//! - PSK: the point at angular position `m` (counter-clockwise from the
//!   offset) has label `gray(m)`. The offset is 0 for BPSK and `π/M`
//!   otherwise, so BPSK is `{+1, −1}` with label `0 → +1`, and QPSK is
//!   `00 → (1+j)/√2, 01 → (−1+j)/√2, 11 → (−1−j)/√2, 10 → (1−j)/√2`.
//! - QAM: in-phase level `p` and quadrature level `q` (both counted from the
//!   most negative amplitude) give label `gray(p) << (b/2) | gray(q)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Psk,
    Qam,
}

/// Below this magnitude every PSK point is (numerically) equidistant and the
/// sector decision is replaced by a full scan.
const PSK_ORIGIN_RADIUS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    scheme: Scheme,
    order: usize,
    bits_per_symbol: u32,
    points: Vec<Complex>,
    // PSK: angular offset of position 0. QAM: amplitude step (half the
    // minimum distance).
    offset: f64,
    step: f64,
    // QAM levels per axis; 0 for PSK.
    levels: usize,
}

pub fn gray(m: usize) -> usize {
    m ^ (m >> 1)
}

/// `e^{jθ}` with exact zeros on the axes and equal components on the
/// diagonals, so symmetric constellations stay exactly symmetric.
fn unit_point(angle: f64) -> Complex {
    let quarter = (angle / FRAC_PI_2).floor();
    let r = angle - quarter * FRAC_PI_2;
    let (c, s) = if r.abs() < 1e-15 {
        (1.0, 0.0)
    } else if (r - FRAC_PI_4).abs() < 1e-15 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else if r < FRAC_PI_4 {
        (r.cos(), r.sin())
    } else {
        let t = FRAC_PI_2 - r;
        (t.sin(), t.cos())
    };
    match (quarter as i64).rem_euclid(4) {
        0 => Complex::new(c, s),
        1 => Complex::new(-s, c),
        2 => Complex::new(-c, -s),
        _ => Complex::new(s, -c),
    }
}

impl Constellation {
    pub fn new(scheme: Scheme, order: usize) -> Result<Self> {
        match scheme {
            Scheme::Psk => Self::psk(order),
            Scheme::Qam => Self::qam(order),
        }
    }

    pub fn psk(order: usize) -> Result<Self> {
        if !order.is_power_of_two() || !(2..=1024).contains(&order) {
            return Err(invalid(format!(
                "PSK order must be a power of two in 2..=1024, got {order}"
            )));
        }
        let offset = if order == 2 { 0.0 } else { PI / order as f64 };
        let mut points = vec![Complex::new(0.0, 0.0); order];
        for m in 0..order {
            let angle = offset + 2.0 * PI * m as f64 / order as f64;
            points[gray(m)] = unit_point(angle);
        }
        Ok(Constellation {
            scheme: Scheme::Psk,
            order,
            bits_per_symbol: order.trailing_zeros(),
            points,
            offset,
            step: 0.0,
            levels: 0,
        })
    }

    pub fn qam(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(invalid(format!(
                "square QAM order must be 4, 16 or 64, got {order}"
            )));
        }
        let bits = order.trailing_zeros();
        let half = bits / 2;
        let levels = 1usize << half;
        // Average energy of the odd-integer grid is 2(M-1)/3.
        let step = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let amp = |p: usize| (2.0 * p as f64 - (levels as f64 - 1.0)) * step;
        let mut points = vec![Complex::new(0.0, 0.0); order];
        for p in 0..levels {
            for q in 0..levels {
                let label = (gray(p) << half) | gray(q);
                points[label] = Complex::new(amp(p), amp(q));
            }
        }
        Ok(Constellation {
            scheme: Scheme::Qam,
            order,
            bits_per_symbol: bits,
            points,
            offset: 0.0,
            step,
            levels,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex {
        self.points[index]
    }

    pub fn label(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.bits_per_symbol as usize)
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.order).map(|i| self.label(i)).collect()
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Maps a bit string (`0`/`1` values, MSB first per symbol) to points.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex>> {
        let k = self.bits_per_symbol as usize;
        if !bits.len().is_multiple_of(k) {
            return Err(invalid(format!(
                "bit string length {} is not a multiple of {k}",
                bits.len()
            )));
        }
        bits.chunks(k)
            .map(|group| {
                let mut index = 0usize;
                for &b in group {
                    if b > 1 {
                        return Err(invalid(format!("bit value {b} is not 0 or 1")));
                    }
                    index = (index << 1) | b as usize;
                }
                Ok(self.points[index])
            })
            .collect()
    }

    /// Parses a `"0110"`-style string and maps it.
    pub fn map_bit_str(&self, bits: &str) -> Result<Vec<Complex>> {
        let parsed: Vec<u8> = bits
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<_>>()?;
        self.map_bits(&parsed)
    }

    /// Nearest point to `y`; ties go to the lowest index.
    ///
    /// Constant-time: a sector (PSK) or per-axis rounding (QAM) decision
    /// followed by an exact distance comparison against the immediate
    /// neighbours, which always contain every tied candidate.
    pub fn slice(&self, y: Complex) -> usize {
        match self.scheme {
            Scheme::Psk => self.slice_psk(y),
            Scheme::Qam => self.slice_qam(y),
        }
    }

    /// Reference decision by scanning every point.
    pub fn slice_exhaustive(&self, y: Complex) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn slice_psk(&self, y: Complex) -> usize {
        if !(y.norm_sqr() >= PSK_ORIGIN_RADIUS * PSK_ORIGIN_RADIUS) {
            return self.slice_exhaustive(y);
        }
        let m = self.order;
        let sector = 2.0 * PI / m as f64;
        // Shifted by whole turns so the cast floors; exact ties are settled below.
        // The order is a power of two, so the wrap is a mask.
        let pos = ((y.arg() - self.offset) / sector + (2 * m) as f64 + 0.5) as usize;
        let candidates = [pos - 1, pos, pos + 1].map(|p| gray(p & (m - 1)));
        self.closest_of(y, &candidates)
    }

    fn slice_qam(&self, y: Complex) -> usize {
        let l = self.levels as i64;
        let top = (l - 1) as f64;
        // NaN clamps to NaN and casts to 0.
        let level =
            |x: f64| -> i64 { (((x / self.step + top) * 0.5).clamp(0.0, top) + 0.5) as i64 };
        let (pi, pq) = (level(y.re), level(y.im));
        let half = self.bits_per_symbol / 2;
        let mut candidates = [usize::MAX; 9];
        let mut n = 0;
        for p in (pi - 1).max(0)..=(pi + 1).min(l - 1) {
            for q in (pq - 1).max(0)..=(pq + 1).min(l - 1) {
                candidates[n] = (gray(p as usize) << half) | gray(q as usize);
                n += 1;
            }
        }
        self.closest_of(y, &candidates[..n])
    }

    fn closest_of(&self, y: Complex, candidates: &[usize]) -> usize {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for &i in candidates {
            let d = (y - self.points[i]).norm_sqr();
            if d < best_d || (d == best_d && i < best) {
                best_d = d;
                best = i;
            }
        }
        best
    }
}
