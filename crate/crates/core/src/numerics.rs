//! Fixed-size complex arithmetic and seeded sampling.
//!
//! Everything in this crate lives in 2×2, so [`Mat2`] is a plain value type
//! with hand-written products instead of a general linear-algebra backend.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};

/// Complex baseband scalar.
pub type Complex = num_complex::Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// 2×2 complex matrix, row-major: `m[(r, c)]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2(pub [[Complex; 2]; 2]);

impl Mat2 {
    pub const fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [Complex::from(m[0][0]), Complex::from(m[0][1])],
            [Complex::from(m[1][0]), Complex::from(m[1][1])],
        ])
    }

    pub fn filled(v: Complex) -> Self {
        Mat2([[v, v], [v, v]])
    }

    pub fn diag(a: Complex, d: Complex) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        let m = &self.0;
        Mat2([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    pub fn conj_transpose(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Mat2) -> Self {
        let (a, b) = (&self.0, &other.0);
        Mat2([
            [a[0][0] * b[0][0], a[0][1] * b[0][1]],
            [a[1][0] * b[1][0], a[1][1] * b[1][1]],
        ])
    }

    pub fn det(&self) -> Complex {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex> + '_ {
        self.0.iter().flatten().copied()
    }
}

pub fn frobenius_norm(m: &Mat2) -> f64 {
    m.frobenius_norm()
}

impl Index<(usize, usize)> for Mat2 {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Mat2 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.0[r][c]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<Complex> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex) -> Mat2 {
        self.map(|z| z * s)
    }
}

/// Seeded random stream addressed by `(seed, stream)`.
///
/// Backed by ChaCha8 with the 64-bit stream selector, so the sequence for a
/// given pair is fixed regardless of platform, thread count, or the order in
/// which other streams are consumed.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0 && n <= u32::MAX as usize);
        self.rng.random_range(0..n as u32) as usize
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
pub fn sample_cgauss(rng: &mut RngStream, variance: f64) -> Result<Complex> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(invalid(format!(
            "variance must be finite and >= 0, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(ZERO);
    }
    let s = (variance / 2.0).sqrt();
    let re = rng.standard_normal();
    let im = rng.standard_normal();
    Ok(Complex::new(s * re, s * im))
}

pub fn sample_normal(rng: &mut RngStream, mean: f64, std_dev: f64) -> Result<f64> {
    if !(std_dev >= 0.0) || !std_dev.is_finite() {
        return Err(invalid(format!(
            "standard deviation must be finite and >= 0, got {std_dev}"
        )));
    }
    if std_dev == 0.0 {
        return Ok(mean);
    }
    Ok(mean + std_dev * rng.standard_normal())
}

/// `exp(X)` with `X ~ Normal(mu, sigma²)`.
pub fn sample_lognormal(rng: &mut RngStream, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!(
            "sigma must be finite and >= 0, got {sigma}"
        )));
    }
    Ok(sample_normal(rng, mu, sigma)?.exp())
}
