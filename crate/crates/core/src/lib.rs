//! Rate-2 rotated space-time block code for 2×2 MIMO links with
//! reconfigurable antennas: code construction and rotation design, antenna
//! gain optimization, channel models, three maximum-likelihood detectors
//! and a Monte-Carlo BER harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod antenna;
pub mod channel;
pub mod constellation;
pub mod decoder;
pub mod encoder;
pub mod harness;
pub mod numerics;

pub use error::{Error, Result};
