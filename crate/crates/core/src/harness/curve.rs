//! BER curves: CSV persistence, slope estimation and the monotonicity check.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "snr_db,ber,bit_errors,bits,trials,seed,config_hash";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Serialize, Deserialize)]
struct Row {
    snr_db: f64,
    ber: f64,
    bit_errors: u64,
    bits: u64,
    trials: u64,
    seed: u64,
    config_hash: String,
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

impl BerCurve {
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for p in &self.points {
            w.serialize(self.row(p)).expect("in-memory write");
        }
        if self.points.is_empty() {
            return format!("{CSV_HEADER}\n");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    fn row(&self, p: &BerPoint) -> Row {
        Row {
            snr_db: p.snr_db,
            ber: p.ber,
            bit_errors: p.bit_errors,
            bits: p.bits,
            trials: p.trials,
            seed: self.seed,
            config_hash: self.config_hash.clone(),
        }
    }

    pub fn snr_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }

    pub fn ber(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ber).collect()
    }
}

/// Header plus one newline-terminated row per point.
pub fn write_csv(curve: &BerCurve, path: &Path) -> Result<()> {
    std::fs::write(path, curve.to_csv_string()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<BerCurve> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::Config(format!(
            "{}: unexpected header '{header}'",
            path.display()
        )));
    }
    let mut points = Vec::new();
    let mut meta: Option<(u64, String)> = None;
    for row in r.deserialize::<Row>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        match &meta {
            None => meta = Some((row.seed, row.config_hash.clone())),
            Some((s, h)) if *s != row.seed || *h != row.config_hash => {
                return Err(Error::Config(format!(
                    "{}: rows from different runs",
                    path.display()
                )))
            }
            _ => {}
        }
        points.push(BerPoint {
            snr_db: row.snr_db,
            ber: row.ber,
            bit_errors: row.bit_errors,
            bits: row.bits,
            trials: row.trials,
        });
    }
    let (seed, config_hash) = meta.unwrap_or_default();
    Ok(BerCurve {
        points,
        seed,
        config_hash,
    })
}

/// Negated least-squares slope of `log10(ber)` against `log10(snr)` over
/// points with `lo_db ≤ snr_db ≤ hi_db` and `ber > 0`.
pub fn estimate_diversity_slope(curve: &BerCurve, lo_db: f64, hi_db: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.snr_db >= lo_db && p.snr_db <= hi_db && p.snr_db.is_finite() && p.ber > 0.0)
        .map(|p| (p.snr_db / 10.0, p.ber.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need >= 2 points with ber > 0 in [{lo_db}, {hi_db}] dB, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share one SNR".into()));
    }
    Ok(-(sxy / sxx))
}

/// Minimum errors for an increase between neighbouring points to count as
/// a real violation.
pub const MONOTONE_MIN_ERRORS: u64 = 100;

/// Index pairs `(i, i+1)` where BER increases although at least one of the
/// two points has `MONOTONE_MIN_ERRORS` errors or more.
pub fn monotonicity_violations(curve: &BerCurve) -> Vec<(usize, usize)> {
    curve
        .points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            w[1].ber > w[0].ber
                && (w[0].bit_errors >= MONOTONE_MIN_ERRORS
                    || w[1].bit_errors >= MONOTONE_MIN_ERRORS)
        })
        .map(|(i, _)| (i, i + 1))
        .collect()
}

pub fn is_monotone(curve: &BerCurve) -> bool {
    monotonicity_violations(curve).is_empty()
}
