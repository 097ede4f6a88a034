//! Link-level metrics: BER/FER/NMSE accumulation and the per-symbol
//! error-ratio statistic.

use crate::error::{Error, Result};
use crate::numerics::ComplexGrid;

/// Per-position statistic across frames. `error_ratio` is the literal
/// ratio E|d_hat - d|^2 / E|d|^2 per grid position; `snr_db` is its
/// inverse in dB (the quantity usually plotted as per-symbol SNR).
#[derive(Debug, Clone)]
pub struct PerSymbolSnr {
    pub error_ratio: Vec<f64>,
    pub snr_db: Vec<f64>,
}

/// Compute the per-position error-to-signal ratio over a set of frames
/// (at least two, so the expectations are actually averages).
pub fn per_symbol_snr(d_hat_frames: &[ComplexGrid], d_frames: &[ComplexGrid]) -> Result<PerSymbolSnr> {
    if d_hat_frames.len() < 2 {
        return Err(Error::Stats(format!(
            "per-symbol SNR needs at least 2 frames, got {}",
            d_hat_frames.len()
        )));
    }
    if d_hat_frames.len() != d_frames.len() {
        return Err(Error::shape(format!(
            "{} estimate frames vs {} reference frames",
            d_hat_frames.len(),
            d_frames.len()
        )));
    }
    let rows = d_frames[0].rows();
    let cols = d_frames[0].cols();
    let positions = rows * cols;
    let mut err = vec![0.0f64; positions];
    let mut sig = vec![0.0f64; positions];
    for (d_hat, d) in d_hat_frames.iter().zip(d_frames) {
        if d_hat.rows() != rows || d_hat.cols() != cols || d.rows() != rows || d.cols() != cols {
            return Err(Error::shape("inconsistent frame shapes"));
        }
        accumulate_position_powers(d_hat, d, &mut err, &mut sig);
    }
    Ok(finalize_per_symbol(&err, &sig))
}

/// Add one frame's per-position |d_hat - d|^2 and |d|^2 into the
/// accumulators, positions in column-major grid order.
pub(crate) fn accumulate_position_powers(
    d_hat: &ComplexGrid,
    d: &ComplexGrid,
    err: &mut [f64],
    sig: &mut [f64],
) {
    let rows = d.rows();
    for c in 0..d.cols() {
        for r in 0..rows {
            let idx = r + c * rows;
            err[idx] += (d_hat.get(r, c) - d.get(r, c)).norm_sqr();
            sig[idx] += d.get(r, c).norm_sqr();
        }
    }
}

pub(crate) fn finalize_per_symbol(err: &[f64], sig: &[f64]) -> PerSymbolSnr {
    let error_ratio: Vec<f64> = err
        .iter()
        .zip(sig)
        .map(|(&e, &s)| if s > 0.0 { e / s } else { f64::NAN })
        .collect();
    let snr_db = error_ratio
        .iter()
        .map(|&r| {
            if r > 0.0 {
                -10.0 * r.log10()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    PerSymbolSnr { error_ratio, snr_db }
}

/// Relative standard deviation (std/mean) of a vector; NaN entries are
/// ignored.
pub fn relative_spread(v: &[f64]) -> f64 {
    let vals: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if vals.is_empty() {
        return f64::NAN;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let var = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / vals.len() as f64;
    var.sqrt() / mean.abs()
}
