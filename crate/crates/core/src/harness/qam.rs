//! Gray-coded square 16-QAM with unit average symbol energy and
//! hard-decision demapping.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexVec;

/// Amplitude levels (+-1, +-3)/sqrt(10); the average over the 16 points
/// is exactly 1.
const SCALE: f64 = 0.31622776601683794; // 1/sqrt(10)

/// Two bits -> one Gray-coded amplitude per dimension.
fn gray_level(b0: u8, b1: u8) -> f64 {
    // 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
    match (b0, b1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        (1, 0) => 3.0,
        _ => unreachable!("bits must be 0 or 1"),
    }
}

fn gray_bits(level: f64) -> (u8, u8) {
    if level < -2.0 {
        (0, 0)
    } else if level < 0.0 {
        (0, 1)
    } else if level < 2.0 {
        (1, 1)
    } else {
        (1, 0)
    }
}

/// Map bits (4 per symbol: two for I, two for Q) to 16-QAM symbols.
pub fn qam16_map(bits: &[u8]) -> Result<ComplexVec> {
    if bits.len() % 4 != 0 {
        return Err(Error::Parameter(format!(
            "bit count {} not divisible by 4",
            bits.len()
        )));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::Parameter(format!("bit value {b} is not 0/1")));
    }
    Ok(bits
        .chunks_exact(4)
        .map(|b| {
            Complex64::new(
                SCALE * gray_level(b[0], b[1]),
                SCALE * gray_level(b[2], b[3]),
            )
        })
        .collect())
}

/// Minimum-distance hard demapping back to bits.
pub fn qam16_demap(symbols: &[Complex64]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 4);
    for s in symbols {
        let (i0, i1) = gray_bits(s.re / SCALE);
        let (q0, q1) = gray_bits(s.im / SCALE);
        bits.extend_from_slice(&[i0, i1, q0, q1]);
    }
    bits
}
