//! Multicarrier modem library built around a four-step GFDM engine
//! (spread, window, transform, allocate) general enough to produce and
//! receive OFDM and OTFS as configurations of the same pipeline, plus a
//! linear time-variant delay-Doppler channel simulator and a Monte-Carlo
//! link-metrics harness.
//!
//! Layout:
//! - [`numerics`]: FFT plumbing, grid/reshape/permutation primitives,
//!   and a dense-matrix module used as a test oracle.
//! - [`zak`]: the discrete Zak transform pair connecting prototype
//!   pulses to modulation windows.
//! - [`gfdm`]: the modulator/demodulator, prototype pulses, windows,
//!   MF/ZF/MMSE receive windows, and dense reference matrices.
//! - [`otfs`]: OTFS as permuted GFDM with per-symbol cyclic prefixes.
//! - [`channel`]: delay-Doppler paths, CP handling, equivalent one-tap
//!   channels, AWGN.
//! - [`harness`]: 16-QAM, BER/FER/NMSE metrics, SNR x Doppler sweeps
//!   with CSV/JSON output.
//!
//! The `examples/` directory demonstrates each capability end to end;
//! the `gfdmx` binary exposes sweeps, a self-test, and window dumps for
//! batch use.

pub mod channel;
pub mod error;
pub mod gfdm;
pub mod harness;
pub mod numerics;
pub mod otfs;
pub mod zak;

pub use error::{Error, Result};
