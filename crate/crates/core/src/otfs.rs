//! OTFS frames expressed through the permuted-allocation modulator:
//! delay-Doppler data grids, per-symbol cyclic prefixes, the equivalent
//! per-symbol frequency-domain channel, and the combined receive path.

use num_complex::Complex64;

use crate::channel::DelayDopplerChannel;
use crate::error::{Error, Result};
use crate::gfdm::{
    demodulate, modulate, rx_window, Allocation, FrameParams, ModulatorConfig, ReceiverKind,
    Window, WindowDomain,
};
use crate::numerics::{reshape_v, ComplexGrid, ComplexVec};
use rustfft::FftDirection;

/// OTFS geometry: `m_o` samples per symbol (delay bins), `n_o` symbols
/// (Doppler bins), CP of `n_cp` samples prepended to every symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OtfsParams {
    pub m_o: usize,
    pub n_o: usize,
    pub n_cp: usize,
}

impl OtfsParams {
    pub fn new(m_o: usize, n_o: usize, n_cp: usize) -> Result<Self> {
        if m_o == 0 || n_o == 0 {
            return Err(Error::Parameter("M_o and N_o must be positive".into()));
        }
        if n_cp >= m_o {
            return Err(Error::Parameter(format!(
                "per-symbol CP {} must be shorter than the symbol length {}",
                n_cp, m_o
            )));
        }
        Ok(Self { m_o, n_o, n_cp })
    }

    /// Core samples without CPs.
    pub fn n(&self) -> usize {
        self.m_o * self.n_o
    }

    /// Length of one CP-extended symbol.
    pub fn m_cp(&self) -> usize {
        self.m_o + self.n_cp
    }

    /// Total transmitted samples including CPs.
    pub fn n_total(&self) -> usize {
        self.m_cp() * self.n_o
    }

    /// Modulator-side geometry: K = N_o subcarriers, M = M_o subsymbols.
    pub fn frame_params(&self) -> FrameParams {
        FrameParams {
            k: self.n_o,
            m: self.m_o,
            n_cp: 0,
        }
    }
}

/// Modulated OTFS frame: `s` is the core permuted signal, `s_cp` the
/// transmitted signal with a CP on each symbol.
#[derive(Debug, Clone)]
pub struct OtfsFrame {
    pub s: ComplexVec,
    pub s_cp: ComplexVec,
}

/// Modulator configuration for the OTFS geometry: TD path, permuted
/// allocation, window from the given pulse/window pair.
pub fn otfs_config(params: &OtfsParams, window: Window, spreading_enabled: bool) -> Result<ModulatorConfig> {
    ModulatorConfig::new(
        params.frame_params(),
        window,
        spreading_enabled,
        WindowDomain::Td,
        Allocation::Otfs,
    )
}

/// Modulate a delay-Doppler grid (N_o x M_o as a modulator data grid)
/// into an OTFS frame with per-symbol CPs.
pub fn otfs_modulate(d: &ComplexGrid, params: &OtfsParams, cfg: &ModulatorConfig) -> Result<OtfsFrame> {
    if cfg.allocation != Allocation::Otfs {
        return Err(Error::Config(
            "OTFS modulation requires the permuted allocation".into(),
        ));
    }
    let s = modulate(d, cfg)?;
    let s_cp = add_cp_per_symbol(&s, params)?;
    Ok(OtfsFrame { s, s_cp })
}

/// Prefix every length-M_o symbol with its last `n_cp` samples.
pub fn add_cp_per_symbol(s: &[Complex64], params: &OtfsParams) -> Result<ComplexVec> {
    if s.len() != params.n() {
        return Err(Error::shape(format!(
            "signal length {} != M_o*N_o = {}",
            s.len(),
            params.n()
        )));
    }
    let (m_o, n_cp) = (params.m_o, params.n_cp);
    let mut out = Vec::with_capacity(params.n_total());
    for sym in s.chunks_exact(m_o) {
        out.extend_from_slice(&sym[m_o - n_cp..]);
        out.extend_from_slice(sym);
    }
    Ok(out)
}

/// Drop the first `n_cp` samples of every CP-extended symbol.
pub fn strip_cp_per_symbol(r: &[Complex64], params: &OtfsParams) -> Result<ComplexVec> {
    if r.len() != params.n_total() {
        return Err(Error::shape(format!(
            "signal length {} != (M_o + N_cp)*N_o = {}",
            r.len(),
            params.n_total()
        )));
    }
    let mut out = Vec::with_capacity(params.n());
    for sym in r.chunks_exact(params.m_cp()) {
        out.extend_from_slice(&sym[params.n_cp..]);
    }
    Ok(out)
}

/// Per-symbol frequency-domain equivalent channel, an M_o x N_o grid:
/// column q holds the M_o-point frequency response the q-th symbol sees,
/// averaged over the symbol's samples to absorb slow Doppler rotation.
///
/// `delay_exceeds_cp` flags taps longer than the per-symbol CP; the
/// one-tap model is then only an approximation.
#[derive(Debug, Clone)]
pub struct OtfsEquivalentChannel {
    pub h: ComplexGrid,
    pub delay_exceeds_cp: bool,
}

pub fn equivalent_channel_otfs(
    chan: &DelayDopplerChannel,
    params: &OtfsParams,
    start_time: i64,
) -> Result<OtfsEquivalentChannel> {
    let m_o = params.m_o;
    let n_o = params.n_o;
    let m_cp = params.m_cp() as i64;
    let mut delay_exceeds_cp = false;
    let mut h = ComplexGrid::zeros(m_o, n_o);
    for path in &chan.paths {
        if path.delay_samples > params.n_cp {
            delay_exceeds_cp = true;
        }
    }
    for path in &chan.paths {
        for q in 0..n_o {
            // Doppler rotation averaged over the symbol's core samples;
            // the delay phase ramp is time-independent and factors out
            let mut avg = Complex64::default();
            for m in 0..m_o {
                let t = start_time + params.n_cp as i64 + m as i64 + q as i64 * m_cp;
                avg += Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * path.doppler * t as f64,
                );
            }
            let tap = path.gain * avg / m_o as f64;
            for p in 0..m_o {
                let rot = -2.0 * std::f64::consts::PI * (path.delay_samples as f64) * (p as f64)
                    / m_o as f64;
                let prev = h.get(p, q);
                h.set(p, q, prev + tap * Complex64::from_polar(1.0, rot));
            }
        }
    }
    Ok(OtfsEquivalentChannel { h, delay_exceeds_cp })
}

/// Combined OTFS receiver: strip the per-symbol CPs, fold the equivalent
/// channel into the window, synthesize the receive window, demodulate.
///
/// `h_eq` is the M_o x N_o grid from [`equivalent_channel_otfs`] (or an
/// estimate); `noise_to_symbol_ratio` feeds the MMSE window.
pub fn otfs_receive(
    r: &[Complex64],
    params: &OtfsParams,
    cfg: &ModulatorConfig,
    h_eq: &ComplexGrid,
    kind: ReceiverKind,
    noise_to_symbol_ratio: f64,
) -> Result<ComplexGrid> {
    if h_eq.rows() != params.m_o || h_eq.cols() != params.n_o {
        return Err(Error::shape(format!(
            "equivalent channel {}x{} does not match M_o={} N_o={}",
            h_eq.rows(),
            h_eq.cols(),
            params.m_o,
            params.n_o
        )));
    }
    let y = strip_cp_per_symbol(r, params)?;
    // effective window: the channel's per-symbol frequency response sits
    // on the (subcarrier = Doppler-row, subsymbol = delay-col) grid as
    // H^T
    let w_eff = Window {
        w: h_eq.transpose().hadamard(&cfg.window.w)?,
        domain: WindowDomain::Td,
    };
    let w_rx = rx_window(&w_eff, kind, noise_to_symbol_ratio)?;
    demodulate(&y, &w_rx, cfg)
}

/// Per-symbol spectra of a stripped OTFS signal: column q is the
/// M_o-point DFT of symbol q. Diagnostic helper for examples and tests.
pub fn per_symbol_spectra(s: &[Complex64], params: &OtfsParams) -> Result<ComplexGrid> {
    if s.len() != params.n() {
        return Err(Error::shape(format!(
            "signal length {} != M_o*N_o = {}",
            s.len(),
            params.n()
        )));
    }
    // symbols are consecutive chunks: reshape N_o x M_o row-major, then
    // transpose so each column is one symbol
    let grid = reshape_v(s, params.n_o, params.m_o)?.transpose();
    Ok(grid.dft_cols(FftDirection::Forward))
}
