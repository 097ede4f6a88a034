//! Four-step GFDM modulator/demodulator with time-domain and
//! frequency-domain implementations, prototype pulse and window
//! construction, receive-window synthesis, and the dense A/B matrix
//! forms used as oracles.
//!
//! The modulator runs spreading, windowing, transformation and
//! allocation; the demodulator runs the inverse chain. The allocation
//! switch also produces the permuted sample ordering used by the OTFS
//! frame builder.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::numerics::{commutation_apply, dft, idft, reshape_v, ComplexGrid, ComplexVec};
use crate::zak::{dzt, dzt_freq};

/// Entries of |w| at or below this threshold make a ZF window singular.
/// We error out rather than regularize so the perfect-reconstruction
/// invariant stays intact.
pub const EPSILON_ZF: f64 = 1e-6;

/// Block shape contract: K subcarriers, M subsymbols, N = K*M samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FrameParams {
    pub k: usize,
    pub m: usize,
    pub n_cp: usize,
}

impl FrameParams {
    pub fn new(k: usize, m: usize, n_cp: usize) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::Parameter("K and M must be positive".into()));
        }
        if n_cp >= k * m {
            return Err(Error::Parameter(format!(
                "CP length {} must be smaller than block length {}",
                n_cp,
                k * m
            )));
        }
        Ok(Self { k, m, n_cp })
    }

    pub fn n(&self) -> usize {
        self.k * self.m
    }
}

/// Length-N prototype pulse with its cached N-point spectrum.
#[derive(Debug, Clone)]
pub struct PrototypePulse {
    pub g: ComplexVec,
    pub g_tilde: ComplexVec,
}

impl PrototypePulse {
    pub fn from_time(g: ComplexVec) -> Result<Self> {
        let g_tilde = dft(&g)?;
        Ok(Self { g, g_tilde })
    }
}

/// Periodic raised-cosine prototype, defined on the N-bin frequency
/// grid: flat gate of M bins at alpha = 0, cosine rolloff otherwise,
/// then unit-energy normalization in the time domain.
pub fn make_rc_pulse(params: &FrameParams, alpha: f64) -> Result<PrototypePulse> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!(
            "roll-off factor {alpha} outside [0, 1]"
        )));
    }
    let n = params.n();
    let m = params.m as f64;
    let mut spectrum = vec![Complex64::default(); n];
    for (bin, s) in spectrum.iter_mut().enumerate() {
        // signed bin index, centered on DC
        let f = if bin <= n / 2 {
            bin as f64
        } else {
            bin as f64 - n as f64
        };
        let value = if alpha == 0.0 {
            // exactly M contiguous bins: -M/2 <= f < M/2
            if -m / 2.0 <= f && f < m / 2.0 {
                1.0
            } else {
                0.0
            }
        } else {
            let inner = (1.0 - alpha) * m / 2.0;
            let outer = (1.0 + alpha) * m / 2.0;
            let af = f.abs();
            if af <= inner {
                1.0
            } else if af < outer {
                0.5 * (1.0 + (std::f64::consts::PI * (af - inner) / (alpha * m)).cos())
            } else {
                0.0
            }
        };
        *s = Complex64::new(value, 0.0);
    }
    let mut g = idft(&spectrum)?;
    let energy: f64 = g.iter().map(|x| x.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(Error::Parameter("prototype pulse has zero energy".into()));
    }
    let scale = 1.0 / energy.sqrt();
    for x in &mut g {
        *x *= scale;
    }
    PrototypePulse::from_time(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowDomain {
    Td,
    Fd,
}

/// K x M modulation window tied to an implementation domain.
#[derive(Debug, Clone)]
pub struct Window {
    pub w: ComplexGrid,
    pub domain: WindowDomain,
}

/// Transmit window from a prototype pulse:
/// TD: `W = K (Z_{M,K}(g))^T`, FD: `W = K Zbar_{K,M}(g~)`.
pub fn tx_window(pulse: &PrototypePulse, params: &FrameParams, domain: WindowDomain) -> Result<Window> {
    let (k, m) = (params.k, params.m);
    if pulse.g.len() != params.n() {
        return Err(Error::shape(format!(
            "pulse length {} != block length {}",
            pulse.g.len(),
            params.n()
        )));
    }
    let w = match domain {
        WindowDomain::Td => dzt(&pulse.g, m, k)?.grid.transpose().scale(k as f64),
        WindowDomain::Fd => dzt_freq(&pulse.g_tilde, k, m)?.grid.scale(k as f64),
    };
    Ok(Window { w, domain })
}

/// Spreading step: `D_s = (1/K) F_K^H D F_M`.
pub fn spread(d: &ComplexGrid) -> Result<ComplexGrid> {
    let k = d.rows();
    let cols_done = d.dft_cols(FftDirection::Inverse).scale(1.0 / k as f64);
    // right-multiplication by F_M = forward DFT along each row
    Ok(cols_done
        .transpose()
        .dft_cols(FftDirection::Forward)
        .transpose())
}

/// Despreading step: `D = (1/M) F_K D_s F_M^H`. Exact inverse of
/// [`spread`].
pub fn despread(d_s: &ComplexGrid) -> Result<ComplexGrid> {
    let m = d_s.cols();
    let cols_done = d_s.dft_cols(FftDirection::Forward);
    Ok(cols_done
        .transpose()
        .dft_cols(FftDirection::Inverse)
        .transpose()
        .scale(1.0 / m as f64))
}

/// Sample-ordering switch of the allocation step. `Gfdm` is the
/// conventional ordering; `Otfs` emits the commutation-permuted order
/// (consecutive short OFDM symbols).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    Gfdm,
    Otfs,
}

#[derive(Debug, Clone)]
pub struct ModulatorConfig {
    pub params: FrameParams,
    pub window: Window,
    pub spreading_enabled: bool,
    pub transform_domain: WindowDomain,
    pub allocation: Allocation,
}

impl ModulatorConfig {
    pub fn new(
        params: FrameParams,
        window: Window,
        spreading_enabled: bool,
        transform_domain: WindowDomain,
        allocation: Allocation,
    ) -> Result<Self> {
        if window.w.rows() != params.k || window.w.cols() != params.m {
            return Err(Error::Config(format!(
                "window shape {}x{} does not match K={} M={}",
                window.w.rows(),
                window.w.cols(),
                params.k,
                params.m
            )));
        }
        if window.domain != transform_domain {
            return Err(Error::Config(
                "window domain does not match transform domain".into(),
            ));
        }
        if allocation == Allocation::Otfs && transform_domain != WindowDomain::Td {
            return Err(Error::Config(
                "permuted allocation is only defined for the TD path".into(),
            ));
        }
        Ok(Self {
            params,
            window,
            spreading_enabled,
            transform_domain,
            allocation,
        })
    }
}

/// Four-step modulator. Returns the length-N time-domain block (or the
/// permuted sample order under `Allocation::Otfs`).
pub fn modulate(d: &ComplexGrid, cfg: &ModulatorConfig) -> Result<ComplexVec> {
    let (k, m) = (cfg.params.k, cfg.params.m);
    if d.rows() != k || d.cols() != m {
        return Err(Error::shape(format!(
            "data grid {}x{} does not match K={k} M={m}",
            d.rows(),
            d.cols()
        )));
    }
    let d_s = if cfg.spreading_enabled {
        spread(d)?
    } else {
        d.clone()
    };
    let x = cfg.window.w.hadamard(&d_s)?;
    match cfg.transform_domain {
        WindowDomain::Td => {
            // V_{M,K}(x) = (1/M) F_M^H X^T
            let v = x
                .transpose()
                .dft_cols(FftDirection::Inverse)
                .scale(1.0 / m as f64);
            match cfg.allocation {
                Allocation::Gfdm => Ok(v.vec_t()),
                Allocation::Otfs => Ok(v.vec_col_major()),
            }
        }
        WindowDomain::Fd => {
            // V_{K,M}(x~) = F_K X, then back to time with (1/N) F_N^H
            let v = x.dft_cols(FftDirection::Forward);
            let x_tilde = v.vec_t();
            idft(&x_tilde)
        }
    }
}

/// Inverse chain: transformation, receive windowing, despreading. For
/// `Allocation::Otfs` the inverse permutation is applied before the
/// reshape.
pub fn demodulate(y_eq: &[Complex64], w_rx: &Window, cfg: &ModulatorConfig) -> Result<ComplexGrid> {
    let (k, m) = (cfg.params.k, cfg.params.m);
    if y_eq.len() != cfg.params.n() {
        return Err(Error::shape(format!(
            "received block length {} != N = {}",
            y_eq.len(),
            cfg.params.n()
        )));
    }
    if w_rx.domain != cfg.transform_domain {
        return Err(Error::Config(
            "receive window domain does not match transform domain".into(),
        ));
    }
    let y_grid = match cfg.transform_domain {
        WindowDomain::Td => {
            let y = match cfg.allocation {
                Allocation::Gfdm => y_eq.to_vec(),
                Allocation::Otfs => commutation_apply(y_eq, k, m)?,
            };
            // Y = [F_M V_{M,K}(y)]^T
            reshape_v(&y, m, k)?
                .dft_cols(FftDirection::Forward)
                .transpose()
        }
        WindowDomain::Fd => {
            // Y = (1/K) F_K^H V_{K,M}(y~)
            let y_tilde = dft(y_eq)?;
            reshape_v(&y_tilde, k, m)?
                .dft_cols(FftDirection::Inverse)
                .scale(1.0 / k as f64)
        }
    };
    let d_s = w_rx.w.hadamard(&y_grid)?;
    if cfg.spreading_enabled {
        despread(&d_s)
    } else {
        Ok(d_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Mf,
    Zf,
    Mmse,
}

impl std::fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReceiverKind::Mf => write!(f, "mf"),
            ReceiverKind::Zf => write!(f, "zf"),
            ReceiverKind::Mmse => write!(f, "mmse"),
        }
    }
}

/// Elementwise receive-window synthesis from the transmit window.
///
/// MF is pure conjugation (a scalar gain relative to the dense `A^H`
/// remains, see module tests). ZF errors on any |w| below [`EPSILON_ZF`].
/// MMSE uses `conj(w) / (|w|^2 + K * ratio)` with
/// `ratio = sigma_v^2 / sigma_d^2`; this matches the dense
/// `(A^H A + ratio*I)^{-1} A^H` receiver (the regularizer of the dense
/// form is the ratio itself, verified against the oracle in the
/// acceptance suite).
pub fn rx_window(w_tx: &Window, kind: ReceiverKind, noise_to_symbol_ratio: f64) -> Result<Window> {
    if noise_to_symbol_ratio < 0.0 {
        return Err(Error::Parameter(
            "noise-to-symbol ratio must be nonnegative".into(),
        ));
    }
    let k = w_tx.w.rows() as f64;
    let w = match kind {
        ReceiverKind::Mf => w_tx.w.map(|v| v.conj()),
        ReceiverKind::Zf => {
            for r in 0..w_tx.w.rows() {
                for c in 0..w_tx.w.cols() {
                    let mag = w_tx.w.get(r, c).norm();
                    if mag <= EPSILON_ZF {
                        return Err(Error::SingularWindow {
                            k: r,
                            m: c,
                            magnitude: mag,
                        });
                    }
                }
            }
            w_tx.w.map(|v| Complex64::new(1.0, 0.0) / v)
        }
        ReceiverKind::Mmse => {
            let reg = k * noise_to_symbol_ratio;
            w_tx.w.map(|v| v.conj() / (v.norm_sqr() + reg))
        }
    };
    Ok(Window {
        w,
        domain: w_tx.domain,
    })
}

/// Dense modulation matrix `[A]_{n,k+mK} = g[<n-mK>_N] e^{j2 pi (k/K) n}`.
/// Oracle use; O(N^2) storage.
pub fn build_matrix_a(pulse: &PrototypePulse, params: &FrameParams) -> Result<ComplexGrid> {
    build_shifted_matrix(&pulse.g, params)
}

/// Dense receiver-side matrix with the same structure, generated from
/// the receive pulse gamma.
pub fn build_matrix_b(gamma: &PrototypePulse, params: &FrameParams) -> Result<ComplexGrid> {
    build_shifted_matrix(&gamma.g, params)
}

fn build_shifted_matrix(p: &[Complex64], params: &FrameParams) -> Result<ComplexGrid> {
    let n = params.n();
    let (k_count, m_count) = (params.k, params.m);
    if p.len() != n {
        return Err(Error::shape(format!(
            "pulse length {} != N = {n}",
            p.len()
        )));
    }
    let mut a = ComplexGrid::zeros(n, n);
    for sample in 0..n {
        for m in 0..m_count {
            let shifted = p[(sample + n - (m * k_count) % n) % n];
            for k in 0..k_count {
                let phase =
                    2.0 * std::f64::consts::PI * (k as f64 / k_count as f64) * sample as f64;
                a.set(sample, k + m * k_count, shifted * Complex64::from_polar(1.0, phase));
            }
        }
    }
    Ok(a)
}
