//! Monte-Carlo link simulation: configuration, single-point runs, and
//! full SNR x Doppler sweeps with CSV/JSON emission.

use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    add_cp_block, awgn_with, equivalent_channel_gfdm, remove_cp_block, ChannelPreset,
    DelayDopplerChannel, NoiseSpec, Path,
};
use crate::error::{Error, Result};
use crate::gfdm::{
    demodulate, make_rc_pulse, modulate, rx_window, tx_window, Allocation, FrameParams,
    ModulatorConfig, ReceiverKind, Window, WindowDomain,
};
use crate::harness::metrics::{finalize_per_symbol, relative_spread};
use crate::harness::qam::{qam16_demap, qam16_map};
use crate::numerics::{dft, idft, ComplexGrid, ComplexVec};
use crate::otfs::{equivalent_channel_otfs, otfs_config, otfs_modulate, otfs_receive, OtfsParams};

/// One-tap FDE taps below this magnitude mark the frame as failed under
/// ZF.
const EPSILON_FDE: f64 = 1e-12;

/// Number of probe frames used to measure the transmit power for noise
/// calibration.
const CALIBRATION_FRAMES: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Ofdm,
    Gfdm,
    Otfs,
}

impl std::fmt::Display for Waveform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Waveform::Ofdm => write!(f, "ofdm"),
            Waveform::Gfdm => write!(f, "gfdm"),
            Waveform::Otfs => write!(f, "otfs"),
        }
    }
}

/// Frame geometry: subcarrier/subsymbol counts for the multicarrier
/// waveforms, or the delay-Doppler grid for OTFS.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameSpec {
    Multicarrier { k: usize, m: usize, n_cp: usize },
    DelayDoppler { m_o: usize, n_o: usize, n_cp: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub waveform: Waveform,
    pub receiver: ReceiverKind,
    pub pulse_alpha: f64,
    pub frame: FrameSpec,
    pub snr_grid_db: Vec<f64>,
    pub doppler_grid_hz: Vec<f64>,
    /// Optional channel description file; identity channel when absent.
    /// Without a preset, Doppler grid values are read as normalized
    /// frequencies (cycles per sample) applied to the single path.
    #[serde(default)]
    pub channel_preset: Option<PathBuf>,
    pub frames_per_point: usize,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load from a TOML file. A relative `channel_preset` is resolved
    /// against the config file's directory.
    pub fn load(path: &FsPath) -> Result<Self> {
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let Some(preset) = &cfg.channel_preset {
            if preset.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.channel_preset = Some(dir.join(preset));
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames_per_point == 0 {
            return Err(Error::Config("frames_per_point must be >= 1".into()));
        }
        if self.snr_grid_db.is_empty() || self.doppler_grid_hz.is_empty() {
            return Err(Error::Config("SNR and Doppler grids must be non-empty".into()));
        }
        match (self.waveform, self.frame) {
            (Waveform::Ofdm, FrameSpec::Multicarrier { m, .. }) if m != 1 => Err(Error::Config(
                format!("OFDM requires m = 1 subsymbol, got {m}"),
            )),
            (Waveform::Otfs, FrameSpec::Multicarrier { .. }) => Err(Error::Config(
                "OTFS needs a delay-Doppler frame spec (m_o, n_o, n_cp)".into(),
            )),
            (Waveform::Ofdm | Waveform::Gfdm, FrameSpec::DelayDoppler { .. }) => Err(
                Error::Config("OFDM/GFDM need a multicarrier frame spec (k, m, n_cp)".into()),
            ),
            _ => Ok(()),
        }
    }

    /// OTFS spectral-efficiency overhead relative to a block-CP frame
    /// carrying the same N symbols: (M_o + N_cp) N_o / (N + N_cp).
    pub fn cp_overhead_factor(&self) -> Option<f64> {
        match self.frame {
            FrameSpec::DelayDoppler { m_o, n_o, n_cp } => {
                let n = (m_o * n_o) as f64;
                Some(((m_o + n_cp) * n_o) as f64 / (n + n_cp as f64))
            }
            FrameSpec::Multicarrier { .. } => None,
        }
    }
}

/// Metrics for one (waveform, SNR, Doppler) point.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRecord {
    pub waveform: Waveform,
    pub snr_db: f64,
    pub doppler_hz: f64,
    pub seed: u64,
    pub ber: f64,
    pub fer: f64,
    pub nmse: f64,
    /// Literal per-position error-to-signal ratio.
    pub per_symbol_error_ratio: Vec<f64>,
    /// Its inverse in dB (conventional per-symbol SNR reading).
    pub per_symbol_snr_db: Vec<f64>,
    /// Relative std of the error ratio across positions.
    pub snr_spread: f64,
    /// Frames discarded because a ZF stage hit a singular tap/window;
    /// they count as fully errored.
    pub singular_frames: usize,
}

struct Link {
    receiver: ReceiverKind,
    mod_cfg: ModulatorConfig,
    otfs_params: Option<OtfsParams>,
    /// ZF demodulation window used after the one-tap FDE.
    w_rx_demod: Option<Window>,
    n: usize,
    n_cp: usize,
    tx_len: usize,
    chan: DelayDopplerChannel,
    /// Cached equivalent channels when every path is static.
    h_gfdm_static: Option<ComplexVec>,
    h_otfs_static: Option<ComplexGrid>,
    sigma_v2: f64,
    symbol_noise_ratio: f64,
    master_seed: u64,
}

fn build_channel(cfg: &SweepConfig, doppler_hz: f64) -> Result<DelayDopplerChannel> {
    match &cfg.channel_preset {
        None => Ok(DelayDopplerChannel {
            paths: vec![Path {
                delay_samples: 0,
                gain: Complex64::new(1.0, 0.0),
                doppler: doppler_hz,
            }],
        }),
        Some(path) => {
            let preset = ChannelPreset::load(path)?;
            let nu_ref = preset
                .paths
                .iter()
                .map(|p| p.doppler_hz.abs())
                .fold(0.0f64, f64::max);
            if nu_ref > 0.0 {
                // grid value rescales the preset's Doppler profile so
                // its largest path Doppler equals doppler_hz
                preset.to_channel(doppler_hz / nu_ref)
            } else {
                // static preset: assign the grid Doppler to every path
                let mut chan = preset.to_channel(1.0)?;
                for p in &mut chan.paths {
                    p.doppler = doppler_hz / preset.sample_rate_hz;
                }
                Ok(chan)
            }
        }
    }
}

fn build_link(cfg: &SweepConfig, snr_db: f64, doppler_hz: f64) -> Result<Link> {
    let chan = build_channel(cfg, doppler_hz)?;
    let static_chan = chan.paths.iter().all(|p| p.doppler == 0.0);

    let (mod_cfg, otfs_params, n, n_cp, tx_len) = match (cfg.waveform, cfg.frame) {
        (Waveform::Ofdm | Waveform::Gfdm, FrameSpec::Multicarrier { k, m, n_cp }) => {
            let params = FrameParams::new(k, m, n_cp)?;
            let pulse = make_rc_pulse(&params, cfg.pulse_alpha)?;
            let window = tx_window(&pulse, &params, WindowDomain::Td)?;
            // full four-step chain (with the spread stage) is the
            // conventional modulator; for M = 1 it reduces to the IFFT
            let mc = ModulatorConfig::new(params, window, true, WindowDomain::Td, Allocation::Gfdm)?;
            let n = params.n();
            (mc, None, n, n_cp, n + n_cp)
        }
        (Waveform::Otfs, FrameSpec::DelayDoppler { m_o, n_o, n_cp }) => {
            let params = OtfsParams::new(m_o, n_o, n_cp)?;
            let fp = params.frame_params();
            let pulse = make_rc_pulse(&fp, cfg.pulse_alpha)?;
            let window = tx_window(&pulse, &fp, WindowDomain::Td)?;
            let mc = otfs_config(&params, window, true)?;
            (mc, Some(params), params.n(), n_cp, params.n_total())
        }
        _ => {
            cfg.validate()?;
            unreachable!("validate rejects mismatched waveform/frame")
        }
    };

    // transmit power calibration over deterministic probe frames
    let positions = n;
    let mut power = 0.0;
    for i in 0..CALIBRATION_FRAMES {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.master_seed ^ 0x9e37_79b9_7f4a_7c15 ^ i);
        let bits: Vec<u8> = (0..4 * positions).map(|_| rng.gen_range(0..2)).collect();
        let symbols = qam16_map(&bits)?;
        let grid = data_grid(&symbols, &mod_cfg)?;
        let x = match otfs_params {
            Some(ref p) => otfs_modulate(&grid, p, &mod_cfg)?.s,
            None => modulate(&grid, &mod_cfg)?,
        };
        power += x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
    }
    let p_x = power / CALIBRATION_FRAMES as f64;
    let sigma_v2 = NoiseSpec::from_snr_db(p_x, snr_db).variance;

    // demodulation window after the one-tap FDE follows the configured
    // receiver kind; a singular ZF window marks frames as failed
    let w_rx_demod = if otfs_params.is_none() {
        rx_window(&mod_cfg.window, cfg.receiver, sigma_v2).ok()
    } else {
        None
    };

    let h_gfdm_static = if static_chan && otfs_params.is_none() {
        Some(equivalent_channel_gfdm(&chan, n, n_cp, 0)?)
    } else {
        None
    };
    let h_otfs_static = match (&otfs_params, static_chan) {
        (Some(p), true) => Some(equivalent_channel_otfs(&chan, p, 0)?.h),
        _ => None,
    };

    Ok(Link {
        receiver: cfg.receiver,
        mod_cfg,
        otfs_params,
        w_rx_demod,
        n,
        n_cp,
        tx_len,
        chan,
        h_gfdm_static,
        h_otfs_static,
        sigma_v2,
        symbol_noise_ratio: sigma_v2,
        master_seed: cfg.master_seed,
    })
}

/// Data grid for the modulator: symbols fill the K x M grid column by
/// column, matching the d[k + mK] vectorization.
fn data_grid(symbols: &[Complex64], cfg: &ModulatorConfig) -> Result<ComplexGrid> {
    ComplexGrid::from_vec_col_major(cfg.params.k, cfg.params.m, symbols)
}

struct FrameOut {
    bit_errors: usize,
    bits: usize,
    frame_error: bool,
    err_power: f64,
    sig_power: f64,
    per_pos_err: Vec<f64>,
    per_pos_sig: Vec<f64>,
    singular: bool,
}

fn failed_frame(bits: usize, sig_power: f64, per_pos_sig: Vec<f64>) -> FrameOut {
    FrameOut {
        bit_errors: bits,
        bits,
        frame_error: true,
        err_power: sig_power,
        sig_power,
        per_pos_err: per_pos_sig.clone(),
        per_pos_sig,
        singular: true,
    }
}

fn process_frame(link: &Link, frame_index: usize) -> Result<FrameOut> {
    let mut rng = ChaCha20Rng::seed_from_u64(link.master_seed.wrapping_add(frame_index as u64));
    let positions = link.n;
    let bits: Vec<u8> = (0..4 * positions).map(|_| rng.gen_range(0..2)).collect();
    let symbols = qam16_map(&bits)?;
    let d = data_grid(&symbols, &link.mod_cfg)?;
    let sig_power: f64 = symbols.iter().map(|s| s.norm_sqr()).sum();
    let per_pos_sig: Vec<f64> = symbols.iter().map(|s| s.norm_sqr()).collect();

    let start = frame_index as i64 * link.tx_len as i64;
    let tx = match link.otfs_params {
        Some(ref p) => otfs_modulate(&d, p, &link.mod_cfg)?.s_cp,
        None => add_cp_block(&modulate(&d, &link.mod_cfg)?, link.n_cp)?,
    };
    let mut r = link.chan.apply(&tx, start);
    r.truncate(link.tx_len);
    let y = awgn_with(
        &r,
        NoiseSpec {
            variance: link.sigma_v2,
        },
        &mut rng,
    );

    let d_hat = match link.otfs_params {
        None => {
            // block CP, one-tap FDE, then exact window demodulation
            let y_core = remove_cp_block(&y, link.n, link.n_cp)?;
            let mut y_f = dft(&y_core)?;
            let h_owned;
            let h = match &link.h_gfdm_static {
                Some(h) => h,
                None => {
                    h_owned = equivalent_channel_gfdm(&link.chan, link.n, link.n_cp, start)?;
                    &h_owned
                }
            };
            for (bin, hq) in y_f.iter_mut().zip(h) {
                match link.receiver {
                    ReceiverKind::Mf => *bin *= hq.conj(),
                    ReceiverKind::Zf => {
                        if hq.norm() <= EPSILON_FDE {
                            return Ok(failed_frame(4 * positions, sig_power, per_pos_sig));
                        }
                        *bin /= hq;
                    }
                    ReceiverKind::Mmse => {
                        *bin *= hq.conj() / (hq.norm_sqr() + link.symbol_noise_ratio);
                    }
                }
            }
            let y_eq = idft(&y_f)?;
            let w_rx = match &link.w_rx_demod {
                Some(w) => w,
                None => return Ok(failed_frame(4 * positions, sig_power, per_pos_sig)),
            };
            demodulate(&y_eq, w_rx, &link.mod_cfg)?
        }
        Some(ref params) => {
            let h_owned;
            let h = match &link.h_otfs_static {
                Some(h) => h,
                None => {
                    h_owned = equivalent_channel_otfs(&link.chan, params, start)?.h;
                    &h_owned
                }
            };
            match otfs_receive(
                &y,
                params,
                &link.mod_cfg,
                h,
                link.receiver,
                link.symbol_noise_ratio,
            ) {
                Ok(grid) => grid,
                Err(Error::SingularWindow { .. }) => {
                    return Ok(failed_frame(4 * positions, sig_power, per_pos_sig))
                }
                Err(e) => return Err(e),
            }
        }
    };

    let d_hat_vec = d_hat.vec_col_major();
    let rx_bits = qam16_demap(&d_hat_vec);
    let bit_errors = bits
        .iter()
        .zip(&rx_bits)
        .filter(|(a, b)| a != b)
        .count();
    let mut err_power = 0.0;
    let mut per_pos_err = vec![0.0; positions];
    for (i, (est, refsym)) in d_hat_vec.iter().zip(&symbols).enumerate() {
        let e = (est - refsym).norm_sqr();
        per_pos_err[i] = e;
        err_power += e;
    }
    Ok(FrameOut {
        bit_errors,
        bits: 4 * positions,
        frame_error: bit_errors > 0,
        err_power,
        sig_power,
        per_pos_err,
        per_pos_sig,
        singular: false,
    })
}

/// Simulate one point of the sweep grid: `frames_per_point` independent
/// frames, frame f seeded with `master_seed + f`, processed in parallel
/// and merged in frame order.
pub fn run_point(cfg: &SweepConfig, snr_db: f64, doppler_hz: f64) -> Result<MetricsRecord> {
    cfg.validate()?;
    let link = build_link(cfg, snr_db, doppler_hz)?;
    let outs: Vec<FrameOut> = (0..cfg.frames_per_point)
        .into_par_iter()
        .map(|f| process_frame(&link, f))
        .collect::<Result<_>>()?;

    let positions = link.n;
    let mut bit_errors = 0usize;
    let mut bits = 0usize;
    let mut frame_errors = 0usize;
    let mut err_power = 0.0;
    let mut sig_power = 0.0;
    let mut per_pos_err = vec![0.0f64; positions];
    let mut per_pos_sig = vec![0.0f64; positions];
    let mut singular = 0usize;
    for out in &outs {
        bit_errors += out.bit_errors;
        bits += out.bits;
        frame_errors += out.frame_error as usize;
        err_power += out.err_power;
        sig_power += out.sig_power;
        singular += out.singular as usize;
        for (acc, v) in per_pos_err.iter_mut().zip(&out.per_pos_err) {
            *acc += v;
        }
        for (acc, v) in per_pos_sig.iter_mut().zip(&out.per_pos_sig) {
            *acc += v;
        }
    }
    let per_symbol = finalize_per_symbol(&per_pos_err, &per_pos_sig);
    let snr_spread = relative_spread(&per_symbol.error_ratio);
    Ok(MetricsRecord {
        waveform: cfg.waveform,
        snr_db,
        doppler_hz,
        seed: cfg.master_seed,
        ber: bit_errors as f64 / bits as f64,
        fer: frame_errors as f64 / cfg.frames_per_point as f64,
        nmse: err_power / sig_power,
        per_symbol_error_ratio: per_symbol.error_ratio,
        per_symbol_snr_db: per_symbol.snr_db,
        snr_spread,
        singular_frames: singular,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub version: String,
    pub records: Vec<MetricsRecord>,
}

/// Run the full cartesian SNR x Doppler grid.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.snr_grid_db.len() * cfg.doppler_grid_hz.len());
    for &snr in &cfg.snr_grid_db {
        for &doppler in &cfg.doppler_grid_hz {
            records.push(run_point(cfg, snr, doppler)?);
        }
    }
    Ok(SweepReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        records,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepReport {
    /// RFC-4180 CSV, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("waveform,snr_db,doppler_hz,ber,fer,nmse,snr_spread\r\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\r\n",
                csv_field(&r.waveform.to_string()),
                r.snr_db,
                r.doppler_hz,
                r.ber,
                r.fer,
                r.nmse,
                r.snr_spread
            ));
        }
        out
    }

    /// JSON sidecar: resolved config, code version, seeds, per-symbol
    /// vectors, and the OTFS CP overhead factor where applicable.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "version": self.version,
            "master_seed": self.config.master_seed,
            "frame_seed_rule": "master_seed + frame_index",
            "cp_overhead_factor": self.config.cp_overhead_factor(),
            "records": self.records,
        })
    }

    /// Write `sweep.csv` and `sweep.json` into `out_dir`.
    pub fn write(&self, out_dir: &FsPath) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(out_dir)?;
        let csv_path = out_dir.join("sweep.csv");
        let json_path = out_dir.join("sweep.json");
        std::fs::write(&csv_path, self.to_csv())?;
        std::fs::write(
            &json_path,
            serde_json::to_string_pretty(&self.sidecar()).expect("report serialization"),
        )?;
        Ok((csv_path, json_path))
    }
}
