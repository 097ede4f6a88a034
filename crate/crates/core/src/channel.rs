//! Linear time-variant channel simulator: finite sets of delay-Doppler
//! paths, block cyclic prefixes, equivalent one-tap channels, ideal
//! channel probing, and seeded complex AWGN.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::ComplexVec;

/// One propagation path: integer delay in samples, complex gain,
/// Doppler as a normalized frequency (cycles per sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub delay_samples: usize,
    pub gain: Complex64,
    pub doppler: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DelayDopplerChannel {
    pub paths: Vec<Path>,
}

impl DelayDopplerChannel {
    /// Identity channel: one zero-delay unit-gain static path.
    pub fn identity() -> Self {
        Self {
            paths: vec![Path {
                delay_samples: 0,
                gain: Complex64::new(1.0, 0.0),
                doppler: 0.0,
            }],
        }
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.delay_samples).max().unwrap_or(0)
    }

    /// Apply the channel by linear convolution with per-path Doppler
    /// modulation:
    /// `r[n] = sum_i a_i x[n - l_i] exp(j 2 pi nu_i (n + start_time))`.
    /// The output carries the convolution tail, so it is
    /// `x.len() + max_delay` samples long. `start_time` is the absolute
    /// sample index of `x[0]`, which keeps the Doppler phase continuous
    /// across consecutively transmitted blocks.
    pub fn apply(&self, x: &[Complex64], start_time: i64) -> ComplexVec {
        let out_len = x.len() + self.max_delay();
        let mut r = vec![Complex64::default(); out_len];
        for path in &self.paths {
            let l = path.delay_samples;
            for (idx, &sample) in x.iter().enumerate() {
                let n = idx + l;
                let phase = 2.0
                    * std::f64::consts::PI
                    * path.doppler
                    * (n as f64 + start_time as f64);
                r[n] += path.gain * sample * Complex64::from_polar(1.0, phase);
            }
        }
        r
    }

    /// Total path power `sum |a_i|^2`.
    pub fn power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }
}

/// Prepend the last `n_cp` samples of a block (single shared CP).
pub fn add_cp_block(x: &[Complex64], n_cp: usize) -> Result<ComplexVec> {
    if n_cp > x.len() {
        return Err(Error::Parameter(format!(
            "CP length {} longer than block {}",
            n_cp,
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(x.len() + n_cp);
    out.extend_from_slice(&x[x.len() - n_cp..]);
    out.extend_from_slice(x);
    Ok(out)
}

/// Drop the leading CP of a block of known core length `n`.
pub fn remove_cp_block(r: &[Complex64], n: usize, n_cp: usize) -> Result<ComplexVec> {
    if r.len() < n + n_cp {
        return Err(Error::shape(format!(
            "received block {} shorter than CP {} + core {}",
            r.len(),
            n_cp,
            n
        )));
    }
    Ok(r[n_cp..n_cp + n].to_vec())
}

/// Equivalent N-point frequency response of the channel over one
/// CP-protected block of `n` core samples:
/// `h~[q] = (1/N) sum_n sum_l h(l, N_cp + n) exp(-j 2 pi q l / N)`,
/// a time average of the per-sample frequency responses. Exact for a
/// static channel with delays inside the CP; an approximation otherwise.
pub fn equivalent_channel_gfdm(
    chan: &DelayDopplerChannel,
    n: usize,
    n_cp: usize,
    start_time: i64,
) -> Result<ComplexVec> {
    if n == 0 {
        return Err(Error::Parameter("block length must be positive".into()));
    }
    let mut h = vec![Complex64::default(); n];
    for path in &chan.paths {
        // time average of the Doppler rotation over the block
        let mut avg = Complex64::default();
        for s in 0..n {
            let t = start_time + n_cp as i64 + s as i64;
            avg += Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * path.doppler * t as f64,
            );
        }
        avg /= n as f64;
        let tap = path.gain * avg;
        for (q, hq) in h.iter_mut().enumerate() {
            let rot = -2.0 * std::f64::consts::PI * (q as f64) * (path.delay_samples as f64)
                / n as f64;
            *hq += tap * Complex64::from_polar(1.0, rot);
        }
    }
    Ok(h)
}

/// Ideal channel estimate by Dirac probing: the channel's response to a
/// unit impulse at `start_time`, truncated to `n` samples. For a static
/// channel this is the tap sequence itself; its DFT feeds the one-tap
/// equalizers.
pub fn ideal_channel_estimate(
    chan: &DelayDopplerChannel,
    n: usize,
    start_time: i64,
) -> Result<ComplexVec> {
    if n == 0 {
        return Err(Error::Parameter("estimate length must be positive".into()));
    }
    let probe = vec![Complex64::new(1.0, 0.0)];
    let mut h = chan.apply(&probe, start_time);
    h.resize(n, Complex64::default());
    h.truncate(n);
    Ok(h)
}

/// Complex AWGN specification: total noise variance per complex sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
}

impl NoiseSpec {
    pub fn from_snr_db(signal_power: f64, snr_db: f64) -> Self {
        Self {
            variance: signal_power * 10f64.powf(-snr_db / 10.0),
        }
    }
}

/// Add circular complex Gaussian noise with the given per-sample
/// variance, using a freshly seeded generator.
pub fn awgn(x: &[Complex64], spec: NoiseSpec, seed: u64) -> ComplexVec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    awgn_with(x, spec, &mut rng)
}

/// Same, drawing from a caller-owned generator.
pub fn awgn_with<R: rand::Rng>(x: &[Complex64], spec: NoiseSpec, rng: &mut R) -> ComplexVec {
    let sigma = (spec.variance / 2.0).sqrt();
    x.iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s + Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

/// On-disk channel description: a sample rate plus physical path
/// parameters (delay in samples, gain in dB, Doppler in Hz).
#[derive(Debug, Clone, Deserialize)]
pub struct ChannelPreset {
    pub sample_rate_hz: f64,
    pub paths: Vec<PresetPath>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PresetPath {
    pub delay_samples: usize,
    pub gain_db: f64,
    pub doppler_hz: f64,
}

impl ChannelPreset {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("channel preset: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Instantiate the simulator channel: linear gains from dB, Doppler
    /// normalized by the sample rate. `doppler_scale` multiplies every
    /// path's Doppler, which is how sweep grids move a preset across
    /// mobility points without editing the file.
    pub fn to_channel(&self, doppler_scale: f64) -> Result<DelayDopplerChannel> {
        if self.sample_rate_hz <= 0.0 {
            return Err(Error::Config("sample_rate_hz must be positive".into()));
        }
        let paths = self
            .paths
            .iter()
            .map(|p| Path {
                delay_samples: p.delay_samples,
                gain: Complex64::new(10f64.powf(p.gain_db / 20.0), 0.0),
                doppler: doppler_scale * p.doppler_hz / self.sample_rate_hz,
            })
            .collect();
        Ok(DelayDopplerChannel { paths })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dft, max_abs_diff, norm_sq};
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(n: usize, seed: u64) -> ComplexVec {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn identity_channel_passthrough() {
        let chan = DelayDopplerChannel::identity();
        let x = random_vec(16, 1);
        let r = chan.apply(&x, 1234);
        assert!(max_abs_diff(&r, &x) < 1e-15);
    }

    #[test]
    fn single_delay_shifts() {
        let chan = DelayDopplerChannel {
            paths: vec![Path {
                delay_samples: 3,
                gain: c(0.5, -0.5),
                doppler: 0.0,
            }],
        };
        let x = random_vec(8, 2);
        let r = chan.apply(&x, 0);
        assert_eq!(r.len(), 11);
        for n in 0..3 {
            assert!(r[n].norm() < 1e-15);
        }
        for n in 0..8 {
            assert!((r[n + 3] - c(0.5, -0.5) * x[n]).norm() < 1e-15);
        }
    }

    #[test]
    fn doppler_only_modulates() {
        let nu = 0.013;
        let chan = DelayDopplerChannel {
            paths: vec![Path {
                delay_samples: 0,
                gain: c(1.0, 0.0),
                doppler: nu,
            }],
        };
        let x = random_vec(16, 3);
        let start = 7i64;
        let r = chan.apply(&x, start);
        for n in 0..16 {
            let want = x[n]
                * Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * nu * (n as f64 + start as f64),
                );
            assert!((r[n] - want).norm() < 1e-12);
        }
        // phase continuity: applying two halves with matching start
        // times equals applying the whole
        let a = chan.apply(&x[..8], start);
        let b = chan.apply(&x[8..], start + 8);
        assert!(max_abs_diff(&a, &r[..8].to_vec()) < 1e-12);
        assert!(max_abs_diff(&b, &r[8..].to_vec()) < 1e-12);
    }

    #[test]
    fn empty_channel_gives_silence() {
        let chan = DelayDopplerChannel { paths: vec![] };
        let x = random_vec(4, 4);
        let r = chan.apply(&x, 0);
        assert!(norm_sq(&r) < 1e-30);
        assert_eq!(chan.max_delay(), 0);
        assert_eq!(chan.power(), 0.0);
    }

    #[test]
    fn cp_block_roundtrip_and_errors() {
        let x = random_vec(8, 5);
        let tx = add_cp_block(&x, 3).unwrap();
        assert_eq!(tx.len(), 11);
        assert!(max_abs_diff(&tx[..3].to_vec(), &x[5..].to_vec()) < 1e-15);
        let back = remove_cp_block(&tx, 8, 3).unwrap();
        assert!(max_abs_diff(&back, &x) < 1e-15);
        assert!(add_cp_block(&x, 9).is_err());
        assert!(remove_cp_block(&tx, 9, 3).is_err());
    }

    #[test]
    fn static_channel_is_circular_conv_after_cp() {
        // CP-protected block through a static multitap channel equals
        // circular convolution: per-bin multiplication by the DFT of
        // the taps
        let n = 16;
        let n_cp = 4;
        let chan = DelayDopplerChannel {
            paths: vec![
                Path {
                    delay_samples: 0,
                    gain: c(0.7, 0.2),
                    doppler: 0.0,
                },
                Path {
                    delay_samples: 2,
                    gain: c(-0.4, 0.1),
                    doppler: 0.0,
                },
                Path {
                    delay_samples: 4,
                    gain: c(0.1, -0.3),
                    doppler: 0.0,
                },
            ],
        };
        let x = random_vec(n, 6);
        let tx = add_cp_block(&x, n_cp).unwrap();
        let rx = chan.apply(&tx, 0);
        let y = remove_cp_block(&rx, n, n_cp).unwrap();
        let y_f = dft(&y).unwrap();
        let x_f = dft(&x).unwrap();
        let h = equivalent_channel_gfdm(&chan, n, n_cp, 0).unwrap();
        for q in 0..n {
            assert!((y_f[q] - h[q] * x_f[q]).norm() < 1e-10, "bin {q}");
        }
        // and the DFT of the probe-based estimate agrees
        let est = dft(&ideal_channel_estimate(&chan, n, 0).unwrap()).unwrap();
        assert!(max_abs_diff(&est, &h) < 1e-10);
    }

    #[test]
    fn equivalent_channel_dirac_is_flat() {
        let h = equivalent_channel_gfdm(&DelayDopplerChannel::identity(), 8, 2, 0).unwrap();
        for hq in &h {
            assert!((hq - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn equivalent_channel_doppler_residual_grows() {
        // one-tap model error (vs the true probe response average) should
        // grow with Doppler
        let n = 64;
        let n_cp = 8;
        let x = random_vec(n, 7);
        let x_f = dft(&x).unwrap();
        let mut last_err = 0.0;
        for (i, nu) in [1e-5, 1e-4, 1e-3].iter().enumerate() {
            let chan = DelayDopplerChannel {
                paths: vec![Path {
                    delay_samples: 0,
                    gain: c(1.0, 0.0),
                    doppler: *nu,
                }],
            };
            let tx = add_cp_block(&x, n_cp).unwrap();
            let y = remove_cp_block(&chan.apply(&tx, 0), n, n_cp).unwrap();
            let y_f = dft(&y).unwrap();
            let h = equivalent_channel_gfdm(&chan, n, n_cp, 0).unwrap();
            let model: ComplexVec = (0..n).map(|q| h[q] * x_f[q]).collect();
            let err = max_abs_diff(&y_f, &model);
            assert!(err > last_err, "nu={nu} err={err} last={last_err}");
            if i == 0 {
                assert!(err < 1e-1);
            }
            last_err = err;
        }
    }

    #[test]
    fn dirac_probe_estimate() {
        // static single path: impulse at the delay, scaled by the gain
        let chan = DelayDopplerChannel {
            paths: vec![Path {
                delay_samples: 5,
                gain: c(0.4, -0.6),
                doppler: 0.0,
            }],
        };
        let h = ideal_channel_estimate(&chan, 16, 0).unwrap();
        for (n, v) in h.iter().enumerate() {
            let want = if n == 5 { c(0.4, -0.6) } else { c(0.0, 0.0) };
            assert!((v - want).norm() < 1e-15);
        }
        // Doppler path keeps its delay support, phase set by start_time
        let moving = DelayDopplerChannel {
            paths: vec![Path {
                delay_samples: 3,
                gain: c(1.0, 0.0),
                doppler: 0.01,
            }],
        };
        let t0 = 11i64;
        let h = ideal_channel_estimate(&moving, 8, t0).unwrap();
        for (n, v) in h.iter().enumerate() {
            if n == 3 {
                let want = Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * 0.01 * (3 + t0) as f64,
                );
                assert!((v - want).norm() < 1e-12);
            } else {
                assert!(v.norm() < 1e-15);
            }
        }
        // equals the raw channel response to a unit impulse
        let direct = moving.apply(&[c(1.0, 0.0)], t0);
        for (n, v) in h.iter().enumerate().take(4) {
            assert!((v - direct.get(n).copied().unwrap_or_default()).norm() < 1e-15);
        }
        assert!(ideal_channel_estimate(&chan, 0, 0).is_err());
    }

    #[test]
    fn awgn_statistics_and_determinism() {
        let x = vec![c(0.0, 0.0); 200_000];
        let spec = NoiseSpec { variance: 0.37 };
        let y = awgn(&x, spec, 42);
        let measured = norm_sq(&y) / y.len() as f64;
        assert!(
            (measured - 0.37).abs() / 0.37 < 0.01,
            "variance {measured}"
        );
        // per-dimension split
        let re_var: f64 = y.iter().map(|v| v.re * v.re).sum::<f64>() / y.len() as f64;
        assert!((re_var - 0.185).abs() / 0.185 < 0.02);
        // same seed, same noise
        let y2 = awgn(&x[..64], spec, 42);
        assert!(max_abs_diff(&y2, &y[..64].to_vec()) < 1e-15);
        // different seed differs
        let y3 = awgn(&x[..64], spec, 43);
        assert!(max_abs_diff(&y3, &y[..64].to_vec()) > 1e-3);
        // zero variance is a no-op
        let z = awgn(&y2, NoiseSpec { variance: 0.0 }, 1);
        assert!(max_abs_diff(&z, &y2) < 1e-15);
    }

    #[test]
    fn noise_spec_from_snr() {
        let spec = NoiseSpec::from_snr_db(1.0, 10.0);
        assert!((spec.variance - 0.1).abs() < 1e-15);
        let spec = NoiseSpec::from_snr_db(2.0, 0.0);
        assert!((spec.variance - 2.0).abs() < 1e-15);
    }

    #[test]
    fn preset_parsing_and_scaling() {
        let text = r#"
            sample_rate_hz = 1.0e6
            [[paths]]
            delay_samples = 0
            gain_db = 0.0
            doppler_hz = 100.0
            [[paths]]
            delay_samples = 7
            gain_db = -6.0
            doppler_hz = -50.0
        "#;
        let preset = ChannelPreset::from_toml_str(text).unwrap();
        let chan = preset.to_channel(2.0).unwrap();
        assert_eq!(chan.paths.len(), 2);
        assert!((chan.paths[0].gain.re - 1.0).abs() < 1e-12);
        assert!((chan.paths[0].doppler - 2.0e-4).abs() < 1e-15);
        assert!((chan.paths[1].gain.re - 10f64.powf(-0.3)).abs() < 1e-12);
        assert_eq!(chan.paths[1].delay_samples, 7);
        assert!((chan.paths[1].doppler + 1.0e-4).abs() < 1e-15);
        assert!(ChannelPreset::from_toml_str("sample_rate_hz = 5").is_err());
    }
}
