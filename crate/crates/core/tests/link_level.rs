//! End-to-end behaviors that sit above single modules: receiver noise
//! profiles and the command-line interface.

use std::process::Command;

use gfdmx::gfdm::ReceiverKind;
use gfdmx::harness::{run_point, FrameSpec, SweepConfig, Waveform};

#[test]
fn ofdm_zf_error_follows_inverse_channel_power() {
    // two-tap static channel: per-subcarrier error ratio under ZF must
    // track 1/|H_k|^2
    let dir = tempfile::tempdir().unwrap();
    let preset = dir.path().join("two_tap.toml");
    std::fs::write(
        &preset,
        "sample_rate_hz = 1.0e6\n\
         [[paths]]\ndelay_samples = 0\ngain_db = 0.0\ndoppler_hz = 0.0\n\
         [[paths]]\ndelay_samples = 3\ngain_db = -4.0\ndoppler_hz = 0.0\n",
    )
    .unwrap();
    let k = 64usize;
    let cfg = SweepConfig {
        waveform: Waveform::Ofdm,
        receiver: ReceiverKind::Zf,
        pulse_alpha: 0.0,
        frame: FrameSpec::Multicarrier { k, m: 1, n_cp: 8 },
        snr_grid_db: vec![15.0],
        doppler_grid_hz: vec![0.0],
        channel_preset: Some(preset),
        frames_per_point: 4000,
        master_seed: 5,
    };
    let rec = run_point(&cfg, 15.0, 0.0).unwrap();

    // closed-form channel response
    let a0 = 1.0f64;
    let a1 = 10f64.powf(-4.0 / 20.0);
    let inv_h2: Vec<f64> = (0..k)
        .map(|q| {
            let phase = -2.0 * std::f64::consts::PI * 3.0 * q as f64 / k as f64;
            let h = num_complex::Complex64::new(a0, 0.0)
                + a1 * num_complex::Complex64::from_polar(1.0, phase);
            1.0 / h.norm_sqr()
        })
        .collect();
    let mean_inv: f64 = inv_h2.iter().sum::<f64>() / k as f64;
    let mean_ratio: f64 = rec.per_symbol_error_ratio.iter().sum::<f64>() / k as f64;
    for q in 0..k {
        let want = inv_h2[q] / mean_inv;
        let got = rec.per_symbol_error_ratio[q] / mean_ratio;
        assert!(
            (got - want).abs() / want < 0.15,
            "subcarrier {q}: normalized ratio {got:.3} vs 1/|H|^2 profile {want:.3}"
        );
    }
}

fn gfdmx_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gfdmx"))
}

#[test]
fn cli_selftest_passes() {
    let out = gfdmx_bin().arg("selftest").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("selftest passed"), "{text}");
}

#[test]
fn cli_sweep_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        r#"
waveform = "otfs"
receiver = "mmse"
pulse_alpha = 0.5
frames_per_point = 5
master_seed = 3
snr_grid_db = [10.0, 16.0]
doppler_grid_hz = [0.0]
[frame]
m_o = 16
n_o = 4
n_cp = 4
"#,
    )
    .unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let status = gfdmx_bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .args(["--threads", "2"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let csv1 = std::fs::read(out1.join("sweep.csv")).unwrap();
    let csv2 = std::fs::read(out2.join("sweep.csv")).unwrap();
    assert_eq!(csv1, csv2);
    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with("waveform,snr_db,doppler_hz,ber,fer,nmse,snr_spread"));
    assert_eq!(text.lines().count(), 3); // header + 2 points
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out1.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["master_seed"], 3);
    assert!(json["cp_overhead_factor"].as_f64().unwrap() > 1.0);
    assert_eq!(json["records"].as_array().unwrap().len(), 2);

    // seed override changes the data
    let out3 = dir.path().join("run3");
    let status = gfdmx_bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out3)
        .args(["--seed", "99"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv3 = std::fs::read(out3.join("sweep.csv")).unwrap();
    assert_ne!(csv2, csv3);
}

#[test]
fn cli_reports_errors_machine_readably() {
    let out = gfdmx_bin()
        .args(["sweep", "--config", "/nonexistent/cfg.toml", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err_line = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value =
        serde_json::from_str(err_line.lines().last().unwrap()).unwrap();
    assert!(parsed["error"].is_string());
}

#[test]
fn cli_dump_window_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    std::fs::write(
        &config,
        r#"
waveform = "gfdm"
receiver = "mmse"
pulse_alpha = 0.25
frames_per_point = 1
master_seed = 1
snr_grid_db = [10.0]
doppler_grid_hz = [0.0]
[frame]
k = 4
m = 5
n_cp = 2
"#,
    )
    .unwrap();
    let out = gfdmx_bin()
        .args(["dump-window", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["k"], 4);
    assert_eq!(json["m"], 5);
    assert_eq!(json["tx_window"]["rows"], 4);
    assert_eq!(json["tx_window"]["re"].as_array().unwrap().len(), 4);
    assert!(json["rx_window"].is_object());
}
