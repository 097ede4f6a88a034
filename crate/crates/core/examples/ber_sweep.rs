//! Run a small OTFS-vs-GFDM BER sweep over a moving multipath channel
//! straight from code and print the CSV. The `gfdmx sweep` subcommand
//! does the same from a TOML config.
//!
//! Run: `cargo run --release --example ber_sweep`

use gfdmx::gfdm::ReceiverKind;
use gfdmx::harness::{run_sweep, FrameSpec, SweepConfig, Waveform};

fn main() -> gfdmx::Result<()> {
    let preset = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/vehicular.toml");
    for (waveform, frame) in [
        (
            Waveform::Otfs,
            FrameSpec::DelayDoppler { m_o: 128, n_o: 16, n_cp: 32 },
        ),
        (
            Waveform::Gfdm,
            FrameSpec::Multicarrier { k: 16, m: 128, n_cp: 32 },
        ),
    ] {
        let cfg = SweepConfig {
            waveform,
            receiver: ReceiverKind::Mmse,
            pulse_alpha: 0.0,
            frame,
            snr_grid_db: vec![10.0, 14.0, 18.0],
            doppler_grid_hz: vec![10.0, 1000.0],
            channel_preset: Some(preset.clone()),
            frames_per_point: 20,
            master_seed: 1,
        };
        let report = run_sweep(&cfg)?;
        print!("{}", report.to_csv());
        if let Some(overhead) = cfg.cp_overhead_factor() {
            println!("# otfs cp overhead factor: {overhead:.4}");
        }
    }
    Ok(())
}
