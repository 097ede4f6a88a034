//! Batch CLI: run metric sweeps from a config file, self-check the
//! library, or dump modulation windows for inspection.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gfdmx::channel::{add_cp_block, remove_cp_block, DelayDopplerChannel};
use gfdmx::gfdm::{
    make_rc_pulse, modulate, rx_window, tx_window, Allocation, FrameParams, ModulatorConfig,
    ReceiverKind, WindowDomain,
};
use gfdmx::harness::{run_sweep, SweepConfig};
use gfdmx::numerics::max_abs_diff;
use gfdmx::Error;

#[derive(Parser)]
#[command(name = "gfdmx", version, about = "Multicarrier link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the SNR x Doppler sweep described by a TOML config.
    Sweep {
        /// Sweep configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for sweep.csv / sweep.json.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run quick internal consistency checks.
    Selftest,
    /// Print the transmit and receive windows for a config as JSON.
    DumpWindow {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // one machine-readable line on stderr
            eprintln!(
                "{}",
                serde_json::json!({"error": e.to_string()})
            );
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> gfdmx::Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            }
            // fail on an unwritable output directory before computing
            std::fs::create_dir_all(&out)?;
            let probe = out.join(".write_probe");
            std::fs::write(&probe, b"")?;
            std::fs::remove_file(&probe)?;
            let report = run_sweep(&cfg)?;
            let (csv, json) = report.write(&out)?;
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(())
        }
        Command::Selftest => selftest(),
        Command::DumpWindow { config } => dump_window(&config),
    }
}

fn check(name: &str, ok: bool) -> gfdmx::Result<()> {
    println!("{}: {}", name, if ok { "ok" } else { "FAILED" });
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("selftest failed: {name}")))
    }
}

fn selftest() -> gfdmx::Result<()> {
    use gfdmx::numerics::ComplexGrid;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
    let mut rand_grid = |rows: usize, cols: usize| {
        let data = (0..rows * cols)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexGrid::new(rows, cols, data).unwrap()
    };

    // ZF roundtrip through the full modulator
    let params = FrameParams::new(4, 3, 0)?;
    let pulse = make_rc_pulse(&params, 0.5)?;
    let window = tx_window(&pulse, &params, WindowDomain::Td)?;
    let cfg = ModulatorConfig::new(params, window, true, WindowDomain::Td, Allocation::Gfdm)?;
    let w_rx = rx_window(&cfg.window, ReceiverKind::Zf, 0.0)?;
    let d = rand_grid(4, 3);
    let x = modulate(&d, &cfg)?;
    let d_hat = gfdmx::gfdm::demodulate(&x, &w_rx, &cfg)?;
    let err = (0..4)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .map(|(r, c)| (d.get(r, c) - d_hat.get(r, c)).norm())
        .fold(0.0f64, f64::max);
    check("zf roundtrip", err < 1e-9)?;

    // CP turns a static channel into circular convolution
    let chan = DelayDopplerChannel {
        paths: vec![gfdmx::channel::Path {
            delay_samples: 2,
            gain: Complex64::new(0.5, 0.5),
            doppler: 0.0,
        }],
    };
    let sig: Vec<Complex64> = (0..16)
        .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
        .collect();
    let tx = add_cp_block(&sig, 4)?;
    let y = remove_cp_block(&chan.apply(&tx, 0), 16, 4)?;
    let h = gfdmx::channel::equivalent_channel_gfdm(&chan, 16, 4, 0)?;
    let yf = gfdmx::numerics::dft(&y)?;
    let xf = gfdmx::numerics::dft(&sig)?;
    let model: Vec<Complex64> = (0..16).map(|q| h[q] * xf[q]).collect();
    check("cp circularization", max_abs_diff(&yf, &model) < 1e-10)?;

    // permuted allocation equals the commutation of the plain order
    let oparams = gfdmx::otfs::OtfsParams::new(8, 3, 2)?;
    let fp = oparams.frame_params();
    let pulse = make_rc_pulse(&fp, 0.5)?;
    let w = tx_window(&pulse, &fp, WindowDomain::Td)?;
    let ocfg = gfdmx::otfs::otfs_config(&oparams, w.clone(), true)?;
    let gcfg = ModulatorConfig::new(fp, w, true, WindowDomain::Td, Allocation::Gfdm)?;
    let d = rand_grid(3, 8);
    let s = modulate(&d, &ocfg)?;
    let x = modulate(&d, &gcfg)?;
    let perm = gfdmx::numerics::commutation_apply(&x, 8, 3)?;
    check("otfs permutation", max_abs_diff(&s, &perm) < 1e-12)?;

    // seeded noise is reproducible
    let zeros = vec![Complex64::default(); 64];
    let spec = gfdmx::channel::NoiseSpec { variance: 1.0 };
    let a = gfdmx::channel::awgn(&zeros, spec, 9);
    let b = gfdmx::channel::awgn(&zeros, spec, 9);
    check("awgn determinism", max_abs_diff(&a, &b) == 0.0)?;

    println!("selftest passed");
    Ok(())
}

fn window_json(w: &gfdmx::gfdm::Window) -> serde_json::Value {
    let re: Vec<Vec<f64>> = (0..w.w.rows())
        .map(|r| (0..w.w.cols()).map(|c| w.w.get(r, c).re).collect())
        .collect();
    let im: Vec<Vec<f64>> = (0..w.w.rows())
        .map(|r| (0..w.w.cols()).map(|c| w.w.get(r, c).im).collect())
        .collect();
    serde_json::json!({"rows": w.w.rows(), "cols": w.w.cols(), "re": re, "im": im})
}

fn dump_window(config: &std::path::Path) -> gfdmx::Result<()> {
    let cfg = SweepConfig::load(config)?;
    let (k, m) = match cfg.frame {
        gfdmx::harness::FrameSpec::Multicarrier { k, m, .. } => (k, m),
        gfdmx::harness::FrameSpec::DelayDoppler { m_o, n_o, .. } => (n_o, m_o),
    };
    let params = FrameParams::new(k, m, 0)?;
    let pulse = make_rc_pulse(&params, cfg.pulse_alpha)?;
    let w_tx = tx_window(&pulse, &params, WindowDomain::Td)?;
    let w_rx = rx_window(&w_tx, cfg.receiver, 0.01);
    let out = serde_json::json!({
        "k": k,
        "m": m,
        "pulse_alpha": cfg.pulse_alpha,
        "tx_window": window_json(&w_tx),
        "rx_window": w_rx.map(|w| window_json(&w)).ok(),
        "rx_kind": cfg.receiver.to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("window json"));
    Ok(())
}
