//! Modulate one GFDM block and get the data back with a ZF receive
//! window, then cross-check the fast chain against the dense modulation
//! matrix.
//!
//! Run: `cargo run --example gfdm_block`

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use gfdmx::gfdm::{
    build_matrix_a, demodulate, make_rc_pulse, modulate, rx_window, tx_window, Allocation,
    FrameParams, ModulatorConfig, ReceiverKind, WindowDomain,
};
use gfdmx::numerics::{max_abs_diff, ComplexGrid};

fn main() -> gfdmx::Result<()> {
    let params = FrameParams::new(8, 5, 0)?; // K = 8 subcarriers, M = 5 subsymbols
    let pulse = make_rc_pulse(&params, 0.4)?;
    let window = tx_window(&pulse, &params, WindowDomain::Td)?;
    let cfg = ModulatorConfig::new(params, window, true, WindowDomain::Td, Allocation::Gfdm)?;

    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
    let data: Vec<Complex64> = (0..params.n())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let d = ComplexGrid::from_vec_col_major(params.k, params.m, &data)?;

    let x = modulate(&d, &cfg)?;
    println!("block of {} samples, power {:.3}", x.len(), x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64);

    // the dense matrix produces the same signal
    let a = build_matrix_a(&pulse, &params)?;
    let dv = d.vec_col_major();
    let dense: Vec<Complex64> = (0..params.n())
        .map(|row| (0..params.n()).map(|col| a.get(row, col) * dv[col]).sum())
        .collect();
    println!("fast chain vs dense matrix: max diff {:.2e}", max_abs_diff(&x, &dense));

    let w_rx = rx_window(&cfg.window, ReceiverKind::Zf, 0.0)?;
    let d_hat = demodulate(&x, &w_rx, &cfg)?;
    let err = d
        .data()
        .iter()
        .zip(d_hat.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    println!("ZF reconstruction error: {err:.2e}");
    Ok(())
}
