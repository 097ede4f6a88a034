//! How good is the one-tap frequency-domain channel model? Exact for a
//! static channel behind a cyclic prefix, and degrading gracefully as
//! Doppler grows.
//!
//! Run: `cargo run --example ltv_channel`

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use gfdmx::channel::{add_cp_block, equivalent_channel_gfdm, remove_cp_block, DelayDopplerChannel, Path};
use gfdmx::numerics::dft;

fn main() -> gfdmx::Result<()> {
    let n = 256usize;
    let n_cp = 16usize;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2);
    let x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let x_f = dft(&x)?;
    let tx = add_cp_block(&x, n_cp)?;

    println!("{:>12} {:>14}", "doppler", "model residual");
    for nu in [0.0, 1e-6, 1e-5, 1e-4, 1e-3] {
        let chan = DelayDopplerChannel {
            paths: vec![
                Path { delay_samples: 0, gain: Complex64::new(0.8, 0.0), doppler: nu },
                Path { delay_samples: 5, gain: Complex64::new(-0.3, 0.4), doppler: -0.6 * nu },
                Path { delay_samples: 11, gain: Complex64::new(0.2, 0.1), doppler: 0.3 * nu },
            ],
        };
        let y = remove_cp_block(&chan.apply(&tx, 0), n, n_cp)?;
        let y_f = dft(&y)?;
        let h = equivalent_channel_gfdm(&chan, n, n_cp, 0)?;
        let residual: f64 = (0..n).map(|q| (y_f[q] - h[q] * x_f[q]).norm_sqr()).sum();
        let total: f64 = y_f.iter().map(|v| v.norm_sqr()).sum();
        println!("{nu:>12.0e} {:>14.3e}", residual / total);
    }
    println!("(residual is relative power left unexplained by the one-tap model)");
    Ok(())
}
