//! Inspect modulation windows: raised-cosine prototypes at different
//! roll-offs and the MF/ZF/MMSE receive windows they induce.
//!
//! Run: `cargo run --example windows`

use gfdmx::gfdm::{make_rc_pulse, rx_window, tx_window, FrameParams, ReceiverKind, WindowDomain};

fn main() -> gfdmx::Result<()> {
    let params = FrameParams::new(4, 5, 0)?;
    for alpha in [0.0, 0.25, 0.5, 1.0] {
        let pulse = make_rc_pulse(&params, alpha)?;
        let w = tx_window(&pulse, &params, WindowDomain::Td)?;
        let mags: Vec<f64> = w.w.data().iter().map(|v| v.norm()).collect();
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = mags.iter().cloned().fold(0.0f64, f64::max);
        println!("alpha {alpha:4}: |W| in [{min:.3}, {max:.3}]");
        // first row of the window magnitude
        let row: Vec<String> = (0..params.m).map(|m| format!("{:.2}", w.w.get(0, m).norm())).collect();
        println!("  row 0: [{}]", row.join(", "));

        for kind in [ReceiverKind::Mf, ReceiverKind::Zf, ReceiverKind::Mmse] {
            match rx_window(&w, kind, 0.05) {
                Ok(rx) => {
                    let peak = rx.w.data().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
                    println!("  {kind} receive window peak {peak:.3}");
                }
                Err(e) => println!("  {kind}: {e}"),
            }
        }
    }
    Ok(())
}
