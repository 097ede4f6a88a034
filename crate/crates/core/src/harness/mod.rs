//! Link-level simulation harness: bit/symbol mapping, metrics, and the
//! Monte-Carlo sweep engine behind the CLI.

pub mod metrics;
pub mod qam;
pub mod sweep;

pub use metrics::{per_symbol_snr, relative_spread, PerSymbolSnr};
pub use qam::{qam16_demap, qam16_map};
pub use sweep::{
    run_point, run_sweep, FrameSpec, MetricsRecord, SweepConfig, SweepReport, Waveform,
};
