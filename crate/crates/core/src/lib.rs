//! Link-level simulation of IRS-aided spatial modulation with multiple
//! receive-antenna selection (MAS).
//!
//! The transmitter picks N_p of N_r receive antennas from the first
//! information bits, superposes N_p symbols into one complex scalar with
//! power ratios `alpha`, and co-phases one block of reflecting elements to
//! each selected antenna. The receiver either searches all hypotheses (ML)
//! or runs the successive signal detector (SSD).

pub mod baselines;
pub mod bits;
pub mod channel;
pub mod cli;
pub mod config;
pub mod constellation;
pub mod detect;
pub mod error;
pub mod harness;
pub mod rac;
pub mod report;
pub mod tx;

pub use bits::{bits_to_int, int_to_bits, BitBlock};
pub use config::{validate_config, Cancellation, Detector, Scheme, SystemConfig, ValidConfig};
pub use constellation::{make_constellation, Constellation, Modulation};
pub use error::{Error, Result};
pub use harness::{run_sweep, run_sweep_with_workers, Link, SweepRow};
