//! Distributed parameter estimation with one-bit dithered communication.
//!
//! A network of sensors estimates an unknown vector from noisy partial
//! observations while exchanging a single dithered sign bit per neighbour
//! per step. The dither noise doubles as a privacy mechanism: the Fisher
//! information an eavesdropper can extract about any observation from the
//! transmitted bit stream is bounded, and the bound decays polynomially.
//!
//! The crate ships four layers:
//!
//! - environment models: switching communication graphs driven by a Markov
//!   chain ([`graph`]), sensor observation models ([`observation`]), and
//!   the dither-noise families with their privacy constants ([`noise`]);
//! - the estimation recursion itself with step-size schedules and an
//!   assumption validator ([`estimator`]);
//! - Fisher-information leakage bounds, improvement factors and rate
//!   diagnostics ([`privacy`]);
//! - Monte Carlo experiment drivers with CSV output ([`experiments`]),
//!   preconfigured scenarios ([`scenarios`]), a TOML config loader
//!   ([`config`]) and the command-line entry points ([`cli`]).
//!
//! Start with the runnable examples (`cargo run --release --example
//! convergence`) or the `bitfuse` binary (`bitfuse simulate --help`).

pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod graph;
pub mod noise;
pub mod observation;
pub mod privacy;
pub mod rng;
pub mod scenarios;

pub use error::{Error, Result};
