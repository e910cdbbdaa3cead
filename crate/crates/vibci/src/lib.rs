//! Offline EEG analysis toolkit for SSVEP and visual-imagery BCI pipelines.
//!
//! The crate covers the full offline path from raw multichannel signal to
//! classification report: Butterworth preprocessing, trial windowing, Welch
//! PSD features, a linear SVM trained by dual coordinate descent with
//! electrode-subset and regularization tuning, protocol scheduling, a
//! synthetic EEG generator for validation, and accuracy/bit-rate reporting.
//!
//! Start with the runnable examples (`cargo run --example full_experiment`)
//! or the `vibci` binary (`vibci run --config exp.toml`).

pub mod config;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod signal;
pub mod spectral;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
