//! Filter design, zero-phase application, and trial windowing.

mod apply;
mod design;
mod window;

pub use apply::{
    apply_zero_phase, design_chain, filtfilt, preprocess, preprocess_with, FilterChainConfig,
};
pub use design::{design_butterworth, DesignedFilter, FilterKind, FilterSpec, Sos, MAX_ORDER};
pub use window::extract_window;
