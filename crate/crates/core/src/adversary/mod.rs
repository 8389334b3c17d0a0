//! Constructive adversaries: greedy covering by shifted sets, Vitali
//! selection, bad-window search and the quantized bad scheme built on top.

mod cover;
mod pipeline;
mod scheme;
mod vitali;
mod windows;

pub use cover::{greedy_cover, CoverPlan, EXHAUSTIVE_MAX, SAMPLED_SHIFTS};
pub use pipeline::{
    limsup_estimate, run_bad_function, BadFunctionReport, BadFunctionSetup, LimsupReport,
    StoppingSummary, LIMSUP_BUDGET,
};
pub use scheme::{build_bad_scheme, quantization_class, quantization_tau, BadScheme, PAIR_BUDGET};
pub use vitali::{union_length, vitali_disjointify, Interval};
pub use windows::{
    backward_stopping_times, bad_window_search, bad_windows_by_start, bad_windows_capped,
    BadWindow,
};
