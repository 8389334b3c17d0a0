//! Desk-scale laboratory for moving averages along orbits of
//! measure-preserving systems.
//!
//! A moving average of an observable `f` along the orbit of `x` is
//!
//! ```text
//! M(v, L) f(x) = (1/L) * sum_{i = v+1}^{v+L} f(T^i x)
//! ```
//!
//! and a window scheme is a sequence of pairs `(v_n, L_n)` with `L_n`
//! strictly increasing. The crate is organised by capability:
//!
//! - [`systems`]: cyclic, Bernoulli-shift and rotation models with seeded,
//!   reproducible orbit evaluation.
//! - [`observables`]: step, cylinder and encoded-continuous observables,
//!   conditional expectations, the heavy-peak `F_p` family and coboundaries.
//! - [`averaging`]: window schemes, moving/telescoped/Cesàro averages and
//!   the exact norm identities on cycles.
//! - [`cone`]: cross-sections of the union of 90° cones, ratio profiles,
//!   offset constructions that break the cone bound and greedy good
//!   subsequences.
//! - [`convergence`]: Monte Carlo and exact complete-convergence scans,
//!   the IID laboratory, Hoeffding bounds and the Bernoulli decomposition.
//! - [`adversary`]: greedy covering by translates, Vitali selection, bad
//!   window search and the quantized bad-scheme builder.
//! - [`runner`]: config-driven experiments with atomic CSV/JSON output.
//!
//! Runnable walkthroughs live in `examples/`, one per capability.

pub mod adversary;
pub mod averaging;
pub mod cone;
pub mod convergence;
pub mod error;
pub mod observables;
pub mod rng;
pub mod runner;
pub mod systems;

pub use error::{Error, Result};
