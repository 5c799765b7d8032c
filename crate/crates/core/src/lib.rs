//! Periodic orbits with delay: a spectral collocation engine that finds
//! non-degenerate 1-periodic orbits of time-dependent vector fields,
//! certifies them through Floquet theory, and continues them in the delay
//! parameter into families of periodic solutions of
//! `dx/dt (t) = X_t(x(t - tau))`, cross-checked by an independent
//! method-of-steps integrator.

pub mod config;
pub mod continuation;
pub mod dde;
pub mod error;
pub mod field;
pub mod floquet;
pub mod fourier;
pub mod io;
pub mod oracle;
pub mod par;
pub mod problems;
pub mod properties;
pub mod rk4;
pub mod section;
pub mod solve;

pub use error::{Error, Result};
pub use fourier::PeriodicMap;
