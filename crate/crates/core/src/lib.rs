//! Numerical workbench for photon-magnon hybrid systems.
//!
//! The crate models a microwave cavity strongly coupled to one or more
//! magnon (Kittel) modes as a set of damped coupled oscillators and builds
//! the two spin-magnetometer schemes on top of it:
//!
//! * [`hybrid`]: dynamical matrix, eigenmodes, transmission and anticrossing maps.
//! * [`bloch`]: Bloch equation integration and the driven steady state.
//! * [`sidebands`]: frequency-modulated hybrid systems in time and frequency domain.
//! * [`sensitivity`]: noise densities, transverse/longitudinal sensitivities, radiometer limits.
//! * [`fitting`]: least-squares extraction of couplings and linewidths from maps.
//!
//! Angular frequencies are in rad/s internally; configuration files use Hz.

pub mod bloch;
pub mod constants;
mod error;
pub mod fitting;
pub mod hybrid;
pub mod linalg;
pub mod ode;
pub mod sensitivity;
pub mod sidebands;
pub mod special;

pub use error::{Error, Result};

pub use num_complex::Complex64;
