//! Photon–magnon hybrid systems as coupled damped oscillators.
//!
//! Conventions: the coupled-mode (rotating-wave) form is used, amplitudes
//! evolve as `da/dt = −i M a`, and every damping rate `γ` is the full
//! energy decay rate (FWHM), so an isolated mode has eigenvalue `ω − iγ/2`.

mod eigen;
mod model;
mod transmission;

pub use eigen::{
    dynamical_matrix, hybrid_eigenmodes, hybrid_modes, mode_pull_coefficient, rabi_splitting, track_branches,
    HybridMode, RabiSplitting,
};
pub use model::{
    kittel_frequency, HybridConfig, HybridSystemModel, ModeConfig, ModeKind, OscillatorMode, Port, PortConfig,
};
pub use transmission::{anticrossing_map, default_grids, s21, SpectrumMap};

pub(crate) use transmission::port_vectors;

