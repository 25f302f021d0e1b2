//! Physical constants in SI units.

use std::f64::consts::PI;

/// Electron gyromagnetic ratio, 2π × 28 GHz/T, in rad/s/T.
pub const GYROMAGNETIC_RATIO: f64 = 2.0 * PI * 28.0e9;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274e-24;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.3807e-23;
/// Reduced Planck constant, J·s.
pub const REDUCED_PLANCK: f64 = 1.0546e-34;
/// Vacuum permeability, T·m/A.
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062e-6;

/// The constant set used by every computation, echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysicalConstants {
    gyromagnetic_ratio: f64,
    bohr_magneton: f64,
    boltzmann: f64,
    reduced_planck: f64,
}

impl PhysicalConstants {
    pub const STANDARD: Self = Self {
        gyromagnetic_ratio: GYROMAGNETIC_RATIO,
        bohr_magneton: BOHR_MAGNETON,
        boltzmann: BOLTZMANN,
        reduced_planck: REDUCED_PLANCK,
    };

    pub fn new(
        gyromagnetic_ratio: f64,
        bohr_magneton: f64,
        boltzmann: f64,
        reduced_planck: f64,
    ) -> crate::Result<Self> {
        crate::error::positive("gyromagnetic_ratio", gyromagnetic_ratio)?;
        crate::error::positive("bohr_magneton", bohr_magneton)?;
        crate::error::positive("boltzmann", boltzmann)?;
        crate::error::positive("reduced_planck", reduced_planck)?;
        Ok(Self {
            gyromagnetic_ratio,
            bohr_magneton,
            boltzmann,
            reduced_planck,
        })
    }

    pub fn gyromagnetic_ratio(&self) -> f64 {
        self.gyromagnetic_ratio
    }
    pub fn bohr_magneton(&self) -> f64 {
        self.bohr_magneton
    }
    pub fn boltzmann(&self) -> f64 {
        self.boltzmann
    }
    pub fn reduced_planck(&self) -> f64 {
        self.reduced_planck
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Hz → rad/s.
#[inline]
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

/// rad/s → Hz.
#[inline]
pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
