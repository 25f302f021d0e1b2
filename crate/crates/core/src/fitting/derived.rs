//! Physical quantities inferred from fitted rates.

use crate::constants::{GYROMAGNETIC_RATIO, REDUCED_PLANCK, VACUUM_PERMEABILITY};
use crate::error::{non_negative, positive};
use crate::{Error, Result};

/// Collective coupling of `N` spins to a cavity mode:
/// `g = COUPLING_PREFACTOR · γ · √(μ₀ ħ ω_c N η / V)`.
///
/// The single-spin vacuum coupling is `g₀ = (γ/2) B_vac` with the vacuum
/// field `B_vac = √(μ₀ħω_c / V)` (half the zero-point energy stored in the
/// magnetic field), and N spins enhance it by `√N`.
pub const COUPLING_PREFACTOR: f64 = 0.5;

fn check_fill(fill_factor: f64) -> Result<()> {
    if !(fill_factor > 0.0 && fill_factor <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "fill_factor",
            reason: format!("must lie in (0, 1], got {fill_factor}"),
        });
    }
    Ok(())
}

/// Coupling rate (rad/s) for `spins` spins.
pub fn coupling_from_spins(spins: f64, omega_c: f64, mode_volume: f64, fill_factor: f64) -> Result<f64> {
    positive("spins", spins)?;
    positive("omega_c", omega_c)?;
    positive("mode_volume", mode_volume)?;
    check_fill(fill_factor)?;
    Ok(COUPLING_PREFACTOR
        * GYROMAGNETIC_RATIO
        * (VACUUM_PERMEABILITY * REDUCED_PLANCK * omega_c * spins * fill_factor / mode_volume).sqrt())
}

/// Number of spins implied by a coupling rate `coupling` (rad/s).
pub fn spins_from_coupling(coupling: f64, omega_c: f64, mode_volume: f64, fill_factor: f64) -> Result<f64> {
    positive("coupling", coupling)?;
    positive("omega_c", omega_c)?;
    positive("mode_volume", mode_volume)?;
    check_fill(fill_factor)?;
    let single = coupling / (COUPLING_PREFACTOR * GYROMAGNETIC_RATIO);
    Ok(single * single * mode_volume / (VACUUM_PERMEABILITY * REDUCED_PLANCK * omega_c * fill_factor))
}

/// Relaxation time `1 / (w γ_c + (1 − w) γ_m)` of a hybrid mode whose photon
/// weight is `photon_weight` (1/2 at full hybridization, giving `2/(γ_c + γ_m)`).
pub fn relaxation_time_from_fit(gamma_c: f64, gamma_m: f64, photon_weight: f64) -> Result<f64> {
    non_negative("gamma_c", gamma_c)?;
    non_negative("gamma_m", gamma_m)?;
    if !(0.0..=1.0).contains(&photon_weight) {
        return Err(Error::InvalidParameter {
            name: "photon_weight",
            reason: format!("must lie in [0, 1], got {photon_weight}"),
        });
    }
    let rate = photon_weight * gamma_c + (1.0 - photon_weight) * gamma_m;
    positive("linewidth", rate)?;
    Ok(1.0 / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use proptest::prelude::*;

    #[test]
    fn spin_count_examples() {
        let w = hz_to_angular(10.4e9);
        let n = spins_from_coupling(hz_to_angular(100e6), w, 1e-6, 0.5).unwrap();
        let n2 = spins_from_coupling(hz_to_angular(200e6), w, 1e-6, 0.5).unwrap();
        assert!((n2 / n - 4.0).abs() < 1e-12);
        // 10^21 spins in a centimetre-scale cavity mode couple in the 100 MHz – 1 GHz decade
        let g = coupling_from_spins(1e21, w, 5.56e-5, 1.0).unwrap();
        let ghz = g / hz_to_angular(1.0);
        assert!((1e8..1e9).contains(&ghz), "{ghz:e} Hz");
        assert!(spins_from_coupling(1.0, w, 1e-6, 1.5).is_err());
        assert!(spins_from_coupling(1.0, w, 1e-6, 0.0).is_err());
    }

    #[test]
    fn relaxation_time_examples() {
        let g = hz_to_angular(0.947e6);
        let ts = relaxation_time_from_fit(g, g, 0.5).unwrap();
        assert!((ts / 168e-9 - 1.0).abs() < 1e-3, "{ts:e}");
        assert_eq!(relaxation_time_from_fit(2.0, 2.0, 0.5).unwrap(), 0.5);
        assert_eq!(relaxation_time_from_fit(4.0, 0.0, 0.5).unwrap(), 0.5);
        assert!(relaxation_time_from_fit(0.0, 0.0, 0.5).is_err());
        assert!(relaxation_time_from_fit(1.0, 1.0, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn spin_count_round_trip(n in 1e15f64..1e23, f in 1e9f64..2e10, v in 1e-8f64..1e-3, eta in 0.01f64..1.0) {
            let w = hz_to_angular(f);
            let g = coupling_from_spins(n, w, v, eta).unwrap();
            let back = spins_from_coupling(g, w, v, eta).unwrap();
            prop_assert!(((back - n) / n).abs() < 1e-12);
        }
    }
}
