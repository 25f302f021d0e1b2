//! Frequency-domain solution of the modulated coupled-mode equations.
//!
//! Magnon amplitudes are written as `ã_m = y_m e^{iβ cos ω₂t}` with
//! `β = γ b₂ / ω₂`, which removes the time-dependent frequency from the
//! magnon equations. The phase factors then appear only on the couplings to
//! cavity modes and on the drive, where the Jacobi–Anger expansion
//! `e^{iβ cos θ} = Σ i^k J_k(β) e^{ikθ}` turns them into convolutions over
//! harmonic indices.

use num_complex::Complex64;

use super::{check_model, harmonic_lines, ModulationDrive, SimulationSettings, Spectrum};
use crate::constants::GYROMAGNETIC_RATIO;
use crate::hybrid::{dynamical_matrix, port_vectors, HybridSystemModel};
use crate::linalg::{self, CMatrix, CVector};
use crate::special::bessel_j_orders;
use crate::{Error, Result};

/// Edge-harmonic level (relative to the carrier) above which the
/// truncation is rejected.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;

fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Harmonics `−n_harmonics ..= n_harmonics` of the output at the ports
/// chosen by [`SimulationSettings::for_model`].
pub fn harmonic_balance_sidebands(model: &HybridSystemModel, drive: &ModulationDrive, n_harmonics: usize) -> Result<Spectrum> {
    let settings = SimulationSettings::for_model(model);
    harmonic_balance_with(model, drive, n_harmonics, settings.input_port, settings.output_port)
}

pub(crate) fn harmonic_balance_with(
    model: &HybridSystemModel,
    drive: &ModulationDrive,
    n_harmonics: usize,
    input_port: usize,
    output_port: usize,
) -> Result<Spectrum> {
    drive.validate()?;
    check_model(model)?;
    if n_harmonics < 3 {
        return Err(Error::InvalidParameter {
            name: "n_harmonics",
            reason: format!("need at least 3, got {n_harmonics}"),
        });
    }
    let (k_in, k_out) = port_vectors(model, input_port, output_port)?;
    let n = model.len();
    let h = n_harmonics as i64;
    let width = 2 * n_harmonics + 1;
    let source = drive.pump_power.sqrt();
    let beta = GYROMAGNETIC_RATIO * drive.b2 / drive.omega2;
    let bessel = bessel_j_orders(2 * n_harmonics, beta);
    let jn = |p: i64| -> f64 {
        let v = bessel[p.unsigned_abs() as usize];
        if p < 0 && p % 2 != 0 {
            -v
        } else {
            v
        }
    };
    // harmonic p of e^{+iβcos} and e^{−iβcos}
    let up = |p: i64| i_pow(p) * jn(p);
    let down = |p: i64| i_pow(-p) * jn(p);

    let m = dynamical_matrix(model);
    let magnon: Vec<bool> = model.modes().iter().map(|mode| mode.is_magnon()).collect();
    let idx = |j: usize, harmonic: i64| j * width + (harmonic + h) as usize;
    let size = n * width;
    let mut lhs = CMatrix::zeros(size, size);
    let mut rhs = CVector::zeros(size);
    let i = Complex64::i();
    for j in 0..n {
        for p in -h..=h {
            let row = idx(j, p);
            lhs[(row, row)] = i * (m[(j, j)] - drive.pump_omega - p as f64 * drive.omega2);
            for k in (0..n).filter(|&k| k != j) {
                let g = m[(j, k)];
                if g == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if magnon[j] == magnon[k] {
                    lhs[(row, idx(k, p))] += i * g;
                } else {
                    for q in -h..=h {
                        let c = if magnon[k] { up(p - q) } else { down(p - q) };
                        lhs[(row, idx(k, q))] += i * g * c;
                    }
                }
            }
            let drive_term = if magnon[j] { down(p) } else if p == 0 { Complex64::new(1.0, 0.0) } else { continue };
            rhs[row] = -k_in[j] * source * drive_term;
        }
    }
    let u = linalg::solve(&lhs, &rhs)?;

    let mut lines = Vec::with_capacity(width);
    for p in -h..=h {
        let mut c = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if k_out[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let amp = if magnon[j] {
                (-h..=h).map(|q| u[idx(j, q)] * up(p - q)).sum()
            } else {
                u[idx(j, p)]
            };
            c += k_out[j] * amp;
        }
        lines.push((p as i32, c));
    }
    let carrier = lines[n_harmonics].1.norm();
    let edge = lines[0].1.norm().max(lines[width - 1].1.norm()) / carrier;
    if !(edge <= TRUNCATION_TOLERANCE) {
        return Err(Error::TruncationNotConverged {
            edge,
            tolerance: TRUNCATION_TOLERANCE,
        });
    }
    Ok(harmonic_lines(drive.pump_omega, drive.omega2, lines.into_iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use crate::hybrid::{s21, HybridSystemModel, OscillatorMode, Port};
    use crate::special::bessel_j;
    use nalgebra::DMatrix;

    /// Single magnon mode probed through its own ports.
    fn bare_esr(gamma_m: f64, b0: f64) -> HybridSystemModel {
        let port = |name: &str| Port {
            name: name.into(),
            kappa: vec![gamma_m / 4.0],
        };
        HybridSystemModel::new(
            vec![OscillatorMode::magnon(gamma_m, 0.0)],
            DMatrix::zeros(1, 1),
            b0,
            vec![port("in"), port("out")],
        )
        .unwrap()
    }

    #[test]
    fn unmodulated_gives_carrier_only() {
        let model = bare_esr(hz_to_angular(1e6), 0.1);
        let w = GYROMAGNETIC_RATIO * 0.1;
        let d = ModulationDrive::new(0.0, hz_to_angular(1e5), w, 1e-3).unwrap();
        let s = harmonic_balance_sidebands(&model, &d, 5).unwrap();
        let expected = s21(&model, w, 0, 1).unwrap() * 1e-3f64.sqrt();
        assert!((s.carrier() - expected).norm() < 1e-15);
        assert!(s.lines.iter().filter(|l| l.harmonic != 0).all(|l| l.amplitude.norm() == 0.0));
    }

    #[test]
    fn resolved_sidebands_follow_bessel_ratios() {
        // modulation far faster than the linewidth: the driven amplitude stays
        // at the carrier and the output is a pure phase modulation
        let gamma_m = hz_to_angular(1e5);
        let model = bare_esr(gamma_m, 0.5);
        let omega2 = hz_to_angular(1e9);
        let b2 = 0.1 * omega2 / GYROMAGNETIC_RATIO;
        let w = GYROMAGNETIC_RATIO * 0.5;
        let d = ModulationDrive::new(b2, omega2, w, 1e-3).unwrap();
        let s = harmonic_balance_sidebands(&model, &d, 6).unwrap();
        let expected = bessel_j(1, 0.1) / bessel_j(0, 0.1);
        assert!((expected - 0.0500).abs() < 1e-4);
        for n in [-1, 1] {
            let r = s.relative_amplitude(n);
            assert!((r / expected - 1.0).abs() < 1e-3, "n={n}: {r} vs {expected}");
        }
        let r2 = s.relative_amplitude(2);
        assert!((r2 / (bessel_j(2, 0.1) / bessel_j(0, 0.1)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn adiabatic_sidebands_follow_the_lorentzian_slope() {
        // ω₂ ≪ γ_m on resonance: first sideband / carrier = γ b₂ / γ_m
        let gamma_m = hz_to_angular(1e6);
        let model = bare_esr(gamma_m, 0.1);
        let omega2 = hz_to_angular(1e3);
        let b2 = 1e-4 * gamma_m / GYROMAGNETIC_RATIO;
        let d = ModulationDrive::new(b2, omega2, GYROMAGNETIC_RATIO * 0.1, 1e-3).unwrap();
        let s = harmonic_balance_sidebands(&model, &d, 8).unwrap();
        let expected = GYROMAGNETIC_RATIO * b2 / gamma_m;
        for n in [-1, 1] {
            assert!((s.relative_amplitude(n) / expected - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn too_few_harmonics_rejected() {
        let gamma_m = hz_to_angular(1e6);
        let model = bare_esr(gamma_m, 0.1);
        let omega2 = hz_to_angular(1e3);
        let b2 = 20.0 * omega2 / GYROMAGNETIC_RATIO;
        let w = GYROMAGNETIC_RATIO * 0.1;
        let d = ModulationDrive::new(b2, omega2, w, 1e-3).unwrap();
        assert!(matches!(
            harmonic_balance_sidebands(&model, &d, 4),
            Err(Error::TruncationNotConverged { .. })
        ));
        assert!(harmonic_balance_sidebands(&model, &d, 2).is_err());
    }
}
