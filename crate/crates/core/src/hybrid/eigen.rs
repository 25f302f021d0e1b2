use num_complex::Complex64;

use super::model::{HybridSystemModel, ModeKind};
use crate::constants::GYROMAGNETIC_RATIO;
use crate::linalg::{self, CMatrix, CVector};
use crate::{Error, Result};

/// Complex-symmetric coupled-mode matrix: `ω_j − iγ_j/2` on the diagonal,
/// `g_jk` off the diagonal (rad/s).
pub fn dynamical_matrix(model: &HybridSystemModel) -> CMatrix {
    let n = model.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let m = &model.modes()[i];
            Complex64::new(m.omega, -0.5 * m.gamma)
        } else {
            Complex64::new(model.coupling(i, j), 0.0)
        }
    })
}

/// One normal mode of the hybrid system.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridMode {
    /// `ω − iΓ/2` in rad/s.
    pub frequency: Complex64,
    /// Unit-norm eigenvector in the bare-mode basis.
    pub vector: CVector,
}

impl HybridMode {
    pub fn omega(&self) -> f64 {
        self.frequency.re
    }

    /// Full energy linewidth `−2 Im λ`.
    pub fn linewidth(&self) -> f64 {
        -2.0 * self.frequency.im
    }

    /// Weight of bare mode `j` in this hybrid mode.
    pub fn weight(&self, j: usize) -> f64 {
        self.vector[j].norm_sqr()
    }
}

/// Complex eigenfrequencies sorted by real part.
pub fn hybrid_eigenmodes(model: &HybridSystemModel) -> Result<Vec<Complex64>> {
    let (m, shift) = centered_matrix(model);
    let mut ev: Vec<Complex64> = linalg::eigenvalues(&m)?.into_iter().map(|z| z + shift).collect();
    sort_by_real(&mut ev);
    Ok(ev)
}

/// Dynamical matrix with the mean bare frequency removed from the diagonal,
/// so eigenvalue round-off scales with couplings rather than with ω.
fn centered_matrix(model: &HybridSystemModel) -> (CMatrix, f64) {
    let mut m = dynamical_matrix(model);
    let n = m.nrows();
    let shift = (0..n).map(|i| m[(i, i)].re).sum::<f64>() / n as f64;
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    (m, shift)
}

/// Eigenfrequencies and eigenvectors sorted by real part.
pub fn hybrid_modes(model: &HybridSystemModel) -> Result<Vec<HybridMode>> {
    let (m, shift) = centered_matrix(model);
    let mut ev = linalg::eigenvalues(&m)?;
    sort_by_real(&mut ev);
    ev.into_iter()
        .map(|lambda| {
            Ok(HybridMode {
                frequency: lambda + shift,
                vector: linalg::eigenvector(&m, lambda)?,
            })
        })
        .collect()
}

fn sort_by_real(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Scale (rad/s) of the coupling/damping structure, used for step sizes.
fn interaction_scale(model: &HybridSystemModel) -> f64 {
    let gmax = model.couplings().iter().cloned().fold(0.0, f64::max);
    let gsum: f64 = model.modes().iter().map(|m| m.gamma).sum();
    let wmax = model.modes().iter().map(|m| m.omega.abs()).fold(0.0, f64::max);
    gmax.max(0.5 * gsum).max(1e-9 * wmax).max(f64::MIN_POSITIVE)
}

fn default_pair(model: &HybridSystemModel) -> Result<(usize, usize)> {
    let cav = model.indices_of(ModeKind::Cavity);
    let mag = model.indices_of(ModeKind::Magnon);
    if cav.len() == 1 && mag.len() == 1 {
        Ok((cav[0], mag[0]))
    } else {
        Err(Error::InvalidParameter {
            name: "pair",
            reason: format!(
                "model has {} cavity and {} magnon modes; select a mode pair explicitly",
                cav.len(),
                mag.len()
            ),
        })
    }
}

/// Real-part separation of the two hybrid modes carrying most weight on `pair`.
fn pair_separation(model: &HybridSystemModel, pair: (usize, usize)) -> Result<f64> {
    if model.len() == 2 {
        let ev = hybrid_eigenmodes(model)?;
        return Ok((ev[1].re - ev[0].re).abs());
    }
    let modes = hybrid_modes(model)?;
    let mut ranked: Vec<(f64, f64)> = modes
        .iter()
        .map(|h| (h.weight(pair.0) + h.weight(pair.1), h.omega()))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok((ranked[0].1 - ranked[1].1).abs())
}

/// Minimum over bias field of the separation between the two hybrid
/// branches formed by `pair` = (cavity, magnon). With `None` the model must
/// contain exactly one cavity and one magnon mode.
pub fn rabi_splitting(model: &HybridSystemModel, pair: Option<(usize, usize)>) -> Result<RabiSplitting> {
    let pair = match pair {
        Some(p) => p,
        None => default_pair(model)?,
    };
    let (c, m) = pair;
    let center = model.crossing_field(c, m)?;
    let scale = 20.0 * (model.coupling(c, m) + model.modes()[c].gamma + model.modes()[m].gamma);
    let half_span = scale.max(1e-6 * model.modes()[c].omega) / GYROMAGNETIC_RATIO;
    let lo = (center - half_span).max(0.0);
    let hi = center + half_span;

    let sep = |b: f64| -> Result<f64> { pair_separation(&model.with_bias_field(b)?, pair) };

    const SCAN: usize = 201;
    let fields: Vec<f64> = (0..SCAN).map(|k| lo + (hi - lo) * k as f64 / (SCAN - 1) as f64).collect();
    let values = fields.iter().map(|&b| sep(b)).collect::<Result<Vec<_>>>()?;
    let (kbest, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan");
    if kbest == 0 || kbest == SCAN - 1 {
        return Err(Error::MinimumOnBoundary { field: fields[kbest] });
    }

    // golden-section refinement inside the bracketing cells
    let (mut a, mut b) = (fields[kbest - 1], fields[kbest + 1]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = sep(x1)?;
    let mut f2 = sep(x2)?;
    for _ in 0..200 {
        if (b - a) <= 1e-15 * center.abs().max(1e-12) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sep(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sep(x2)?;
        }
    }
    let (field, splitting) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let splitting = splitting.min(values[kbest]);
    Ok(RabiSplitting { splitting, field })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiSplitting {
    /// Minimum branch separation (rad/s).
    pub splitting: f64,
    /// Bias field (T) at which the minimum occurs.
    pub field: f64,
}

/// `r = (∂ Re ω_branch / ∂B₀) / γ` at `bias_field`, where `branch` indexes
/// the modes sorted by frequency at that field. The branch is followed to the
/// neighbouring fields by eigenvector overlap.
pub fn mode_pull_coefficient(model: &HybridSystemModel, branch: usize, bias_field: f64) -> Result<f64> {
    let here = model.with_bias_field(bias_field)?;
    let modes = hybrid_modes(&here)?;
    let reference = modes
        .get(branch)
        .ok_or_else(|| Error::InvalidParameter {
            name: "branch",
            reason: format!("model has {} branches, asked for {branch}", modes.len()),
        })?
        .vector
        .clone();

    let h = 1e-2 * interaction_scale(&here) / GYROMAGNETIC_RATIO;
    if bias_field - h < 0.0 {
        return Err(Error::InvalidParameter {
            name: "bias_field",
            reason: "too close to zero for a central difference".into(),
        });
    }
    let follow = |b: f64| -> Result<f64> {
        let modes = hybrid_modes(&model.with_bias_field(b)?)?;
        let mut overlaps: Vec<(f64, f64)> = modes
            .iter()
            .map(|m| (linalg::overlap(&reference, &m.vector), m.omega()))
            .collect();
        overlaps.sort_by(|a, b| b.0.total_cmp(&a.0));
        let best = overlaps[0];
        let second = overlaps.get(1).map(|o| o.0).unwrap_or(0.0);
        if best.0 < 0.9 || best.0 - second < 0.5 {
            return Err(Error::BranchTracking(format!(
                "ambiguous continuation at B0 = {b} T (overlaps {:.3} vs {:.3})",
                best.0, second
            )));
        }
        Ok(best.1)
    };

    let coarse = (follow(bias_field + h)? - follow(bias_field - h)?) / (2.0 * h);
    let fine = (follow(bias_field + 0.5 * h)? - follow(bias_field - 0.5 * h)?) / h;
    let tol = 1e-2 * GYROMAGNETIC_RATIO;
    if (coarse - fine).abs() > tol {
        return Err(Error::BranchTracking(format!(
            "non-smooth branch near B0 = {bias_field} T: slopes {coarse:e} and {fine:e}"
        )));
    }
    // Richardson extrapolation of the two central differences
    let r = (4.0 * fine - coarse) / 3.0 / GYROMAGNETIC_RATIO;
    const CLIP: f64 = 1e-6;
    if r < -CLIP || r > 1.0 + CLIP {
        return Err(Error::BranchTracking(format!("pull coefficient {r} outside [0, 1]")));
    }
    Ok(r.clamp(0.0, 1.0))
}

/// Follow every branch across a field sweep by maximum eigenvector overlap
/// between adjacent field points. Returns `result[branch][field_index]`.
pub fn track_branches(model: &HybridSystemModel, fields: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let n = model.len();
    let mut out = vec![Vec::with_capacity(fields.len()); n];
    let mut previous: Option<Vec<CVector>> = None;
    for &b in fields {
        let modes = hybrid_modes(&model.with_bias_field(b)?)?;
        let assigned: Vec<usize> = match &previous {
            None => (0..n).collect(),
            Some(prev) => assign_by_overlap(prev, &modes),
        };
        let mut vectors = Vec::with_capacity(n);
        for (branch, &k) in assigned.iter().enumerate() {
            out[branch].push(modes[k].frequency);
            vectors.push(modes[k].vector.clone());
        }
        previous = Some(vectors);
    }
    Ok(out)
}

/// Greedy maximum-overlap matching of previous branch vectors to new modes.
fn assign_by_overlap(prev: &[CVector], modes: &[HybridMode]) -> Vec<usize> {
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in prev.iter().enumerate() {
        for (k, m) in modes.iter().enumerate() {
            pairs.push((linalg::overlap(p, &m.vector), i, k));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut assigned = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, i, k) in pairs {
        if assigned[i] == usize::MAX && !taken[k] {
            assigned[i] = k;
            taken[k] = true;
        }
    }
    assigned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::model::OscillatorMode;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    fn lossless(detuning: f64, g: f64) -> HybridSystemModel {
        HybridSystemModel::two_mode(TWO_PI * 10.7e9, 0.0, 0.0, g, 0.38, detuning, 0.0).unwrap()
    }

    #[test]
    fn single_mode_matrix() {
        let m = HybridSystemModel::new(vec![OscillatorMode::cavity(5.0, 0.4)], DMatrix::zeros(1, 1), 0.0, vec![]).unwrap();
        let d = dynamical_matrix(&m);
        assert_eq!(d[(0, 0)], Complex64::new(5.0, -0.2));
    }

    #[test]
    fn uncoupled_matrix_is_diagonal() {
        let m = HybridSystemModel::two_mode(1e10, 1e6, 2e6, 0.0, 0.3, 1e7, 0.0).unwrap();
        let d = dynamical_matrix(&m);
        assert_eq!(d[(0, 1)], Complex64::new(0.0, 0.0));
        let ev = hybrid_eigenmodes(&m).unwrap();
        assert!((ev[0] - Complex64::new(1e10, -0.5e6)).norm() < 1e-3);
        assert!((ev[1] - Complex64::new(1e10 + 1e7, -1e6)).norm() < 1e-3);
    }

    #[test]
    fn degenerate_lossless_split_by_2g() {
        let g = TWO_PI * 100e6;
        let ev = hybrid_eigenmodes(&lossless(0.0, g)).unwrap();
        assert!((ev[0].re / (TWO_PI * 10.6e9) - 1.0).abs() < 1e-12);
        assert!((ev[1].re / (TWO_PI * 10.8e9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_equal_damping() {
        let (w, g, gam) = (TWO_PI * 10.7e9, TWO_PI * 50e6, TWO_PI * 2e6);
        let m = HybridSystemModel::two_mode(w, gam, gam, g, 0.38, 0.0, 0.0).unwrap();
        let ev = hybrid_eigenmodes(&m).unwrap();
        assert!((ev[0] - Complex64::new(w - g, -gam / 2.0)).norm() < 1e-9 * w);
        assert!((ev[1] - Complex64::new(w + g, -gam / 2.0)).norm() < 1e-9 * w);
    }

    #[test]
    fn detuned_lossless_closed_form() {
        let (g, d) = (TWO_PI * 80e6, TWO_PI * 130e6);
        let wc = TWO_PI * 10.7e9;
        let ev = hybrid_eigenmodes(&lossless(d, g)).unwrap();
        let root = (d * d / 4.0 + g * g).sqrt();
        assert!((ev[0].re - (wc + d / 2.0 - root)).abs() < 1e-12 * wc);
        assert!((ev[1].re - (wc + d / 2.0 + root)).abs() < 1e-12 * wc);
    }

    #[test]
    fn rabi_splitting_examples() {
        let g = TWO_PI * 100e6;
        let s = rabi_splitting(&lossless(0.3 * g, g), None).unwrap();
        assert!((s.splitting / (2.0 * g) - 1.0).abs() < 1e-9, "{}", s.splitting / (2.0 * g));
        assert!((s.field - 0.38 + 0.3 * g / GYROMAGNETIC_RATIO).abs() < 1e-9);

        let zero = rabi_splitting(&lossless(1e7, 0.0), None).unwrap();
        assert!(zero.splitting < 1e-6 * TWO_PI * 10.7e9 * 1e-3, "{}", zero.splitting);
    }

    #[test]
    fn rabi_splitting_needs_pair_for_multimode() {
        let modes = vec![
            OscillatorMode::cavity(1e10, 1e6),
            OscillatorMode::magnon(1e6, 0.0),
            OscillatorMode::magnon(1e6, 1e8),
        ];
        let c = DMatrix::from_row_slice(3, 3, &[0.0, 1e7, 1e7, 1e7, 0.0, 0.0, 1e7, 0.0, 0.0]);
        let m = HybridSystemModel::new(modes, c, 0.05, vec![]).unwrap();
        assert!(rabi_splitting(&m, None).is_err());
        assert!(rabi_splitting(&m, Some((0, 1))).is_ok());
    }

    #[test]
    fn pull_coefficient_half_at_degeneracy() {
        let g = TWO_PI * 100e6;
        let m = lossless(0.0, g);
        for branch in 0..2 {
            let r = mode_pull_coefficient(&m, branch, 0.38).unwrap();
            assert!((r - 0.5).abs() < 1e-6, "branch {branch}: {r}");
        }
    }

    #[test]
    fn pull_coefficient_detuned_upper_branch() {
        let g = TWO_PI * 100e6;
        let r = mode_pull_coefficient(&lossless(10.0 * g, g), 1, 0.38).unwrap();
        let expected = 0.5 * (1.0 + 10.0 / 104f64.sqrt());
        assert!((r - expected).abs() < 1e-6, "{r} vs {expected}");
    }

    #[test]
    fn pull_coefficient_bare_magnon() {
        let m = lossless(TWO_PI * 50e6, TWO_PI * 1e3);
        // magnon sits above the cavity
        let r = mode_pull_coefficient(&m, 1, 0.38).unwrap();
        assert!((r - 1.0).abs() < 1e-6, "{r}");
        let r = mode_pull_coefficient(&m, 0, 0.38).unwrap();
        assert!(r.abs() < 1e-6, "{r}");
    }

    #[test]
    fn branch_out_of_range() {
        assert!(mode_pull_coefficient(&lossless(0.0, 1e8), 2, 0.38).is_err());
    }

    #[test]
    fn tracking_follows_bare_modes_through_crossing() {
        // g = 0: sorting swaps at the crossing, overlap tracking must not
        let m = HybridSystemModel::two_mode(TWO_PI * 10.7e9, 1e6, 1e6, 0.0, 0.38, 0.0, 0.0).unwrap();
        let fields: Vec<f64> = (0..41).map(|k| 0.37 + 0.02 * k as f64 / 40.0 + 1e-7).collect();
        let branches = track_branches(&m, &fields).unwrap();
        let cav = &branches[0];
        let first = cav[0].re;
        let last = cav[cav.len() - 1].re;
        let (a, b) = if (last - first).abs() < 1.0 { (0, 1) } else { (1, 0) };
        assert!((branches[a][40].re - branches[a][0].re).abs() < 1.0);
        assert!(branches[b][40].re - branches[b][0].re > 0.9 * GYROMAGNETIC_RATIO * 0.02);
    }

    proptest! {
        #[test]
        fn trace_is_conserved(
            n in 1usize..6,
            seed in prop::collection::vec((1e9f64..2e10, 0.0f64..1e7, 0.0f64..3e8), 6),
            gs in prop::collection::vec(0.0f64..3e8, 36),
        ) {
            let modes: Vec<_> = (0..n).map(|i| OscillatorMode::cavity(seed[i].0, seed[i].1)).collect();
            let c = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { gs[i.min(j) * 6 + i.max(j)] });
            let m = HybridSystemModel::new(modes, c, 0.0, vec![]).unwrap();
            let ev = hybrid_eigenmodes(&m).unwrap();
            let d = dynamical_matrix(&m);
            let tr: Complex64 = (0..n).map(|i| d[(i, i)]).sum();
            let sum: Complex64 = ev.iter().sum();
            prop_assert!((tr - sum).norm() <= 1e-12 * tr.norm());
        }

        #[test]
        fn anticrossing_is_symmetric(d in -5e8f64..5e8, g in 1e6f64..3e8, gam in 0.0f64..1e7) {
            let wc = TWO_PI * 10.7e9;
            let m = HybridSystemModel::two_mode(wc, gam, gam, g, 0.38, d, 0.0).unwrap();
            let ev = hybrid_eigenmodes(&m).unwrap();
            let mid = wc + d / 2.0;
            prop_assert!(((ev[0].re + ev[1].re) / 2.0 - mid).abs() <= 1e-10 * mid);
        }

        #[test]
        fn pull_coefficients_sum_to_one(d in -1e9f64..1e9, g in 1e7f64..5e8) {
            let m = lossless(d, g);
            let r0 = mode_pull_coefficient(&m, 0, 0.38).unwrap();
            let r1 = mode_pull_coefficient(&m, 1, 0.38).unwrap();
            prop_assert!((r0 + r1 - 1.0).abs() < 1e-6, "{} + {}", r0, r1);
        }
    }
}
