use std::time::Instant;

use polariton_core::constants::hz_to_angular;
use polariton_core::fitting::{
    add_multiplicative_noise, fit_anticrossing, ridge_seed, FitProblem, FitResult, FreeParameter, Loss, ParamId,
};
use polariton_core::hybrid::{anticrossing_map, default_grids, HybridSystemModel, SpectrumMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FREE: [ParamId; 5] = [
    ParamId::Omega(0),
    ParamId::FieldOffset(1),
    ParamId::Coupling(0, 1),
    ParamId::Gamma(0),
    ParamId::Gamma(1),
];

fn truth() -> HybridSystemModel {
    HybridSystemModel::two_mode(
        hz_to_angular(10.4e9),
        hz_to_angular(5e6),
        hz_to_angular(3e6),
        hz_to_angular(100e6),
        0.37,
        0.0,
        hz_to_angular(1e6),
    )
    .unwrap()
}

fn synthetic(model: &HybridSystemModel, points: usize) -> SpectrumMap {
    let (fields, freqs) = default_grids(model, (0, 1), points, 5.0).unwrap();
    anticrossing_map(model, &fields, &freqs, 0, 1).unwrap()
}

fn true_value(model: &HybridSystemModel, id: ParamId) -> f64 {
    match id {
        ParamId::Omega(j) => model.modes()[j].omega,
        ParamId::Gamma(j) => model.modes()[j].gamma,
        ParamId::FieldOffset(j) => model.modes()[j].field_offset,
        ParamId::Coupling(i, j) => model.coupling(i, j),
        _ => unreachable!(),
    }
}

/// Error of a parameter relative to its natural scale: the coupling for
/// frequencies and offsets, the value itself for rates.
fn relative_error(model: &HybridSystemModel, fit: &FitResult, id: ParamId) -> f64 {
    let t = true_value(model, id);
    let scale = match id {
        ParamId::Omega(_) | ParamId::FieldOffset(_) => model.coupling(0, 1),
        _ => t,
    };
    (fit.value(id).unwrap() - t).abs() / scale
}

fn seeded_problem(data: SpectrumMap, template: &HybridSystemModel, loss: Loss) -> FitProblem {
    let seed = ridge_seed(&data).unwrap();
    let free = vec![
        FreeParameter::new(ParamId::Omega(0), seed.omega_c),
        FreeParameter::new(ParamId::FieldOffset(1), seed.field_offset),
        FreeParameter::new(ParamId::Coupling(0, 1), seed.coupling),
        FreeParameter::new(ParamId::Gamma(0), seed.gamma_c),
        FreeParameter::new(ParamId::Gamma(1), seed.gamma_m),
    ];
    FitProblem::new(data, template.clone(), free, loss)
}

#[test]
fn noiseless_round_trip_from_ridge_seeds() {
    let model = truth();
    let data = synthetic(&model, 61);
    let start = Instant::now();
    let fit = fit_anticrossing(&seeded_problem(data, &model, Loss::Linear)).unwrap();
    assert!(start.elapsed().as_secs_f64() < 60.0);
    assert!(fit.residual_norm <= fit.initial_residual_norm);
    for id in FREE {
        let e = relative_error(&model, &fit, id);
        assert!(e < 1e-3, "{}: relative error {e:e}", id.name());
    }
}

#[test]
fn coupling_from_a_low_guess() {
    let model = truth();
    let data = synthetic(&model, 61);
    let g = model.coupling(0, 1);
    // peaks narrower than the frequency step leave the linear objective flat
    // between the guessed and true branches; the log objective does not
    let problem = FitProblem::new(
        data,
        model.clone(),
        vec![FreeParameter::new(ParamId::Coupling(0, 1), 0.8 * g)],
        Loss::Log,
    );
    let fit = fit_anticrossing(&problem).unwrap();
    let got = fit.value(ParamId::Coupling(0, 1)).unwrap();
    assert!(((got - g) / g).abs() < 1e-3, "{got:e} vs {g:e}");
}

#[test]
fn noisy_fits_are_calibrated() {
    let model = truth();
    let clean = synthetic(&model, 41);
    let seeds = 20u64;
    let mut values = vec![Vec::new(); FREE.len()];
    let mut errors = vec![Vec::new(); FREE.len()];
    for s in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let noisy = add_multiplicative_noise(&clean, 0.01, &mut rng).unwrap();
        let fit = fit_anticrossing(&seeded_problem(noisy, &model, Loss::Log)).unwrap();
        for (k, id) in FREE.into_iter().enumerate() {
            let e = relative_error(&model, &fit, id);
            assert!(e < 1e-2, "seed {s}, {}: relative error {e:e}", id.name());
            values[k].push(fit.value(id).unwrap());
            errors[k].push(fit.std_error(id).unwrap());
        }
    }
    for (k, id) in FREE.into_iter().enumerate() {
        let n = seeds as f64;
        let mean = values[k].iter().sum::<f64>() / n;
        let scatter = (values[k].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let reported = errors[k].iter().sum::<f64>() / n;
        let ratio = scatter / reported;
        assert!((0.5..=2.0).contains(&ratio), "{}: scatter {scatter:e}, reported {reported:e}", id.name());
    }
}

#[test]
fn log_loss_ignores_an_overall_scale() {
    let model = truth();
    let data = synthetic(&model, 41);
    let scaled = SpectrumMap::new(
        data.field_axis().to_vec(),
        data.frequency_axis().to_vec(),
        data.values().iter().map(|z| z * 3.7).collect(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noisy = add_multiplicative_noise(&data, 0.01, &mut rng).unwrap();
    let noisy_scaled = SpectrumMap::new(
        noisy.field_axis().to_vec(),
        noisy.frequency_axis().to_vec(),
        noisy.values().iter().map(|z| z * 3.7).collect(),
    )
    .unwrap();
    let with_gain = |d: SpectrumMap, loss| {
        let mut p = seeded_problem(d, &model, loss);
        p.free.push(FreeParameter::new(ParamId::Gain, 1.0));
        fit_anticrossing(&p).unwrap()
    };
    for loss in [Loss::Log, Loss::Linear] {
        let a = with_gain(noisy.clone(), loss);
        let b = with_gain(noisy_scaled.clone(), loss);
        for id in FREE {
            let (x, y) = (a.value(id).unwrap(), b.value(id).unwrap());
            let scale = model.coupling(0, 1);
            assert!((x - y).abs() / scale < 1e-6, "{loss:?} {}: {x:e} vs {y:e}", id.name());
        }
        let gain = b.value(ParamId::Gain).unwrap() / a.value(ParamId::Gain).unwrap();
        assert!((gain / 3.7 - 1.0).abs() < 1e-6);
    }
    // noiseless scaled data is fit exactly once the gain is free
    let exact = with_gain(scaled, Loss::Log);
    assert!((exact.value(ParamId::Gain).unwrap() / 3.7 - 1.0).abs() < 1e-6);
}

#[test]
fn residual_map_round_trips_through_csv() {
    let model = truth();
    let data = synthetic(&model, 21);
    let mut buf = Vec::new();
    data.write_magnitude_csv(&mut buf).unwrap();
    let back = SpectrumMap::read_csv(buf.as_slice(), None).unwrap();
    let fit = fit_anticrossing(&FitProblem::new(back, model.clone(), vec![], Loss::Linear)).unwrap();
    assert!(fit.residual_norm < 1e-9, "{}", fit.residual_norm);
}
