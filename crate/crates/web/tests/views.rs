use polariton_web::{compute_curve, compute_map, compute_sidebands};

#[test]
fn map_splits_by_twice_the_coupling() {
    let view = compute_map(100.0, 5.0, 3.0, 101).unwrap();
    let (fields, freqs) = (view.fields_t(), view.frequencies_hz());
    assert_eq!(view.magnitude_db().len(), fields.len() * freqs.len());

    // the middle column sits on the crossing
    let mid = fields.len() / 2;
    let col = &view.magnitude_db()[mid * freqs.len()..(mid + 1) * freqs.len()];
    let mut peaks: Vec<usize> = (1..col.len() - 1).filter(|&k| col[k] > col[k - 1] && col[k] >= col[k + 1]).collect();
    peaks.sort_by(|&a, &b| col[b].total_cmp(&col[a]));
    let (a, b) = (freqs[peaks[0]], freqs[peaks[1]]);
    let step = freqs[1] - freqs[0];
    assert!(((a - b).abs() - 200e6).abs() <= 2.0 * step, "split {}", (a - b).abs());
}

#[test]
fn sidebands_sit_at_the_splitting() {
    let view = compute_sidebands(10.0, 2.0, 0.0, 8).unwrap();
    assert_eq!(view.offsets_hz().len(), 17);
    assert!((view.modulation_hz() / 20e6 - 1.0).abs() < 1e-3);
    let carrier = view.offsets_hz().iter().position(|&f| f == 0.0).unwrap();
    assert!(view.power_dbc()[carrier].abs() < 1e-12);
    let lower = view.power_dbc()[carrier - 1];
    assert!(lower < 0.0 && lower > view.power_dbc()[carrier - 2]);

    let fixed = compute_sidebands(10.0, 2.0, 1.0, 8).unwrap();
    assert!((fixed.modulation_hz() - 1e6).abs() < 1e-6);
    assert!(compute_sidebands(10.0, 2.0, 5e3, 8).is_err());
}

#[test]
fn sensitivity_curves_pass_through_the_reference_points() {
    let tsm = compute_curve("transverse", 1.0, 168.0, 1e19, 1e23, 5).unwrap();
    assert_eq!(tsm.x().len(), 5);
    assert!((tsm.x()[2] / 1e21 - 1.0).abs() < 1e-12);
    assert!((tsm.sensitivity()[2] / 0.878e-18 - 1.0).abs() < 1e-3);
    assert!(tsm.sensitivity().windows(2).all(|w| w[1] < w[0]));

    let lsm = compute_curve("longitudinal", 300.0, 1e4, 1e-3, 10.0, 5).unwrap();
    assert!((lsm.sensitivity()[2] / 10.4e-15 - 1.0).abs() < 0.01);

    assert!(compute_curve("sideways", 1.0, 1.0, 1.0, 2.0, 3).is_err());
    assert!(compute_curve("transverse", 1.0, 168.0, -1.0, 2.0, 3).is_err());
}
