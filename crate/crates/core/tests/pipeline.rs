use blowuplab_core::params::ModelParams;
use blowuplab_core::rates::*;
use blowuplab_core::Error;

#[test]
fn power_law_at_d8() {
    let p = predict(&ModelParams::new(8.0, 1), Some(1)).unwrap();
    assert_eq!(p.rate.kind, RateKind::Power);
    assert!((p.rate.exponent - 0.6306019).abs() < 1e-6);
    assert_eq!(p.rate.prefactor, p.profile.cs);
}

#[test]
fn logarithmic_law_at_d7() {
    let p = predict(&ModelParams::new(7.0, 1), None).unwrap();
    assert_eq!(p.n, 1);
    assert_eq!(p.rate.kind, RateKind::Logarithmic);
    assert!((p.rate.exponent - 1.0).abs() < 1e-14);
    assert!(p.rate.prefactor > 0.0);
    // frozen from the scipy prototype with the corrected small-v evaluation
    assert!((p.rate.prefactor - 4.490788).abs() < 1e-5, "{}", p.rate.prefactor);
    let slope = p.rate.gradient_slope.unwrap();
    assert!((slope - 0.2227).abs() < 1e-4, "{slope}");
    let json = serde_json::to_value(&p.rate).unwrap();
    for key in ["kind", "N", "exponent", "prefactor", "constants"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    for key in ["h", "Cs", "cN", "DN", "delta", "gamma", "omega"] {
        assert!(json["constants"].get(key).is_some(), "{key}");
    }
}

#[test]
fn negative_mode_rejected() {
    assert!(matches!(predict(&ModelParams::new(7.0, 1), Some(0)), Err(Error::NegativeEigenvalue { .. })));
}

#[test]
fn neutral_trajectory_from_pipeline_constants() {
    let p = predict(&ModelParams::new(12.0, 2), None).unwrap();
    assert_eq!(p.n, 2);
    let ec = p.epsilon_constants().unwrap();
    let t = solve_epsilon(&ec, 0.05, DEFAULT_S_MAX).unwrap();
    assert!(t.closed_form_error(5.0, 50.0) < 1e-6);
    let fit = t.fit_neutral().unwrap();
    assert!((fit.c_fit / ec.c_neutral() - 1.0).abs() < 1e-6);
}

#[test]
fn higher_modes_become_negligible() {
    let p = predict(&ModelParams::new(7.0, 1), None).unwrap();
    let ec = p.epsilon_constants().unwrap();
    let fc = p.flow_constants().unwrap();
    let t = solve_epsilon(&ec, 0.05, DEFAULT_S_MAX).unwrap();
    let fl = coefficient_flow(&fc, &t, &[0.5, -0.5], &[2, 3]).unwrap();
    for i in 0..2 {
        let r = fl.ratio(i);
        let tail: Vec<f64> = r.iter().zip(&fl.s).filter(|(_, s)| **s >= 10.0).map(|(r, _)| *r).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0]), "mode {}", fl.n[i]);
        assert!(*tail.last().unwrap() < 0.8 * tail[0]);
    }
}

#[test]
fn suppressed_lower_modes_become_negligible() {
    let p = predict(&ModelParams::new(12.0, 2), None).unwrap();
    let ec = p.epsilon_constants().unwrap();
    let fc = p.flow_constants().unwrap();
    let t = solve_epsilon(&ec, 0.05, DEFAULT_S_MAX).unwrap();
    let a0: Vec<f64> = (0..2).map(|n| suppression_initial_value(&t, fc.lambdas[n], fc.d[n])).collect();
    let fl = coefficient_flow(&fc, &t, &a0, &[0, 1]).unwrap();
    for i in 0..2 {
        let r = fl.ratio(i);
        let at = |s: f64| r[fl.s.iter().position(|x| *x >= s).unwrap()];
        assert!(at(50.0) < at(20.0) && at(20.0) < at(5.0), "mode {i}");
    }
    // generic initial data keeps the unstable mode dominant
    let fl = coefficient_flow(&fc, &t, &[a0[0] + 1e-6], &[0]).unwrap();
    assert!(fl.ratio(0).last().unwrap() > &1.0);
}

#[test]
fn ansatz_origin_and_jump_decay() {
    let p = predict(&ModelParams::new(8.0, 1), Some(1)).unwrap();
    let y: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
    let jumps: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| {
            let a = assemble_ansatz(&p.profile, &p.basis, 1, e, &y).unwrap();
            assert_eq!(a.f[0], 0.0);
            a.jump
        })
        .collect();
    assert!(jumps[0] > jumps[1] && jumps[1] > jumps[2], "{jumps:?}");
}
