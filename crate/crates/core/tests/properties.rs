use nonlocality_core::lp::{threshold_of_tensor, CertificateCheck};
use nonlocality_core::optimize::{nelder_mead, objective};
use nonlocality_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn random_point(sc: Scenario, rng: &mut ChaCha8Rng) -> (PureState, PhaseSettings) {
    let coeffs: Vec<f64> = (0..sc.state_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (state, _) = PureState::normalized(sc, coeffs).unwrap();
    let table: Vec<Vec<Vec<f64>>> = (0..sc.parties())
        .map(|_| {
            (0..2)
                .map(|_| (0..sc.dim()).map(|_| rng.gen_range(0.0..TAU)).collect())
                .collect()
        })
        .collect();
    (state, PhaseSettings::from_radians(sc, &table).unwrap())
}

fn maxent_ghz() -> (PureState, PhaseSettings) {
    let sc = Scenario::new(3, 3).unwrap();
    (
        ghz_state(sc),
        reference_settings(ReferenceSettings::MaxEntangled3Qutrit),
    )
}

#[test]
fn feasibility_is_monotone_around_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut points = vec![maxent_ghz()];
    for _ in 0..3 {
        points.push(random_point(Scenario::new(2, 3).unwrap(), &mut rng));
    }
    let mut nonzero = 0;
    for (state, settings) in &points {
        let tensor = correlation_tensor(state, settings).unwrap();
        let f = threshold(state, settings).unwrap().f_thr.value();
        for delta in [1e-3, 1e-2] {
            if f + delta <= 1.0 {
                assert!(feasible_at(&tensor, NoiseFraction::new(f + delta).unwrap()).0);
            }
            if f - delta >= 0.0 {
                assert!(
                    !feasible_at(&tensor, NoiseFraction::new(f - delta).unwrap()).0,
                    "f = {f}"
                );
                nonzero += 1;
            }
        }
    }
    assert!(nonzero >= 2);
}

#[test]
fn threshold_invariant_under_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let solver = SimplexSolver::default();
    for sc in [Scenario::new(2, 3).unwrap(), Scenario::new(3, 2).unwrap()] {
        for _ in 0..3 {
            let (state, settings) = random_point(sc, &mut rng);
            let t = correlation_tensor(&state, &settings).unwrap();
            let f = threshold_of_tensor(&solver, &t).unwrap().f_thr.value();
            let mut perm: Vec<usize> = (0..sc.dim()).collect();
            perm.rotate_left(1);
            let variants = [
                t.permute_outcomes(1, &perm).unwrap(),
                t.swap_settings(0).unwrap(),
                t.permute_parties(&(0..sc.parties()).rev().collect::<Vec<_>>()).unwrap(),
            ];
            for v in &variants {
                let g = threshold_of_tensor(&solver, v).unwrap().f_thr.value();
                assert!((f - g).abs() < 1e-9, "{f} vs {g}");
            }
        }
    }
}

#[test]
fn certificates_close_the_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cases = vec![maxent_ghz()];
    cases.push(random_point(Scenario::new(3, 3).unwrap(), &mut rng));
    cases.push(random_point(Scenario::new(2, 2).unwrap(), &mut rng));
    for (state, settings) in &cases {
        let tensor = correlation_tensor(state, settings).unwrap();
        let r = threshold(state, settings).unwrap();
        let c = CertificateCheck::for_result(&tensor, &r).unwrap();
        assert!((c.lower_bound - r.f_thr.value()).abs() < 1e-8);
        assert!(c.worst_atom_reduced_cost > -1e-9);
        assert!(c.witness_marginal_error < 1e-9);
        assert!(c.witness_min_weight >= 0.0);
    }
}

#[test]
fn objective_is_continuous_near_maxent_optimum() {
    let (state, settings) = maxent_ghz();
    let sc = state.scenario();
    let base = ParameterVector::encode(&settings, None);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let mut p = base.clone();
        for v in &mut p.phase_params {
            *v += rng.gen_range(-1e-6..1e-6);
        }
        let v = objective(&p, sc, Some(&state)).unwrap();
        assert!((v - 0.4).abs() < 1e-3, "{v}");
    }
}

#[test]
fn nelder_mead_from_maxent_never_loses_ground() {
    let (state, settings) = maxent_ghz();
    let sc = state.scenario();
    let start = ParameterVector::encode(&settings, None).to_flat();
    let f = |x: &[f64]| {
        let p = ParameterVector::from_flat(sc, false, x).unwrap();
        objective(&p, sc, Some(&state)).unwrap_or(f64::NEG_INFINITY)
    };
    let start_value = f(&start);
    let r = nelder_mead(f, &start, 0.3, 1e-4, 150);
    assert!(r.value >= start_value);
    assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn qubit_pair_reaches_tsirelson_threshold() {
    let sc = Scenario::new(2, 2).unwrap();
    let cfg = OptimizationConfig {
        restarts: 8,
        rng_seed: 2,
        ..OptimizationConfig::default()
    };
    let r = optimize_phases(&ghz_state(sc), &cfg).unwrap();
    assert!((r.best_f_thr.value() - (1.0 - 0.5f64.sqrt())).abs() < 2e-3);
    let again = threshold(&r.best_state, &r.best_settings).unwrap();
    assert!((again.f_thr.value() - r.best_f_thr.value()).abs() < 1e-6);
}

#[test]
fn joint_search_is_seed_deterministic() {
    let sc = Scenario::new(2, 2).unwrap();
    let cfg = OptimizationConfig {
        restarts: 3,
        rng_seed: 99,
        max_evals_per_restart: 200,
        ..OptimizationConfig::with_mode(SearchMode::PhasesAndState)
    };
    let a = optimize_state_and_phases(sc, &cfg).unwrap();
    let b = optimize_state_and_phases(
        sc,
        &OptimizationConfig {
            workers: Some(2),
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_eq!(a.per_restart_log, b.per_restart_log);
    let bits = |r: &OptimizationResult| {
        r.per_restart_log
            .iter()
            .map(|l| l.best_value.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.best_state, b.best_state);
}
