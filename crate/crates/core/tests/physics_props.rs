use std::f64::consts::TAU;

use fejerlimit::climit::{fit_rate, run_scan, LimitSchedule, RateFit, TimeGrid};
use fejerlimit::qsystems::{EigenSystem, Observable};
use fejerlimit::wavepacket::{WavePacket, NORM_TOL};
use num_complex::Complex64;
use proptest::prelude::*;

fn observable() -> impl Strategy<Value = Observable> {
    prop::sample::select(Observable::ALL.to_vec())
}

fn system() -> impl Strategy<Value = EigenSystem> {
    prop_oneof![
        (0.2f64..5.0, 0.2f64..5.0, 0.01f64..2.0)
            .prop_map(|(m, w, h)| EigenSystem::oscillator(m, w, h).unwrap()),
        (0.2f64..5.0, 0.2f64..5.0, 0.01f64..2.0)
            .prop_map(|(m, l, h)| EigenSystem::square_well(m, l, h).unwrap()),
    ]
}

proptest! {
    #[test]
    fn matrix_elements_are_hermitian(sys in system(), obs in observable(), a in 1i64..400, b in 1i64..400) {
        let ab = sys.matrix_element(obs, a, b).unwrap();
        let ba = sys.matrix_element(obs, b, a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12 * (1.0 + ab.norm()));
    }

    #[test]
    fn engine_matches_oscillator_closed_form(
        n in 21i64..10_000,
        big_n in 0usize..=20,
        obs in observable(),
        t in -50.0f64..50.0,
        hbar in 0.001f64..2.0,
    ) {
        let sys = EigenSystem::oscillator(1.3, 0.7, hbar).unwrap();
        let packet = WavePacket::equal_weight(sys, n, big_n).unwrap();
        let engine = packet.expectation(obs, t).unwrap();
        let closed = sys.ho_expectation_closed_form(obs, n, big_n, t).unwrap();
        // x and p pass through zero; compare against their amplitude
        let scale = if matches!(obs, Observable::X | Observable::P) {
            let at = |t: f64| sys.ho_expectation_closed_form(obs, n, big_n, t).unwrap().abs();
            at(0.0).max(at(TAU / 0.7 / 4.0))
        } else {
            closed.abs()
        };
        prop_assert!((engine - closed).abs() <= 1e-9 * scale.max(1e-300), "{} vs {}", engine, closed);
    }

    #[test]
    fn packets_are_normalized_and_expectations_periodic(
        sys in system(),
        n in 30i64..300,
        big_n in 0usize..10,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21),
        obs in observable(),
        t in 0.0f64..10.0,
    ) {
        let coeffs: Vec<Complex64> = raw[..2 * big_n + 1].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        prop_assume!(coeffs.iter().any(|c| c.norm() > 1e-3));
        let packet = WavePacket::general(sys, n, big_n, coeffs).unwrap();
        prop_assert!((packet.norm_squared() - 1.0).abs() <= NORM_TOL);
        if sys.is_oscillator() {
            let period = TAU / sys.transition_frequency(n + 1, n).unwrap();
            let a = packet.expectation(obs, t).unwrap();
            let b = packet.expectation(obs, t + period).unwrap();
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn energy_is_conserved(sys in system(), n in 30i64..3000, big_n in 0usize..12, t in 0.0f64..100.0) {
        let packet = WavePacket::gaussian(sys, n, big_n, 1.0 + big_n as f64 / 3.0).unwrap();
        let e0 = packet.expectation(Observable::H, 0.0).unwrap();
        let et = packet.expectation(Observable::H, t).unwrap();
        prop_assert!((e0 - et).abs() <= 1e-12 * e0);
        prop_assert!((e0 - packet.mean_energy()).abs() <= 1e-12 * e0);
    }
}

fn sup_errors(sys: &EigenSystem, obs: Observable, gamma: f64) -> Vec<f64> {
    let schedule = LimitSchedule::new(1.0, vec![100, 1000, 10_000], gamma).unwrap();
    run_scan(sys, obs, &schedule, &TimeGrid::PerPeriod(128))
        .unwrap()
        .points
        .iter()
        .map(|p| p.classical.sup)
        .collect()
}

#[test]
fn oscillator_errors_decrease_along_the_limit() {
    let sys = EigenSystem::oscillator(1.0, 1.0, 1.0).unwrap();
    for gamma in [0.3, 0.45, 0.6] {
        for obs in [Observable::X, Observable::P, Observable::X2, Observable::P2] {
            let e = sup_errors(&sys, obs, gamma);
            assert!(
                e.windows(2).all(|w| w[1] < w[0]),
                "{obs} gamma {gamma}: {e:?}"
            );
        }
    }
}

#[test]
fn well_momentum_follows_the_fejer_reference() {
    let sys = EigenSystem::square_well(1.0, 1.0, 1.0).unwrap();
    let schedule = LimitSchedule::new(1.0, vec![200, 2000], 0.4).unwrap();
    let report = run_scan(&sys, Observable::P, &schedule, &TimeGrid::default()).unwrap();
    for p in &report.points {
        assert!(
            p.fejer.sup < p.partial.sup,
            "n={}: {:?} vs {:?}",
            p.n,
            p.fejer,
            p.partial
        );
        assert!(p.quantum_overshoot <= p.fejer_overshoot + 1e-9);
        assert!(p.partial_overshoot > 0.15 * p.band_hi);
    }
}

#[test]
fn oscillator_position_rate_is_stable() {
    let sys = EigenSystem::oscillator(1.0, 1.0, 1.0).unwrap();
    let schedule = LimitSchedule::new(1.0, vec![100, 1000, 10_000], 0.4).unwrap();
    let report = run_scan(&sys, Observable::X, &schedule, &TimeGrid::default()).unwrap();
    let rates = fit_rate(&report).unwrap();
    let RateFit::Exponent(classical) = rates.classical else {
        panic!("expected a fitted exponent");
    };
    assert!((classical + 0.39275).abs() < 1e-3, "{classical}");
    assert_eq!(report.rates, Some(rates));
}

#[test]
fn conserved_energy_has_no_rate() {
    let sys = EigenSystem::oscillator(1.0, 1.0, 1.0).unwrap();
    let schedule = LimitSchedule::new(1.0, vec![100, 1000, 10_000], 0.4).unwrap();
    let report = run_scan(&sys, Observable::H, &schedule, &TimeGrid::default()).unwrap();
    assert_eq!(report.rates.unwrap().classical, RateFit::BelowFloor);
}

#[test]
fn expectation_approaches_fejer_mean_of_classical_signal() {
    let sys = EigenSystem::oscillator(1.0, 1.0, 1.0).unwrap();
    let schedule = LimitSchedule::new(1.0, vec![100, 1000, 10_000], 0.4).unwrap();
    for obs in [Observable::X, Observable::X2, Observable::P2] {
        let report = run_scan(&sys, obs, &schedule, &TimeGrid::default()).unwrap();
        for p in &report.points {
            assert!(
                p.fejer.sup < 1e-2 * p.classical.sup,
                "{obs} n={}: {:?}",
                p.n,
                p.fejer
            );
        }
        let fejer: Vec<f64> = report.points.iter().map(|p| p.fejer.sup).collect();
        assert!(fejer.windows(2).all(|w| w[1] < w[0]), "{obs}: {fejer:?}");
    }
}
