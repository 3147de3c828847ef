use std::f64::consts::{PI, TAU};

use anyspeed_core::optimizer::infidelity;
use anyspeed_core::pulse::{envelope_area, s1_integrals, signed_area, theta_half};
use anyspeed_core::quadrature::CompositeGrid;
use anyspeed_core::seeders::{transition_cases, transition_table};
use anyspeed_core::{seed_rwa, seed_subcycle, transition_duration, EnvelopeKind, PropagatorOptions, PulseSpec, T0};
use proptest::prelude::*;

const TRANSITION: [f64; 6] = [0.7328, 0.4899, 0.4261, 0.5718, 0.5534, 0.5498];

fn even_unit_pulse() -> impl Strategy<Value = PulseSpec> {
    (prop::sample::select(EnvelopeKind::ALL.to_vec()), 0.1f64..20.0, 0.1f64..5.0).prop_map(|(env, k, a)| {
        PulseSpec::from_areas(env, env.canonical_ratio(), 1.0, a, k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn even_pulses_are_exactly_symmetric(spec in even_unit_pulse(), u in 0.0f64..3.0) {
        prop_assert_eq!(spec.shape(u), spec.shape(-u));
    }

    #[test]
    fn cosine_error_integral_vanishes(spec in even_unit_pulse(), theta in 0.1f64..TAU) {
        prop_assume!(signed_area(&spec).abs() > 1e-3);
        let (s1c, _) = s1_integrals(&spec, theta).unwrap();
        prop_assert!(s1c.abs() < 1e-12, "s1c = {s1c}");
    }

    #[test]
    fn area_rule_gives_full_angle(spec in even_unit_pulse(), theta in 0.1f64..TAU) {
        let s = signed_area(&spec);
        prop_assume!(s.abs() > 1e-3);
        let spec = spec.with_rabi(theta / (2.0 * s) / spec.tau_d);
        let h = spec.half_window();
        let full = theta_half(&spec, h) - theta_half(&spec, -h);
        prop_assert!((full - theta).abs() < 1e-10, "{full} vs {theta}");
    }

    #[test]
    fn unmodulated_angle_is_monotone_and_bounded(
        env in prop::sample::select(EnvelopeKind::ALL.to_vec()),
        theta in 0.1f64..TAU,
    ) {
        let s0 = envelope_area(env, env.canonical_ratio());
        let spec = PulseSpec::from_areas(env, env.canonical_ratio(), 1.0, theta / (2.0 * s0), 0.0);
        let h = spec.half_window();
        let mut last = 0.0;
        for k in 1..=40 {
            let value = theta_half(&spec, h * k as f64 / 40.0);
            prop_assert!(value >= last - 1e-15);
            prop_assert!(value <= theta / 2.0 + 1e-12);
            last = value;
        }
    }
}

/// Plain composite Simpson rule, used as an independent quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        sum += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn areas_agree_with_simpson() {
    for env in EnvelopeKind::ALL {
        for k in [0.0, 1.3, 3.6, 9.0] {
            let spec = PulseSpec::from_areas(env, env.canonical_ratio(), 1.0, 1.0, k);
            let h = spec.half_window();
            // split at the kinks of the triangular envelope
            let reference = simpson(|u| spec.shape(u), -h, 0.0, 200_000) + simpson(|u| spec.shape(u), 0.0, h, 200_000);
            assert!((signed_area(&spec) - reference).abs() < 1e-10, "{env} k = {k}");
        }
    }
}

#[test]
fn doubling_panels_changes_integrals_below_tolerance() {
    let spec = PulseSpec::from_areas(EnvelopeKind::Gaussian, 5.0, 1.0, 2.0, 30.0);
    let h = spec.half_window();
    let at = |panels| CompositeGrid::new(&[-h, 0.0, h], panels).integrate_fn(|u| spec.shape(u));
    let (a, b) = (at(256), at(512));
    assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-3), "{a} vs {b}");
}

#[test]
fn transition_durations_match_reference_values() {
    let rows = transition_table().unwrap();
    assert_eq!(rows.len(), TRANSITION.len());
    for (row, expected) in rows.iter().zip(TRANSITION) {
        assert!((row.tau0 - expected).abs() < 1e-3, "{row:?} vs {expected}");
    }
    for ((env, ratio, theta), row) in transition_cases().into_iter().zip(&rows) {
        assert_eq!((env, ratio, theta), (row.envelope, row.ratio, row.theta));
    }
}

#[test]
fn first_error_integral_vanishes_at_minimal_phase() {
    let seed = seed_subcycle(EnvelopeKind::Gaussian, 5.0, PI).unwrap();
    let phi = seed.phi.unwrap();
    assert!(seed.diagnostics.s1s_residual < 1e-8);
    let spec = PulseSpec::from_areas(EnvelopeKind::Gaussian, 5.0, 1.0, 1.0, phi);
    assert!(s1_integrals(&spec, PI).unwrap().1.abs() < 1e-8);
    // the four-digit reference value locates the root to its last digit
    assert!((phi / TAU - 0.5718).abs() < 1e-4);
}

#[test]
fn short_and_long_pulse_strengths() {
    let sub = seed_subcycle(EnvelopeKind::Gaussian, 5.0, PI).unwrap();
    let tau_d = 0.1 * T0;
    let spec = sub.pulse(tau_d);
    assert!((spec.carrier / 5.72 - 1.0).abs() < 0.01, "ω = {}", spec.carrier);
    assert!((spec.rabi / 6.32 - 1.0).abs() < 0.01, "Ω = {}", spec.rabi);

    let rwa = seed_rwa(EnvelopeKind::Gaussian, 5.0, PI, 5.0 * T0).unwrap();
    let spec = rwa.pulse(5.0 * T0);
    assert!((spec.rabi / 0.113 - 1.0).abs() < 0.01, "Ω = {}", spec.rabi);
    assert_eq!(spec.carrier, 1.0);
}

#[test]
fn transition_duration_is_the_resonance_crossing() {
    // the subcycle carrier ω = φ/τ_d meets ω₀ exactly at τ_d = τ₀
    for (env, ratio, theta) in transition_cases() {
        let tau0 = transition_duration(env, ratio, theta).unwrap() * T0;
        let seed = seed_subcycle(env, ratio, theta).unwrap();
        assert!((seed.pulse(tau0).carrier - 1.0).abs() < 1e-12);
    }
}

#[test]
fn subcycle_seed_error_vanishes_as_pulses_shorten() {
    let seed = seed_subcycle(EnvelopeKind::Gaussian, 5.0, PI).unwrap();
    let opts = PropagatorOptions::default();
    let errors: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&alpha| infidelity(&seed.pulse(alpha * T0), PI, &opts).unwrap())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0] / 4.0), "{errors:?}");
}

#[test]
fn rwa_seed_improves_with_duration() {
    let opts = PropagatorOptions::default();
    let errors: Vec<f64> = [1.0, 1.78, 3.16, 5.62, 10.0]
        .iter()
        .map(|&periods| {
            let seed = seed_rwa(EnvelopeKind::Gaussian, 5.0, PI, periods * T0).unwrap();
            infidelity(&seed.pulse(periods * T0), PI, &opts).unwrap()
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[4] < 1e-3);
}

#[test]
fn subcycle_seeds_cover_all_envelopes_and_signs() {
    for env in EnvelopeKind::ALL {
        let pos = seed_subcycle(env, env.canonical_ratio(), PI / 2.0).unwrap();
        let neg = seed_subcycle(env, env.canonical_ratio(), -PI / 2.0).unwrap();
        assert_eq!(pos.carrier_tau_d, neg.carrier_tau_d);
        assert_eq!(pos.rabi_tau_d, -neg.rabi_tau_d);
        assert!(pos.diagnostics.s.abs() > 1e-6);
    }
}
