use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use anyspeed_core::optimizer::{infidelity, log_grid};
use anyspeed_core::pulse::envelope_area;
use anyspeed_core::{
    optimize_point, seed_rwa, seed_subcycle, sweep, sweep_many, EnvelopeKind, OptimizeSettings, SeedSource,
    SweepDirection, SweepJob, SweepRecord, T0,
};

const ENV: EnvelopeKind = EnvelopeKind::Gaussian;

fn gaussian_pi_sweep() -> &'static [SweepRecord] {
    static SWEEP: OnceLock<Vec<SweepRecord>> = OnceLock::new();
    SWEEP.get_or_init(|| sweep(ENV, 5.0, PI, &OptimizeSettings::default()).unwrap())
}

#[test]
fn shortest_point_stays_near_subcycle_seed() {
    let seed = seed_subcycle(ENV, 5.0, PI).unwrap();
    let r = optimize_point(ENV, 5.0, PI, 0.01 * T0, (seed.rabi_tau_d, seed.carrier_tau_d), &OptimizeSettings::default())
        .unwrap();
    assert!(r.converged && r.infidelity < 1e-10, "{r:?}");
    assert!((r.rabi_tau_d / seed.rabi_tau_d - 1.0).abs() < 0.01);
    assert!((r.carrier_tau_d / seed.carrier_tau_d - 1.0).abs() < 0.01);
}

#[test]
fn longest_point_is_resonant() {
    let tau_d = 10.0 * T0;
    let seed = seed_rwa(ENV, 5.0, PI, tau_d).unwrap();
    let r = optimize_point(ENV, 5.0, PI, tau_d, (seed.rabi_tau_d, seed.carrier_tau_d), &OptimizeSettings::default())
        .unwrap();
    assert!(r.converged && r.infidelity < 1e-10, "{r:?}");
    assert!((r.omega_over_omega0 - 1.0).abs() < 0.01, "{r:?}");
}

#[test]
fn zero_angle_is_the_identity() {
    let r = optimize_point(ENV, 5.0, 0.0, T0, (1.0, 1.0), &OptimizeSettings::default()).unwrap();
    assert_eq!((r.rabi_tau_d, r.infidelity, r.iterations), (0.0, 0.0, 0));
    assert_eq!(r.seed_source, SeedSource::Identity);
}

#[test]
fn invalid_initial_parameters_are_rejected() {
    let settings = OptimizeSettings::default();
    assert!(optimize_point(ENV, 5.0, PI, T0, (0.0, 3.0), &settings).is_err());
    assert!(optimize_point(ENV, 5.0, PI, T0, (3.0, -1.0), &settings).is_err());
    assert!(optimize_point(ENV, 5.0, PI, -T0, (3.0, 3.0), &settings).is_err());
}

#[test]
fn invalid_settings_are_rejected() {
    let bad = [
        OptimizeSettings { tolerance: 0.0, ..Default::default() },
        OptimizeSettings { grid: vec![1.0, 0.5], ..Default::default() },
        OptimizeSettings { grid: Vec::new(), ..Default::default() },
        OptimizeSettings { initial_scale: -0.1, ..Default::default() },
    ];
    for settings in bad {
        assert!(settings.validate().is_err(), "{settings:?}");
        assert!(sweep(ENV, 5.0, PI, &settings).is_err());
    }
}

#[test]
fn unconverged_points_are_flagged_not_raised() {
    let settings = OptimizeSettings { max_iter: 2, ..Default::default() };
    let r = optimize_point(ENV, 5.0, PI, T0, (2.0, 4.0), &settings).unwrap();
    assert!(!r.converged && r.infidelity > 1e-10);
    assert!(r.iterations <= 2);
}

#[test]
fn optimization_is_deterministic() {
    let settings = OptimizeSettings::default();
    let run = || optimize_point(ENV, 5.0, PI, 0.4 * T0, (3.5, 2.5), &settings).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn sweep_converges_everywhere_and_is_sorted() {
    let records = gaussian_pi_sweep();
    assert_eq!(records.len(), 60);
    assert!(records.windows(2).all(|w| w[1].tau_d_over_t0 > w[0].tau_d_over_t0));
    for r in records {
        assert!(r.converged && r.infidelity >= 0.0 && r.infidelity < 1e-10, "{r:?}");
        assert!(r.omega_over_omega0 > 0.0);
    }
}

#[test]
fn stored_infidelity_matches_fresh_propagation() {
    let settings = OptimizeSettings::default();
    for r in gaussian_pi_sweep().iter().step_by(7) {
        let fresh = infidelity(&r.pulse(ENV, 5.0), PI, &settings.propagator()).unwrap();
        assert!((fresh - r.infidelity).abs() < 1e-12, "{fresh} vs {}", r.infidelity);
    }
}

/// The basin check runs below the default stopping target so that both
/// runs end at the local minimum rather than at the first point under it.
#[test]
fn perturbed_optima_return_to_the_same_point() {
    let settings = OptimizeSettings { tolerance: 1e-30, ..Default::default() };
    for swept in gaussian_pi_sweep().iter().step_by(12) {
        let r = optimize_point(ENV, 5.0, PI, swept.tau_d(), (swept.rabi_tau_d, swept.carrier_tau_d), &settings).unwrap();
        for (a, b) in [(1.01, 0.99), (0.99, 1.01)] {
            let again =
                optimize_point(ENV, 5.0, PI, r.tau_d(), (r.rabi_tau_d * a, r.carrier_tau_d * b), &settings).unwrap();
            assert!((again.rabi_tau_d / r.rabi_tau_d - 1.0).abs() < 1e-6, "{again:?} vs {r:?}");
            assert!((again.carrier_tau_d / r.carrier_tau_d - 1.0).abs() < 1e-6, "{again:?} vs {r:?}");
        }
    }
}

#[test]
fn sweep_endpoints_match_analytic_limits() {
    let records = gaussian_pi_sweep();
    let (first, last) = (records[0], records[records.len() - 1]);
    let subcycle = seed_subcycle(ENV, 5.0, PI).unwrap().rabi_tau_d;
    let rwa = PI / envelope_area(ENV, 5.0);
    assert!((first.rabi_tau_d / subcycle - 1.0).abs() < 0.005, "{} vs {subcycle}", first.rabi_tau_d);
    assert!((last.rabi_tau_d / rwa - 1.0).abs() < 0.005, "{} vs {rwa}", last.rabi_tau_d);
    for r in [first, last] {
        let g = r.g_res_over_theta.unwrap();
        assert!((g - 0.5).abs() < 1e-3, "{g}");
    }
}

/// The short-pulse asymptote `ω = φ/τ_d` meets `ω₀` at `τ_d = φ/ω₀`.
#[test]
fn subcycle_asymptote_meets_resonance_at_transition_duration() {
    let records = gaussian_pi_sweep();
    let crossing = records[0].carrier_tau_d / std::f64::consts::TAU;
    assert!((crossing - 0.5718).abs() < 1e-3, "crossing at {crossing} T0");
    // the optimized curve approaches ω₀ from above on the long side
    assert!(records.iter().all(|r| r.omega_over_omega0 > 1.0));
}

#[test]
fn reverse_sweep_finds_the_same_branch() {
    let settings = OptimizeSettings {
        grid: log_grid(0.05, 5.0, 16),
        ..Default::default()
    };
    let forward = sweep(ENV, 5.0, PI, &settings).unwrap();
    let reverse = sweep(ENV, 5.0, PI, &OptimizeSettings { direction: SweepDirection::Reverse, ..settings }).unwrap();
    assert_eq!(reverse[reverse.len() - 1].seed_source, SeedSource::Rwa);
    for (f, r) in forward.iter().zip(&reverse) {
        assert_eq!(f.tau_d_over_t0, r.tau_d_over_t0);
        assert!(f.converged && r.converged);
        assert!((f.carrier_tau_d / r.carrier_tau_d - 1.0).abs() < 1e-6, "{f:?} vs {r:?}");
        assert!((f.rabi_tau_d / r.rabi_tau_d - 1.0).abs() < 1e-6, "{f:?} vs {r:?}");
    }
}

#[test]
fn parallel_sweeps_keep_job_order() {
    let settings = OptimizeSettings { grid: log_grid(0.02, 2.0, 8), ..Default::default() };
    let jobs = [
        SweepJob { envelope: EnvelopeKind::Sech, ratio: 5.0, theta: PI },
        SweepJob { envelope: ENV, ratio: 5.0, theta: FRAC_PI_2 },
        SweepJob { envelope: EnvelopeKind::Constant, ratio: 1.0, theta: PI },
    ];
    let results = sweep_many(&jobs, &settings);
    assert_eq!(results.len(), jobs.len());
    for (job, result) in jobs.iter().zip(results) {
        let serial = sweep(job.envelope, job.ratio, job.theta, &settings).unwrap();
        assert_eq!(result.unwrap(), serial);
    }
}
