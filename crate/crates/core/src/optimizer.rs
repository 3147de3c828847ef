//! Fidelity optimization over `(Ωτ_d, ωτ_d)` at fixed `τ_d`, and
//! continuation sweeps over `τ_d`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_rot_with, PropagatorOptions};
use crate::error::{Error, Result};
use crate::pulse::{resonant_component, EnvelopeKind, PulseSpec};
use crate::seeders::{seed_rwa, seed_subcycle};
use crate::simplex::{minimize, SimplexSettings};
use crate::su2::{average_gate_infidelity, UnitarySU2};
use crate::{OMEGA0, T0};

/// Average gate infidelity below which a point counts as converged.
pub const CONVERGED_INFIDELITY: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    /// Increasing `τ_d`, starting from the subcycle seed.
    #[default]
    Forward,
    /// Decreasing `τ_d`, starting from the RWA seed.
    Reverse,
}

impl FromStr for SweepDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(SweepDirection::Forward),
            "reverse" => Ok(SweepDirection::Reverse),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep direction '{other}' (expected forward or reverse)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSettings {
    /// Stop once `1 − F` drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Initial simplex edge as a fraction of each parameter.
    pub initial_scale: f64,
    /// Continuation grid in units of `T₀`, strictly increasing.
    pub grid: Vec<f64>,
    pub direction: SweepDirection,
    pub resolution: f64,
}

impl Default for OptimizeSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-14,
            max_iter: 500,
            initial_scale: 0.02,
            grid: log_grid(0.01, 10.0, 60),
            direction: SweepDirection::Forward,
            resolution: PropagatorOptions::default().resolution,
        }
    }
}

impl OptimizeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tolerance)));
        }
        if !(self.initial_scale > 0.0 && self.initial_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "initial scale {} must be positive",
                self.initial_scale
            )));
        }
        if !(self.resolution >= 1.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidArgument(format!("resolution {} must be ≥ 1", self.resolution)));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidArgument("empty τ_d grid".into()));
        }
        if !self.grid.iter().all(|&x| x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument("τ_d grid must be positive and finite".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("τ_d grid must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn propagator(&self) -> PropagatorOptions {
        PropagatorOptions { resolution: self.resolution, ..PropagatorOptions::default() }
    }
}

/// `n` log-spaced points from `start` to `end` inclusive.
pub fn log_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), end.ln());
            (0..n)
                .map(|i| match i {
                    0 => start,
                    i if i == n - 1 => end,
                    i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Subcycle,
    Rwa,
    WarmStart,
    Magnus,
    Manual,
    Identity,
}

impl SeedSource {
    pub fn tag(self) -> &'static str {
        match self {
            SeedSource::Subcycle => "subcycle",
            SeedSource::Rwa => "rwa",
            SeedSource::WarmStart => "warm_start",
            SeedSource::Magnus => "magnus",
            SeedSource::Manual => "manual",
            SeedSource::Identity => "identity",
        }
    }
}

impl fmt::Display for SeedSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tau_d_over_t0: f64,
    pub omega_over_omega0: f64,
    /// `Ωτ_d`
    pub rabi_tau_d: f64,
    /// `ωτ_d`
    pub carrier_tau_d: f64,
    /// Average gate infidelity `1 − F`.
    pub infidelity: f64,
    /// `g̃(ω₀)/θ_g`; absent for the identity gate.
    pub g_res_over_theta: Option<f64>,
    pub iterations: usize,
    pub seed_source: SeedSource,
    pub converged: bool,
    /// Infidelity of the discarded candidate when the branch policy re-seeded.
    pub alternate_infidelity: Option<f64>,
}

impl SweepRecord {
    pub fn tau_d(&self) -> f64 {
        self.tau_d_over_t0 * T0
    }

    pub fn rabi_over_omega0(&self) -> f64 {
        self.rabi_tau_d / self.tau_d() / OMEGA0
    }

    pub fn pulse(&self, envelope: EnvelopeKind, ratio: f64) -> PulseSpec {
        PulseSpec::from_areas(envelope, ratio, self.tau_d(), self.rabi_tau_d, self.carrier_tau_d)
    }
}

/// Average gate infidelity of the pulse with respect to `R_x(θ_g)`.
pub fn infidelity(spec: &PulseSpec, theta: f64, opts: &PropagatorOptions) -> Result<f64> {
    let u = propagate_rot_with(spec, opts)?.unitary;
    Ok(average_gate_infidelity(&UnitarySU2::rx(theta), &u))
}

fn check_problem(ratio: f64, theta: f64, tau_d: f64) -> Result<()> {
    if !(tau_d > 0.0 && tau_d.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau_d {tau_d} must be positive")));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!("window ratio {ratio} must be positive")));
    }
    if !theta.is_finite() || theta.abs() > std::f64::consts::TAU + 1e-12 {
        return Err(Error::InvalidArgument(format!("gate angle {theta} must satisfy |θ| ≤ 2π")));
    }
    Ok(())
}

/// Local minimizer of `1 − F` starting from `initial = (Ωτ_d, ωτ_d)`.
///
/// The simplex runs in `(ln|Ωτ_d|, ln ωτ_d)`; the sign of `Ωτ_d` is kept.
/// Non-convergence is reported through [`SweepRecord::converged`].
pub fn optimize_point(
    envelope: EnvelopeKind,
    ratio: f64,
    theta: f64,
    tau_d: f64,
    initial: (f64, f64),
    settings: &OptimizeSettings,
) -> Result<SweepRecord> {
    optimize_from(envelope, ratio, theta, tau_d, initial, SeedSource::Manual, settings)
}

fn optimize_from(
    envelope: EnvelopeKind,
    ratio: f64,
    theta: f64,
    tau_d: f64,
    initial: (f64, f64),
    source: SeedSource,
    settings: &OptimizeSettings,
) -> Result<SweepRecord> {
    check_problem(ratio, theta, tau_d)?;
    settings.validate()?;
    let opts = settings.propagator();

    if theta == 0.0 {
        return Ok(SweepRecord {
            tau_d_over_t0: tau_d / T0,
            omega_over_omega0: initial.1 / tau_d / OMEGA0,
            rabi_tau_d: 0.0,
            carrier_tau_d: initial.1,
            infidelity: 0.0,
            g_res_over_theta: None,
            iterations: 0,
            seed_source: SeedSource::Identity,
            converged: true,
            alternate_infidelity: None,
        });
    }

    let (rabi0, carrier0) = initial;
    if !(rabi0.is_finite() && rabi0 != 0.0 && carrier0.is_finite() && carrier0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "initial parameters (Ωτ_d, ωτ_d) = ({rabi0}, {carrier0}) must be nonzero and positive"
        )));
    }
    let sign = rabi0.signum();
    let build = |x: &[f64]| PulseSpec::from_areas(envelope, ratio, tau_d, sign * x[0].exp(), x[1].exp());
    let objective = |x: &[f64]| infidelity(&build(x), theta, &opts).unwrap_or(f64::INFINITY);

    let simplex = SimplexSettings {
        initial_step: (1.0 + settings.initial_scale).ln(),
        max_iter: settings.max_iter,
        target: settings.tolerance,
        x_tol: 1e-13,
        f_tol: 0.0,
    };
    let result = minimize(objective, &[rabi0.abs().ln(), carrier0.ln()], &simplex);
    let spec = build(&result.x);
    // Re-evaluate so that a propagation failure surfaces as an error.
    let value = infidelity(&spec, theta, &opts)?;
    let g = resonant_component(&spec)?;
    Ok(SweepRecord {
        tau_d_over_t0: tau_d / T0,
        omega_over_omega0: spec.carrier / spec.omega0,
        rabi_tau_d: spec.rabi_tau_d(),
        carrier_tau_d: spec.carrier_tau_d(),
        infidelity: value,
        g_res_over_theta: Some(g / theta),
        iterations: result.iterations,
        seed_source: source,
        converged: value < CONVERGED_INFIDELITY,
        alternate_infidelity: None,
    })
}

/// Linear extrapolation in `(ln τ_d, ln|Ωτ_d|, ln ωτ_d)` from the last two
/// records. With a single record there is no slope, so the analytic seed
/// for the new duration is used instead.
fn predict(done: &[SweepRecord], tau_d: f64, analytic: (f64, f64)) -> (f64, f64) {
    match done {
        [] | [_] => analytic,
        [.., prev, last] => {
            let (x0, x1, x) = (prev.tau_d().ln(), last.tau_d().ln(), tau_d.ln());
            let t = (x - x1) / (x1 - x0);
            let extrapolate = |a: f64, b: f64| (b.ln() + t * (b.ln() - a.ln())).exp();
            (
                last.rabi_tau_d.signum() * extrapolate(prev.rabi_tau_d.abs(), last.rabi_tau_d.abs()),
                extrapolate(prev.carrier_tau_d, last.carrier_tau_d),
            )
        }
    }
}

fn better(a: SweepRecord, b: SweepRecord) -> (SweepRecord, SweepRecord) {
    if b.infidelity < a.infidelity {
        (b, a)
    } else {
        (a, b)
    }
}

/// Continuation sweep over `settings.grid` (in units of `T₀`).
///
/// The first point is seeded analytically; each later point starts from a
/// prediction built on the previous optima. If a point lands at more than
/// twice the predicted `ω` or `|Ω|`, or fails to converge, it is re-optimized from
/// the analytic seed for its regime and the better result is kept.
pub fn sweep(
    envelope: EnvelopeKind,
    ratio: f64,
    theta: f64,
    settings: &OptimizeSettings,
) -> Result<Vec<SweepRecord>> {
    settings.validate()?;
    let subcycle = if theta == 0.0 { None } else { Some(seed_subcycle(envelope, ratio, theta)?) };
    let tau0 = subcycle.as_ref().and_then(|s| s.phi).map(|phi| phi / OMEGA0);

    let analytic = |tau_d: f64| -> Result<((f64, f64), SeedSource)> {
        match (&subcycle, tau0) {
            (Some(s), Some(t0)) if tau_d < t0 => Ok(((s.rabi_tau_d, s.carrier_tau_d), SeedSource::Subcycle)),
            _ => {
                let s = seed_rwa(envelope, ratio, theta, tau_d)?;
                Ok(((s.rabi_tau_d, s.carrier_tau_d), SeedSource::Rwa))
            }
        }
    };

    let mut taus: Vec<f64> = settings.grid.iter().map(|x| x * T0).collect();
    let mut first_source = SeedSource::Subcycle;
    if settings.direction == SweepDirection::Reverse {
        taus.reverse();
        first_source = SeedSource::Rwa;
    }

    let mut done: Vec<SweepRecord> = Vec::with_capacity(taus.len());
    for &tau_d in &taus {
        if theta == 0.0 {
            done.push(optimize_from(envelope, ratio, theta, tau_d, (0.0, OMEGA0 * tau_d), SeedSource::Identity, settings)?);
            continue;
        }
        let record = if done.is_empty() {
            let initial = match first_source {
                SeedSource::Rwa => {
                    let s = seed_rwa(envelope, ratio, theta, tau_d)?;
                    (s.rabi_tau_d, s.carrier_tau_d)
                }
                _ => {
                    let s = subcycle.as_ref().expect("nonzero angle has a subcycle seed");
                    (s.rabi_tau_d, s.carrier_tau_d)
                }
            };
            optimize_from(envelope, ratio, theta, tau_d, initial, first_source, settings)?
        } else {
            let predicted = predict(&done, tau_d, analytic(tau_d)?.0);
            let warm = optimize_from(envelope, ratio, theta, tau_d, predicted, SeedSource::WarmStart, settings)?;
            let jumped = warm.carrier_tau_d > 2.0 * predicted.1 || warm.rabi_tau_d.abs() > 2.0 * predicted.0.abs();
            if jumped || !warm.converged {
                let (initial, source) = analytic(tau_d)?;
                let fresh = optimize_from(envelope, ratio, theta, tau_d, initial, source, settings)?;
                let (mut keep, other) = better(warm, fresh);
                keep.alternate_infidelity = Some(other.infidelity);
                keep
            } else {
                warm
            }
        };
        done.push(record);
    }
    if settings.direction == SweepDirection::Reverse {
        done.reverse();
    }
    Ok(done)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub envelope: EnvelopeKind,
    pub ratio: f64,
    pub theta: f64,
}

/// Independent sweeps run concurrently; results keep the order of `jobs`.
pub fn sweep_many(jobs: &[SweepJob], settings: &OptimizeSettings) -> Vec<Result<Vec<SweepRecord>>> {
    jobs.par_iter()
        .map(|job| sweep(job.envelope, job.ratio, job.theta, settings))
        .collect()
}
