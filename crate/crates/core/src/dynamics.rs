//! Rotating-frame propagation of the driven qubit.
//!
//! `H_rot(t) = Ω f(t) [cos(ω₀t) σx − sin(ω₀t) σy]`, so `U_rot` stays in
//! SU(2) and is integrated directly in quaternion form with a fixed-step
//! Dormand–Prince 5(4) scheme, renormalized after every step.

use crate::error::{Error, Result};
use crate::pulse::PulseSpec;
use crate::su2::{Spinor, UnitarySU2};

/// Steps per shortest time scale of the Hamiltonian.
pub const DEFAULT_RESOLUTION: f64 = 200.0;
/// Hard cap on the number of steps of a single propagation.
pub const DEFAULT_MAX_STEPS: usize = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    /// The step is at most `min(τ_d, 2π/max(ω, ω₀, |Ω|)) / resolution`.
    pub resolution: f64,
    pub max_steps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self { resolution: DEFAULT_RESOLUTION, max_steps: DEFAULT_MAX_STEPS }
    }
}

impl PropagatorOptions {
    /// Same options with half the step size.
    pub fn halved(self) -> Self {
        Self { resolution: 2.0 * self.resolution, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    pub t: f64,
    pub bloch: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// `U_rot(T/2, −T/2; 0)`
    pub unitary: UnitarySU2,
    /// Largest `|‖q‖ − 1|` seen before any per-step renormalization.
    pub drift: f64,
    pub steps: usize,
}

/// Rotating-frame field `h(t)` with `H_rot = h·σ`, for a pulse centered at `shift`.
#[derive(Debug, Clone, Copy)]
struct Drive<'a> {
    spec: &'a PulseSpec,
    shift: f64,
}

impl Drive<'_> {
    #[inline]
    fn field(&self, t: f64) -> [f64; 3] {
        let amp = self.spec.drive(t - self.shift);
        if amp == 0.0 {
            return [0.0; 3];
        }
        let (s, c) = (self.spec.omega0 * t).sin_cos();
        [amp * c, -amp * s, 0.0]
    }
}

/// `q̇ = M(h) q` for `U̇ = −i(h·σ)U`.
#[inline]
fn rhs(h: [f64; 3], q: [f64; 4]) -> [f64; 4] {
    let [q0, x, y, z] = q;
    [
        -(h[0] * x + h[1] * y + h[2] * z),
        q0 * h[0] + h[1] * z - h[2] * y,
        q0 * h[1] + h[2] * x - h[0] * z,
        q0 * h[2] + h[0] * y - h[1] * x,
    ]
}

#[inline]
fn axpy(q: [f64; 4], terms: &[(f64, [f64; 4])]) -> [f64; 4] {
    let mut out = q;
    for (a, k) in terms {
        for i in 0..4 {
            out[i] += a * k[i];
        }
    }
    out
}

/// One Dormand–Prince step, fifth-order solution.
#[inline]
fn dp5_step(drive: &Drive, t: f64, h: f64, q: [f64; 4]) -> [f64; 4] {
    let k1 = rhs(drive.field(t), q);
    let k2 = rhs(drive.field(t + h / 5.0), axpy(q, &[(h / 5.0, k1)]));
    let k3 = rhs(
        drive.field(t + 0.3 * h),
        axpy(q, &[(h * 3.0 / 40.0, k1), (h * 9.0 / 40.0, k2)]),
    );
    let k4 = rhs(
        drive.field(t + 0.8 * h),
        axpy(q, &[(h * 44.0 / 45.0, k1), (-h * 56.0 / 15.0, k2), (h * 32.0 / 9.0, k3)]),
    );
    let k5 = rhs(
        drive.field(t + h * 8.0 / 9.0),
        axpy(
            q,
            &[
                (h * 19372.0 / 6561.0, k1),
                (-h * 25360.0 / 2187.0, k2),
                (h * 64448.0 / 6561.0, k3),
                (-h * 212.0 / 729.0, k4),
            ],
        ),
    );
    let k6 = rhs(
        drive.field(t + h),
        axpy(
            q,
            &[
                (h * 9017.0 / 3168.0, k1),
                (-h * 355.0 / 33.0, k2),
                (h * 46732.0 / 5247.0, k3),
                (h * 49.0 / 176.0, k4),
                (-h * 5103.0 / 18656.0, k5),
            ],
        ),
    );
    axpy(
        q,
        &[
            (h * 35.0 / 384.0, k1),
            (h * 500.0 / 1113.0, k3),
            (h * 125.0 / 192.0, k4),
            (-h * 2187.0 / 6784.0, k5),
            (h * 11.0 / 84.0, k6),
        ],
    )
}

fn normalize(q: [f64; 4]) -> ([f64; 4], f64) {
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    (q.map(|x| x / norm), (norm - 1.0).abs())
}

/// Largest step allowed for `spec`.
pub fn max_step(spec: &PulseSpec, opts: &PropagatorOptions) -> f64 {
    let fastest = spec.carrier.max(spec.omega0).max(spec.rabi.abs());
    spec.tau_d.min(std::f64::consts::TAU / fastest) / opts.resolution
}

/// Step grid as `(segment start, segment end, steps)`, split at the pulse
/// center and at envelope kinks so that no step straddles a point where the
/// drive is not smooth.
fn segments(spec: &PulseSpec, shift: f64, opts: &PropagatorOptions) -> Result<Vec<(f64, f64, usize)>> {
    spec.validate()?;
    let h_max = max_step(spec, opts);
    let half = spec.half_window();
    let mut cuts = vec![-half];
    cuts.extend(spec.envelope.kinks().iter().copied().filter(|u| u.abs() < half));
    cuts.push(half);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut out = Vec::with_capacity(cuts.len() - 1);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (shift + spec.tau_d * pair[0], shift + spec.tau_d * pair[1]);
        let n = ((b - a) / h_max).ceil();
        total += n;
        if !n.is_finite() || total > opts.max_steps as f64 {
            return Err(Error::IntegrationFailure {
                time: shift - half * spec.tau_d,
                reason: format!(
                    "step size underflow: more than {} steps needed (h = {h_max:.3e})",
                    opts.max_steps
                ),
            });
        }
        out.push((a, b, (n as usize).max(1)));
    }
    Ok(out)
}

/// Integrates `U_rot` over `[shift − T/2, shift + T/2]`, calling `observe`
/// with `(t, U_rot(t))` at each requested time in `sample_times`
/// (which must be sorted and lie inside the window).
fn integrate(
    spec: &PulseSpec,
    shift: f64,
    opts: &PropagatorOptions,
    sample_times: &[f64],
    mut observe: impl FnMut(f64, UnitarySU2),
) -> Result<PropagationResult> {
    let grid = segments(spec, shift, opts)?;
    let drive = Drive { spec, shift };
    let mut q = [1.0, 0.0, 0.0, 0.0];
    let mut drift = 0.0f64;
    let mut next_sample = 0;
    let mut steps = 0;

    for &(a, b, n_steps) in &grid {
        for n in 0..n_steps {
            let t = a + (b - a) * n as f64 / n_steps as f64;
            let t_next = if n + 1 == n_steps { b } else { a + (b - a) * (n + 1) as f64 / n_steps as f64 };
            while next_sample < sample_times.len() && sample_times[next_sample] < t_next {
                let ts = sample_times[next_sample];
                let qs = if ts > t { normalize(dp5_step(&drive, t, ts - t, q)).0 } else { q };
                observe(ts, UnitarySU2::from_unit_quaternion(qs));
                next_sample += 1;
            }
            let (next, err) = normalize(dp5_step(&drive, t, t_next - t, q));
            if !next.iter().all(|x| x.is_finite()) {
                return Err(Error::IntegrationFailure {
                    time: t,
                    reason: "non-finite propagator".into(),
                });
            }
            drift = drift.max(err);
            q = next;
        }
        steps += n_steps;
    }
    let unitary = UnitarySU2::from_unit_quaternion(q);
    for &ts in &sample_times[next_sample..] {
        observe(ts, unitary);
    }
    Ok(PropagationResult { unitary, drift, steps })
}

/// `U_rot(T/2, −T/2; 0)` for the pulse centered at `t = 0`.
pub fn propagate_rot(spec: &PulseSpec) -> Result<PropagationResult> {
    propagate_rot_with(spec, &PropagatorOptions::default())
}

pub fn propagate_rot_with(spec: &PulseSpec, opts: &PropagatorOptions) -> Result<PropagationResult> {
    integrate(spec, 0.0, opts, &[], |_, _| {})
}

/// Propagator of the same pulse translated to be centered at `t₀`,
/// `U_rot(t₀ + T/2, t₀ − T/2; 0)`.
pub fn propagate_shifted(spec: &PulseSpec, t0: f64) -> Result<UnitarySU2> {
    propagate_shifted_with(spec, t0, &PropagatorOptions::default())
}

pub fn propagate_shifted_with(
    spec: &PulseSpec,
    t0: f64,
    opts: &PropagatorOptions,
) -> Result<UnitarySU2> {
    if !t0.is_finite() {
        return Err(Error::InvalidArgument(format!("time offset {t0} is not finite")));
    }
    Ok(integrate(spec, t0, opts, &[], |_, _| {})?.unitary)
}

/// Lab-frame Bloch trajectory on `samples` uniform points over `[−T/2, T/2]`.
///
/// `U_lab(t, −T/2) = U₀(t,0) U_rot(t,−T/2;0) U₀(0,−T/2)` with
/// `U₀(t,t') = R_z[ω₀(t − t')]`.
pub fn propagate_lab(spec: &PulseSpec, initial: &Spinor, samples: usize) -> Result<Vec<BlochSample>> {
    propagate_lab_with(spec, initial, samples, &PropagatorOptions::default())
}

pub fn propagate_lab_with(
    spec: &PulseSpec,
    initial: &Spinor,
    samples: usize,
    opts: &PropagatorOptions,
) -> Result<Vec<BlochSample>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    spec.validate()?;
    let half = 0.5 * spec.gate_time();
    let times: Vec<f64> = (0..samples)
        .map(|k| -half + spec.gate_time() * k as f64 / (samples - 1) as f64)
        .collect();
    let psi0 = UnitarySU2::rz(spec.omega0 * half).apply(initial);
    let mut out = Vec::with_capacity(samples);
    integrate(spec, 0.0, opts, &times, |t, u_rot| {
        let psi = UnitarySU2::rz(spec.omega0 * t).apply(&u_rot.apply(&psi0));
        out.push(BlochSample { t, bloch: psi.bloch() });
    })?;
    Ok(out)
}
