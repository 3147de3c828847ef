//! Rotating-frame Magnus expansion of an even pulse to third order in `Ωτ_d`.
//!
//! With `H_rot = Γ(t)·σ/2` and `Γx + iΓy = 2Ω f(t) e^{−iω₀t}`, define
//! `θ₁(t,0) = ∫₀ᵗ Γx` and `θₙ(t,0) = ∫₀ᵗ Γy θₙ₋₁`. For an even pulse the
//! final propagator is `exp[−i(Aˣσx + Aᶻσz)/2]` with
//! `Aˣ = A₁ˣ + A₃ˣ + O[(Ωτ_d)⁵]`, `Aᶻ = A₂ᶻ + O[(Ωτ_d)⁴]`, where
//! `A₁ˣ = 2θ₁(T/2,0)`, `A₂ᶻ = −2θ₂(T/2,0)` and `A₃ˣ = −2θ₃(T/2,0)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{EnvelopeKind, PulseSpec};
use crate::quadrature::CompositeGrid;
use crate::seeders::{smallest_root, SCAN_START};
use crate::su2::UnitarySU2;

const START_PANELS: usize = 64;
const MAX_PANELS: usize = 1 << 14;
const REL_TOL: f64 = 1e-10;
/// `A₂ᶻ` varies on a scale of order one in `ωτ_d`.
const SCAN_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnusCoefficients {
    pub a1x: f64,
    pub a2z: f64,
    pub a3x: f64,
    pub rabi_tau_d: f64,
    pub carrier_tau_d: f64,
    pub tau_d: f64,
}

impl MagnusCoefficients {
    /// `Aˣ` through third order.
    pub fn ax(&self) -> f64 {
        self.a1x + self.a3x
    }

    /// `Aᶻ` through third order.
    pub fn az(&self) -> f64 {
        self.a2z
    }

    /// Propagator predicted by the truncated expansion.
    pub fn unitary(&self) -> UnitarySU2 {
        UnitarySU2::from_exponent_xz(self.ax(), self.az())
    }

    /// Coefficients at another pulse area, using `Aₙ ∝ (Ωτ_d)ⁿ`.
    pub fn rescaled(&self, rabi_tau_d: f64) -> Self {
        let r = rabi_tau_d / self.rabi_tau_d;
        Self {
            a1x: self.a1x * r,
            a2z: self.a2z * r * r,
            a3x: self.a3x * r * r * r,
            rabi_tau_d,
            ..*self
        }
    }

    /// `(Γx(t), Γy(t))` for the pulse the coefficients were computed from.
    pub fn gamma(spec: &PulseSpec, t: f64) -> (f64, f64) {
        let amp = 2.0 * spec.drive(t);
        let (s, c) = (spec.omega0 * t).sin_cos();
        (amp * c, -amp * s)
    }
}

/// `(A₁ˣ, A₂ᶻ, A₃ˣ)` and the magnitude scales used for convergence checks.
fn coefficients_at(spec: &PulseSpec, panels: usize) -> ([f64; 3], [f64; 3]) {
    let grid = CompositeGrid::new(&[0.0, spec.half_window()], panels);
    let tau = spec.tau_d;
    let mut gx = Vec::with_capacity(grid.nodes().len());
    let mut gy = Vec::with_capacity(grid.nodes().len());
    for &u in grid.nodes() {
        let (x, y) = MagnusCoefficients::gamma(spec, tau * u);
        gx.push(tau * x);
        gy.push(tau * y);
    }
    let (theta1, e1) = grid.cumulative(&gx);
    let integrand2: Vec<f64> = gy.iter().zip(&theta1).map(|(g, t)| g * t).collect();
    let (theta2, e2) = grid.cumulative(&integrand2);
    let integrand3: Vec<f64> = gy.iter().zip(&theta2).map(|(g, t)| g * t).collect();
    let e3 = grid.integrate(&integrand3);

    let abs_int = |v: &[f64]| -> f64 { v.iter().zip(grid.weights()).map(|(x, w)| x.abs() * w).sum() };
    let coeffs = [2.0 * e1[e1.len() - 1], -2.0 * e2[e2.len() - 1], -2.0 * e3];
    let scales = [2.0 * abs_int(&gx), 2.0 * abs_int(&integrand2), 2.0 * abs_int(&integrand3)];
    (coeffs, scales)
}

/// Magnus coefficients of an even pulse.
pub fn magnus_coefficients(spec: &PulseSpec) -> Result<MagnusCoefficients> {
    spec.validate()?;
    if !spec.is_even() {
        return Err(Error::SymmetryViolation(format!(
            "Magnus coefficients require an even pulse, got φ_cep = {}",
            spec.cep
        )));
    }
    let mut panels = START_PANELS;
    let (mut prev, _) = coefficients_at(spec, panels);
    loop {
        panels *= 2;
        let (cur, scales) = coefficients_at(spec, panels);
        let converged = (0..3).all(|i| {
            (cur[i] - prev[i]).abs() <= REL_TOL * cur[i].abs().max(scales[i] * 1e-3).max(1e-300)
        });
        prev = cur;
        if converged || panels >= MAX_PANELS {
            break;
        }
    }
    Ok(MagnusCoefficients {
        a1x: prev[0],
        a2z: prev[1],
        a3x: prev[2],
        rabi_tau_d: spec.rabi_tau_d(),
        carrier_tau_d: spec.carrier_tau_d(),
        tau_d: spec.tau_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MagnusOrder {
    Second,
    Third,
}

impl MagnusOrder {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            2 => Ok(MagnusOrder::Second),
            3 => Ok(MagnusOrder::Third),
            other => Err(Error::InvalidArgument(format!("Magnus order {other} not in {{2, 3}}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            MagnusOrder::Second => 2,
            MagnusOrder::Third => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnusSolution {
    pub order: MagnusOrder,
    pub rabi_tau_d: f64,
    pub carrier_tau_d: f64,
    pub tau_d: f64,
    /// Coefficients evaluated at the solution.
    pub coefficients: MagnusCoefficients,
}

impl MagnusSolution {
    pub fn pulse(&self, envelope: EnvelopeKind, ratio: f64) -> PulseSpec {
        PulseSpec::from_areas(envelope, ratio, self.tau_d, self.rabi_tau_d, self.carrier_tau_d)
    }

    /// Resonant Fourier component predicted by the expansion, `A₁ˣ/2`.
    pub fn resonant_component(&self) -> f64 {
        0.5 * self.coefficients.a1x
    }
}

fn unit_coefficients(
    envelope: EnvelopeKind,
    ratio: f64,
    tau_d: f64,
    carrier_tau_d: f64,
) -> Result<MagnusCoefficients> {
    magnus_coefficients(&PulseSpec::from_areas(envelope, ratio, tau_d, 1.0, carrier_tau_d))
}

/// Smallest positive `ωτ_d` with `A₂ᶻ = 0`, evaluated at unit pulse area.
///
/// The scan covers the subcycle range of the analytic seed and extends to
/// three times the resonant value `ω₀τ_d` so that long pulses are handled.
pub fn carrier_root(envelope: EnvelopeKind, ratio: f64, tau_d: f64) -> Result<f64> {
    if !(tau_d.is_finite() && tau_d > 0.0) {
        return Err(Error::InvalidArgument(format!("tau_d {tau_d} must be positive")));
    }
    let end = (4.0 * TAU).max(3.0 * tau_d);
    let a2z = |k: f64| Ok(unit_coefficients(envelope, ratio, tau_d, k)?.a2z);
    let a1x = |k: f64| {
        unit_coefficients(envelope, ratio, tau_d, k).map(|c| c.a1x).unwrap_or(0.0)
    };
    smallest_root(SCAN_START, end, SCAN_STEP, a2z, a1x)?
        .map(|(root, _)| root)
        .ok_or_else(|| {
            Error::SolverFailure(format!(
                "A2z has no root for ωτ_d in [{SCAN_START}, {end:.3}] ({envelope}, τ_d = {tau_d})"
            ))
        })
}

fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta == 0.0 || theta.abs() > TAU + 1e-12 {
        return Err(Error::InvalidArgument(format!("gate angle {theta} must satisfy 0 < |θ| ≤ 2π")));
    }
    Ok(())
}

/// Second-order solution: `A₂ᶻ = 0` fixes `ωτ_d`, then `A₁ˣ = θ_g`.
pub fn solve_second_order(
    envelope: EnvelopeKind,
    ratio: f64,
    theta: f64,
    tau_d: f64,
) -> Result<MagnusSolution> {
    check_angle(theta)?;
    let carrier_tau_d = carrier_root(envelope, ratio, tau_d)?;
    let unit = unit_coefficients(envelope, ratio, tau_d, carrier_tau_d)?;
    let rabi_tau_d = theta / unit.a1x;
    Ok(MagnusSolution {
        order: MagnusOrder::Second,
        rabi_tau_d,
        carrier_tau_d,
        tau_d,
        coefficients: unit.rescaled(rabi_tau_d),
    })
}

/// Third-order solution: same `ωτ_d`, then `A₁ˣ + A₃ˣ = θ_g` solved as a
/// cubic in `Ωτ_d`, taking the smallest root with the sign of `θ_g`.
pub fn solve_third_order(
    envelope: EnvelopeKind,
    ratio: f64,
    theta: f64,
    tau_d: f64,
) -> Result<MagnusSolution> {
    check_angle(theta)?;
    let carrier_tau_d = carrier_root(envelope, ratio, tau_d)?;
    let unit = unit_coefficients(envelope, ratio, tau_d, carrier_tau_d)?;
    // A₁ˣ and A₃ˣ are odd in Ωτ_d, so solve for |θ| and restore the sign.
    let magnitude = theta.abs();
    let x = smallest_positive_root(unit.a1x, unit.a3x, magnitude).ok_or_else(|| {
        Error::SolverFailure(format!(
            "{:.6e}·x + {:.6e}·x³ = {magnitude} has no positive root",
            unit.a1x, unit.a3x
        ))
    })?;
    let rabi_tau_d = theta.signum() * x;
    Ok(MagnusSolution {
        order: MagnusOrder::Third,
        rabi_tau_d,
        carrier_tau_d,
        tau_d,
        coefficients: unit.rescaled(rabi_tau_d),
    })
}

pub fn solve(
    order: MagnusOrder,
    envelope: EnvelopeKind,
    ratio: f64,
    theta: f64,
    tau_d: f64,
) -> Result<MagnusSolution> {
    match order {
        MagnusOrder::Second => solve_second_order(envelope, ratio, theta, tau_d),
        MagnusOrder::Third => solve_third_order(envelope, ratio, theta, tau_d),
    }
}

/// Smallest `x > 0` with `a·x + b·x³ = c`.
pub(crate) fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let poly = |x: f64| a * x + b * x * x * x - c;
    let dpoly = |x: f64| a + 3.0 * b * x * x;
    let mut roots = Vec::new();
    if b == 0.0 || (a != 0.0 && (b * (c / a).powi(3)).abs() < 1e-16 * c.abs()) {
        if a != 0.0 {
            roots.push(c / a);
        }
    } else {
        // depressed cubic x³ + p x + q = 0
        let p = a / b;
        let q = -c / b;
        let disc = 4.0 * p * p * p + 27.0 * q * q;
        if p < 0.0 && disc <= 1e-12 * (4.0 * p.abs().powi(3) + 27.0 * q * q) {
            let r = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            for k in 0..3 {
                roots.push(r * (phi - TAU * k as f64 / 3.0).cos());
            }
        } else {
            let sq = (q * q / 4.0 + p * p * p / 27.0).sqrt();
            roots.push((-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt());
        }
    }
    roots
        .into_iter()
        .map(|mut x| {
            for _ in 0..4 {
                let d = dpoly(x);
                if d == 0.0 {
                    break;
                }
                x -= poly(x) / d;
            }
            x
        })
        .filter(|&x| x > 0.0 && x.is_finite())
        .min_by(|a, b| a.total_cmp(b))
}
