//! Analytic parameter seeds.
//!
//! - Multicycle (rotating wave approximation): resonant carrier `ω = ω₀` and
//!   envelope area `Ωτ_d = θ_g/s₀`.
//! - Subcycle (first order in `τ_d/T₀`): even pulse with the smallest
//!   carrier phase `φ = ωτ_d` that zeroes `s₁ₛ`, and `Ωτ_d = θ_g/(2s)`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{envelope_area, s1_integrals, signed_area, EnvelopeKind, PulseSpec};
use crate::OMEGA0;

/// Scan range and resolution for the carrier phase root search.
pub const SCAN_START: f64 = 0.1;
pub const SCAN_END: f64 = 4.0 * TAU;
pub const SCAN_STEP: f64 = 0.02;
/// Roots where `|s|` falls below this are skipped.
pub const MIN_AREA: f64 = 1e-6;
const BISECT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Rwa,
    Subcycle,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Rwa => "rwa",
            Regime::Subcycle => "subcycle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedDiagnostics {
    /// Envelope area `s₀`.
    pub s0: f64,
    /// Signed pulse area `s` at the seeded carrier.
    pub s: f64,
    /// `s₁ₛ(T/2)` at the seeded carrier (subcycle only, zero otherwise).
    pub s1s_residual: f64,
    /// Sign changes of `s₁ₛ` passed over because `|s|` was too small there.
    pub skipped_roots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub regime: Regime,
    pub envelope: EnvelopeKind,
    pub ratio: f64,
    pub theta: f64,
    /// Effective pulse area `Ωτ_d`.
    pub rabi_tau_d: f64,
    /// `ωτ_d`. For the RWA seed this equals `ω₀τ_d` at [`SeedResult::tau_d`].
    pub carrier_tau_d: f64,
    /// Minimal carrier phase `φ` (subcycle seeds only).
    pub phi: Option<f64>,
    /// Duration the seed was evaluated at, when it depends on one.
    pub tau_d: Option<f64>,
    pub diagnostics: SeedDiagnostics,
}

impl SeedResult {
    /// The seed evaluated at another duration. Subcycle seeds are
    /// scale-free; the RWA carrier stays at `ω₀`.
    pub fn at_duration(&self, tau_d: f64) -> SeedResult {
        match self.regime {
            Regime::Subcycle => *self,
            Regime::Rwa => SeedResult {
                carrier_tau_d: OMEGA0 * tau_d,
                tau_d: Some(tau_d),
                ..*self
            },
        }
    }

    pub fn pulse(&self, tau_d: f64) -> PulseSpec {
        let seed = self.at_duration(tau_d);
        PulseSpec::from_areas(self.envelope, self.ratio, tau_d, seed.rabi_tau_d, seed.carrier_tau_d)
    }

    /// Transition duration `τ₀ = φ/ω₀` in qubit periods.
    pub fn transition_periods(&self) -> Option<f64> {
        self.phi.map(|phi| phi / TAU)
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta == 0.0 || theta.abs() > TAU + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "gate angle {theta} must satisfy 0 < |θ| ≤ 2π"
        )));
    }
    Ok(())
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidArgument(format!("window ratio {ratio} must be positive")));
    }
    Ok(())
}

/// Resonant multicycle seed, `Ωτ_d = θ_g/s₀` and `ω = ω₀`.
pub fn seed_rwa(envelope: EnvelopeKind, ratio: f64, theta: f64, tau_d: f64) -> Result<SeedResult> {
    check_angle(theta)?;
    check_ratio(ratio)?;
    if !(tau_d.is_finite() && tau_d > 0.0) {
        return Err(Error::InvalidArgument(format!("tau_d {tau_d} must be positive")));
    }
    let s0 = envelope_area(envelope, ratio);
    Ok(SeedResult {
        regime: Regime::Rwa,
        envelope,
        ratio,
        theta,
        rabi_tau_d: theta / s0,
        carrier_tau_d: OMEGA0 * tau_d,
        phi: None,
        tau_d: Some(tau_d),
        diagnostics: SeedDiagnostics { s0, s: s0, s1s_residual: 0.0, skipped_roots: 0 },
    })
}

fn unit_pulse(envelope: EnvelopeKind, ratio: f64, carrier_tau_d: f64) -> PulseSpec {
    PulseSpec::from_areas(envelope, ratio, 1.0, 1.0, carrier_tau_d)
}

/// Smallest `x` in the scan range with `g(x) = 0`, skipping brackets where
/// `area(x)` is too small or changes sign. Returns the root and the number
/// of skipped sign changes.
pub(crate) fn smallest_root(
    start: f64,
    end: f64,
    step: f64,
    mut g: impl FnMut(f64) -> Result<f64>,
    mut area: impl FnMut(f64) -> f64,
) -> Result<Option<(f64, usize)>> {
    let mut skipped = 0;
    // last grid point with a usable area: (x, g(x), area(x))
    let mut last: Option<(f64, f64, f64)> = None;
    let mut gap = false;
    let n = ((end - start) / step).ceil() as usize;
    for i in 0..=n {
        let x = (start + step * i as f64).min(end);
        let a = area(x);
        if a.abs() <= MIN_AREA {
            gap = true;
            continue;
        }
        let gx = g(x)?;
        if let Some((xp, gp, ap)) = last {
            if gp == 0.0 || gp.signum() != gx.signum() {
                if gap || ap.signum() != a.signum() {
                    skipped += 1;
                } else if gp == 0.0 {
                    return Ok(Some((xp, skipped)));
                } else {
                    return Ok(Some((bisect(&mut g, xp, x, gp)?, skipped)));
                }
            }
        }
        last = Some((x, gx, a));
        gap = false;
    }
    Ok(None)
}

fn bisect(g: &mut impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut glo: f64) -> Result<f64> {
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(if g(hi)?.abs() < glo.abs() { hi } else { lo })
}

/// First-order subcycle seed for an even pulse.
pub fn seed_subcycle(envelope: EnvelopeKind, ratio: f64, theta: f64) -> Result<SeedResult> {
    check_angle(theta)?;
    check_ratio(ratio)?;
    let magnitude = theta.abs();
    let s1s = |k: f64| Ok(s1_integrals(&unit_pulse(envelope, ratio, k), magnitude)?.1);
    let area = |k: f64| signed_area(&unit_pulse(envelope, ratio, k));
    let (phi, skipped) = smallest_root(SCAN_START, SCAN_END, SCAN_STEP, s1s, area)?
        .ok_or_else(|| {
            Error::SeedNotFound(format!(
                "s1s(T/2) has no root with |s| > {MIN_AREA} for ωτ_d in [{SCAN_START}, {SCAN_END:.4}] ({envelope}, T/τ_d = {ratio}, θ = {theta})"
            ))
        })?;
    let spec = unit_pulse(envelope, ratio, phi);
    let s = signed_area(&spec);
    let residual = s1_integrals(&spec, magnitude)?.1;
    Ok(SeedResult {
        regime: Regime::Subcycle,
        envelope,
        ratio,
        theta,
        rabi_tau_d: theta.signum() * magnitude / (2.0 * s),
        carrier_tau_d: phi,
        phi: Some(phi),
        tau_d: None,
        diagnostics: SeedDiagnostics {
            s0: envelope_area(envelope, ratio),
            s,
            s1s_residual: residual,
            skipped_roots: skipped,
        },
    })
}

/// Transition duration `τ₀ = φ/ω₀`, in qubit periods.
pub fn transition_duration(envelope: EnvelopeKind, ratio: f64, theta: f64) -> Result<f64> {
    Ok(seed_subcycle(envelope, ratio, theta)?.phi.expect("subcycle seeds carry φ") / TAU)
}

/// The `(envelope, T/τ_d, θ_g)` combinations of the standard transition table.
pub fn transition_cases() -> Vec<(EnvelopeKind, f64, f64)> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    vec![
        (EnvelopeKind::Constant, 1.0, PI),
        (EnvelopeKind::Triangular, 2.0, PI),
        (EnvelopeKind::Sech, 5.0, PI),
        (EnvelopeKind::Gaussian, 5.0, PI),
        (EnvelopeKind::Gaussian, 5.0, FRAC_PI_2),
        (EnvelopeKind::Gaussian, 5.0, FRAC_PI_4),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub envelope: EnvelopeKind,
    pub ratio: f64,
    pub theta: f64,
    /// `τ₀/T₀`
    pub tau0: f64,
}

/// Transition durations for every row of [`transition_cases`], computed in parallel.
pub fn transition_table() -> Result<Vec<TransitionRow>> {
    transition_cases()
        .into_par_iter()
        .map(|(envelope, ratio, theta)| {
            Ok(TransitionRow { envelope, ratio, theta, tau0: transition_duration(envelope, ratio, theta)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rwa_constant_envelope_is_flat_rabi_pulse() {
        let seed = seed_rwa(EnvelopeKind::Constant, 1.0, PI, 3.0).unwrap();
        assert!((seed.rabi_tau_d - PI).abs() < 1e-12);
        assert!((seed.carrier_tau_d - 3.0).abs() < 1e-15);
        assert_eq!(seed.regime, Regime::Rwa);
    }

    #[test]
    fn rwa_gaussian_area() {
        let seed = seed_rwa(EnvelopeKind::Gaussian, 5.0, FRAC_PI_2, 1.0).unwrap();
        let s0 = PI.sqrt() / 2.0;
        assert!((seed.rabi_tau_d - FRAC_PI_2 / s0).abs() < 1e-10);
    }

    #[test]
    fn rwa_five_period_strength() {
        let tau_d = 5.0 * TAU;
        let seed = seed_rwa(EnvelopeKind::Gaussian, 5.0, PI, tau_d).unwrap();
        let rabi = seed.rabi_tau_d / tau_d;
        assert!((rabi - 0.113).abs() < 0.0005, "{rabi}");
        assert_eq!(seed.pulse(tau_d).carrier, 1.0);
    }

    #[test]
    fn subcycle_gaussian_pi() {
        let seed = seed_subcycle(EnvelopeKind::Gaussian, 5.0, PI).unwrap();
        let phi = seed.phi.unwrap();
        assert!((phi / TAU - 0.572).abs() < 5e-4, "{}", phi / TAU);
        assert!(seed.diagnostics.s1s_residual.abs() < 1e-8);
        assert!(seed.diagnostics.s > MIN_AREA);
        let spec = seed.pulse(0.1 * TAU);
        assert!((spec.carrier - 5.72).abs() < 0.01 * 5.72, "{}", spec.carrier);
        assert!((spec.rabi - 6.32).abs() < 0.01 * 6.32, "{}", spec.rabi);
    }

    #[test]
    fn s1s_is_positive_below_first_root() {
        let seed = seed_subcycle(EnvelopeKind::Gaussian, 5.0, PI).unwrap();
        let phi = seed.phi.unwrap();
        let mut k = SCAN_START;
        while k < phi - 1e-6 {
            let (_, s1s) = s1_integrals(&unit_pulse(EnvelopeKind::Gaussian, 5.0, k), PI).unwrap();
            assert!(s1s > 0.0, "ωτ_d = {k}: {s1s}");
            k += 0.05;
        }
    }

    #[test]
    fn negative_angle_flips_drive_sign() {
        let pos = seed_subcycle(EnvelopeKind::Sech, 5.0, FRAC_PI_2).unwrap();
        let neg = seed_subcycle(EnvelopeKind::Sech, 5.0, -FRAC_PI_2).unwrap();
        assert_eq!(pos.phi, neg.phi);
        assert!((pos.rabi_tau_d + neg.rabi_tau_d).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_angles() {
        assert!(seed_subcycle(EnvelopeKind::Gaussian, 5.0, 7.0).is_err());
        assert!(seed_subcycle(EnvelopeKind::Gaussian, 5.0, 0.0).is_err());
        assert!(seed_rwa(EnvelopeKind::Gaussian, 5.0, PI, -1.0).is_err());
    }

    #[test]
    fn smallest_root_skips_vanishing_area() {
        // root of g at 1.0 is masked by area ≈ 0 there; next root at 2.0 is accepted
        let g = |x: f64| Ok((x - 1.0) * (x - 2.0));
        let area = |x: f64| if (x - 1.0).abs() < 0.05 { 0.0 } else { 1.0 };
        let (root, skipped) = smallest_root(0.1, 3.0, 0.02, g, area).unwrap().unwrap();
        assert!((root - 2.0).abs() < 1e-10);
        assert!(skipped > 0);
    }
}
